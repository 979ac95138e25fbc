//! CSV, plot script and report files.

use super::plan::ExperimentPlan;
use super::runner::PlanOutput;
use super::stats::PointStats;
use crate::analysis::GuaranteeReport;
use crate::Result;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// CSV columns, in order.
pub const CSV_HEADER: [&str; 12] = [
    "algorithm",
    "axis",
    "axis_value",
    "ser",
    "ser_ci",
    "fer",
    "fer_ci",
    "throughput",
    "mean_iterations",
    "mean_cancelled",
    "trials",
    "flagged_trials",
];

pub fn write_csv(w: impl Write, stats: &[PointStats]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for s in stats {
        wtr.serialize(s)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv(r: impl std::io::Read) -> Result<Vec<PointStats>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// A matplotlib script plotting SER and FER against the sweep axis, one line
/// per algorithm, on log scale.
pub fn plot_script(csv_name: &str, title: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Plots {csv_name}: SER and FER per algorithm against the sweep axis.
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "{csv_name}")
series = defaultdict(list)
axis = "axis"
with open(path, newline="") as fh:
    for row in csv.DictReader(fh):
        axis = row["axis"]
        series[row["algorithm"]].append(
            (float(row["axis_value"]), float(row["ser"]), float(row["fer"]))
        )

fig, (ax_ser, ax_fer) = plt.subplots(1, 2, figsize=(10, 4))
for name, pts in series.items():
    pts.sort()
    xs = [p[0] for p in pts]
    ax_ser.semilogy(xs, [max(p[1], 1e-6) for p in pts], marker="o", label=name)
    ax_fer.semilogy(xs, [max(p[2], 1e-6) for p in pts], marker="o", label=name)
for ax, label in ((ax_ser, "SER"), (ax_fer, "FER")):
    ax.set_xlabel(axis)
    ax.set_ylabel(label)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
fig.suptitle("{title}")
fig.tight_layout()
out = os.path.splitext(path)[0] + ".png"
fig.savefig(out, dpi=120)
print(out)
"#
    )
}

pub fn reports_text(reports: &[(f64, GuaranteeReport)], axis: &str) -> String {
    let mut out = String::new();
    for (v, r) in reports {
        out.push_str(&format!("# {axis} = {v}\n"));
        out.push_str(&r.to_kv_string());
        out.push('\n');
    }
    out
}

/// Writes `<name>.csv`, `<name>_plot.py`, `<name>.plan` and, when reports
/// exist, `<name>_report.txt` under `dir`. Returns the paths written.
pub fn emit_outputs(out: &PlanOutput, plan: &ExperimentPlan, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_name = format!("{}.csv", plan.name);
    let csv_path = dir.join(&csv_name);
    write_csv(fs::File::create(&csv_path)?, &out.stats)?;
    written.push(csv_path);
    let plot = dir.join(format!("{}_plot.py", plan.name));
    fs::write(&plot, plot_script(&csv_name, &plan.name))?;
    written.push(plot);
    let plan_path = dir.join(format!("{}.plan", plan.name));
    fs::write(&plan_path, plan.to_kv_string())?;
    written.push(plan_path);
    if !out.reports.is_empty() {
        let p = dir.join(format!("{}_report.txt", plan.name));
        fs::write(&p, reports_text(&out.reports, plan.axis.name()))?;
        written.push(p);
    }
    Ok(written)
}

//! Monte-Carlo experiments, published-table reproduction and output files.

mod output;
mod plan;
mod runner;
mod selftest;
mod stats;
mod table1;

pub use output::{emit_outputs, plot_script, read_csv, reports_text, write_csv, CSV_HEADER};
pub use plan::{Axis, ExperimentPlan, SeedPolicy};
pub use runner::{
    detect, point_report, realize, run_plan, run_point, run_trial, run_trials, trial_stream, PlanOutput,
    PrecoderCache, Realization,
};
pub use selftest::{run_selftest, Check};
pub use stats::{aggregate, count_errors, mean_and_ci, ErrorCount, PointStats, TrialOutcome};
pub use table1::{
    max_supported_users, parse_rows, table1_report, Table1, Table1Row, PUBLISHED_COUNTS, PUBLISHED_ESN0_DB,
    PUBLISHED_ROWS,
};

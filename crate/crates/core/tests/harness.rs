mod common;

use common::{dictionary, frame};
use sparsemac::analysis::throughput;
use sparsemac::harness::{
    count_errors, read_csv, run_plan, run_point, run_trials, write_csv, ErrorCount, ExperimentPlan,
    PrecoderCache, SeedPolicy, CSV_HEADER,
};
use sparsemac::model::{Correction, Normalization, SystemConfig};
use sparsemac::recovery::{bomp, Algorithm, RecoveryConfig};
use sparsemac::Execution;

/// One active user with a full 200-symbol block.
fn single_user() -> SystemConfig {
    SystemConfig {
        m: 2,
        n: 2,
        n_active: 1,
        d: 200,
        t: 400,
        k: 1,
        t_c: Correction::UpTo(8),
        ..SystemConfig::desk()
    }
}

fn small_plan(trials: usize) -> ExperimentPlan {
    ExperimentPlan {
        name: "small".into(),
        base: SystemConfig {
            m: 4,
            n: 12,
            n_active: 3,
            d: 4,
            t: 24,
            k: 4,
            t_c: Correction::UpTo(1),
            ..SystemConfig::desk()
        },
        values: vec![2.0, 6.0, 10.0],
        algorithms: vec![Algorithm::Bomp, Algorithm::Icbomp],
        trials,
        ..ExperimentPlan::desk()
    }
}

#[test]
fn error_counting_rules() {
    let cfg = single_user();
    let dict = dictionary(&cfg, 3, Normalization::Statistical);
    let f = frame(&cfg, &dict, 3, true);
    let j = f.support[0];
    let mut res = bomp(&dict, &f.y, &RecoveryConfig::new(cfg.k)).unwrap();

    res.estimates.insert(j, f.block(j).to_vec());
    assert_eq!(count_errors(&res, &f, &cfg), ErrorCount::default());

    let flipped = |count: usize| {
        let mut est = f.block(j).to_vec();
        for v in est.iter_mut().take(count) {
            v.re = -v.re;
        }
        est
    };
    res.estimates.insert(j, flipped(8));
    let e = count_errors(&res, &f, &cfg);
    assert_eq!((e.symbol_errors, e.frame_errors, e.bit_errors), (8, 0, 8));
    res.estimates.insert(j, flipped(9));
    let e = count_errors(&res, &f, &cfg);
    assert_eq!((e.symbol_errors, e.frame_errors), (9, 1));

    // a missed user loses its whole block; a wrong extra block costs nothing
    res.estimates.clear();
    res.estimates.insert(1 - j, f.block(j).to_vec());
    let e = count_errors(&res, &f, &cfg);
    assert_eq!((e.symbol_errors, e.frame_errors), (200, 1));
}

#[test]
fn oracle_at_high_snr_makes_no_errors() {
    let mut plan = small_plan(1);
    plan.values = vec![60.0];
    plan.algorithms = vec![Algorithm::IcMmse];
    let stats = run_point(&plan, &PrecoderCache::default(), 60.0, Execution::Sequential).unwrap();
    assert_eq!(stats.len(), 1);
    assert_eq!((stats[0].ser, stats[0].fer), (0.0, 0.0));
}

#[test]
fn more_trials_extend_the_same_sequence() {
    for policy in [SeedPolicy::Independent, SeedPolicy::Shared] {
        let mut plan = small_plan(8);
        plan.seed_policy = policy;
        let cache = PrecoderCache::default();
        let short = run_trials(&plan, &cache, 6.0, Algorithm::Icbomp, Execution::Parallel).unwrap();
        plan.trials = 16;
        let long = run_trials(&plan, &cache, 6.0, Algorithm::Icbomp, Execution::Sequential).unwrap();
        assert_eq!(short[..], long[..8]);
    }
}

#[test]
fn shared_seeds_give_every_algorithm_the_same_frame() {
    let mut plan = small_plan(6);
    plan.seed_policy = SeedPolicy::Shared;
    plan.algorithms = vec![Algorithm::IcMmse];
    plan.base.t_c = Correction::Unlimited;
    let cache = PrecoderCache::default();
    // with unlimited correction the oracle cancels every active user
    let a = run_trials(&plan, &cache, 40.0, Algorithm::IcMmse, Execution::Sequential).unwrap();
    let b = run_trials(&plan, &cache, 40.0, Algorithm::Icbomp, Execution::Sequential).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.n_active, y.n_active);
        assert_eq!(x.cancelled, x.n_active);
    }
}

fn csv_bytes(plan: &ExperimentPlan, exec: Execution) -> Vec<u8> {
    let out = run_plan(plan, exec).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &out.stats).unwrap();
    buf
}

#[test]
fn csv_is_reproducible_and_round_trips() {
    let plan = small_plan(12);
    let first = csv_bytes(&plan, Execution::Parallel);
    assert_eq!(first, csv_bytes(&plan, Execution::Parallel));
    assert_eq!(first, csv_bytes(&plan, Execution::Sequential));

    let text = String::from_utf8(first.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    // two algorithms at three points
    assert_eq!(text.lines().count(), 1 + 6);

    let back = read_csv(&first[..]).unwrap();
    let out = run_plan(&plan, Execution::Sequential).unwrap();
    assert_eq!(back.len(), out.stats.len());
    for (a, b) in back.iter().zip(&out.stats) {
        assert_eq!((&a.algorithm, &a.axis, a.trials, a.flagged_trials), (&b.algorithm, &b.axis, b.trials, b.flagged_trials));
        for (x, y) in [(a.ser, b.ser), (a.fer, b.fer), (a.throughput, b.throughput), (a.ser_ci, b.ser_ci)] {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }

    let mut empty = Vec::new();
    write_csv(&mut empty, &[]).unwrap();
    assert_eq!(String::from_utf8(empty).unwrap().trim_end(), CSV_HEADER.join(","));
}

#[test]
fn throughput_column_follows_frame_errors() {
    let plan = small_plan(10);
    for s in run_plan(&plan, Execution::Parallel).unwrap().stats {
        let cfg = plan.config_at(s.axis_value).unwrap();
        assert_eq!(s.throughput, throughput(s.fer, &cfg));
    }
}

#[test]
fn plan_text_errors_are_reported() {
    let good = small_plan(5).to_kv_string();
    assert_eq!(ExperimentPlan::parse(&good).unwrap(), small_plan(5));
    let without_trials: String = good.lines().filter(|l| !l.starts_with("trials")).map(|l| format!("{l}\n")).collect();
    assert!(ExperimentPlan::parse(&without_trials).is_err());
    assert!(ExperimentPlan::parse(&format!("{good}bogus_key = 3\n")).is_err());
    assert!(ExperimentPlan::parse(&good.replace("values = 2, 6, 10", "values = 6, 2")).is_err());
    assert!(ExperimentPlan::parse(&good.replace("N_a = 3", "N_a = 30")).is_err());
}

#[test]
fn shipped_plans_parse() {
    let desk = ExperimentPlan::parse(include_str!("../../../plans/desk.plan")).unwrap();
    let builtin = ExperimentPlan::desk();
    // the file states Es/N0 only through the sweep
    assert_eq!(ExperimentPlan { base: SystemConfig { rho0: builtin.base.rho0, ..desk.base.clone() }, ..desk }, builtin);
    for text in [
        include_str!("../../../plans/load12.plan"),
        include_str!("../../../plans/throughput.plan"),
        include_str!("../../../plans/icbomp_m8.plan"),
    ] {
        ExperimentPlan::parse(text).unwrap();
    }
}

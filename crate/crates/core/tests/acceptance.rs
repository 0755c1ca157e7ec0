//! Acceptance suite: one test per criterion, each printing the measured
//! values it judged. Sweeps use the desk profile (600 s sessions, 100
//! repetitions, rates 0..=200 by 5, dt = 0.005 s) under one fixed master
//! seed; expensive sweeps are computed once and shared.
//!
//! criterion_03's R-squared bar (0.999) sits below the desk profile's
//! statistical noise floor (about 0.9966 at 600 s x 100 reps) and stays red;
//! the ignored paper-scale variant demonstrates the same pipeline clears the
//! bar when per-point noise is ~30x smaller. Everything else passes.

use std::sync::OnceLock;

use schedsim_core::fit::dataset_hash;
use schedsim_core::io::{write_sweep_csv, FileMeta};
use schedsim_core::*;

const SEED: u64 = 20260810;

fn desk_rates() -> Vec<f64> {
    (0..=40).map(|i| f64::from(i) * 5.0).collect()
}

fn desk_config() -> SessionConfig {
    SessionConfig {
        duration_s: 600.0,
        dt_s: 0.005,
        repetitions: 100,
        rates_per_min: desk_rates(),
        master_seed: SEED,
    }
}

fn solved_timed(kind: ScheduleKind, size_s: f64) -> ScheduleSpec {
    let solved = solve_cycle_params(&SolverRequest::new(size_s, 0.005, 1.0).unwrap()).unwrap();
    ScheduleSpec::timed(kind, solved.cycle_s, solved.arm_prob).unwrap()
}

fn sweep(schedule: &ScheduleSpec) -> Vec<SweepPoint> {
    run_sweep(&desk_config(), schedule, &ResponderTemplate::plain()).unwrap()
}

fn ri5() -> &'static [SweepPoint] {
    static CELL: OnceLock<Vec<SweepPoint>> = OnceLock::new();
    CELL.get_or_init(|| sweep(&solved_timed(ScheduleKind::RandomInterval, 5.0)))
}

fn ri60() -> &'static [SweepPoint] {
    static CELL: OnceLock<Vec<SweepPoint>> = OnceLock::new();
    CELL.get_or_init(|| sweep(&solved_timed(ScheduleKind::RandomInterval, 60.0)))
}

fn rdrl(v: f64) -> &'static [SweepPoint] {
    static CELL2: OnceLock<Vec<SweepPoint>> = OnceLock::new();
    static CELL4: OnceLock<Vec<SweepPoint>> = OnceLock::new();
    static CELL8: OnceLock<Vec<SweepPoint>> = OnceLock::new();
    static CELL16: OnceLock<Vec<SweepPoint>> = OnceLock::new();
    let cell = match v as u32 {
        2 => &CELL2,
        4 => &CELL4,
        8 => &CELL8,
        16 => &CELL16,
        _ => panic!("unexpected size {v}"),
    };
    cell.get_or_init(|| sweep(&ScheduleSpec::rdrl_with_size(v).unwrap()))
}

fn fit_points(points: &[SweepPoint], family: ModelFamily, size_s: f64) -> FitResult {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.rate_nominal_per_min > 0.0)
        .map(|p| (p.rate_nominal_per_min, p.reinf_mean_per_min))
        .collect();
    let opts = FitOptions {
        nominal_size_s: Some(size_s),
        ..FitOptions::default()
    };
    fit(family, &data, &opts).unwrap()
}

#[test]
fn criterion_01_solver_validity() {
    for size in [5.0, 7.0, 10.0, 15.0, 30.0, 60.0] {
        let result = solve_cycle_params(&SolverRequest::new(size, 0.005, 1.0).unwrap()).unwrap();
        println!(
            "criterion 1: x={size} -> T={} p={} mean_err={:.2e} sd_ratio={:.5}",
            result.cycle_s, result.arm_prob, result.mean_err, result.sd_ratio
        );
        assert!(result.mean_err <= 0.01, "x={size}: {result:?}");
        assert!(
            (0.99..=1.0).contains(&result.sd_ratio),
            "x={size}: {result:?}"
        );
    }
}

#[test]
fn criterion_02_geometric_inter_arming_times() {
    // RI armings renew when every arming is collected immediately, so a
    // responder firing on each step exposes the raw inter-arming process.
    let solved = solve_cycle_params(&SolverRequest::new(5.0, 0.005, 1.0).unwrap()).unwrap();
    let spec =
        ScheduleSpec::timed(ScheduleKind::RandomInterval, solved.cycle_s, solved.arm_prob)
            .unwrap();
    // One step per cycle keeps this cheap without changing the arming law.
    let compiled = CompiledSchedule::new(&spec, solved.cycle_s).unwrap();
    let mut state = ScheduleState::new();
    let mut rng = schedsim_core::rng::cell_rng(SEED, 5.0, 0);
    let mut iats = Vec::with_capacity(100_000);
    let mut steps_since = 0u64;
    while iats.len() < 100_000 {
        steps_since += 1;
        let out = step_schedule(&mut state, &compiled, true, &mut rng);
        if out.armed_this_step {
            iats.push(steps_since as f64 * solved.cycle_s);
            steps_since = 0;
        }
    }
    let mean = session::mean(&iats);
    let sd = session::sample_sd(&iats);
    println!(
        "criterion 2: {} armings, mean={mean:.4} s (target 5 within 2%), sd/mean={:.4} (within 3% of 1)",
        iats.len(),
        sd / mean
    );
    assert!((mean - 5.0).abs() / 5.0 <= 0.02);
    assert!((sd / mean - 1.0).abs() <= 0.03);
}

#[test]
fn criterion_03_ri_fit_recovery() {
    let result = fit_points(ri5(), ModelFamily::Baum, 5.0);
    let v = result.model.free_params()[0];
    println!(
        "criterion 3: Baum on RI 5 s desk sweep -> V={v:.4} (within 5% of 4.91), R^2={:.6} (>= 0.999)",
        result.r_squared
    );
    assert!(
        (v - 4.91).abs() / 4.91 <= 0.05,
        "V {v} outside 5% of 4.91"
    );
    // Desk-scale noise floors R^2 near 0.9966 (see the suite docs); the bar
    // below is kept as stated and is expected to fail.
    assert!(
        result.r_squared >= 0.999,
        "R^2 {:.6} below 0.999: the desk profile's per-point standard error \
         (~0.05-0.10 reinf/min over 100 reps of 600 s) bounds E[R^2] near 0.9966; \
         see criterion_03_ri_fit_recovery_paper_scale for the paper-scale check",
        result.r_squared
    );
}

/// Paper-scale variant (3600 s sessions, 500 repetitions, rates 0..=200):
/// ~7e10 steps, minutes of runtime, so ignored by default. Run with
/// `cargo test -p schedsim-core --test acceptance -- --ignored criterion_03`.
#[test]
#[ignore]
fn criterion_03_ri_fit_recovery_paper_scale() {
    let config = SessionConfig {
        duration_s: 3600.0,
        dt_s: 0.005,
        repetitions: 500,
        rates_per_min: (0..=200).map(f64::from).collect(),
        master_seed: SEED,
    };
    let schedule = solved_timed(ScheduleKind::RandomInterval, 5.0);
    let points = run_sweep(&config, &schedule, &ResponderTemplate::plain()).unwrap();
    let result = fit_points(&points, ModelFamily::Baum, 5.0);
    let v = result.model.free_params()[0];
    println!(
        "criterion 3 (paper scale): V={v:.4}, R^2={:.6}",
        result.r_squared
    );
    assert!((v - 4.91).abs() / 4.91 <= 0.05);
    assert!(result.r_squared >= 0.999);
}

#[test]
fn criterion_04_model_ranking() {
    for (name, points, size) in [("RI 5 s", ri5(), 5.0), ("RI 60 s", ri60(), 60.0)] {
        let fits: Vec<FitResult> = [
            ModelFamily::Baum,
            ModelFamily::Killeen,
            ModelFamily::Prelec,
            ModelFamily::Rachlin,
        ]
        .into_iter()
        .map(|family| fit_points(points, family, size))
        .collect();
        let ranking = compare(&fits).unwrap();
        let rachlin_r2 = fits
            .iter()
            .find(|f| f.model.family() == ModelFamily::Rachlin)
            .unwrap()
            .r_squared;
        let min_r2 = fits.iter().map(|f| f.r_squared).fold(f64::INFINITY, f64::min);
        println!(
            "criterion 4: {name} BIC order {:?}, Rachlin R^2={rachlin_r2:.4} (lowest={})",
            ranking.iter().map(|r| r.family.to_string()).collect::<Vec<_>>(),
            rachlin_r2 == min_r2
        );
        assert_eq!(ranking[0].family, ModelFamily::Baum, "{name}");
        assert_eq!(rachlin_r2, min_r2, "{name}");
    }
}

#[test]
fn criterion_05_ri_asymptote() {
    let last = ri5().last().unwrap();
    assert_eq!(last.rate_nominal_per_min, 200.0);
    println!(
        "criterion 5: RI 5 s at B=200 -> {:.4} reinf/min (window [10.8, 12.0])",
        last.reinf_mean_per_min
    );
    assert!(
        (10.8..=12.0).contains(&last.reinf_mean_per_min),
        "mean {}",
        last.reinf_mean_per_min
    );
}

#[test]
fn criterion_06_rdrl_closed_form_maximum() {
    let predictions = rdrl_predictions(8.0);
    let best = rdrl(8.0)
        .iter()
        .max_by(|a, b| a.reinf_mean_per_min.total_cmp(&b.reinf_mean_per_min))
        .unwrap();
    println!(
        "criterion 6: RDRL 8 s max {:.4} reinf/min at B={} (targets {:.4} +/-10%, B {:.2} +/-20%)",
        best.reinf_mean_per_min, best.rate_nominal_per_min, predictions.r_at_peak,
        predictions.b_at_peak
    );
    assert!(
        (best.reinf_mean_per_min - predictions.r_at_peak).abs() / predictions.r_at_peak <= 0.10,
        "max {}",
        best.reinf_mean_per_min
    );
    assert!(
        (best.rate_nominal_per_min - predictions.b_at_peak).abs() / predictions.b_at_peak <= 0.20,
        "argmax {}",
        best.rate_nominal_per_min
    );
}

#[test]
fn criterion_07_rdrl_fit() {
    for v in [2.0, 4.0, 8.0, 16.0] {
        let result = fit_points(rdrl(v), ModelFamily::RdrlTwoExp, v);
        let predictions = rdrl_predictions(v);
        let params = result.model.free_params();
        let (b, c) = (params[0], params[1]);
        println!(
            "criterion 7: RDRL {v} s -> R^2={:.4} (>=0.98), b={b:.2} vs {:.2} ({:+.1}%), c={c:.2} vs {:.2} ({:+.1}%)",
            result.r_squared,
            predictions.b,
            (b - predictions.b) / predictions.b * 100.0,
            predictions.c,
            (c - predictions.c) / predictions.c * 100.0,
        );
        assert!(result.r_squared >= 0.98, "V={v}: R^2 {}", result.r_squared);
        assert!(
            (b - predictions.b).abs() / predictions.b <= 0.15,
            "V={v}: b {b} vs {}",
            predictions.b
        );
        assert!(
            (c - predictions.c).abs() / predictions.c <= 0.15,
            "V={v}: c {c} vs {}",
            predictions.c
        );
    }
}

#[test]
fn criterion_08_break_and_run_equivalence() {
    let base = SessionConfig {
        rates_per_min: vec![],
        ..desk_config()
    };
    let settings = BreakRunSettings {
        local_rate_per_min: 120.0,
        combos: vec![(0.01, 0.01), (0.02, 0.01)],
    };
    for (name, schedule) in [
        ("RI 15 s", solved_timed(ScheduleKind::RandomInterval, 15.0)),
        ("RDRL 8 s", ScheduleSpec::rdrl_with_size(8.0).unwrap()),
    ] {
        let points = run_break_run(&base, &schedule, &settings).unwrap();
        for p in &points {
            println!(
                "criterion 8: {name} (P_run={}, P_break={}) burst mean {:.4} vs plain HDI [{:.4}, {:.4}] at {}/min",
                p.run_start_prob, p.break_start_prob, p.burst_mean, p.plain_hdi_lo,
                p.plain_hdi_hi, p.effective_rate_per_min
            );
            assert!(
                p.within_hdi,
                "{name}: burst mean {} outside [{}, {}]",
                p.burst_mean, p.plain_hdi_lo, p.plain_hdi_hi
            );
        }
    }
}

#[test]
fn criterion_09_rt_and_rr_baselines() {
    // RT 30 s: flat at 2.0/min within 3 standard errors everywhere.
    let rt_points = sweep(&solved_timed(ScheduleKind::RandomTime, 30.0));
    let mut worst = 0.0f64;
    for p in &rt_points {
        let se = session::sample_sd(&p.samples) / (p.samples.len() as f64).sqrt();
        let dev = (p.reinf_mean_per_min - 2.0).abs();
        worst = worst.max(dev / se);
        assert!(
            dev <= 3.0 * se,
            "RT at B={}: mean {} vs 2.0 (se {se})",
            p.rate_nominal_per_min,
            p.reinf_mean_per_min
        );
    }
    println!("criterion 9: RT 30 s flat at 2.0/min, worst deviation {worst:.2} SE");

    // RR 10: straight line B/10 within 3 standard errors across the grid.
    let rr_points = sweep(&ScheduleSpec::random_ratio(10.0).unwrap());
    let mut worst = 0.0f64;
    for p in &rr_points {
        let expected = p.rate_nominal_per_min / 10.0;
        let se = session::sample_sd(&p.samples) / (p.samples.len() as f64).sqrt();
        let dev = (p.reinf_mean_per_min - expected).abs();
        if se > 0.0 {
            worst = worst.max(dev / se);
        }
        assert!(
            dev <= 3.0 * se || (se == 0.0 && dev == 0.0),
            "RR at B={}: mean {} vs {expected} (se {se})",
            p.rate_nominal_per_min,
            p.reinf_mean_per_min
        );
    }
    println!("criterion 9: RR 10 slope 1/10, worst deviation {worst:.2} SE");
}

#[test]
fn criterion_10_property_suite_without_simulation() {
    // Interval properties: narrowest window, leftmost ties, singleton.
    assert_eq!(hdi(&[7.0], 0.95).unwrap(), (7.0, 7.0));
    let uniform: Vec<f64> = (0..100).map(f64::from).collect();
    assert_eq!(hdi(&uniform, 0.95).unwrap(), (0.0, 94.0));
    let mut pile = vec![0.0; 5];
    pile.extend(vec![1.0; 90]);
    pile.extend(vec![2.0; 5]);
    assert_eq!(hdi(&pile, 0.95).unwrap(), (0.0, 1.0));
    let irregular = [3.0, -1.0, 0.5, 0.4, 0.45, 10.0, 0.6, 0.2, 0.3, 0.35];
    let (lo, hi) = hdi(&irregular, 0.7).unwrap();
    let mut sorted = irregular.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = 7; // ceil(0.7 * 10)
    assert!(sorted.iter().filter(|&&x| x >= lo && x <= hi).count() >= m);
    for start in 0..=(sorted.len() - m) {
        assert!(sorted[start + m - 1] - sorted[start] >= hi - lo);
    }

    // Information-criterion arithmetic.
    assert!((aic(10.0, 100, 3) - (100.0 * 0.1f64.ln() + 6.0)).abs() < 1e-12);
    assert!((bic(10.0, 100, 3) - (100.0 * 0.1f64.ln() + 3.0 * 100.0f64.ln())).abs() < 1e-12);

    // Closed-form peak identities and evaluation limits.
    for v in [0.5, 2.0, 4.0, 8.0, 16.0, 60.0] {
        let p = rdrl_predictions(v);
        let reduced = RffModel::RdrlReduced { size_s: v };
        assert!((reduced.eval(p.b_at_peak) - p.r_at_peak).abs() <= 1e-9 * p.r_at_peak);
        assert_eq!(p.b_at_inflection, 2.0 * p.b_at_peak);
        let asymptote = 60.0 / v;
        for model in [
            RffModel::Baum { size_s: v },
            RffModel::Killeen { size_s: v, c: 10.0 },
            RffModel::Prelec { size_s: v },
        ] {
            assert_eq!(model.eval(0.0), 0.0);
            assert!((model.eval(1e6) - asymptote).abs() <= 0.02 * asymptote);
        }
        let rachlin = RffModel::Rachlin {
            size_s: v,
            m: 0.3,
            b_max: 200.0,
        };
        assert_eq!(rachlin.eval(0.0), 0.0);
        assert!((rachlin.eval(200.0) - asymptote).abs() <= 1e-12 * asymptote);
        assert_eq!(reduced.eval(0.0), 0.0);
        assert_eq!(
            RffModel::RdrlTwoExp {
                size_s: v,
                b: 50.0,
                c: 18.0
            }
            .eval(0.0),
            0.0
        );
    }

    // Descent monotonicity on synthetic (noise-perturbed, deterministic) data.
    let truth = RffModel::Killeen {
        size_s: 5.0,
        c: 18.474,
    };
    let data: Vec<(f64, f64)> = (1..=40)
        .map(|i| {
            let b = f64::from(i) * 5.0;
            (b, truth.eval(b) * (1.0 + 0.01 * (b * 0.37).sin()))
        })
        .collect();
    let result = fit(ModelFamily::Killeen, &data, &FitOptions::default()).unwrap();
    assert!(result.converged);
    for w in result.rss_trace.windows(2) {
        assert!(w[1] <= w[0], "trace rose: {:?}", result.rss_trace);
    }
    println!(
        "criterion 10: interval, information-criterion, closed-form, and descent properties hold"
    );
}

#[test]
fn criterion_11_determinism() {
    let config = SessionConfig {
        duration_s: 60.0,
        dt_s: 0.005,
        repetitions: 10,
        rates_per_min: vec![0.0, 60.0, 120.0],
        master_seed: SEED,
    };
    let schedule = solved_timed(ScheduleKind::RandomInterval, 5.0);
    let template = ResponderTemplate::plain();

    let first = run_sweep(&config, &schedule, &template).unwrap();
    let second = run_sweep(&config, &schedule, &template).unwrap();
    assert_eq!(first, second);

    // Byte-identical CSV emission.
    let dir = tempfile::tempdir().unwrap();
    let meta = FileMeta {
        config_hash: dataset_hash(&[(config.master_seed as f64, 0.0)]),
        seed: Some(config.master_seed),
    };
    let path_a = dir.path().join("a.csv");
    let path_b = dir.path().join("b.csv");
    write_sweep_csv(&path_a, &first, &meta).unwrap();
    write_sweep_csv(&path_b, &second, &meta).unwrap();
    let bytes_a = std::fs::read(&path_a).unwrap();
    let bytes_b = std::fs::read(&path_b).unwrap();
    assert_eq!(bytes_a, bytes_b);

    // Permuting cell execution order changes nothing: rebuild every sample
    // sequentially in reversed order and compare.
    for (ri, &rate) in [0.0, 60.0, 120.0].iter().enumerate().rev() {
        for rep in (0..10u32).rev() {
            let record = run_cell(&config, &schedule, &template, rate, rep).unwrap();
            assert_eq!(
                record.reinforcement_rate_per_min,
                first[ri].samples[rep as usize]
            );
        }
    }
    println!(
        "criterion 11: identical bytes across reruns ({} bytes), order-independent cells",
        bytes_a.len()
    );
}

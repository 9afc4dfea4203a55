//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with the measured value (run with `--nocapture` to see
//! the lines for passing checks).
//!
//! Criteria 1 and 2 encode the intended energy behavior of the optimized
//! plan. Under the conservative absolute-work metric they are bounded by
//! the potential-energy gain of the lift and are currently red; see the
//! README's acceptance section. The pinned regression values in
//! `criterion_1_pinned_regression` guard the dynamics pipeline itself.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use biotraj_core::dynamics::ArmModel;
use biotraj_core::phase::{check_peak_placement, segment_by_elbow_angle, PhaseSpec};
use biotraj_core::planner::{standard_plan, PlanningProblem};
use biotraj_core::pso::{optimize, Bounds, PsoConfig};
use biotraj_core::signal::{emg_envelope, lowpass_zero_phase, FilterSpec, TimeSeries};
use biotraj_core::trajectory::{solve_quintic, BoundaryCondition};
use biotraj_core::JointState;

/// Frozen first-verified-execution values for the seed-42 benchmark run.
const PINNED_WORK_STANDARD_J: f64 = 51.60562184509451;
const PINNED_WORK_OPTIMIZED_J: f64 = 51.556832564805354;
const PINNED_WORK_REDUCTION_PCT: f64 = 0.09454256831863814;

struct BenchmarkRun {
    summary: serde_json::Value,
    seconds: f64,
}

fn benchmark_run() -> &'static BenchmarkRun {
    static RUN: OnceLock<BenchmarkRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/benchmark.json");
        let out = std::env::temp_dir().join(format!("biotraj-acceptance-{}", std::process::id()));
        let started = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_biotraj"))
            .args(["plan", "--config"])
            .arg(&config)
            .args(["--seed", "42", "--out"])
            .arg(&out)
            .status()
            .expect("run biotraj plan");
        let seconds = started.elapsed().as_secs_f64();
        assert!(status.success(), "plan exited with {status}");
        let summary = std::fs::read_to_string(out.join("summary.json")).expect("summary.json");
        BenchmarkRun {
            summary: serde_json::from_str(&summary).expect("valid summary JSON"),
            seconds,
        }
    })
}

fn field(name: &str) -> f64 {
    benchmark_run().summary[name]
        .as_f64()
        .unwrap_or_else(|| panic!("summary field {name}"))
}

fn report(criterion: &str, detail: &str, pass: bool) {
    println!(
        "acceptance {criterion}: {detail} -> {}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_1_energy_reduction_floor() {
    let reduction = field("work_reduction_pct");
    let runtime = benchmark_run().seconds;
    let pass = reduction >= 8.0 && runtime < 60.0;
    report(
        "1 (work reduction >= 8%, runtime < 60 s)",
        &format!("reduction {reduction:.4}%, runtime {runtime:.1} s"),
        pass,
    );
    assert!(
        runtime < 60.0,
        "benchmark plan took {runtime:.1} s (>= 60 s)"
    );
    assert!(
        reduction >= 8.0,
        "work reduction {reduction:.4}% below the 8% floor"
    );
}

#[test]
fn criterion_1_pinned_regression() {
    let standard = field("work_standard_j");
    let optimized = field("work_optimized_j");
    let reduction = field("work_reduction_pct");
    let ok = |got: f64, want: f64| (got - want).abs() <= 1e-9 * want.abs();
    let pass = ok(standard, PINNED_WORK_STANDARD_J)
        && ok(optimized, PINNED_WORK_OPTIMIZED_J)
        && (reduction - PINNED_WORK_REDUCTION_PCT).abs() <= 1e-6;
    report(
        "1 (pinned regression values)",
        &format!("E_std {standard:.12} J, E_opt {optimized:.12} J"),
        pass,
    );
    assert!(
        ok(standard, PINNED_WORK_STANDARD_J),
        "standard work {standard} drifted from pinned {PINNED_WORK_STANDARD_J}"
    );
    assert!(
        ok(optimized, PINNED_WORK_OPTIMIZED_J),
        "optimized work {optimized} drifted from pinned {PINNED_WORK_OPTIMIZED_J}"
    );
    assert!(
        (reduction - PINNED_WORK_REDUCTION_PCT).abs() <= 1e-6,
        "reduction {reduction} drifted from pinned {PINNED_WORK_REDUCTION_PCT}"
    );
}

#[test]
fn criterion_2_peak_power_strictly_reduced() {
    let standard = field("peak_power_standard_w");
    let optimized = field("peak_power_optimized_w");
    let reported_pct = field("peak_power_reduction_pct");
    let pass = optimized < standard;
    report(
        "2 (optimized peak power < standard)",
        &format!(
            "standard {standard:.3} W, optimized {optimized:.3} W, reported {reported_pct:.3}%"
        ),
        pass,
    );
    assert!(
        optimized < standard,
        "optimized peak power {optimized:.3} W not below standard {standard:.3} W"
    );
}

#[test]
fn criterion_3_peak_placement() {
    let angle = field("peak_angle_achieved_deg");
    let target = field("target_peak_angle_deg");
    let pass = (angle - target).abs() <= 5.0 && (40.0..=90.0).contains(&angle);
    report(
        "3 (velocity peak near 62 deg, inside weakest region)",
        &format!("achieved {angle:.2} deg"),
        pass,
    );
    assert!((angle - target).abs() <= 5.0, "peak at {angle:.2} deg");
    assert!((40.0..=90.0).contains(&angle), "peak at {angle:.2} deg");
}

#[test]
fn criterion_4_dynamics_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Mass-matrix symmetry and positive definiteness, 1000 configurations.
    for _ in 0..1000 {
        let model = ArmModel::new(
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..6.0),
            rng.random_range(0.1..6.0),
            rng.random_range(0.0..10.0),
        )
        .unwrap();
        let m = model
            .dynamics_terms(
                rng.random_range(-6.0..6.0),
                rng.random_range(-6.0..6.0),
                0.0,
                0.0,
            )
            .m;
        assert_eq!(m[(0, 1)], m[(1, 0)], "mass matrix asymmetric");
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!(m[(0, 0)] > 0.0 && det > 0.0, "mass matrix not PD");
    }

    // Inverse <-> forward round trip below 1e-9.
    let model = ArmModel::new(0.495, 0.45, 3.0, 2.5, 4.0).unwrap();
    let mut max_rt: f64 = 0.0;
    for _ in 0..300 {
        let state = JointState {
            theta1: rng.random_range(-3.0..3.0),
            theta2: rng.random_range(-3.0..3.0),
            omega1: rng.random_range(-4.0..4.0),
            omega2: rng.random_range(-4.0..4.0),
            alpha1: rng.random_range(-10.0..10.0),
            alpha2: rng.random_range(-10.0..10.0),
        };
        let (tau1, tau2) = model.inverse_dynamics(&state);
        let (a1, a2) = model
            .forward_dynamics(
                state.theta1,
                state.theta2,
                state.omega1,
                state.omega2,
                tau1,
                tau2,
            )
            .unwrap();
        max_rt = max_rt
            .max((a1 - state.alpha1).abs())
            .max((a2 - state.alpha2).abs());
    }

    // Torque-free energy conservation over 1 s of RK4 at dt = 1e-4.
    let dt = 1e-4;
    let mut y = [1.0, 0.5, 0.0, 0.0];
    let energy = |y: &[f64; 4]| {
        model.kinetic_energy(&JointState {
            theta1: y[0],
            theta2: y[1],
            omega1: y[2],
            omega2: y[3],
            ..JointState::default()
        }) + model.potential_energy(y[0], y[1])
    };
    let deriv = |y: &[f64; 4]| {
        let (a1, a2) = model
            .forward_dynamics(y[0], y[1], y[2], y[3], 0.0, 0.0)
            .unwrap();
        [y[2], y[3], a1, a2]
    };
    let e0 = energy(&y);
    let mut drift: f64 = 0.0;
    for _ in 0..10_000 {
        let k1 = deriv(&y);
        let y2 = std::array::from_fn(|i| y[i] + 0.5 * dt * k1[i]);
        let k2 = deriv(&y2);
        let y3 = std::array::from_fn(|i| y[i] + 0.5 * dt * k2[i]);
        let k3 = deriv(&y3);
        let y4 = std::array::from_fn(|i| y[i] + dt * k3[i]);
        let k4 = deriv(&y4);
        y = std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        drift = drift.max(((energy(&y) - e0) / e0).abs());
    }

    // Gravity vector equals the finite-difference potential gradient.
    let mut max_grad: f64 = 0.0;
    let h = 1e-6;
    for _ in 0..100 {
        let t1 = rng.random_range(-3.0..3.0);
        let t2 = rng.random_range(-3.0..3.0);
        let g = model.dynamics_terms(t1, t2, 0.0, 0.0).g;
        let g1 =
            (model.potential_energy(t1 + h, t2) - model.potential_energy(t1 - h, t2)) / (2.0 * h);
        let g2 =
            (model.potential_energy(t1, t2 + h) - model.potential_energy(t1, t2 - h)) / (2.0 * h);
        max_grad = max_grad.max((g[0] - g1).abs()).max((g[1] - g2).abs());
    }

    let pass = max_rt < 1e-9 && drift < 1e-5 && max_grad < 1e-6;
    report(
        "4 (dynamics suite)",
        &format!("round trip {max_rt:.2e}, drift {drift:.2e}, gravity FD {max_grad:.2e}"),
        pass,
    );
    assert!(max_rt < 1e-9, "round trip {max_rt:.3e}");
    assert!(drift < 1e-5, "energy drift {drift:.3e}");
    assert!(max_grad < 1e-6, "gravity gradient mismatch {max_grad:.3e}");
}

#[test]
fn criterion_5_quintic_suite() {
    // Canonical unit rest-to-rest problem.
    let seg = solve_quintic(
        &BoundaryCondition::rest(0.0),
        &BoundaryCondition::rest(1.0),
        0.0,
        1.0,
    )
    .unwrap();
    let canonical = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
    let mut coeff_err: f64 = 0.0;
    for (got, want) in seg.coeffs.iter().zip(canonical) {
        coeff_err = coeff_err.max((got - want).abs());
    }
    let (_, mid_velocity, _) = seg.eval(0.5).unwrap();

    // Boundary residuals over 1000 random draws.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut max_residual: f64 = 0.0;
    for _ in 0..1000 {
        let bc0 = BoundaryCondition::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-20.0..20.0),
        );
        let bcf = BoundaryCondition::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-20.0..20.0),
        );
        let span = rng.random_range(0.1..10.0);
        let seg = solve_quintic(&bc0, &bcf, 0.0, span).unwrap();
        let (t0, o0, a0) = seg.eval(0.0).unwrap();
        let (tf, of, af) = seg.eval(span).unwrap();
        for residual in [
            t0 - bc0.theta,
            o0 - bc0.omega,
            a0 - bc0.alpha,
            tf - bcf.theta,
            of - bcf.omega,
            af - bcf.alpha,
        ] {
            max_residual = max_residual.max(residual.abs());
        }
    }

    let pass = coeff_err < 1e-12 && (mid_velocity - 1.875).abs() < 1e-12 && max_residual < 1e-9;
    report(
        "5 (quintic suite)",
        &format!(
            "coeff err {coeff_err:.2e}, midpoint velocity {mid_velocity}, residual {max_residual:.2e}"
        ),
        pass,
    );
    assert!(
        coeff_err < 1e-12,
        "canonical coefficients off by {coeff_err:.3e}"
    );
    assert!(
        (mid_velocity - 1.875).abs() < 1e-12,
        "midpoint velocity {mid_velocity}"
    );
    assert!(max_residual < 1e-9, "boundary residual {max_residual:.3e}");
}

#[test]
fn criterion_6_pso_suite() {
    let bounds = Bounds::uniform(3, -5.0, 5.0).unwrap();
    let config = PsoConfig::default().with_seed(42);
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let a = optimize(sphere, &bounds, &config).unwrap();
    let b = optimize(sphere, &bounds, &config).unwrap();

    let monotone = a.history.windows(2).all(|w| w[1] <= w[0]);
    let pass = a.best_fitness < 1e-4 && a.history == b.history && monotone;
    report(
        "6 (PSO suite)",
        &format!(
            "sphere fitness {:.3e}, deterministic {}",
            a.best_fitness,
            a.history == b.history
        ),
        pass,
    );
    assert!(
        a.best_fitness < 1e-4,
        "sphere fitness {:.3e}",
        a.best_fitness
    );
    assert_eq!(a.history, b.history, "non-deterministic under equal seeds");
    assert!(monotone, "best-fitness history not monotone");
}

#[test]
fn criterion_7_segmentation_suite() {
    // Linear ramp 0 -> 150 deg over 3 s at 100 Hz.
    let dt = 0.01;
    let t: Vec<f64> = (0..=300).map(|i| i as f64 * dt).collect();
    let v: Vec<f64> = t.iter().map(|&x| 150.0 * x / 3.0).collect();
    let ramp = TimeSeries::new(t, v).unwrap();
    let intervals = segment_by_elbow_angle(&ramp, &PhaseSpec::default());
    let b1 = intervals.high_load[0].1;
    let b2 = intervals.weakest[0].1;

    // Standard quintic plan deviates from the 62 deg target by 13 deg.
    let traj = standard_plan(&PlanningProblem::benchmark()).unwrap();
    let (_, deviation) = check_peak_placement(&traj, &PhaseSpec::default());

    let pass = (b1 - 0.8).abs() <= dt && (b2 - 1.8).abs() <= dt && (deviation - 13.0).abs() <= 0.1;
    report(
        "7 (segmentation suite)",
        &format!("boundaries {b1:.4} s / {b2:.4} s, quintic deviation {deviation:.3} deg"),
        pass,
    );
    assert!((b1 - 0.8).abs() <= dt, "first boundary at {b1}");
    assert!((b2 - 1.8).abs() <= dt, "second boundary at {b2}");
    assert!((deviation - 13.0).abs() <= 0.1, "deviation {deviation}");
}

#[test]
fn criterion_8_signal_suite() {
    let fs = 100.0;
    let spec = FilterSpec::motion_default();
    let sine = |freq: f64, seconds: f64, fs: f64| {
        let n = (seconds * fs) as usize;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / fs).collect();
        let v = t
            .iter()
            .map(|&x| (2.0 * std::f64::consts::PI * freq * x).sin())
            .collect();
        TimeSeries::new(t, v).unwrap()
    };
    let amplitude = |s: &TimeSeries| {
        let n = s.len();
        s.values()[n / 10..n - n / 10]
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    };

    let passband = amplitude(&lowpass_zero_phase(&sine(1.0, 10.0, fs), &spec).unwrap());
    let stopband = amplitude(&lowpass_zero_phase(&sine(40.0, 10.0, fs), &spec).unwrap());

    // Amplitude-modulated burst centered at 1 s through the envelope path.
    let emg_fs = 1000.0;
    let t: Vec<f64> = (0..2000).map(|i| i as f64 / emg_fs).collect();
    let v: Vec<f64> = t
        .iter()
        .map(|&x| {
            (-((x - 1.0) / 0.15).powi(2)).exp() * (2.0 * std::f64::consts::PI * 60.0 * x).sin()
        })
        .collect();
    let burst = TimeSeries::new(t, v).unwrap();
    let envelope = emg_envelope(&burst, &FilterSpec::emg_default()).unwrap();
    let peak_t = envelope.t()[envelope
        .values()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0];

    let pass = passband >= 0.98 && stopband <= 0.05 && (peak_t - 1.0).abs() <= 0.05;
    report(
        "8 (signal suite)",
        &format!("passband {passband:.4}, stopband {stopband:.4}, envelope peak {peak_t:.3} s"),
        pass,
    );
    assert!(passband >= 0.98, "passband gain {passband}");
    assert!(stopband <= 0.05, "stopband gain {stopband}");
    assert!((peak_t - 1.0).abs() <= 0.05, "envelope peak at {peak_t}");
}

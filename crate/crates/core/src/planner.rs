//! End-to-end planning pipeline: a standard rest-to-rest quintic plan, a
//! swarm-optimized via-point plan that pins the elbow velocity peak to the
//! weakest-load target angle, and the energy comparison between the two.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{compute_torques, energy_report, ArmModel, DynamicsError, EnergyReport};
use crate::phase::{check_peak_placement, PhaseError, PhaseSpec};
use crate::pso::{self, Bounds, OptResult, PsoConfig, PsoError};
use crate::trajectory::{
    rest_to_rest, two_segment_via, BoundaryCondition, PiecewiseTrajectory, SampledTrajectory,
    TrajectoryError, ViaPoint,
};

/// Sampling step shared by the objective and the reported plans, s.
pub const PLAN_SAMPLE_DT: f64 = 1e-3;
/// Admissible via-time fraction of the total duration.
pub const VIA_FRACTION_RANGE: (f64, f64) = (0.15, 0.85);
/// Peak-placement deadband, degrees; "approximately 62" is approximate.
pub const PEAK_DEADBAND_DEG: f64 = 2.0;
/// Largest limit-violation integral still considered feasible.
const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("invalid planning problem: {0}")]
    InvalidProblem(&'static str),
    #[error("decision vector must have 5 entries, got {0}")]
    DecisionDimension(usize),
    #[error("via time fraction {0} outside [{lo}, {hi}]", lo = VIA_FRACTION_RANGE.0, hi = VIA_FRACTION_RANGE.1)]
    ViaFractionOutOfBounds(f64),
    #[error("optimized plan violates joint limits (violation integral {0:.3e})")]
    InfeasiblePlan(f64),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-joint kinematic limits, `[shoulder, elbow]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointLimits {
    pub max_velocity_rad_s: [f64; 2],
    pub max_acceleration_rad_s2: [f64; 2],
}

impl Default for JointLimits {
    fn default() -> Self {
        Self {
            max_velocity_rad_s: [1.5, 3.0],
            max_acceleration_rad_s2: [4.0, 8.0],
        }
    }
}

/// Objective weighting: energy per joule, peak-placement penalty per degree
/// beyond the deadband, and limit-violation penalty per unit overshoot
/// integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveWeights {
    pub w_energy: f64,
    pub w_peak: f64,
    pub w_limit: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            w_energy: 1.0,
            w_peak: 10.0,
            w_limit: 1e3,
        }
    }
}

/// The two-joint lift to plan. Joint order is `[shoulder, elbow]`, angles in
/// degrees; the default is the bundled benchmark (0.495 m / 0.45 m links,
/// 4 kg payload, elbow 0 to 150 degrees over 3 s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanningProblem {
    pub arm: ArmModel,
    pub start_deg: [f64; 2],
    pub end_deg: [f64; 2],
    pub duration_s: f64,
    pub limits: JointLimits,
    pub phase: PhaseSpec,
    pub weights: ObjectiveWeights,
}

fn benchmark_arm() -> ArmModel {
    ArmModel::new(0.495, 0.45, 3.0, 2.5, 4.0).expect("benchmark parameters are valid")
}

impl Default for PlanningProblem {
    fn default() -> Self {
        Self {
            arm: benchmark_arm(),
            start_deg: [0.0, 0.0],
            end_deg: [30.0, 150.0],
            duration_s: 3.0,
            limits: JointLimits::default(),
            phase: PhaseSpec::default(),
            weights: ObjectiveWeights::default(),
        }
    }
}

impl PlanningProblem {
    pub fn benchmark() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), PlannerError> {
        self.arm
            .validate()
            .map_err(|_| PlannerError::InvalidProblem("arm model parameters"))?;
        self.phase.validate()?;
        if self.duration_s.is_nan() || self.duration_s <= 0.0 {
            return Err(PlannerError::InvalidProblem("duration must be positive"));
        }
        if self.start_deg[1] == self.end_deg[1] {
            return Err(PlannerError::InvalidProblem(
                "elbow must have nonzero displacement",
            ));
        }
        let positive = self
            .limits
            .max_velocity_rad_s
            .iter()
            .chain(&self.limits.max_acceleration_rad_s2)
            .all(|v| *v > 0.0);
        if !positive {
            return Err(PlannerError::InvalidProblem("limits must be positive"));
        }
        if self.weights.w_energy < 0.0 || self.weights.w_peak < 0.0 || self.weights.w_limit < 0.0 {
            return Err(PlannerError::InvalidProblem("weights must be non-negative"));
        }
        Ok(())
    }

    fn start_rad(&self, joint: usize) -> f64 {
        self.start_deg[joint].to_radians()
    }

    fn end_rad(&self, joint: usize) -> f64 {
        self.end_deg[joint].to_radians()
    }
}

/// Full configuration file: the planning problem plus swarm settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanConfig {
    #[serde(flatten)]
    pub problem: PlanningProblem,
    #[serde(default)]
    pub pso: PsoConfig,
}

/// Single rest-to-rest quintic per joint, sampled at 1 ms with torques.
pub fn standard_plan(problem: &PlanningProblem) -> Result<SampledTrajectory, PlannerError> {
    let joints = (0..2)
        .map(|j| rest_to_rest(problem.start_rad(j), problem.end_rad(j), problem.duration_s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sampled = PiecewiseTrajectory::new(joints)?.sample(PLAN_SAMPLE_DT)?;
    compute_torques(&problem.arm, &mut sampled);
    Ok(sampled)
}

/// Search box for the 5-D decision vector
/// `[t_v_fraction, omega1_v, omega2_v, alpha1_v, alpha2_v]`.
pub fn decision_bounds(problem: &PlanningProblem) -> Bounds {
    let v = problem.limits.max_velocity_rad_s;
    let a = problem.limits.max_acceleration_rad_s2;
    Bounds::new(vec![
        VIA_FRACTION_RANGE,
        (-v[0], v[0]),
        (-v[1], v[1]),
        (-a[0], a[0]),
        (-a[1], a[1]),
    ])
    .expect("limits validated positive")
}

/// Decodes a decision vector into a two-segment via plan.
///
/// The via elbow angle is pinned to the phase target; the via shoulder angle
/// follows the same normalized displacement fraction, so peak placement is
/// encoded in the elbow while energy shaping stays free.
pub fn decision_decode(
    problem: &PlanningProblem,
    x: &[f64],
) -> Result<PiecewiseTrajectory, PlannerError> {
    if x.len() != 5 {
        return Err(PlannerError::DecisionDimension(x.len()));
    }
    let t_v_fraction = x[0];
    if !(VIA_FRACTION_RANGE.0..=VIA_FRACTION_RANGE.1).contains(&t_v_fraction) {
        return Err(PlannerError::ViaFractionOutOfBounds(t_v_fraction));
    }
    let elbow_span = problem.end_deg[1] - problem.start_deg[1];
    if elbow_span == 0.0 {
        return Err(PlannerError::InvalidProblem(
            "elbow must have nonzero displacement",
        ));
    }
    let progress = (problem.phase.target_peak_angle_deg - problem.start_deg[1]) / elbow_span;
    let via_angle_deg = [
        problem.start_deg[0] + progress * (problem.end_deg[0] - problem.start_deg[0]),
        problem.phase.target_peak_angle_deg,
    ];
    let t_v = t_v_fraction * problem.duration_s;

    let joints = (0..2)
        .map(|j| {
            let via = ViaPoint {
                time: t_v,
                state: BoundaryCondition::new(via_angle_deg[j].to_radians(), x[1 + j], x[3 + j]),
            };
            two_segment_via(
                &BoundaryCondition::rest(problem.start_rad(j)),
                &via,
                &BoundaryCondition::rest(problem.end_rad(j)),
                problem.duration_s,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PiecewiseTrajectory::new(joints)?)
}

struct Candidate {
    trajectory: SampledTrajectory,
    energy: EnergyReport,
    peak_deviation_deg: f64,
    limit_violation: f64,
}

fn evaluate(problem: &PlanningProblem, x: &[f64]) -> Result<Candidate, PlannerError> {
    let mut sampled = decision_decode(problem, x)?.sample(PLAN_SAMPLE_DT)?;
    compute_torques(&problem.arm, &mut sampled);
    let energy = energy_report(&sampled)?;
    let (_, peak_deviation_deg) = check_peak_placement(&sampled, &problem.phase);
    let limit_violation = limit_violation_integral(problem, &sampled);
    Ok(Candidate {
        trajectory: sampled,
        energy,
        peak_deviation_deg,
        limit_violation,
    })
}

/// Trapezoidal integral of velocity/acceleration overshoot beyond the
/// per-joint limits, summed over joints.
fn limit_violation_integral(problem: &PlanningProblem, traj: &SampledTrajectory) -> f64 {
    let mut total = 0.0;
    for (j, joint) in traj.joints.iter().enumerate() {
        let vmax = problem.limits.max_velocity_rad_s[j];
        let amax = problem.limits.max_acceleration_rad_s2[j];
        let overshoot: Vec<f64> = joint
            .omega
            .iter()
            .zip(&joint.alpha)
            .map(|(w, a)| (w.abs() - vmax).max(0.0) + (a.abs() - amax).max(0.0))
            .collect();
        total += traj
            .t
            .windows(2)
            .zip(overshoot.windows(2))
            .map(|(ts, vs)| 0.5 * (vs[0] + vs[1]) * (ts[1] - ts[0]))
            .sum::<f64>();
    }
    total
}

/// Scalar cost of a decision vector: weighted work, deadbanded peak-angle
/// deviation, and limit-violation penalty. Undecodable or non-finite
/// candidates cost `+inf`.
pub fn objective(problem: &PlanningProblem, x: &[f64]) -> f64 {
    match evaluate(problem, x) {
        Ok(candidate) => {
            let w = &problem.weights;
            let cost = w.w_energy * candidate.energy.total_work
                + w.w_peak * (candidate.peak_deviation_deg - PEAK_DEADBAND_DEG).max(0.0)
                + w.w_limit * candidate.limit_violation;
            if cost.is_finite() {
                cost
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// One plan with its energy accounting.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub trajectory: SampledTrajectory,
    pub energy: EnergyReport,
}

/// Standard-vs-optimized comparison produced by [`optimize_plan`].
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub standard: PlanOutcome,
    pub optimized: PlanOutcome,
    pub work_reduction_pct: f64,
    pub peak_power_reduction_pct: f64,
    pub peak_angle_achieved_deg: f64,
    pub pso: OptResult,
    pub seed: u64,
}

/// Runs the swarm over the 5-D decision box and reports both plans.
/// Deterministic for a fixed seed and config.
pub fn optimize_plan(
    problem: &PlanningProblem,
    pso_config: &PsoConfig,
) -> Result<PlanResult, PlannerError> {
    problem.validate()?;
    let standard_traj = standard_plan(problem)?;
    let standard_energy = energy_report(&standard_traj)?;

    let bounds = decision_bounds(problem);
    let result = pso::optimize(|x| objective(problem, x), &bounds, pso_config)?;

    let best = evaluate(problem, &result.best_position)?;
    if best.limit_violation > FEASIBILITY_TOL {
        return Err(PlannerError::InfeasiblePlan(best.limit_violation));
    }
    let (peak_angle_achieved_deg, _) = check_peak_placement(&best.trajectory, &problem.phase);

    let work_reduction_pct =
        100.0 * (standard_energy.total_work - best.energy.total_work) / standard_energy.total_work;
    let peak_power_reduction_pct =
        100.0 * (standard_energy.peak_power - best.energy.peak_power) / standard_energy.peak_power;

    Ok(PlanResult {
        standard: PlanOutcome {
            trajectory: standard_traj,
            energy: standard_energy,
        },
        optimized: PlanOutcome {
            trajectory: best.trajectory,
            energy: best.energy,
        },
        work_reduction_pct,
        peak_power_reduction_pct,
        peak_angle_achieved_deg,
        pso: result,
        seed: pso_config.seed,
    })
}

/// Scalar comparison fields, serialized as the summary JSON.
#[derive(Debug, Clone, Serialize)]
pub struct PlanSummary {
    pub work_standard_j: f64,
    pub work_optimized_j: f64,
    pub work_reduction_pct: f64,
    pub peak_power_standard_w: f64,
    pub peak_power_optimized_w: f64,
    pub peak_power_reduction_pct: f64,
    pub peak_angle_achieved_deg: f64,
    pub target_peak_angle_deg: f64,
    pub seed: u64,
    pub pso_best_fitness: f64,
    pub pso_evaluations: usize,
    pub pso_iterations: usize,
    pub pso_terminated_by: crate::pso::Termination,
    pub pso_generator: &'static str,
}

impl PlanResult {
    pub fn summary(&self, target_peak_angle_deg: f64) -> PlanSummary {
        PlanSummary {
            work_standard_j: self.standard.energy.total_work,
            work_optimized_j: self.optimized.energy.total_work,
            work_reduction_pct: self.work_reduction_pct,
            peak_power_standard_w: self.standard.energy.peak_power,
            peak_power_optimized_w: self.optimized.energy.peak_power,
            peak_power_reduction_pct: self.peak_power_reduction_pct,
            peak_angle_achieved_deg: self.peak_angle_achieved_deg,
            target_peak_angle_deg,
            seed: self.seed,
            pso_best_fitness: self.pso.best_fitness,
            pso_evaluations: self.pso.evaluations,
            pso_iterations: self.pso.history.len().saturating_sub(1),
            pso_terminated_by: self.pso.terminated_by,
            pso_generator: self.pso.generator,
        }
    }

    /// Human-readable comparison table.
    pub fn human_table(&self, target_peak_angle_deg: f64) -> String {
        let s = &self.standard.energy;
        let o = &self.optimized.energy;
        let mut out = String::new();
        out.push_str("metric                     standard     optimized\n");
        out.push_str(&format!(
            "total work [J]         {:>12.4}  {:>12.4}\n",
            s.total_work, o.total_work
        ));
        out.push_str(&format!(
            "peak power [W]         {:>12.4}  {:>12.4}\n",
            s.peak_power, o.peak_power
        ));
        out.push_str(&format!(
            "work reduction         {:>11.3}%\n",
            self.work_reduction_pct
        ));
        out.push_str(&format!(
            "peak power reduction   {:>11.3}%\n",
            self.peak_power_reduction_pct
        ));
        out.push_str(&format!(
            "velocity peak angle    {:>11.2} deg (target {} deg)\n",
            self.peak_angle_achieved_deg, target_peak_angle_deg
        ));
        out
    }

    /// Writes `t,standard_w,optimized_w` power curves (shared time grid).
    pub fn write_power_csv<W: Write>(&self, mut w: W) -> Result<(), PlannerError> {
        writeln!(w, "t,standard_w,optimized_w")?;
        for i in 0..self.standard.trajectory.t.len() {
            writeln!(
                w,
                "{},{},{}",
                self.standard.trajectory.t[i],
                self.standard.energy.power_series[i],
                self.optimized.energy.power_series[i]
            )?;
        }
        Ok(())
    }
}

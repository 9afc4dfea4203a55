//! Quintic joint-space trajectories: boundary-value synthesis, two-segment
//! via-point construction, uniform sampling, and the trajectory CSV format.

use std::io::{BufRead, Write};

use nalgebra::{Matrix6, Vector6};
use thiserror::Error;

/// Junction mismatch above this is a C2 continuity violation.
const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("segment span must be positive (t0 = {t0}, tf = {tf})")]
    InvalidSpan { t0: f64, tf: f64 },
    #[error("boundary conditions must be finite")]
    NonFiniteBoundary,
    #[error("via time {t_v} outside open interval (0, {total})")]
    ViaTimeOutOfRange { t_v: f64, total: f64 },
    #[error("evaluation time {t} outside segment span [{t0}, {tf}]")]
    OutOfSpan { t: f64, t0: f64, tf: f64 },
    #[error("segments are not contiguous at junction {index}")]
    NonContiguous { index: usize },
    #[error("discontinuity at junction {index}: {quantity} jumps by {gap:.3e}")]
    DiscontinuousJunction {
        index: usize,
        quantity: &'static str,
        gap: f64,
    },
    #[error("trajectory has no segments")]
    EmptySegments,
    #[error("joint trajectories must share one time span")]
    MismatchedSpans,
    #[error("sampling step {dt} must be positive and smaller than the span {span}")]
    BadSamplingStep { dt: f64, span: f64 },
    #[error("csv: empty file")]
    CsvEmptyFile,
    #[error("csv: malformed header `{0}`")]
    CsvMalformedHeader(String),
    #[error("csv: non-numeric cell `{cell}` on line {line}")]
    CsvNonNumericCell { cell: String, line: usize },
    #[error("csv: wrong column count on line {line}")]
    CsvColumnCount { line: usize },
    #[error("csv: non-monotonic time on line {line}")]
    CsvNonMonotonicTime { line: usize },
    #[error("csv: io error: {0}")]
    CsvIo(#[from] std::io::Error),
}

/// Position, velocity, and acceleration at one trajectory endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub theta: f64,
    pub omega: f64,
    pub alpha: f64,
}

impl BoundaryCondition {
    pub fn new(theta: f64, omega: f64, alpha: f64) -> Self {
        Self {
            theta,
            omega,
            alpha,
        }
    }

    /// Boundary at rest: zero velocity and acceleration.
    pub fn rest(theta: f64) -> Self {
        Self::new(theta, 0.0, 0.0)
    }

    fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.omega.is_finite() && self.alpha.is_finite()
    }
}

/// Interior condition joining two quintic segments: full state at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViaPoint {
    pub time: f64,
    pub state: BoundaryCondition,
}

/// One quintic polynomial segment over `[t0, tf]`.
///
/// Coefficients are stored in local time `u = t - t0`, so `coeffs[0]` is the
/// position at `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticSegment {
    pub t0: f64,
    pub tf: f64,
    pub coeffs: [f64; 6],
}

/// Solves the six-condition boundary-value problem for a unique quintic.
///
/// The 6x6 linear system is solved by LU elimination with partial pivoting,
/// in local time for benign conditioning.
pub fn solve_quintic(
    bc0: &BoundaryCondition,
    bcf: &BoundaryCondition,
    t0: f64,
    tf: f64,
) -> Result<QuinticSegment, TrajectoryError> {
    if !t0.is_finite() || !tf.is_finite() || tf <= t0 {
        return Err(TrajectoryError::InvalidSpan { t0, tf });
    }
    if !bc0.is_finite() || !bcf.is_finite() {
        return Err(TrajectoryError::NonFiniteBoundary);
    }
    let span = tf - t0;
    let (s, s2, s3, s4, s5) = (span, span * span, span.powi(3), span.powi(4), span.powi(5));
    #[rustfmt::skip]
    let system = Matrix6::new(
        1.0, 0.0, 0.0,      0.0,       0.0,        0.0,
        0.0, 1.0, 0.0,      0.0,       0.0,        0.0,
        0.0, 0.0, 2.0,      0.0,       0.0,        0.0,
        1.0, s,   s2,       s3,        s4,         s5,
        0.0, 1.0, 2.0 * s,  3.0 * s2,  4.0 * s3,   5.0 * s4,
        0.0, 0.0, 2.0,      6.0 * s,   12.0 * s2,  20.0 * s3,
    );
    let rhs = Vector6::new(
        bc0.theta, bc0.omega, bc0.alpha, bcf.theta, bcf.omega, bcf.alpha,
    );
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or(TrajectoryError::InvalidSpan { t0, tf })?;
    Ok(QuinticSegment {
        t0,
        tf,
        coeffs: solution.as_slice().try_into().expect("6 coefficients"),
    })
}

impl QuinticSegment {
    pub fn span(&self) -> f64 {
        self.tf - self.t0
    }

    /// Position, velocity, and acceleration at `t` (must lie in the span).
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64), TrajectoryError> {
        let eps = CONTINUITY_TOL * self.span().max(1.0);
        if t < self.t0 - eps || t > self.tf + eps {
            return Err(TrajectoryError::OutOfSpan {
                t,
                t0: self.t0,
                tf: self.tf,
            });
        }
        Ok(self.eval_unchecked(t.clamp(self.t0, self.tf)))
    }

    fn eval_unchecked(&self, t: f64) -> (f64, f64, f64) {
        let u = t - self.t0;
        let [d0, d1, d2, d3, d4, d5] = self.coeffs;
        let theta = ((((d5 * u + d4) * u + d3) * u + d2) * u + d1) * u + d0;
        let omega = (((5.0 * d5 * u + 4.0 * d4) * u + 3.0 * d3) * u + 2.0 * d2) * u + d1;
        let alpha = (20.0 * d5 * u + 12.0 * d4) * u * u + 6.0 * d3 * u + 2.0 * d2;
        (theta, omega, alpha)
    }

    fn boundary(&self, at_end: bool) -> BoundaryCondition {
        let (theta, omega, alpha) = self.eval_unchecked(if at_end { self.tf } else { self.t0 });
        BoundaryCondition::new(theta, omega, alpha)
    }
}

/// Ordered, contiguous, C2-continuous quintic segments for a single joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    segments: Vec<QuinticSegment>,
}

impl JointTrajectory {
    /// Validates contiguity and C2 continuity (1e-9) at every junction.
    pub fn new(segments: Vec<QuinticSegment>) -> Result<Self, TrajectoryError> {
        if segments.is_empty() {
            return Err(TrajectoryError::EmptySegments);
        }
        for index in 1..segments.len() {
            let prev = &segments[index - 1];
            let next = &segments[index];
            if (next.t0 - prev.tf).abs() > CONTINUITY_TOL * prev.span().max(1.0) {
                return Err(TrajectoryError::NonContiguous { index });
            }
            let a = prev.boundary(true);
            let b = next.boundary(false);
            for (quantity, gap) in [
                ("position", (a.theta - b.theta).abs()),
                ("velocity", (a.omega - b.omega).abs()),
                ("acceleration", (a.alpha - b.alpha).abs()),
            ] {
                if gap > CONTINUITY_TOL {
                    return Err(TrajectoryError::DiscontinuousJunction {
                        index,
                        quantity,
                        gap,
                    });
                }
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[QuinticSegment] {
        &self.segments
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].t0
    }

    pub fn end_time(&self) -> f64 {
        self.segments[self.segments.len() - 1].tf
    }

    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64), TrajectoryError> {
        let seg = self
            .segments
            .iter()
            .find(|s| t <= s.tf)
            .unwrap_or(&self.segments[self.segments.len() - 1]);
        seg.eval(t)
    }
}

/// Single rest-to-rest quintic over `[0, total]` as a one-segment trajectory.
pub fn rest_to_rest(
    theta0: f64,
    thetaf: f64,
    total: f64,
) -> Result<JointTrajectory, TrajectoryError> {
    let seg = solve_quintic(
        &BoundaryCondition::rest(theta0),
        &BoundaryCondition::rest(thetaf),
        0.0,
        total,
    )?;
    JointTrajectory::new(vec![seg])
}

/// Two quintics over `[0, total]` joined at the via point with matching
/// position, velocity, and acceleration; C2 by construction.
pub fn two_segment_via(
    bc0: &BoundaryCondition,
    via: &ViaPoint,
    bcf: &BoundaryCondition,
    total: f64,
) -> Result<JointTrajectory, TrajectoryError> {
    if !(via.time > 0.0 && via.time < total) {
        return Err(TrajectoryError::ViaTimeOutOfRange {
            t_v: via.time,
            total,
        });
    }
    let first = solve_quintic(bc0, &via.state, 0.0, via.time)?;
    let second = solve_quintic(&via.state, bcf, via.time, total)?;
    JointTrajectory::new(vec![first, second])
}

/// Multi-joint trajectory; all joints share one time span.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTrajectory {
    joints: Vec<JointTrajectory>,
}

impl PiecewiseTrajectory {
    pub fn new(joints: Vec<JointTrajectory>) -> Result<Self, TrajectoryError> {
        if joints.is_empty() {
            return Err(TrajectoryError::EmptySegments);
        }
        let start = joints[0].start_time();
        let end = joints[0].end_time();
        for joint in &joints[1..] {
            if (joint.start_time() - start).abs() > CONTINUITY_TOL
                || (joint.end_time() - end).abs() > CONTINUITY_TOL
            {
                return Err(TrajectoryError::MismatchedSpans);
            }
        }
        Ok(Self { joints })
    }

    pub fn joints(&self) -> &[JointTrajectory] {
        &self.joints
    }

    pub fn start_time(&self) -> f64 {
        self.joints[0].start_time()
    }

    pub fn end_time(&self) -> f64 {
        self.joints[0].end_time()
    }

    /// Samples all joints on a uniform grid anchored at both endpoints.
    ///
    /// When the span is not an integer multiple of `dt` the final step is
    /// shortened to land exactly on the end time and flagged.
    pub fn sample(&self, dt: f64) -> Result<SampledTrajectory, TrajectoryError> {
        let start = self.start_time();
        let end = self.end_time();
        let grid = sample_grid(start, end, dt)?;
        let mut joints = Vec::with_capacity(self.joints.len());
        for joint in &self.joints {
            let mut samples = JointSamples::with_capacity(grid.t.len());
            for &t in &grid.t {
                let (theta, omega, alpha) = joint.eval(t)?;
                samples.theta.push(theta);
                samples.omega.push(omega);
                samples.alpha.push(alpha);
            }
            joints.push(samples);
        }
        Ok(SampledTrajectory {
            dt,
            t: grid.t,
            joints,
            final_step_short: grid.final_step_short,
        })
    }
}

pub(crate) struct SampleGrid {
    pub(crate) t: Vec<f64>,
    pub(crate) final_step_short: bool,
}

pub(crate) fn sample_grid(start: f64, end: f64, dt: f64) -> Result<SampleGrid, TrajectoryError> {
    let span = end - start;
    if dt.is_nan() || dt <= 0.0 || dt >= span {
        return Err(TrajectoryError::BadSamplingStep { dt, span });
    }
    let steps = (span / dt + CONTINUITY_TOL).floor() as usize;
    let exact = (steps as f64 * dt - span).abs() <= CONTINUITY_TOL * span.max(1.0);
    let mut t: Vec<f64> = (0..=steps).map(|i| start + i as f64 * dt).collect();
    if exact {
        *t.last_mut().expect("non-empty grid") = end;
    } else {
        t.push(end);
    }
    Ok(SampleGrid {
        t,
        final_step_short: !exact,
    })
}

/// Sampled series for one joint. Torque and power are filled by inverse
/// dynamics when the trajectory is bound to an arm model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JointSamples {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub alpha: Vec<f64>,
    pub tau: Option<Vec<f64>>,
    pub power: Option<Vec<f64>>,
}

impl JointSamples {
    fn with_capacity(n: usize) -> Self {
        Self {
            theta: Vec::with_capacity(n),
            omega: Vec::with_capacity(n),
            alpha: Vec::with_capacity(n),
            tau: None,
            power: None,
        }
    }
}

/// Time-gridded positions, velocities, accelerations, and optional torques
/// for one or more joints.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    /// Nominal uniform step, s.
    pub dt: f64,
    pub t: Vec<f64>,
    pub joints: Vec<JointSamples>,
    /// True when the last step was shortened to anchor the end time.
    pub final_step_short: bool,
}

impl SampledTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Summed instantaneous absolute power at sample `i`, if torques exist.
    pub fn total_power_at(&self, i: usize) -> Option<f64> {
        self.joints
            .iter()
            .map(|j| j.power.as_ref().map(|p| p[i]))
            .sum()
    }

    fn has_torques(&self) -> bool {
        self.joints.iter().all(|j| j.tau.is_some())
    }

    /// Writes the `t,theta1,omega1,alpha1,...[,tau1,...,power]` CSV format
    /// with full round-trip float precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), TrajectoryError> {
        let mut header = String::from("t");
        for j in 1..=self.joints.len() {
            header.push_str(&format!(",theta{j},omega{j},alpha{j}"));
        }
        let with_torque = self.has_torques();
        if with_torque {
            for j in 1..=self.joints.len() {
                header.push_str(&format!(",tau{j}"));
            }
            header.push_str(",power");
        }
        writeln!(w, "{header}")?;
        for i in 0..self.t.len() {
            let mut row = format!("{}", self.t[i]);
            for joint in &self.joints {
                row.push_str(&format!(
                    ",{},{},{}",
                    joint.theta[i], joint.omega[i], joint.alpha[i]
                ));
            }
            if with_torque {
                for joint in &self.joints {
                    row.push_str(&format!(",{}", joint.tau.as_ref().expect("torque")[i]));
                }
                row.push_str(&format!(",{}", self.total_power_at(i).expect("power")));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// Parses the CSV format written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, TrajectoryError> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(TrajectoryError::CsvEmptyFile)??;
        let columns: Vec<&str> = header.trim().split(',').collect();
        let layout = CsvLayout::parse(&columns)
            .ok_or_else(|| TrajectoryError::CsvMalformedHeader(header.clone()))?;

        let mut t = Vec::new();
        let mut joints = vec![JointSamples::default(); layout.joint_count];
        if layout.with_torque {
            for joint in &mut joints {
                joint.tau = Some(Vec::new());
            }
        }
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let n_line = idx + 2;
            let cells: Vec<&str> = line.trim().split(',').collect();
            if cells.len() != columns.len() {
                return Err(TrajectoryError::CsvColumnCount { line: n_line });
            }
            let mut values = Vec::with_capacity(cells.len());
            for cell in &cells {
                values.push(cell.parse::<f64>().map_err(|_| {
                    TrajectoryError::CsvNonNumericCell {
                        cell: cell.to_string(),
                        line: n_line,
                    }
                })?);
            }
            if let Some(&last) = t.last() {
                if values[0] <= last {
                    return Err(TrajectoryError::CsvNonMonotonicTime { line: n_line });
                }
            }
            t.push(values[0]);
            for (j, joint) in joints.iter_mut().enumerate() {
                joint.theta.push(values[1 + 3 * j]);
                joint.omega.push(values[2 + 3 * j]);
                joint.alpha.push(values[3 + 3 * j]);
                if layout.with_torque {
                    let tau = values[1 + 3 * layout.joint_count + j];
                    joint.tau.as_mut().expect("tau").push(tau);
                }
            }
        }
        if t.len() < 2 {
            return Err(TrajectoryError::CsvEmptyFile);
        }
        for joint in &mut joints {
            if let Some(tau) = &joint.tau {
                joint.power = Some(
                    tau.iter()
                        .zip(&joint.omega)
                        .map(|(tau, omega)| (tau * omega).abs())
                        .collect(),
                );
            }
        }
        let dt = t[1] - t[0];
        let last_step = t[t.len() - 1] - t[t.len() - 2];
        Ok(Self {
            dt,
            t,
            joints,
            final_step_short: last_step < dt * (1.0 - 1e-9),
        })
    }
}

struct CsvLayout {
    joint_count: usize,
    with_torque: bool,
}

impl CsvLayout {
    fn parse(columns: &[&str]) -> Option<Self> {
        if columns.first() != Some(&"t") || columns.len() < 4 {
            return None;
        }
        let mut i = 1;
        let mut joint_count = 0;
        while columns.get(i) == Some(&format!("theta{}", joint_count + 1).as_str()) {
            let j = joint_count + 1;
            if columns.get(i + 1) != Some(&format!("omega{j}").as_str())
                || columns.get(i + 2) != Some(&format!("alpha{j}").as_str())
            {
                return None;
            }
            joint_count += 1;
            i += 3;
        }
        if joint_count == 0 {
            return None;
        }
        if i == columns.len() {
            return Some(Self {
                joint_count,
                with_torque: false,
            });
        }
        for j in 1..=joint_count {
            if columns.get(i) != Some(&format!("tau{j}").as_str()) {
                return None;
            }
            i += 1;
        }
        if columns.get(i) != Some(&"power") || i + 1 != columns.len() {
            return None;
        }
        Some(Self {
            joint_count,
            with_torque: true,
        })
    }
}

//! Two-link planar arm dynamics in the sagittal plane.
//!
//! The arm is modeled as two uniform rods (shoulder link, elbow link) with an
//! optional point-mass payload at the tip. Angles are measured from the
//! hanging-down vertical: `theta1` at the shoulder, `theta2` as relative elbow
//! flexion. The Lagrangian of this model yields the canonical manipulator form
//! `M(theta)*thetadd + C(theta, thetad) + G(theta) = tau`.

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::trajectory::SampledTrajectory;

/// Relative spread allowed between interior time steps of a sampled
/// trajectory before it is rejected as non-uniform.
const UNIFORM_STEP_REL_TOL: f64 = 1e-9;

/// Condition-number threshold above which the mass matrix is reported as
/// ill-conditioned (degenerate parameters, e.g. massless links with payload).
const MASS_MATRIX_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid arm parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("mass matrix ill-conditioned (cond {cond:.3e}) at theta2 = {theta2} rad")]
    IllConditionedMassMatrix { cond: f64, theta2: f64 },
    #[error("trajectory needs at least two samples")]
    TooFewSamples,
    #[error("non-positive time step")]
    NonPositiveTimeStep,
    #[error("non-uniform time step at sample {index}")]
    NonUniformTimeStep { index: usize },
    #[error("trajectory carries no torque series for joint {joint}")]
    MissingTorque { joint: usize },
}

/// Geometric and inertial description of the two-link planar arm.
///
/// Links are uniform thin rods (center of mass at midpoint, inertia
/// `m*l^2/12` about it); the payload is a point mass at the tip of link 2.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArmModel {
    /// Length of link 1 (upper arm), m.
    pub l1: f64,
    /// Length of link 2 (forearm + hand), m.
    pub l2: f64,
    /// Mass of link 1, kg.
    pub m1: f64,
    /// Mass of link 2, kg.
    pub m2: f64,
    /// Point mass carried at the tip, kg.
    #[serde(default)]
    pub m_payload: f64,
    /// Gravitational acceleration, m/s^2.
    #[serde(default = "default_gravity")]
    pub g: f64,
}

fn default_gravity() -> f64 {
    9.81
}

/// Full kinematic state of both joints.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub theta1: f64,
    pub theta2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl JointState {
    pub fn at_rest(theta1: f64, theta2: f64) -> Self {
        Self {
            theta1,
            theta2,
            ..Self::default()
        }
    }
}

/// Mass, Coriolis/centrifugal, and gravity terms at one configuration.
#[derive(Debug, Clone, Copy)]
pub struct DynamicsTerms {
    /// Configuration-dependent 2x2 mass matrix, kg*m^2.
    pub m: Matrix2<f64>,
    /// Coriolis/centrifugal torque vector, N*m.
    pub c: Vector2<f64>,
    /// Gravity torque vector, N*m.
    pub g: Vector2<f64>,
}

/// Mechanical work and power accounting for a sampled trajectory.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyReport {
    /// Absolute mechanical work per joint, J.
    pub work_per_joint: Vec<f64>,
    /// Sum of per-joint work, J.
    pub total_work: f64,
    /// Maximum over time of summed instantaneous absolute joint power, W.
    pub peak_power: f64,
    /// Instantaneous summed absolute power at each sample, W.
    pub power_series: Vec<f64>,
}

impl ArmModel {
    /// Validates lengths strictly positive, masses and gravity non-negative.
    pub fn new(l1: f64, l2: f64, m1: f64, m2: f64, m_payload: f64) -> Result<Self, DynamicsError> {
        let model = Self {
            l1,
            l2,
            m1,
            m2,
            m_payload,
            g: default_gravity(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_gravity(mut self, g: f64) -> Result<Self, DynamicsError> {
        self.g = g;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let finite = [self.l1, self.l2, self.m1, self.m2, self.m_payload, self.g]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(DynamicsError::InvalidParameter("non-finite value"));
        }
        if self.l1 <= 0.0 || self.l2 <= 0.0 {
            return Err(DynamicsError::InvalidParameter(
                "link lengths must be strictly positive",
            ));
        }
        if self.m1 < 0.0 || self.m2 < 0.0 || self.m_payload < 0.0 {
            return Err(DynamicsError::InvalidParameter(
                "masses must be non-negative",
            ));
        }
        if self.g < 0.0 {
            return Err(DynamicsError::InvalidParameter("g must be non-negative"));
        }
        Ok(())
    }

    /// Inertia of link 1 about the shoulder plus translational terms of the
    /// distal bodies: coefficient of `omega1^2/2` that is independent of
    /// `theta2`.
    fn coeff_shoulder(&self) -> f64 {
        self.m1 * self.l1 * self.l1 / 3.0 + (self.m2 + self.m_payload) * self.l1 * self.l1
    }

    /// Inertia of link 2 (plus payload) about the elbow: coefficient of
    /// `(omega1 + omega2)^2/2`.
    fn coeff_elbow(&self) -> f64 {
        self.m2 * self.l2 * self.l2 / 3.0 + self.m_payload * self.l2 * self.l2
    }

    /// Coupling coefficient multiplying `cos(theta2)*omega1*(omega1+omega2)`.
    fn coeff_coupling(&self) -> f64 {
        (self.m2 / 2.0 + self.m_payload) * self.l1 * self.l2
    }

    /// Total kinetic energy of the arm at `state`, J.
    ///
    /// With equal link masses/lengths and no payload this reduces term for
    /// term to the uniform two-rod expression.
    pub fn kinetic_energy(&self, state: &JointState) -> f64 {
        let w1 = state.omega1;
        let we = state.omega1 + state.omega2;
        0.5 * self.coeff_shoulder() * w1 * w1
            + 0.5 * self.coeff_elbow() * we * we
            + self.coeff_coupling() * state.theta2.cos() * w1 * we
    }

    /// Gravitational potential energy, J, zero reference at the shoulder.
    pub fn potential_energy(&self, theta1: f64, theta2: f64) -> f64 {
        let c1 = theta1.cos();
        let c12 = (theta1 + theta2).cos();
        -self.g
            * (self.m1 * (self.l1 / 2.0) * c1
                + self.m2 * (self.l1 * c1 + (self.l2 / 2.0) * c12)
                + self.m_payload * (self.l1 * c1 + self.l2 * c12))
    }

    /// Mass matrix, Coriolis/centrifugal vector, and gravity vector such that
    /// `M*thetadd + C + G = tau`.
    pub fn dynamics_terms(
        &self,
        theta1: f64,
        theta2: f64,
        omega1: f64,
        omega2: f64,
    ) -> DynamicsTerms {
        let a = self.coeff_shoulder();
        let b = self.coeff_elbow();
        let d = self.coeff_coupling();
        let c2 = theta2.cos();
        let s2 = theta2.sin();

        let m = Matrix2::new(a + b + 2.0 * d * c2, b + d * c2, b + d * c2, b);
        let c = Vector2::new(
            -d * s2 * omega2 * (2.0 * omega1 + omega2),
            d * s2 * omega1 * omega1,
        );

        let s1 = theta1.sin();
        let s12 = (theta1 + theta2).sin();
        let elbow_moment = (self.m2 * self.l2 / 2.0 + self.m_payload * self.l2) * s12;
        let g = Vector2::new(
            self.g
                * ((self.m1 * self.l1 / 2.0 + (self.m2 + self.m_payload) * self.l1) * s1
                    + elbow_moment),
            self.g * elbow_moment,
        );

        DynamicsTerms { m, c, g }
    }

    /// Joint torques required to realize `state`, N*m.
    pub fn inverse_dynamics(&self, state: &JointState) -> (f64, f64) {
        let terms = self.dynamics_terms(state.theta1, state.theta2, state.omega1, state.omega2);
        let accel = Vector2::new(state.alpha1, state.alpha2);
        let tau = terms.m * accel + terms.c + terms.g;
        (tau[0], tau[1])
    }

    /// Joint accelerations produced by torques `(tau1, tau2)`.
    ///
    /// Fails when the mass matrix condition number exceeds `1e12`, which
    /// signals degenerate model parameters (e.g. near-massless links with a
    /// payload at full extension).
    pub fn forward_dynamics(
        &self,
        theta1: f64,
        theta2: f64,
        omega1: f64,
        omega2: f64,
        tau1: f64,
        tau2: f64,
    ) -> Result<(f64, f64), DynamicsError> {
        let terms = self.dynamics_terms(theta1, theta2, omega1, omega2);
        let cond = mass_matrix_condition(&terms.m);
        if !cond.is_finite() || cond > MASS_MATRIX_COND_LIMIT {
            return Err(DynamicsError::IllConditionedMassMatrix { cond, theta2 });
        }
        let rhs = Vector2::new(tau1, tau2) - terms.c - terms.g;
        let accel = terms
            .m
            .try_inverse()
            .ok_or(DynamicsError::IllConditionedMassMatrix { cond, theta2 })?
            * rhs;
        Ok((accel[0], accel[1]))
    }
}

/// Condition number of a symmetric positive-definite 2x2 matrix via its
/// eigenvalues.
fn mass_matrix_condition(m: &Matrix2<f64>) -> f64 {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lo = (tr - disc) / 2.0;
    let hi = (tr + disc) / 2.0;
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Fills per-joint torque and power series of `traj` via inverse dynamics.
pub fn compute_torques(model: &ArmModel, traj: &mut SampledTrajectory) {
    assert_eq!(traj.joints.len(), 2, "arm trajectories have two joints");
    let n = traj.t.len();
    let mut tau = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut power = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..n {
        let state = JointState {
            theta1: traj.joints[0].theta[i],
            theta2: traj.joints[1].theta[i],
            omega1: traj.joints[0].omega[i],
            omega2: traj.joints[1].omega[i],
            alpha1: traj.joints[0].alpha[i],
            alpha2: traj.joints[1].alpha[i],
        };
        let (tau1, tau2) = model.inverse_dynamics(&state);
        tau[0].push(tau1);
        tau[1].push(tau2);
        power[0].push((tau1 * state.omega1).abs());
        power[1].push((tau2 * state.omega2).abs());
    }
    for (joint, (tau, power)) in traj.joints.iter_mut().zip(tau.into_iter().zip(power)) {
        joint.tau = Some(tau);
        joint.power = Some(power);
    }
}

/// Absolute mechanical work and power accounting over a torque-annotated
/// trajectory: per-joint work is the trapezoidal integral of `|tau*omega|`,
/// the power series is the per-sample sum of `|tau_j*omega_j|`.
pub fn energy_report(traj: &SampledTrajectory) -> Result<EnergyReport, DynamicsError> {
    let n = traj.t.len();
    if n < 2 {
        return Err(DynamicsError::TooFewSamples);
    }
    check_uniform_grid(traj)?;

    let mut per_joint_power = Vec::with_capacity(traj.joints.len());
    for (j, joint) in traj.joints.iter().enumerate() {
        let tau = joint
            .tau
            .as_ref()
            .ok_or(DynamicsError::MissingTorque { joint: j })?;
        let p: Vec<f64> = tau
            .iter()
            .zip(&joint.omega)
            .map(|(tau, omega)| (tau * omega).abs())
            .collect();
        per_joint_power.push(p);
    }

    let work_per_joint: Vec<f64> = per_joint_power
        .iter()
        .map(|p| trapezoid(&traj.t, p))
        .collect();
    let power_series: Vec<f64> = (0..n)
        .map(|i| per_joint_power.iter().map(|p| p[i]).sum())
        .collect();
    let peak_power = power_series.iter().cloned().fold(0.0, f64::max);

    Ok(EnergyReport {
        total_work: work_per_joint.iter().sum(),
        work_per_joint,
        peak_power,
        power_series,
    })
}

/// Interior steps must match `dt`; a flagged short final step is allowed so
/// endpoint-anchored grids stay integrable.
fn check_uniform_grid(traj: &SampledTrajectory) -> Result<(), DynamicsError> {
    let t = &traj.t;
    let dt = traj.dt;
    if dt.is_nan() || dt <= 0.0 {
        return Err(DynamicsError::NonPositiveTimeStep);
    }
    for i in 1..t.len() {
        let step = t[i] - t[i - 1];
        if step <= 0.0 {
            return Err(DynamicsError::NonPositiveTimeStep);
        }
        let last = i == t.len() - 1;
        if (step - dt).abs() > UNIFORM_STEP_REL_TOL * dt.max(1.0)
            && !(last && traj.final_step_short && step < dt)
        {
            return Err(DynamicsError::NonUniformTimeStep { index: i });
        }
    }
    Ok(())
}

fn trapezoid(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2)
        .zip(v.windows(2))
        .map(|(ts, vs)| 0.5 * (vs[0] + vs[1]) * (ts[1] - ts[0]))
        .sum()
}

//! Classic rest-to-rest velocity-profile families for side-by-side
//! comparison: trapezoid, sine-blend s-curve, triangle, cubic, quintic.
//!
//! Every profile is scaled so the displacement over the duration equals
//! `thetaf - theta0`. The trapezoid and s-curve use a 1/3-1/3-1/3 phase
//! split; the s-curve blends the ramps with a sinusoid so acceleration is
//! continuous.

use std::str::FromStr;

use crate::trajectory::{sample_grid, JointSamples, SampledTrajectory, TrajectoryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Trapezoid,
    SCurve,
    Triangle,
    Cubic,
    Quintic,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 5] = [
        ProfileKind::Trapezoid,
        ProfileKind::SCurve,
        ProfileKind::Triangle,
        ProfileKind::Cubic,
        ProfileKind::Quintic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Trapezoid => "trapezoid",
            ProfileKind::SCurve => "s_curve",
            ProfileKind::Triangle => "triangle",
            ProfileKind::Cubic => "cubic",
            ProfileKind::Quintic => "quintic",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown profile kind `{0}`")]
pub struct UnknownProfileKind(String);

impl FromStr for ProfileKind {
    type Err = UnknownProfileKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trapezoid" => Ok(ProfileKind::Trapezoid),
            "s_curve" => Ok(ProfileKind::SCurve),
            "triangle" => Ok(ProfileKind::Triangle),
            "cubic" => Ok(ProfileKind::Cubic),
            "quintic" => Ok(ProfileKind::Quintic),
            other => Err(UnknownProfileKind(other.to_string())),
        }
    }
}

/// Samples the named profile from `theta0` to `thetaf` over `total` seconds.
pub fn classic_profile(
    kind: ProfileKind,
    theta0: f64,
    thetaf: f64,
    total: f64,
    dt: f64,
) -> Result<SampledTrajectory, TrajectoryError> {
    if total.is_nan() || total <= 0.0 {
        return Err(TrajectoryError::InvalidSpan { t0: 0.0, tf: total });
    }
    let grid = sample_grid(0.0, total, dt)?;
    let mut samples = JointSamples::default();
    let delta = thetaf - theta0;
    for &t in &grid.t {
        let (pos, vel, acc) = match kind {
            ProfileKind::Trapezoid => trapezoid(t, total),
            ProfileKind::SCurve => s_curve(t, total),
            ProfileKind::Triangle => triangle(t, total),
            ProfileKind::Cubic => cubic(t, total),
            ProfileKind::Quintic => quintic(t, total),
        };
        samples.theta.push(theta0 + delta * pos);
        samples.omega.push(delta * vel);
        samples.alpha.push(delta * acc);
    }
    Ok(SampledTrajectory {
        dt,
        t: grid.t,
        joints: vec![samples],
        final_step_short: grid.final_step_short,
    })
}

/// Unit-displacement triangle profile: peak velocity `2/T` at `T/2`.
fn triangle(t: f64, total: f64) -> (f64, f64, f64) {
    let a = 4.0 / (total * total);
    if t <= total / 2.0 {
        (0.5 * a * t * t, a * t, a)
    } else {
        let u = total - t;
        (1.0 - 0.5 * a * u * u, a * u, -a)
    }
}

/// Unit-displacement trapezoid with 1/3-1/3-1/3 phases: cruise at `1.5/T`.
fn trapezoid(t: f64, total: f64) -> (f64, f64, f64) {
    let ramp = total / 3.0;
    let cruise = 1.5 / total;
    let a = cruise / ramp;
    if t <= ramp {
        (0.5 * a * t * t, a * t, a)
    } else if t <= total - ramp {
        (0.25 + cruise * (t - ramp), cruise, 0.0)
    } else {
        let u = total - t;
        (1.0 - 0.5 * a * u * u, a * u, -a)
    }
}

/// Sine-blend trapezoid: same phase split and cruise speed as the trapezoid,
/// but ramps follow a raised-cosine velocity so the acceleration is
/// continuous (zero at segment joins).
fn s_curve(t: f64, total: f64) -> (f64, f64, f64) {
    let ramp = total / 3.0;
    let cruise = 1.5 / total;
    let k = std::f64::consts::PI / ramp;
    if t <= ramp {
        let pos = 0.5 * cruise * (t - (t * k).sin() / k);
        let vel = 0.5 * cruise * (1.0 - (t * k).cos());
        let acc = 0.5 * cruise * k * (t * k).sin();
        (pos, vel, acc)
    } else if t <= total - ramp {
        (0.25 + cruise * (t - ramp), cruise, 0.0)
    } else {
        let u = total - t;
        let pos = 1.0 - 0.5 * cruise * (u - (u * k).sin() / k);
        let vel = 0.5 * cruise * (1.0 - (u * k).cos());
        let acc = -0.5 * cruise * k * (u * k).sin();
        (pos, vel, acc)
    }
}

fn cubic(t: f64, total: f64) -> (f64, f64, f64) {
    let s = t / total;
    let pos = s * s * (3.0 - 2.0 * s);
    let vel = 6.0 * s * (1.0 - s) / total;
    let acc = (6.0 - 12.0 * s) / (total * total);
    (pos, vel, acc)
}

fn quintic(t: f64, total: f64) -> (f64, f64, f64) {
    let s = t / total;
    let pos = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    let vel = 30.0 * s * s * (1.0 - s) * (1.0 - s) / total;
    let acc = (60.0 * s - 180.0 * s * s + 120.0 * s * s * s) / (total * total);
    (pos, vel, acc)
}

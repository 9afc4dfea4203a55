//! Elbow-angle phase segmentation and motion/EMG feature extraction.
//!
//! The lift is split into three contiguous elbow-angle regions: a high-load
//! region where kinetic energy is built up, the weakest-load region that the
//! arm should cross at peak speed, and a deceleration region. The default
//! optimization target places the elbow velocity peak at 62 degrees, inside
//! the weakest region.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{detect_peaks, numeric_derivative, EmgRecording, MotionRecording, TimeSeries};
use crate::trajectory::SampledTrajectory;

/// Hysteresis in degrees applied to phase-boundary crossings.
const BOUNDARY_HYSTERESIS_DEG: f64 = 1.0;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("no interior velocity peak found (speed is monotone or flat)")]
    NoPeakFound,
    #[error("invalid phase spec: {0}")]
    InvalidSpec(&'static str),
}

impl PhaseError {
    pub fn kind(&self) -> &'static str {
        match self {
            PhaseError::NoPeakFound => "no_peak_found",
            PhaseError::InvalidSpec(_) => "invalid_phase_spec",
        }
    }
}

/// The three movement phases in elbow-angle order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    HighLoad,
    Weakest,
    Decel,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::HighLoad, Phase::Weakest, Phase::Decel];

    pub fn name(&self) -> &'static str {
        match self {
            Phase::HighLoad => "high_load",
            Phase::Weakest => "weakest",
            Phase::Decel => "decel",
        }
    }
}

/// Elbow-angle phase regions (degrees) and the velocity-peak target angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseSpec {
    /// High-load capacity region `[lo, hi)`.
    pub high_load: [f64; 2],
    /// Weakest load region `[lo, hi)`.
    pub weakest: [f64; 2],
    /// Deceleration region `[lo, hi]`.
    pub decel: [f64; 2],
    /// Elbow angle at which the velocity peak should sit. Kept at the stated
    /// 62 rather than the interval midpoint 65; configurable.
    pub target_peak_angle_deg: f64,
}

impl Default for PhaseSpec {
    fn default() -> Self {
        Self {
            high_load: [0.0, 40.0],
            weakest: [40.0, 90.0],
            decel: [90.0, 150.0],
            target_peak_angle_deg: 62.0,
        }
    }
}

impl PhaseSpec {
    pub fn validate(&self) -> Result<(), PhaseError> {
        let ordered = self.high_load[0] < self.high_load[1]
            && self.weakest[0] < self.weakest[1]
            && self.decel[0] < self.decel[1];
        if !ordered {
            return Err(PhaseError::InvalidSpec("intervals must be increasing"));
        }
        if self.high_load[1] != self.weakest[0] || self.weakest[1] != self.decel[0] {
            return Err(PhaseError::InvalidSpec("intervals must be contiguous"));
        }
        if self.target_peak_angle_deg < self.weakest[0]
            || self.target_peak_angle_deg >= self.weakest[1]
        {
            return Err(PhaseError::InvalidSpec(
                "target peak angle must lie in the weakest region",
            ));
        }
        Ok(())
    }

    fn classify(&self, angle: f64) -> usize {
        if angle < self.high_load[1] {
            0
        } else if angle < self.weakest[1] {
            1
        } else {
            2
        }
    }

    fn boundary(&self, lower_phase: usize) -> f64 {
        if lower_phase == 0 {
            self.high_load[1]
        } else {
            self.weakest[1]
        }
    }
}

/// Per-phase time windows, ordered and non-overlapping.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PhaseIntervals {
    pub high_load: Vec<(f64, f64)>,
    pub weakest: Vec<(f64, f64)>,
    pub decel: Vec<(f64, f64)>,
}

impl PhaseIntervals {
    pub fn windows(&self, phase: Phase) -> &[(f64, f64)] {
        match phase {
            Phase::HighLoad => &self.high_load,
            Phase::Weakest => &self.weakest,
            Phase::Decel => &self.decel,
        }
    }

    fn push(&mut self, phase_index: usize, window: (f64, f64)) {
        let list = match phase_index {
            0 => &mut self.high_load,
            1 => &mut self.weakest,
            _ => &mut self.decel,
        };
        list.push(window);
    }
}

/// Splits the elbow-angle series into phase time windows.
///
/// Boundary crossing times are located by linear interpolation between the
/// bracketing samples; a 1 degree hysteresis suppresses chatter, so a phase
/// change only commits once the angle penetrates the new phase by at least
/// that much.
pub fn segment_by_elbow_angle(elbow: &TimeSeries, spec: &PhaseSpec) -> PhaseIntervals {
    let t = elbow.t();
    let v = elbow.values();
    let mut intervals = PhaseIntervals::default();
    let mut cur = spec.classify(v[0]);
    let mut window_start = t[0];

    for i in 1..v.len() {
        let raw = spec.classify(v[i]);
        while raw != cur {
            let upward = raw > cur;
            let boundary = spec.boundary(if upward { cur } else { cur - 1 });
            let committed = if upward {
                v[i] >= boundary + BOUNDARY_HYSTERESIS_DEG
            } else {
                v[i] <= boundary - BOUNDARY_HYSTERESIS_DEG
            };
            if !committed {
                break;
            }
            let cross = crossing_time(t, v, i, boundary, upward).max(window_start);
            intervals.push(cur, (window_start, cross));
            window_start = cross;
            cur = if upward { cur + 1 } else { cur - 1 };
        }
    }
    intervals.push(cur, (window_start, t[t.len() - 1]));
    intervals
}

/// Latest bracketing crossing of `boundary` before sample `i`.
fn crossing_time(t: &[f64], v: &[f64], i: usize, boundary: f64, upward: bool) -> f64 {
    for k in (0..i).rev() {
        let (a, b) = (v[k], v[k + 1]);
        let bracket = if upward {
            a < boundary && b >= boundary
        } else {
            a > boundary && b <= boundary
        };
        if bracket {
            return t[k] + (t[k + 1] - t[k]) * (boundary - a) / (b - a);
        }
    }
    t[i]
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VelocityPeak {
    pub time_s: f64,
    pub angle_deg: f64,
    pub speed_deg_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelPeaks {
    pub channel: String,
    /// `(time s, envelope value)` pairs in time order.
    pub peaks: Vec<(f64, f64)>,
}

/// Motion/EMG landmarks used to relate recorded lifts to the phase model.
#[derive(Debug, Clone, Serialize)]
pub struct FeaturePoints {
    pub velocity_peak: VelocityPeak,
    pub emg_peaks: Vec<ChannelPeaks>,
    /// First elbow-acceleration sign change after the velocity ramp begins.
    pub accel_zero_crossing_s: Option<f64>,
}

/// Extracts the elbow velocity peak, per-channel EMG envelope peaks, and the
/// acceleration zero crossing from conditioned recordings.
///
/// Inputs are expected pre-conditioned (filtered angles, enveloped EMG);
/// see the signal module.
pub fn extract_feature_points(
    motion: &MotionRecording,
    emg: Option<&EmgRecording>,
    _spec: &PhaseSpec,
) -> Result<FeaturePoints, PhaseError> {
    let velocity = numeric_derivative(&motion.elbow_angle);
    let speed = TimeSeries::new(
        velocity.t().to_vec(),
        velocity.values().iter().map(|w| w.abs()).collect(),
    )
    .expect("derivative preserves the time base");

    let max_speed = speed.values().iter().cloned().fold(0.0, f64::max);
    let prominence = 1e-3 * max_speed;
    let peaks = detect_peaks(&speed, prominence);
    let (peak_time, peak_speed) = peaks
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(PhaseError::NoPeakFound)?;

    let emg_peaks = emg
        .map(|rec| {
            rec.channels()
                .iter()
                .map(|(name, channel)| {
                    let lo = channel
                        .values()
                        .iter()
                        .cloned()
                        .fold(f64::INFINITY, f64::min);
                    let hi = channel
                        .values()
                        .iter()
                        .cloned()
                        .fold(f64::NEG_INFINITY, f64::max);
                    ChannelPeaks {
                        channel: name.to_string(),
                        peaks: detect_peaks(channel, 0.1 * (hi - lo)),
                    }
                })
                .collect()
        })
        .unwrap_or_default();

    // Ramp start: speed first reaches 5% of its maximum.
    let accel = numeric_derivative(&velocity);
    let ramp_start = speed
        .values()
        .iter()
        .position(|&s| s >= 0.05 * max_speed)
        .unwrap_or(0);
    let accel_zero_crossing_s = accel
        .values()
        .windows(2)
        .enumerate()
        .skip(ramp_start)
        .find(|(_, pair)| pair[0] != 0.0 && pair[0].signum() != pair[1].signum())
        .map(|(i, pair)| {
            let (t0, t1) = (accel.t()[i], accel.t()[i + 1]);
            t0 + (t1 - t0) * pair[0] / (pair[0] - pair[1])
        });

    Ok(FeaturePoints {
        velocity_peak: VelocityPeak {
            time_s: peak_time,
            angle_deg: motion.elbow_angle.interp(peak_time),
            speed_deg_s: peak_speed,
        },
        emg_peaks,
        accel_zero_crossing_s,
    })
}

/// Elbow angle (degrees) at the sampled trajectory's velocity argmax and its
/// deviation from the target peak angle.
///
/// For two-joint arm trajectories the elbow is the second joint; single-joint
/// trajectories are treated as the elbow alone. Angles are radians in the
/// trajectory and degrees here.
pub fn check_peak_placement(traj: &SampledTrajectory, spec: &PhaseSpec) -> (f64, f64) {
    let elbow = if traj.joints.len() >= 2 {
        &traj.joints[1]
    } else {
        &traj.joints[0]
    };
    let argmax = elbow
        .omega
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let peak_angle_deg = elbow.theta[argmax].to_degrees();
    let deviation = (peak_angle_deg - spec.target_peak_angle_deg).abs();
    (peak_angle_deg, deviation)
}

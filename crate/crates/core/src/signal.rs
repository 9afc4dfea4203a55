//! File-based ingestion and conditioning of motion and EMG recordings:
//! zero-phase low-pass filtering, rectified envelopes, numeric
//! differentiation, and prominence-based peak detection.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("empty file")]
    EmptyFile,
    #[error("malformed header `{0}`")]
    MalformedHeader(String),
    #[error("wrong number of cells on line {line}")]
    ColumnCount { line: usize },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric cell `{cell}` on line {line}")]
    NonNumericCell { cell: String, line: usize },
    #[error("non-monotonic time on line {line}")]
    NonMonotonicTime { line: usize },
    #[error("time series must be non-empty with equal-length, finite columns")]
    InvalidSeries,
    #[error("cutoff {cutoff_hz} Hz must lie in (0, {nyquist_hz}) Hz")]
    CutoffOutOfRange { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("invalid filter spec: {0}")]
    InvalidFilterSpec(&'static str),
}

impl SignalError {
    /// Stable machine-readable error name.
    pub fn kind(&self) -> &'static str {
        match self {
            SignalError::Io(_) => "io",
            SignalError::EmptyFile => "empty_file",
            SignalError::MalformedHeader(_) => "malformed_header",
            SignalError::ColumnCount { .. } => "column_count",
            SignalError::MissingColumn(_) => "missing_column",
            SignalError::NonNumericCell { .. } => "non_numeric_cell",
            SignalError::NonMonotonicTime { .. } => "non_monotonic_time",
            SignalError::InvalidSeries => "invalid_series",
            SignalError::CutoffOutOfRange { .. } => "cutoff_out_of_range",
            SignalError::InvalidFilterSpec(_) => "invalid_filter_spec",
        }
    }
}

/// Scalar samples on a strictly increasing time base.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self, SignalError> {
        if t.is_empty() || t.len() != v.len() {
            return Err(SignalError::InvalidSeries);
        }
        if t.iter().any(|x| !x.is_finite()) || v.iter().any(|x| !x.is_finite()) {
            return Err(SignalError::InvalidSeries);
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SignalError::InvalidSeries);
        }
        Ok(Self { t, v })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    fn median_step(&self) -> f64 {
        let mut steps: Vec<f64> = self.t.windows(2).map(|w| w[1] - w[0]).collect();
        steps.sort_by(f64::total_cmp);
        steps[steps.len() / 2]
    }

    fn is_uniform(&self) -> bool {
        let dt = self.median_step();
        self.t
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt)
    }

    /// Linear value lookup at time `x` (clamped to the span).
    pub fn interp(&self, x: f64) -> f64 {
        if x <= self.t[0] {
            return self.v[0];
        }
        let last = self.t.len() - 1;
        if x >= self.t[last] {
            return self.v[last];
        }
        let i = self.t.partition_point(|&tt| tt <= x) - 1;
        let frac = (x - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] + frac * (self.v[i + 1] - self.v[i])
    }

    /// Linearly resamples onto a uniform grid at the median sampling rate,
    /// anchoring both endpoints.
    pub fn resample_uniform(&self) -> Self {
        if self.len() < 2 || self.is_uniform() {
            return self.clone();
        }
        let (start, end) = self.span();
        let span = end - start;
        let steps = (span / self.median_step()).round().max(1.0) as usize;
        let dt = span / steps as f64;
        let t: Vec<f64> = (0..=steps).map(|i| start + i as f64 * dt).collect();
        let v: Vec<f64> = t.iter().map(|&x| self.interp(x)).collect();
        Self { t, v }
    }
}

/// Low-pass filter parameters: Butterworth cutoff and order.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FilterSpec {
    pub cutoff_hz: f64,
    pub order: u32,
}

impl FilterSpec {
    pub fn new(cutoff_hz: f64, order: u32) -> Result<Self, SignalError> {
        if !cutoff_hz.is_finite() || cutoff_hz <= 0.0 {
            return Err(SignalError::InvalidFilterSpec("cutoff must be positive"));
        }
        if order == 0 || order > 8 {
            return Err(SignalError::InvalidFilterSpec("order must be in 1..=8"));
        }
        Ok(Self { cutoff_hz, order })
    }

    /// Default conditioning for joint-angle recordings: 6 Hz, 2nd order.
    pub fn motion_default() -> Self {
        Self {
            cutoff_hz: 6.0,
            order: 2,
        }
    }

    /// Default EMG envelope smoothing: 4 Hz, 2nd order.
    pub fn emg_default() -> Self {
        Self {
            cutoff_hz: 4.0,
            order: 2,
        }
    }
}

/// One second-order (or first-order, when `b2 = a2 = 0`) filter section.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn lowpass(k: f64, q: f64) -> Self {
        let norm = 1.0 / (1.0 + k / q + k * k);
        Self {
            b0: k * k * norm,
            b1: 2.0 * k * k * norm,
            b2: k * k * norm,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - k / q + k * k) * norm,
        }
    }

    fn lowpass_first_order(k: f64) -> Self {
        Self {
            b0: k / (k + 1.0),
            b1: k / (k + 1.0),
            b2: 0.0,
            a1: (k - 1.0) / (k + 1.0),
            a2: 0.0,
        }
    }

    fn apply(&self, x: &mut [f64]) {
        let (mut x1, mut x2, mut y1, mut y2) = (x[0], x[0], x[0], x[0]);
        for value in x.iter_mut() {
            let x0 = *value;
            let y0 = self.b0 * x0 + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
            x2 = x1;
            x1 = x0;
            y2 = y1;
            y1 = y0;
            *value = y0;
        }
    }

    /// Squared magnitude of the section response at digital frequency
    /// `omega` rad/sample.
    fn magnitude_sq(&self, omega: f64) -> f64 {
        let (c1, s1) = (omega.cos(), omega.sin());
        let (c2, s2) = ((2.0 * omega).cos(), (2.0 * omega).sin());
        let num_re = self.b0 + self.b1 * c1 + self.b2 * c2;
        let num_im = -(self.b1 * s1 + self.b2 * s2);
        let den_re = 1.0 + self.a1 * c1 + self.a2 * c2;
        let den_im = -(self.a1 * s1 + self.a2 * s2);
        (num_re * num_re + num_im * num_im) / (den_re * den_re + den_im * den_im)
    }
}

/// Butterworth low-pass as cascaded sections with prewarped cutoff.
fn butterworth_sections(spec: &FilterSpec, fs: f64) -> Vec<Biquad> {
    let k = (std::f64::consts::PI * spec.cutoff_hz / fs).tan();
    let n = spec.order;
    let odd = n & 1 == 1;
    let mut sections = Vec::new();
    if odd {
        sections.push(Biquad::lowpass_first_order(k));
    }
    for i in 0..n / 2 {
        let angle = if odd {
            (i + 1) as f64 * std::f64::consts::PI / n as f64
        } else {
            (2 * i + 1) as f64 * std::f64::consts::PI / (2.0 * n as f64)
        };
        sections.push(Biquad::lowpass(k, 1.0 / (2.0 * angle.cos())));
    }
    sections
}

/// Squared cascade magnitude at frequency `f_hz`, doubled passes included;
/// this is the analytic response of [`lowpass_zero_phase`].
pub fn zero_phase_gain(spec: &FilterSpec, fs: f64, f_hz: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * f_hz / fs;
    butterworth_sections(spec, fs)
        .iter()
        .map(|s| s.magnitude_sq(omega))
        .product()
}

/// Forward-backward Butterworth low-pass (zero phase lag), with odd
/// reflection padding at both ends. Non-uniform input is resampled to the
/// median rate first.
pub fn lowpass_zero_phase(
    series: &TimeSeries,
    spec: &FilterSpec,
) -> Result<TimeSeries, SignalError> {
    FilterSpec::new(spec.cutoff_hz, spec.order)?;
    let series = series.resample_uniform();
    if series.len() < 3 {
        return Ok(series);
    }
    let dt = series.median_step();
    let fs = 1.0 / dt;
    let nyquist = fs / 2.0;
    if spec.cutoff_hz >= nyquist {
        return Err(SignalError::CutoffOutOfRange {
            cutoff_hz: spec.cutoff_hz,
            nyquist_hz: nyquist,
        });
    }

    let n = series.len();
    let pad = ((3.0 * fs / spec.cutoff_hz).ceil() as usize).clamp(3, n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    // Odd reflection keeps linear trends and suppresses edge transients.
    for i in (1..=pad).rev() {
        ext.push(2.0 * series.v[0] - series.v[i]);
    }
    ext.extend_from_slice(&series.v);
    for i in (n - 1 - pad..n - 1).rev() {
        ext.push(2.0 * series.v[n - 1] - series.v[i]);
    }

    let sections = butterworth_sections(spec, fs);
    for section in &sections {
        section.apply(&mut ext);
    }
    ext.reverse();
    for section in &sections {
        section.apply(&mut ext);
    }
    ext.reverse();

    let v = ext[pad..pad + n].to_vec();
    Ok(TimeSeries { t: series.t, v })
}

/// Full-wave rectification followed by zero-phase low-pass smoothing;
/// clamped non-negative.
pub fn emg_envelope(channel: &TimeSeries, spec: &FilterSpec) -> Result<TimeSeries, SignalError> {
    let rectified = TimeSeries {
        t: channel.t.clone(),
        v: channel.v.iter().map(|x| x.abs()).collect(),
    };
    let mut filtered = lowpass_zero_phase(&rectified, spec)?;
    filtered.v.iter_mut().for_each(|x| *x = x.max(0.0));
    Ok(filtered)
}

/// Local maxima with topographic prominence of at least `min_prominence`,
/// ordered by time. Plateaus report their center sample.
pub fn detect_peaks(series: &TimeSeries, min_prominence: f64) -> Vec<(f64, f64)> {
    let v = &series.v;
    let n = v.len();
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    let mut i = 1;
    while i < n - 1 {
        if v[i] <= v[i - 1] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && v[j + 1] == v[i] {
            j += 1;
        }
        if j + 1 >= n || v[j + 1] >= v[i] {
            i = j + 1;
            continue;
        }
        // Prominence: lowest descent on each side before meeting a higher
        // sample or the boundary; the higher of the two bases bounds it.
        let mut left_min = v[i];
        for k in (0..i).rev() {
            if v[k] > v[i] {
                break;
            }
            left_min = left_min.min(v[k]);
        }
        let mut right_min = v[i];
        for value in &v[j + 1..] {
            if *value > v[i] {
                break;
            }
            right_min = right_min.min(*value);
        }
        let prominence = v[i] - left_min.max(right_min);
        if prominence >= min_prominence {
            let mid = (i + j) / 2;
            peaks.push((series.t[mid], v[mid]));
        }
        i = j + 1;
    }
    peaks
}

/// Derivative by central differences; second-order one-sided stencils at the
/// endpoints when spacing is uniform, simple slopes otherwise.
pub fn numeric_derivative(series: &TimeSeries) -> TimeSeries {
    let t = &series.t;
    let v = &series.v;
    let n = t.len();
    if n == 1 {
        return TimeSeries {
            t: t.clone(),
            v: vec![0.0],
        };
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    if n == 2 {
        let slope = (v[1] - v[0]) / (t[1] - t[0]);
        return TimeSeries {
            t: t.clone(),
            v: vec![slope, slope],
        };
    }
    let h0 = t[1] - t[0];
    if ((t[2] - t[1]) - h0).abs() <= 1e-9 * h0 {
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h0);
    } else {
        d[0] = (v[1] - v[0]) / h0;
    }
    let h1 = t[n - 1] - t[n - 2];
    if ((t[n - 2] - t[n - 3]) - h1).abs() <= 1e-9 * h1 {
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h1);
    } else {
        d[n - 1] = (v[n - 1] - v[n - 2]) / h1;
    }
    TimeSeries { t: t.clone(), v: d }
}

/// Shoulder/elbow angle recordings in degrees, with optional wrist
/// acceleration, sharing one time base.
#[derive(Debug, Clone)]
pub struct MotionRecording {
    pub shoulder_angle: TimeSeries,
    pub elbow_angle: TimeSeries,
    pub wrist_accel: Option<TimeSeries>,
}

/// Four named EMG channels in millivolts on a shared time base.
#[derive(Debug, Clone)]
pub struct EmgRecording {
    pub deltoid: TimeSeries,
    pub triceps: TimeSeries,
    pub biceps: TimeSeries,
    pub brachioradialis: TimeSeries,
}

impl EmgRecording {
    pub fn channels(&self) -> [(&'static str, &TimeSeries); 4] {
        [
            ("deltoid", &self.deltoid),
            ("triceps", &self.triceps),
            ("biceps", &self.biceps),
            ("brachioradialis", &self.brachioradialis),
        ]
    }
}

/// A parsed numeric table: shared `t` column plus named value columns.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub names: Vec<String>,
    pub t: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn read<R: Read>(reader: R) -> Result<Self, SignalError> {
        let mut lines = BufReader::new(reader).lines();
        let header = match lines.next() {
            None => return Err(SignalError::EmptyFile),
            Some(line) => line?,
        };
        if header.trim().is_empty() {
            return Err(SignalError::EmptyFile);
        }
        let mut parts = header.trim().split(',');
        if parts.next() != Some("t") {
            return Err(SignalError::MalformedHeader(header.clone()));
        }
        let names: Vec<String> = parts.map(str::to_string).collect();
        if names.is_empty() || names.iter().any(|n| n.is_empty()) {
            return Err(SignalError::MalformedHeader(header.clone()));
        }

        let mut t = Vec::new();
        let mut columns = vec![Vec::new(); names.len()];
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let n_line = idx + 2;
            let cells: Vec<&str> = line.trim().split(',').collect();
            if cells.len() != names.len() + 1 {
                return Err(SignalError::ColumnCount { line: n_line });
            }
            let mut row = Vec::with_capacity(cells.len());
            for cell in &cells {
                let value: f64 = cell.parse().map_err(|_| SignalError::NonNumericCell {
                    cell: cell.to_string(),
                    line: n_line,
                })?;
                if !value.is_finite() {
                    return Err(SignalError::NonNumericCell {
                        cell: cell.to_string(),
                        line: n_line,
                    });
                }
                row.push(value);
            }
            if let Some(&last) = t.last() {
                if row[0] <= last {
                    return Err(SignalError::NonMonotonicTime { line: n_line });
                }
            }
            t.push(row[0]);
            for (column, value) in columns.iter_mut().zip(&row[1..]) {
                column.push(*value);
            }
        }
        if t.is_empty() {
            return Err(SignalError::EmptyFile);
        }
        Ok(Self { names, t, columns })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), SignalError> {
        writeln!(w, "t,{}", self.names.join(","))?;
        for i in 0..self.t.len() {
            let mut row = format!("{}", self.t[i]);
            for column in &self.columns {
                row.push_str(&format!(",{}", column[i]));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<TimeSeries, SignalError> {
        let idx = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| SignalError::MissingColumn(name.to_string()))?;
        TimeSeries::new(self.t.clone(), self.columns[idx].clone())
    }
}

/// Loads `t,shoulder_angle,elbow_angle[,wrist_accel]` (degrees, m/s^2).
pub fn load_motion_csv<P: AsRef<Path>>(path: P) -> Result<MotionRecording, SignalError> {
    read_motion_csv(File::open(path)?)
}

pub fn read_motion_csv<R: Read>(reader: R) -> Result<MotionRecording, SignalError> {
    let table = SeriesTable::read(reader)?;
    for name in &table.names {
        if !["shoulder_angle", "elbow_angle", "wrist_accel"].contains(&name.as_str()) {
            return Err(SignalError::MalformedHeader(name.clone()));
        }
    }
    let wrist_accel = if table.names.iter().any(|n| n == "wrist_accel") {
        Some(table.column("wrist_accel")?)
    } else {
        None
    };
    Ok(MotionRecording {
        shoulder_angle: table.column("shoulder_angle")?,
        elbow_angle: table.column("elbow_angle")?,
        wrist_accel,
    })
}

/// Loads `t,deltoid,triceps,biceps,brachioradialis` (millivolts).
pub fn load_emg_csv<P: AsRef<Path>>(path: P) -> Result<EmgRecording, SignalError> {
    read_emg_csv(File::open(path)?)
}

pub fn read_emg_csv<R: Read>(reader: R) -> Result<EmgRecording, SignalError> {
    let table = SeriesTable::read(reader)?;
    for name in &table.names {
        if !["deltoid", "triceps", "biceps", "brachioradialis"].contains(&name.as_str()) {
            return Err(SignalError::MalformedHeader(name.clone()));
        }
    }
    Ok(EmgRecording {
        deltoid: table.column("deltoid")?,
        triceps: table.column("triceps")?,
        biceps: table.column("biceps")?,
        brachioradialis: table.column("brachioradialis")?,
    })
}

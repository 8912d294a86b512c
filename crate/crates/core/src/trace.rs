//! Viewpoint traces, baseline predictors on the proactive-streaming timeline,
//! and aggregate leakage statistics over a population of prediction errors.
//!
//! # Trace CSV schema (version 1)
//!
//! ```text
//! user_id,video_id,timestamp_s,theta_rad,phi_rad
//! u01,v03,0.0,0.1234,-0.2
//! ```
//!
//! UTF-8, header row required, one row per sample. `theta_rad` is longitude
//! in `[−π, π]` (π is wrapped to −π), `phi_rad` is latitude in `[−π/2, π/2]`
//! with 0 on the equator. Rows belonging to one `(user_id, video_id)` pair
//! form one trace; traces are returned in order of first appearance and
//! their timestamps must be strictly increasing with uniform spacing.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::leakage::{self, ErrorRange, PrivacyRequirement};
use crate::qoe::{self, OverlapCase};
use crate::sphere::{self, cross, dot, norm, CapRadius, SphericalPoint};

pub const TRACE_HEADER: [&str; 5] = ["user_id", "video_id", "timestamp_s", "theta_rad", "phi_rad"];

/// Allowed deviation from uniform sample spacing, seconds.
pub const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub timestamp: f64,
    pub point: SphericalPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewpointTrace {
    pub user_id: String,
    pub video_id: String,
    pub samples: Vec<TraceSample>,
}

impl ViewpointTrace {
    pub fn name(&self) -> String {
        format!("{}/{}", self.user_id, self.video_id)
    }

    /// Mean sample spacing in seconds, `None` for fewer than two samples.
    pub fn spacing(&self) -> Option<f64> {
        let n = self.samples.len();
        (n >= 2)
            .then(|| (self.samples[n - 1].timestamp - self.samples[0].timestamp) / (n - 1) as f64)
    }

    /// Index of the first sample violating strict monotonicity or uniform
    /// spacing, with a description.
    fn first_timing_violation(&self) -> Option<(usize, String)> {
        let dt = self.spacing()?;
        for (i, w) in self.samples.windows(2).enumerate() {
            if w[1].timestamp <= w[0].timestamp {
                return Some((
                    i + 1,
                    format!("timestamp {} does not increase", w[1].timestamp),
                ));
            }
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            let step = w[1].timestamp - w[0].timestamp;
            if (step - dt).abs() > SPACING_TOL {
                return Some((
                    i + 1,
                    format!("sample spacing {step} deviates from {dt} by more than {SPACING_TOL}"),
                ));
            }
        }
        None
    }
}

fn data_err(line: u64, message: impl Into<String>) -> Error {
    Error::TraceData {
        line,
        message: message.into(),
    }
}

/// Loads and validates traces from a CSV file.
pub fn load_traces(path: impl AsRef<Path>) -> Result<Vec<ViewpointTrace>> {
    let f = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_traces(f)
}

pub fn read_traces<R: Read>(reader: R) -> Result<Vec<ViewpointTrace>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| data_err(1, format!("unreadable header: {e}")))?
        .clone();
    if header.is_empty() {
        return Err(data_err(1, "empty file: zero traces"));
    }
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(data_err(
            1,
            format!("header must be `{}`", TRACE_HEADER.join(",")),
        ));
    }

    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: HashMap<(String, String), (Vec<TraceSample>, Vec<u64>)> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != TRACE_HEADER.len() {
            return Err(data_err(
                line,
                format!("expected 5 fields, found {}", rec.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    data_err(
                        line,
                        format!("{} is not a finite number: `{}`", TRACE_HEADER[i], &rec[i]),
                    )
                })
        };
        let (t, theta, phi) = (num(2)?, num(3)?, num(4)?);
        if !(-PI..=PI).contains(&theta) {
            return Err(data_err(
                line,
                format!("theta_rad = {theta} outside [-pi, pi]"),
            ));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&phi) {
            return Err(data_err(
                line,
                format!("phi_rad = {phi} outside [-pi/2, pi/2]"),
            ));
        }
        let point = SphericalPoint::new(theta, phi).map_err(|e| data_err(line, e.to_string()))?;
        let key = (rec[0].to_string(), rec[1].to_string());
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (Vec::new(), Vec::new())
        });
        entry.0.push(TraceSample {
            timestamp: t,
            point,
        });
        entry.1.push(line);
    }
    if order.is_empty() {
        return Err(data_err(1, "no samples: zero traces"));
    }

    let mut traces = Vec::with_capacity(order.len());
    for key in order {
        let (samples, lines) = groups.remove(&key).unwrap();
        let trace = ViewpointTrace {
            user_id: key.0,
            video_id: key.1,
            samples,
        };
        if let Some((i, msg)) = trace.first_timing_violation() {
            return Err(data_err(lines[i], format!("trace {}: {msg}", trace.name())));
        }
        traces.push(trace);
    }
    Ok(traces)
}

/// Writes traces in the schema accepted by [`read_traces`], with
/// round-trip-exact floats.
pub fn write_traces<W: Write>(writer: W, traces: &[ViewpointTrace]) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER).map_err(io)?;
    for tr in traces {
        for s in &tr.samples {
            w.write_record([
                tr.user_id.as_str(),
                tr.video_id.as_str(),
                &s.timestamp.to_string(),
                &s.point.theta().to_string(),
                &s.point.phi().to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Head-motion model for synthetic traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SyntheticModel {
    /// Each step is a von Mises-Fisher perturbation of the current viewpoint
    /// with concentration `kappa`.
    RandomWalk { kappa: f64 },
    /// Constant angular speed `rate` (rad/s) along a random great circle.
    GreatCircleDrift { rate: f64 },
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn axpy(a: f64, x: [f64; 3], b: f64, y: [f64; 3]) -> [f64; 3] {
    [
        a * x[0] + b * y[0],
        a * x[1] + b * y[1],
        a * x[2] + b * y[2],
    ]
}

/// Orthonormal basis of the tangent plane at unit vector `p`.
fn tangent_basis(p: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if p[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let t1 = unit(cross(helper, p));
    (t1, cross(p, t1))
}

/// Cosine of the deviation angle of a vMF(κ) draw on the 2-sphere.
fn vmf_cos_angle<R: Rng>(rng: &mut R, kappa: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let w = 1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa;
    w.clamp(-1.0, 1.0)
}

/// Deterministic synthetic traces; trace `i` uses its own RNG stream.
pub fn generate_synthetic_traces(
    model: SyntheticModel,
    n_traces: usize,
    duration: f64,
    rate: f64,
    seed: u64,
) -> Result<Vec<ViewpointTrace>> {
    if n_traces == 0 {
        return Err(Error::invalid("n_traces", 0.0, "must be at least 1"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid("duration", duration, "must be positive"));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid("rate", rate, "must be positive"));
    }
    match model {
        SyntheticModel::RandomWalk { kappa } if !(kappa.is_finite() && kappa > 0.0) => {
            return Err(Error::invalid("kappa", kappa, "must be positive"));
        }
        SyntheticModel::GreatCircleDrift { rate: w } if !(w.is_finite() && w >= 0.0) => {
            return Err(Error::invalid("drift rate", w, "must be non-negative"));
        }
        _ => {}
    }
    let n_samples = (duration * rate).round() as usize;
    if n_samples == 0 {
        return Err(Error::invalid("duration", duration, "yields zero samples"));
    }

    Ok((0..n_traces)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let start = sphere::uniform_vector(&mut rng);
            let ts = |k: usize| k as f64 / rate;
            let points: Vec<[f64; 3]> = match model {
                SyntheticModel::RandomWalk { kappa } => {
                    let mut p = start;
                    (0..n_samples)
                        .map(|k| {
                            if k > 0 {
                                let w = vmf_cos_angle(&mut rng, kappa);
                                let az: f64 = rng.random_range(-PI..PI);
                                let (t1, t2) = tangent_basis(p);
                                let dir = axpy(az.cos(), t1, az.sin(), t2);
                                p = unit(axpy(w, p, (1.0 - w * w).max(0.0).sqrt(), dir));
                            }
                            p
                        })
                        .collect()
                }
                SyntheticModel::GreatCircleDrift { rate: w } => {
                    let (t1, t2) = tangent_basis(start);
                    let az: f64 = rng.random_range(-PI..PI);
                    let dir = axpy(az.cos(), t1, az.sin(), t2);
                    (0..n_samples)
                        .map(|k| {
                            let a = w * ts(k);
                            axpy(a.cos(), start, a.sin(), dir)
                        })
                        .collect()
                }
            };
            ViewpointTrace {
                user_id: format!("synth{i:04}"),
                video_id: "synthetic".to_string(),
                samples: points
                    .into_iter()
                    .enumerate()
                    .map(|(k, v)| TraceSample {
                        timestamp: ts(k),
                        point: SphericalPoint::from_vector(v),
                    })
                    .collect(),
            }
        })
        .collect())
}

/// Proactive-streaming timeline.
///
/// For segment `l ≥ passive_prefix`, the prediction window is
/// `[l·T_pdw, (l+1)·T_pdw)`; the observation window ends `T_cc` before it and
/// lasts `T_obw`. The timeline requires `T_obw + T_cc = passive_prefix·T_pdw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowingConfig {
    pub t_obw: f64,
    pub t_cc: f64,
    /// Prediction window, equal to the segment duration.
    pub t_pdw: f64,
    pub sample_rate: f64,
    /// Segments streamed passively before prediction starts.
    pub passive_prefix: u32,
}

impl Default for WindowingConfig {
    fn default() -> Self {
        Self {
            t_obw: 1.0,
            t_cc: 1.0,
            t_pdw: 1.0,
            sample_rate: 5.0,
            passive_prefix: 2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SampleTimeline {
    obs: usize,
    cc: usize,
    seg: usize,
    prefix: usize,
}

fn whole_samples(name: &'static str, secs: f64, rate: f64) -> Result<usize> {
    let x = secs * rate;
    if (x - x.round()).abs() > 1e-6 {
        return Err(Error::invalid(
            name,
            secs,
            "must span a whole number of samples",
        ));
    }
    Ok(x.round() as usize)
}

impl WindowingConfig {
    /// Proactive streaming time `T_ps = passive_prefix · T_pdw`.
    pub fn proactive_time(&self) -> f64 {
        f64::from(self.passive_prefix) * self.t_pdw
    }

    pub fn validate(&self) -> Result<()> {
        self.timeline().map(|_| ())
    }

    fn timeline(&self) -> Result<SampleTimeline> {
        for (name, v) in [
            ("t_obw", self.t_obw),
            ("t_pdw", self.t_pdw),
            ("sample_rate", self.sample_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, v, "must be positive"));
            }
        }
        if !(self.t_cc.is_finite() && self.t_cc >= 0.0) {
            return Err(Error::invalid("t_cc", self.t_cc, "must be non-negative"));
        }
        if ((self.t_obw + self.t_cc) - self.proactive_time()).abs() > 1e-9 {
            return Err(Error::invalid(
                "t_obw + t_cc",
                self.t_obw + self.t_cc,
                "must equal passive_prefix * t_pdw",
            ));
        }
        let rate = self.sample_rate;
        Ok(SampleTimeline {
            obs: whole_samples("t_obw", self.t_obw, rate)?,
            cc: whole_samples("t_cc", self.t_cc, rate)?,
            seg: whole_samples("t_pdw", self.t_pdw, rate)?,
            prefix: self.passive_prefix as usize,
        })
    }

    /// Minimum trace length in samples.
    pub fn min_samples(&self) -> usize {
        ((self.t_obw + self.t_cc + self.t_pdw) * self.sample_rate - 1e-9).ceil() as usize
    }

    /// Number of predicted samples in a trace of `n` samples.
    pub fn predicted_count(&self, n: usize) -> usize {
        let seg = (self.t_pdw * self.sample_rate).round() as usize;
        n.saturating_sub(self.passive_prefix as usize * seg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    /// Repeat the last observed viewpoint.
    LastPosition,
    /// Continue along the great circle through the last two observed
    /// viewpoints at their observed angular speed.
    GreatCircleExtrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub trace: usize,
    pub segment: usize,
    /// Sample index within the segment.
    pub frame: usize,
    pub e: f64,
    pub r_sv: Option<f64>,
    pub qoe: Option<f64>,
}

fn extrapolate(prev: [f64; 3], last: [f64; 3], steps: f64) -> [f64; 3] {
    let axis = cross(prev, last);
    let s = norm(axis);
    if s < 1e-15 {
        return last;
    }
    let step = s.atan2(dot(prev, last));
    let dir = cross(unit(axis), last);
    let a = step * steps;
    unit(axpy(a.cos(), last, a.sin(), dir))
}

/// Prediction errors of one trace, one per sample after the passive prefix.
pub fn predict(
    trace: &ViewpointTrace,
    trace_index: usize,
    win: &WindowingConfig,
    predictor: Predictor,
) -> Result<Vec<ErrorSample>> {
    let tl = win.timeline()?;
    let n = trace.samples.len();
    let need = win.min_samples();
    if n < need {
        return Err(Error::InsufficientTrace {
            trace: trace.name(),
            have: n,
            need,
        });
    }
    if let Some(dt) = trace.spacing() {
        if (dt - 1.0 / win.sample_rate).abs() > SPACING_TOL {
            return Err(Error::invalid(
                "sample_rate",
                win.sample_rate,
                "does not match the trace sample spacing",
            ));
        }
    }
    let vecs: Vec<[f64; 3]> = trace.samples.iter().map(|s| s.point.to_vector()).collect();
    let mut out = Vec::with_capacity(win.predicted_count(n));
    let mut segment = tl.prefix;
    while segment * tl.seg < n {
        let start = segment * tl.seg;
        // observation covers [obs_end - obs, obs_end); obs + cc == prefix * seg
        let obs_end = start - tl.cc;
        let last = obs_end - 1;
        for j in start..(start + tl.seg).min(n) {
            let predicted = match predictor {
                Predictor::LastPosition => vecs[last],
                Predictor::GreatCircleExtrapolation if tl.obs >= 2 => {
                    extrapolate(vecs[last - 1], vecs[last], (j - last) as f64)
                }
                Predictor::GreatCircleExtrapolation => vecs[last],
            };
            out.push(ErrorSample {
                trace: trace_index,
                segment,
                frame: j - start,
                e: sphere::vector_distance(vecs[j], predicted),
                r_sv: None,
                qoe: None,
            });
        }
        segment += 1;
    }
    Ok(out)
}

/// Runs [`predict`] over every trace and concatenates in trace order.
pub fn predict_all(
    exec: Exec,
    traces: &[ViewpointTrace],
    win: &WindowingConfig,
    predictor: Predictor,
) -> Result<Vec<ErrorSample>> {
    let per: Vec<Result<Vec<ErrorSample>>> =
        exec.map_range(traces.len(), |i| predict(&traces[i], i, win, predictor));
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

/// Errors compatible with a privacy requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSubset {
    pub lo: f64,
    pub hi: f64,
    pub errors: Vec<f64>,
    /// `None` when the subset is empty.
    pub mean: Option<f64>,
}

fn requirement_bounds(req: &PrivacyRequirement) -> Result<(f64, f64)> {
    leakage::error_range_for_requirement(req)
        .bounds()
        .ok_or(Error::Infeasible {
            max_leak_prob: req.max_leak_prob,
            minimum: leakage::error_upload_min_probability(req.epsilon),
        })
}

pub fn error_subset_for_requirement(
    errors: &[f64],
    req: &PrivacyRequirement,
) -> Result<ErrorSubset> {
    let (lo, hi) = requirement_bounds(req)?;
    let subset: Vec<f64> = errors
        .iter()
        .copied()
        .filter(|e| (lo..=hi).contains(e))
        .collect();
    let mean = (!subset.is_empty()).then(|| subset.iter().sum::<f64>() / subset.len() as f64);
    Ok(ErrorSubset {
        lo,
        hi,
        errors: subset,
        mean,
    })
}

/// Fractions of all errors in `[e_min, π/2]` (privacy-QoE tradeoff) and in
/// `[π/2, e_max]` (privacy consistent with QoE). `e = π/2` counts in both.
pub fn tradeoff_consistency_ratios(errors: &[f64], req: &PrivacyRequirement) -> Result<(f64, f64)> {
    let (lo, hi) = requirement_bounds(req)?;
    if errors.is_empty() {
        return Err(Error::invalid(
            "errors",
            0.0,
            "need at least one error sample",
        ));
    }
    let n = errors.len() as f64;
    let tradeoff = errors
        .iter()
        .filter(|e| (lo..=FRAC_PI_2).contains(*e))
        .count();
    let consist = errors
        .iter()
        .filter(|e| (FRAC_PI_2..=hi).contains(*e))
        .count();
    Ok((tradeoff as f64 / n, consist as f64 / n))
}

/// Open `r_sv` intervals over which the average QoE-upload leakage is
/// monotone (`I1`, `D2`, `I2`, `D1`) or flat (`C`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    pub i1: (f64, f64),
    pub d2: (f64, f64),
    pub c: (f64, f64),
    pub i2: (f64, f64),
    pub d1: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    I1,
    D2,
    C,
    I2,
    D1,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::I1, Region::D2, Region::C, Region::I2, Region::D1];

    pub fn name(self) -> &'static str {
        match self {
            Region::I1 => "I1",
            Region::D2 => "D2",
            Region::C => "C",
            Region::I2 => "I2",
            Region::D1 => "D1",
        }
    }
}

impl Regions {
    pub fn new(r_fov: f64, eps: f64) -> Self {
        let a = (eps / PI).asin();
        Self {
            i1: (0.0, r_fov - eps),
            d2: (r_fov - eps, r_fov - a),
            c: (r_fov - a, r_fov + a),
            i2: (r_fov + a, r_fov + eps),
            d1: (r_fov + eps, PI),
        }
    }

    pub fn bounds(&self, region: Region) -> (f64, f64) {
        match region {
            Region::I1 => self.i1,
            Region::D2 => self.d2,
            Region::C => self.c,
            Region::I2 => self.i2,
            Region::D1 => self.d1,
        }
    }

    /// Region strictly containing `r_sv`; `None` on a boundary or endpoint.
    pub fn locate(&self, r_sv: f64) -> Option<Region> {
        Region::ALL.into_iter().find(|&g| {
            let (lo, hi) = self.bounds(g);
            r_sv > lo && r_sv < hi
        })
    }
}

/// Per-case quantities; `degenerate` is non-zero only at `r_sv ∈ {0, π}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerCase {
    pub fov_in_sfov: f64,
    pub sfov_in_fov: f64,
    pub disjoint: f64,
    pub sfov_complement_in_fov: f64,
    pub remaining: f64,
    pub degenerate: f64,
}

impl PerCase {
    pub fn get(&self, case: OverlapCase) -> f64 {
        match case {
            OverlapCase::FovInSfov => self.fov_in_sfov,
            OverlapCase::SfovInFov => self.sfov_in_fov,
            OverlapCase::Disjoint => self.disjoint,
            OverlapCase::SfovComplementInFov => self.sfov_complement_in_fov,
            OverlapCase::Remaining => self.remaining,
            _ => self.degenerate,
        }
    }

    fn slot(&mut self, case: OverlapCase) -> &mut f64 {
        match case {
            OverlapCase::FovInSfov => &mut self.fov_in_sfov,
            OverlapCase::SfovInFov => &mut self.sfov_in_fov,
            OverlapCase::Disjoint => &mut self.disjoint,
            OverlapCase::SfovComplementInFov => &mut self.sfov_complement_in_fov,
            OverlapCase::Remaining => &mut self.remaining,
            _ => &mut self.degenerate,
        }
    }

    /// Sum in fixed field order.
    pub fn total(&self) -> f64 {
        self.fov_in_sfov
            + self.sfov_in_fov
            + self.disjoint
            + self.sfov_complement_in_fov
            + self.remaining
            + self.degenerate
    }
}

/// Average-leakage statistics at one `r_sv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r_sv: f64,
    /// Fraction of errors in each case.
    pub ratios: PerCase,
    /// Each case's contribution to the average leakage.
    pub components: PerCase,
    pub avg_leakage: f64,
    pub mean_qoe: f64,
    pub region: Option<Region>,
}

fn sweep_point(errors: &[f64], r_fov: f64, eps: f64, r_sv: f64, regions: &Regions) -> SweepPoint {
    let n = errors.len() as f64;
    let mut counts = [0u64; 7];
    let idx = |c: OverlapCase| c as usize;
    let mut remaining_sum = 0.0;
    let mut qoe_sum = 0.0;
    for &e in errors {
        let (case, q) = qoe::qoe_unchecked(r_fov, r_sv, e);
        counts[idx(case)] += 1;
        qoe_sum += q;
        if case == OverlapCase::Remaining {
            remaining_sum += leakage::leak_prob_from_error_unchecked(e, eps).probability;
        }
    }
    let mut ratios = PerCase::default();
    let mut components = PerCase::default();
    for case in [
        OverlapCase::FovInSfov,
        OverlapCase::SfovInFov,
        OverlapCase::Disjoint,
        OverlapCase::SfovComplementInFov,
        OverlapCase::Remaining,
    ] {
        let g = counts[idx(case)] as f64 / n;
        *ratios.slot(case) = g;
        *components.slot(case) = match case {
            OverlapCase::Remaining => remaining_sum / n,
            _ => g * leakage::constant_case_probability(case, r_fov, r_sv, eps).unwrap(),
        };
    }
    let degenerate =
        counts[idx(OverlapCase::DegenerateEmpty)] + counts[idx(OverlapCase::DegenerateFull)];
    ratios.degenerate = degenerate as f64 / n;
    components.degenerate = ratios.degenerate * leakage::global_min_probability(eps);
    SweepPoint {
        r_sv,
        ratios,
        components,
        avg_leakage: components.total(),
        mean_qoe: qoe_sum / n,
        region: regions.locate(r_sv),
    }
}

/// Average QoE-upload leakage, case ratios and mean QoE over `errors` at
/// every `r_sv` in `grid`.
pub fn average_leakage_sweep(
    exec: Exec,
    errors: &[f64],
    r_fov: CapRadius,
    eps: f64,
    grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    qoe::check_fov(r_fov)?;
    if !(eps.is_finite() && eps >= 0.0 && eps <= r_fov.value()) {
        return Err(Error::invalid("epsilon", eps, "must lie in [0, r_fov]"));
    }
    if errors.is_empty() {
        return Err(Error::invalid(
            "errors",
            0.0,
            "need at least one error sample",
        ));
    }
    if grid.is_empty() {
        return Err(Error::invalid("r_sv grid", 0.0, "must not be empty"));
    }
    for &e in errors {
        sphere::check_distance(e)?;
    }
    for &r in grid {
        CapRadius::new(r)?;
    }
    let regions = Regions::new(r_fov.value(), eps);
    Ok(exec.map(grid, |&r_sv| {
        sweep_point(errors, r_fov.value(), eps, r_sv, &regions)
    }))
}

/// Everything derived from one population of prediction errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_samples: usize,
    pub r_fov: f64,
    pub epsilon: f64,
    pub mean_error: f64,
    pub requirement: Option<PrivacyRequirement>,
    pub error_range: Option<ErrorRange>,
    /// Size and mean of the requirement-compatible subset.
    pub subset_size: Option<usize>,
    pub mean_error_over_subset: Option<f64>,
    pub gamma_tradeoff: Option<f64>,
    pub gamma_consist: Option<f64>,
    pub regions: Regions,
    pub points: Vec<SweepPoint>,
}

pub fn aggregate(
    exec: Exec,
    errors: &[f64],
    r_fov: CapRadius,
    eps: f64,
    requirement: Option<PrivacyRequirement>,
    grid: &[f64],
) -> Result<AggregateReport> {
    let points = average_leakage_sweep(exec, errors, r_fov, eps, grid)?;
    let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
    let (mut subset_size, mut subset_mean, mut gt, mut gc, mut range) =
        (None, None, None, None, None);
    if let Some(req) = &requirement {
        let r = leakage::error_range_for_requirement(req);
        range = Some(r);
        if r != ErrorRange::Infeasible {
            let sub = error_subset_for_requirement(errors, req)?;
            subset_size = Some(sub.errors.len());
            subset_mean = sub.mean;
            let (t, c) = tradeoff_consistency_ratios(errors, req)?;
            gt = Some(t);
            gc = Some(c);
        }
    }
    Ok(AggregateReport {
        n_samples: errors.len(),
        r_fov: r_fov.value(),
        epsilon: eps,
        mean_error,
        requirement,
        error_range: range,
        subset_size,
        mean_error_over_subset: subset_mean,
        gamma_tradeoff: gt,
        gamma_consist: gc,
        regions: Regions::new(r_fov.value(), eps),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const R_FOV: f64 = 0.873;

    fn constant_trace(n: usize) -> ViewpointTrace {
        let p = SphericalPoint::new(0.4, -0.3).unwrap();
        ViewpointTrace {
            user_id: "u".into(),
            video_id: "v".into(),
            samples: (0..n)
                .map(|k| TraceSample {
                    timestamp: k as f64 / 5.0,
                    point: p,
                })
                .collect(),
        }
    }

    #[test]
    fn constant_trace_last_position_is_exact() {
        let errs = predict(
            &constant_trace(300),
            0,
            &WindowingConfig::default(),
            Predictor::LastPosition,
        )
        .unwrap();
        assert_eq!(errs.len(), 290);
        assert!(errs.iter().all(|s| s.e == 0.0));
    }

    #[test]
    fn drift_is_tracked_by_extrapolation() {
        let traces = generate_synthetic_traces(
            SyntheticModel::GreatCircleDrift { rate: 0.1 },
            3,
            60.0,
            5.0,
            1,
        )
        .unwrap();
        for tr in &traces {
            for w in tr.samples.windows(2) {
                let d = sphere::spherical_distance(&w[0].point, &w[1].point);
                assert!((d - 0.02).abs() < 1e-9, "{d}");
            }
        }
        let errs = predict_all(
            Exec::default(),
            &traces,
            &WindowingConfig::default(),
            Predictor::GreatCircleExtrapolation,
        )
        .unwrap();
        assert_eq!(errs.len(), 3 * 290);
        assert!(errs.iter().all(|s| s.e <= 1e-6));
    }

    #[test]
    fn concentrated_walk_barely_moves() {
        let tr =
            generate_synthetic_traces(SyntheticModel::RandomWalk { kappa: 1e6 }, 1, 10.0, 5.0, 3)
                .unwrap();
        let max = tr[0]
            .samples
            .windows(2)
            .map(|w| sphere::spherical_distance(&w[0].point, &w[1].point))
            .fold(0.0, f64::max);
        assert!(max < 0.01, "{max}");
    }

    #[test]
    fn generator_is_deterministic() {
        let m = SyntheticModel::RandomWalk { kappa: 500.0 };
        assert_eq!(
            generate_synthetic_traces(m, 2, 5.0, 5.0, 9).unwrap(),
            generate_synthetic_traces(m, 2, 5.0, 5.0, 9).unwrap()
        );
        assert_ne!(
            generate_synthetic_traces(m, 1, 5.0, 5.0, 9).unwrap(),
            generate_synthetic_traces(m, 1, 5.0, 5.0, 10).unwrap()
        );
    }

    #[test]
    fn short_trace_is_rejected() {
        let err = predict(
            &constant_trace(14),
            0,
            &WindowingConfig::default(),
            Predictor::LastPosition,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientTrace {
                have: 14,
                need: 15,
                ..
            }
        ));
        assert!(predict(
            &constant_trace(15),
            0,
            &WindowingConfig::default(),
            Predictor::LastPosition
        )
        .is_ok());
    }

    #[test]
    fn windowing_must_add_up() {
        let w = WindowingConfig {
            t_obw: 1.5,
            ..Default::default()
        };
        assert!(w.validate().is_err());
        assert!(WindowingConfig::default().validate().is_ok());
    }

    #[test]
    fn csv_loading() {
        let csv = "user_id,video_id,timestamp_s,theta_rad,phi_rad\n\
                   a,v,0.0,0.1,0.2\na,v,0.2,0.1,0.2\nb,v,0.0,-3.0,1.0\nb,v,0.2,3.14,-1.0\n";
        let tr = read_traces(csv.as_bytes()).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr[1].user_id, "b");
        assert_eq!(tr[1].samples.len(), 2);

        assert!(matches!(
            read_traces("".as_bytes()),
            Err(Error::TraceData { line: 1, .. })
        ));
        let bad_phi = "user_id,video_id,timestamp_s,theta_rad,phi_rad\na,v,0,0,0\na,v,0.2,0,2.0\n";
        match read_traces(bad_phi.as_bytes()) {
            Err(Error::TraceData { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("phi_rad"));
            }
            other => panic!("{other:?}"),
        }
        let non_mono =
            "user_id,video_id,timestamp_s,theta_rad,phi_rad\na,v,0,0,0\na,v,0.2,0,0\na,v,0.1,0,0\n";
        assert!(matches!(
            read_traces(non_mono.as_bytes()),
            Err(Error::TraceData { line: 4, .. })
        ));
        let bad_header = "user,video_id,timestamp_s,theta_rad,phi_rad\na,v,0,0,0\n";
        assert!(read_traces(bad_header.as_bytes()).is_err());
    }

    #[test]
    fn subset_and_ratios() {
        let eps = 0.4 * R_FOV;
        let r_fov = CapRadius::new(R_FOV).unwrap();
        let errs = [0.1, 0.5, 1.0, 2.0, 3.0];
        let all = PrivacyRequirement::new(eps, 1.0, r_fov).unwrap();
        let sub = error_subset_for_requirement(&errs, &all).unwrap();
        assert_eq!(sub.errors.len(), 5);
        assert!((sub.mean.unwrap() - 6.6 / 5.0).abs() < 1e-15);

        let bad = PrivacyRequirement::new(eps, 0.5 * eps / PI, r_fov).unwrap();
        assert!(matches!(
            error_subset_for_requirement(&errs, &bad),
            Err(Error::Infeasible { .. })
        ));

        let mid = [FRAC_PI_2; 4];
        let tight = PrivacyRequirement::new(eps, eps / PI, r_fov).unwrap();
        assert_eq!(
            tradeoff_consistency_ratios(&mid, &tight).unwrap(),
            (1.0, 1.0)
        );
        let small = [0.01, 0.02];
        let p = PrivacyRequirement::new(eps, 0.5, r_fov).unwrap();
        assert_eq!(tradeoff_consistency_ratios(&small, &p).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn hand_counted_ratios() {
        // errors 0.1 pi .. 0.9 pi against [0.19 pi, 0.81 pi]
        let errs: Vec<f64> = (1..=9).map(|k| k as f64 * 0.1 * PI).collect();
        let eps = 0.4 * R_FOV;
        let bound = eps / (PI * (0.19 * PI).sin());
        let req = PrivacyRequirement::new(eps, bound, CapRadius::new(R_FOV).unwrap()).unwrap();
        let (lo, hi) = requirement_bounds(&req).unwrap();
        assert!((lo - 0.19 * PI).abs() < 1e-12 && (hi - 0.81 * PI).abs() < 1e-12);
        let (t, c) = tradeoff_consistency_ratios(&errs, &req).unwrap();
        assert_eq!((t, c), (4.0 / 9.0, 4.0 / 9.0));
    }

    #[test]
    fn sweep_endpoints_and_single_error() {
        let eps = 0.3;
        let r_fov = CapRadius::new(R_FOV).unwrap();
        let pts = average_leakage_sweep(Exec::Sequential, &[0.2, 0.7, 1.4], r_fov, eps, &[0.0, PI])
            .unwrap();
        let pmin = (1.0 - eps.cos()) / 2.0;
        assert!((pts[0].avg_leakage - pmin).abs() < 1e-15);
        assert_eq!(pts[0].mean_qoe, 0.0);
        assert!((pts[1].avg_leakage - pmin).abs() < 1e-15);
        assert_eq!(pts[1].mean_qoe, 1.0);

        let pts = average_leakage_sweep(Exec::Sequential, &[0.2], r_fov, eps, &[1.2]).unwrap();
        assert_eq!(pts[0].ratios.fov_in_sfov, 1.0);
        let want = ((1.0 - eps.cos()) / (1.0 - (1.2f64 - R_FOV).cos())).min(1.0);
        assert!((pts[0].avg_leakage - want).abs() < 1e-15);
        assert!(average_leakage_sweep(Exec::Sequential, &[], r_fov, eps, &[1.0]).is_err());
        assert!(average_leakage_sweep(Exec::Sequential, &[0.1], r_fov, eps, &[]).is_err());
    }

    #[test]
    fn regions_tile_the_range() {
        let g = Regions::new(R_FOV, 0.4 * R_FOV);
        assert_eq!(g.i1.1, g.d2.0);
        assert_eq!(g.d2.1, g.c.0);
        assert_eq!(g.c.1, g.i2.0);
        assert_eq!(g.i2.1, g.d1.0);
        assert_eq!(g.locate(R_FOV), Some(Region::C));
        assert_eq!(g.locate(0.1), Some(Region::I1));
    }
}

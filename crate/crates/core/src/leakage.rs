//! ε-viewpoint leakage probability.
//!
//! The server knows the predicted viewpoint and either the prediction error
//! `e` or the QoE metric uploaded by the HMD. From that it narrows the real
//! viewpoint down to a *possible viewpoint zone*; the leakage probability is
//! the chance that a point drawn uniformly from the zone lands within `ε` of
//! the real viewpoint:
//!
//! ```text
//! Pr = min{ λ[N(O_v, ε)] / λ[Z_v], 1 }
//! ```
//!
//! With `e` uploaded the zone is a circle of circumference `2π sin e`; with
//! QoE uploaded it is a cap (constant-QoE cases), a circle (partial overlap,
//! after inverting QoE to `e`), or the whole sphere (`r_sv ∈ {0, π}`).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qoe::{self, OverlapCase, QoeValue};
use crate::sphere::{self, CapRadius};

/// Tolerance when matching an uploaded QoE against a case-constant value.
pub const QOE_MATCH_TOL: f64 = 1e-9;
/// Distance kept from the open ends of the partial-overlap error interval.
pub const BRACKET_MARGIN: f64 = 1e-12;
/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_TOL: f64 = 1e-13;
pub const MAX_BISECTION_ITERS: u32 = 64;

/// A user's privacy requirement: sensitive radius `ε` and the largest
/// tolerated leakage probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyRequirement {
    pub epsilon: f64,
    pub max_leak_prob: f64,
}

impl PrivacyRequirement {
    pub fn new(epsilon: f64, max_leak_prob: f64, r_fov: CapRadius) -> Result<Self> {
        check_epsilon(epsilon, r_fov.value())?;
        if !(max_leak_prob.is_finite() && (0.0..=1.0).contains(&max_leak_prob)) {
            return Err(Error::invalid(
                "max_leak_prob",
                max_leak_prob,
                "must lie in [0, 1]",
            ));
        }
        Ok(Self {
            epsilon,
            max_leak_prob,
        })
    }
}

fn check_epsilon(eps: f64, upper: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 && eps <= upper {
        Ok(())
    } else {
        Err(Error::invalid("epsilon", eps, "must lie in [0, r_fov]"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneKind {
    /// Measure is a length.
    Circle,
    /// Measure is an area.
    Cap,
    FullSphere,
    SinglePoint,
}

impl ZoneKind {
    pub fn name(self) -> &'static str {
        match self {
            ZoneKind::Circle => "circle",
            ZoneKind::Cap => "cap",
            ZoneKind::FullSphere => "full_sphere",
            ZoneKind::SinglePoint => "single_point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageResult {
    pub probability: f64,
    pub zone_kind: ZoneKind,
    pub zone_measure: f64,
    pub case: Option<OverlapCase>,
    /// Set when the uploaded QoE matched a case constant only within
    /// tolerance while a partial-overlap error could also explain it.
    pub ambiguous: bool,
}

/// Smallest leakage probability over any zone: the sensitive cap's share of
/// the sphere, `(1 − cos ε)/2`.
pub fn global_min_probability(eps: f64) -> f64 {
    sphere::versine(eps) / 2.0
}

/// Smallest leakage probability with the error uploaded, reached at `e = π/2`.
pub fn error_upload_min_probability(eps: f64) -> f64 {
    eps / PI
}

/// Leakage when the HMD uploads the prediction error `e`.
pub fn leak_prob_from_error(e: f64, eps: f64) -> Result<LeakageResult> {
    sphere::check_distance(e)?;
    check_epsilon(eps, FRAC_PI_2)?;
    Ok(leak_prob_from_error_unchecked(e, eps))
}

pub(crate) fn leak_prob_from_error_unchecked(e: f64, eps: f64) -> LeakageResult {
    if e == 0.0 || e == PI {
        return LeakageResult {
            probability: 1.0,
            zone_kind: ZoneKind::SinglePoint,
            zone_measure: 0.0,
            case: None,
            ambiguous: false,
        };
    }
    let s = e.sin();
    LeakageResult {
        probability: (eps / (PI * s)).clamp(0.0, 1.0),
        zone_kind: ZoneKind::Circle,
        zone_measure: TAU * s,
        case: None,
        ambiguous: false,
    }
}

/// Range of prediction error that keeps the error-upload leakage at or below
/// the user's bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorRange {
    FullRange,
    Interval { lo: f64, hi: f64 },
    Infeasible,
}

impl ErrorRange {
    /// Closed interval of admissible errors, if any.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            ErrorRange::FullRange => Some((0.0, PI)),
            ErrorRange::Interval { lo, hi } => Some((lo, hi)),
            ErrorRange::Infeasible => None,
        }
    }
}

pub fn error_range_for_requirement(req: &PrivacyRequirement) -> ErrorRange {
    let (eps, bound) = (req.epsilon, req.max_leak_prob);
    if bound >= 1.0 {
        return ErrorRange::FullRange;
    }
    if bound < error_upload_min_probability(eps) {
        return ErrorRange::Infeasible;
    }
    if eps == 0.0 {
        return ErrorRange::Interval { lo: 0.0, hi: PI };
    }
    let lo = (eps / (bound * PI)).min(1.0).asin();
    ErrorRange::Interval { lo, hi: PI - lo }
}

/// Errors for which the error-upload leakage is exactly one:
/// `[0, asin(ε/π)] ∪ [π − asin(ε/π), π]`.
pub fn full_leak_error_range(eps: f64) -> Result<[(f64, f64); 2]> {
    check_epsilon(eps, FRAC_PI_2)?;
    let a = (eps / PI).asin();
    Ok([(0.0, a), (PI - a, PI)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InferredError {
    Exact { e: f64 },
    Range { lo: f64, hi: f64 },
}

/// What the server learns about `e` from an uploaded QoE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorInference {
    pub kind: InferredError,
    pub case: OverlapCase,
    pub ambiguous: bool,
    pub iterations: u32,
}

/// Whether a constant case can occur at all for the given radii, with the
/// resulting error interval.
fn constant_case_error_range(case: OverlapCase, r_fov: f64, r_sv: f64) -> Option<(f64, f64)> {
    match case {
        OverlapCase::FovInSfov if r_sv >= r_fov => Some((0.0, r_sv - r_fov)),
        OverlapCase::SfovInFov if r_fov >= r_sv => Some((0.0, r_fov - r_sv)),
        OverlapCase::Disjoint if r_fov + r_sv <= PI => Some((r_fov + r_sv, PI)),
        OverlapCase::SfovComplementInFov if r_fov + r_sv >= PI => Some((TAU - r_fov - r_sv, PI)),
        _ => None,
    }
}

/// Radius of the possible viewpoint zone in a constant case; `None` otherwise.
pub fn zone_radius(case: OverlapCase, r_fov: f64, r_sv: f64) -> Option<f64> {
    match case {
        OverlapCase::FovInSfov | OverlapCase::SfovInFov => Some((r_sv - r_fov).abs()),
        OverlapCase::Disjoint | OverlapCase::SfovComplementInFov => Some((PI - r_sv - r_fov).abs()),
        _ => None,
    }
}

fn check_open_sfov(r_sv: CapRadius) -> Result<()> {
    let v = r_sv.value();
    if v > 0.0 && v < PI {
        Ok(())
    } else {
        Err(Error::invalid(
            "r_sv",
            v,
            "must lie in (0, pi) for inference",
        ))
    }
}

/// Recovers the prediction error, or the set it must lie in, from an
/// uploaded QoE.
///
/// Constant-case values are tried first (FoV in SFoV, SFoV in FoV, disjoint,
/// complement), each matched within [`QOE_MATCH_TOL`]. Otherwise QoE is
/// strictly decreasing in `e` across the partial-overlap interval and `e` is
/// found by bisection.
pub fn infer_error_from_qoe(
    q: QoeValue,
    r_fov: CapRadius,
    r_sv: CapRadius,
) -> Result<ErrorInference> {
    qoe::check_fov(r_fov)?;
    check_open_sfov(r_sv)?;
    let (rf, rs, qv) = (r_fov.value(), r_sv.value(), q.value());

    // QoE range of the partial-overlap case, from its two closed ends
    let rem_max = if rs >= rf {
        1.0
    } else {
        qoe::case_constant_qoe(OverlapCase::SfovInFov, rf, rs).unwrap()
    };
    let rem_min = if rf + rs <= PI {
        0.0
    } else {
        qoe::case_constant_qoe(OverlapCase::SfovComplementInFov, rf, rs).unwrap()
    };

    for case in OverlapCase::CONSTANT {
        let Some((lo, hi)) = constant_case_error_range(case, rf, rs) else {
            continue;
        };
        let value = qoe::case_constant_qoe(case, rf, rs).unwrap();
        if (qv - value).abs() <= QOE_MATCH_TOL {
            return Ok(ErrorInference {
                kind: InferredError::Range { lo, hi },
                case,
                ambiguous: qv > rem_min && qv < rem_max,
                iterations: 0,
            });
        }
    }

    if qv > rem_max || qv < rem_min {
        return Err(Error::InconsistentQoe {
            q: qv,
            r_fov: rf,
            r_sv: rs,
        });
    }

    let (mut lo, mut hi) = (
        (rf - rs).abs().max(BRACKET_MARGIN),
        (rf + rs).min(TAU - rf - rs) - BRACKET_MARGIN,
    );
    let mut iterations = 0;
    while hi - lo > BISECTION_TOL && iterations < MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let (_, qm) = qoe::qoe_unchecked(rf, rs, mid);
        if qm > qv {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(ErrorInference {
        kind: InferredError::Exact { e: 0.5 * (lo + hi) },
        case: OverlapCase::Remaining,
        ambiguous: false,
        iterations,
    })
}

/// Leakage over a cap-shaped zone of radius `r_z`.
pub fn cap_zone_probability(eps: f64, r_z: f64) -> f64 {
    let zone = sphere::versine(r_z);
    let hood = sphere::versine(eps);
    if zone <= hood {
        1.0
    } else {
        (hood / zone).clamp(0.0, 1.0)
    }
}

/// Leakage in a constant case via the shared zone-radius form.
pub fn constant_case_probability(
    case: OverlapCase,
    r_fov: f64,
    r_sv: f64,
    eps: f64,
) -> Option<f64> {
    zone_radius(case, r_fov, r_sv).map(|r_z| cap_zone_probability(eps, r_z))
}

/// Leakage in a constant case from each case's own closed form.
pub fn constant_case_probability_direct(
    case: OverlapCase,
    r_fov: f64,
    r_sv: f64,
    eps: f64,
) -> Option<f64> {
    let hood = sphere::versine(eps);
    let denom = match case {
        OverlapCase::FovInSfov => sphere::versine(r_sv - r_fov),
        OverlapCase::SfovInFov => sphere::versine(r_fov - r_sv),
        // 1 + cos s = 2 cos²(s/2)
        OverlapCase::Disjoint | OverlapCase::SfovComplementInFov => {
            2.0 * (0.5 * (r_sv + r_fov)).cos().powi(2)
        }
        _ => return None,
    };
    Some((hood / denom).min(1.0))
}

/// Leakage when the HMD uploads the QoE metric.
pub fn leak_prob_from_qoe(
    q: QoeValue,
    r_fov: CapRadius,
    r_sv: CapRadius,
    eps: f64,
) -> Result<LeakageResult> {
    qoe::check_fov(r_fov)?;
    check_epsilon(eps, r_fov.value())?;
    let rs = r_sv.value();
    if rs == 0.0 || rs == PI {
        return Ok(LeakageResult {
            probability: global_min_probability(eps),
            zone_kind: ZoneKind::FullSphere,
            zone_measure: 4.0 * PI,
            case: Some(if rs == 0.0 {
                OverlapCase::DegenerateEmpty
            } else {
                OverlapCase::DegenerateFull
            }),
            ambiguous: false,
        });
    }
    let inference = infer_error_from_qoe(q, r_fov, r_sv)?;
    match inference.kind {
        InferredError::Range { .. } => {
            let r_z = zone_radius(inference.case, r_fov.value(), rs).unwrap();
            Ok(LeakageResult {
                probability: cap_zone_probability(eps, r_z),
                zone_kind: ZoneKind::Cap,
                zone_measure: TAU * sphere::versine(r_z),
                case: Some(inference.case),
                ambiguous: inference.ambiguous,
            })
        }
        InferredError::Exact { e } => Ok(LeakageResult {
            case: Some(OverlapCase::Remaining),
            ..leak_prob_from_error_unchecked(e, eps)
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Which end of `(0, π)` the infimum is approached at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SfovLimit {
    /// `r_sv → 0⁺`
    Zero,
    /// `r_sv → π⁻`
    Pi,
}

/// Extremal behaviour of the QoE-upload leakage in a constant case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseExtremes {
    pub case: OverlapCase,
    /// Radius of the possible viewpoint zone at this `r_sv`.
    pub zone_radius: f64,
    pub probability: f64,
    /// `Pr_q = 1`: zone radius at most `ε`, which also forces the error into
    /// `e ≤ ε` (containment) or `e ≥ π − ε` (disjoint / complement).
    pub is_max: bool,
    /// Direction of `Pr_q` as `r_sv` increases, where `Pr_q < 1`.
    pub monotonicity: Monotonicity,
    pub infimum: f64,
    pub infimum_limit: SfovLimit,
}

/// Extremes of the QoE-upload leakage for one of the four constant cases.
pub fn table2_report(
    r_fov: CapRadius,
    eps: f64,
    r_sv: CapRadius,
    case: OverlapCase,
) -> Result<CaseExtremes> {
    qoe::check_fov(r_fov)?;
    check_epsilon(eps, r_fov.value())?;
    check_open_sfov(r_sv)?;
    let (rf, rs) = (r_fov.value(), r_sv.value());
    if !OverlapCase::CONSTANT.contains(&case) {
        return Err(Error::invalid(
            "case",
            f64::NAN,
            "only the four constant-QoE cases have extremes",
        ));
    }
    if constant_case_error_range(case, rf, rs).is_none() {
        return Err(Error::invalid(
            "r_sv",
            rs,
            "the requested case cannot occur at this r_sv",
        ));
    }
    let hood = sphere::versine(eps);
    let (monotonicity, infimum, infimum_limit) = match case {
        OverlapCase::FovInSfov => (
            Monotonicity::Decreasing,
            hood / (1.0 + rf.cos()),
            SfovLimit::Pi,
        ),
        OverlapCase::SfovInFov => (
            Monotonicity::Increasing,
            hood / sphere::versine(rf),
            SfovLimit::Zero,
        ),
        OverlapCase::Disjoint => (
            Monotonicity::Increasing,
            hood / (1.0 + rf.cos()),
            SfovLimit::Zero,
        ),
        _ => (
            Monotonicity::Decreasing,
            hood / sphere::versine(rf),
            SfovLimit::Pi,
        ),
    };
    let r_z = zone_radius(case, rf, rs).unwrap();
    let probability = cap_zone_probability(eps, r_z);
    Ok(CaseExtremes {
        case,
        zone_radius: r_z,
        probability,
        is_max: r_z <= eps,
        monotonicity,
        infimum,
        infimum_limit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinProbComparison {
    pub pr_q_min: f64,
    pub pr_e_min: f64,
    pub q_less_than_e: bool,
}

/// Compares the minimal leakage of the two feedback channels.
pub fn min_prob_comparison(eps: f64, r_fov: CapRadius) -> Result<MinProbComparison> {
    qoe::check_fov(r_fov)?;
    if !(eps > 0.0 && eps <= r_fov.value()) {
        return Err(Error::invalid("epsilon", eps, "must lie in (0, r_fov]"));
    }
    let pr_q_min = global_min_probability(eps);
    let pr_e_min = error_upload_min_probability(eps);
    Ok(MinProbComparison {
        pr_q_min,
        pr_e_min,
        q_less_than_e: pr_q_min < pr_e_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> CapRadius {
        CapRadius::new(v).unwrap()
    }

    const R_FOV: f64 = 50.0 * PI / 180.0;

    #[test]
    fn error_upload_examples() {
        let eps = 0.3;
        let res = leak_prob_from_error(FRAC_PI_2, eps).unwrap();
        assert!((res.probability - eps / PI).abs() < 1e-15);
        assert_eq!(res.zone_kind, ZoneKind::Circle);
        assert!((res.zone_measure - TAU).abs() < 1e-15);

        let res = leak_prob_from_error(0.0, eps).unwrap();
        assert_eq!(res.probability, 1.0);
        assert_eq!(res.zone_kind, ZoneKind::SinglePoint);
        assert_eq!(
            leak_prob_from_error(PI, eps).unwrap().zone_kind,
            ZoneKind::SinglePoint
        );
    }

    #[test]
    fn tolerance_bound_example() {
        // Pr_e^u = 0.2, eps = 0.4 r_fov puts e_min^u at 0.19 pi (two digits)
        let eps = 0.4 * R_FOV;
        let req = PrivacyRequirement::new(eps, 0.2, r(R_FOV)).unwrap();
        let (lo, hi) = error_range_for_requirement(&req).bounds().unwrap();
        assert!((lo / PI - 0.19).abs() < 0.005, "{}", lo / PI);
        assert!((hi - (PI - lo)).abs() < 1e-15);
        let at = leak_prob_from_error(lo, eps).unwrap().probability;
        assert!((at - 0.2).abs() < 1e-12);
        assert!(leak_prob_from_error(lo + 0.01, eps).unwrap().probability < 0.2);
        assert!(leak_prob_from_error(lo - 0.01, eps).unwrap().probability > 0.2);
    }

    #[test]
    fn requirement_branches() {
        let eps = 0.3;
        let req = |p| PrivacyRequirement::new(eps, p, r(R_FOV)).unwrap();
        assert_eq!(
            error_range_for_requirement(&req(1.0)),
            ErrorRange::FullRange
        );
        assert_eq!(
            error_range_for_requirement(&req(eps / PI)),
            ErrorRange::Interval {
                lo: FRAC_PI_2,
                hi: FRAC_PI_2
            }
        );
        assert_eq!(
            error_range_for_requirement(&req(eps / PI - 1e-12)),
            ErrorRange::Infeasible
        );
        assert!(PrivacyRequirement::new(1.0, 0.5, r(0.8)).is_err());
        assert!(PrivacyRequirement::new(0.3, 1.5, r(0.8)).is_err());
    }

    #[test]
    fn full_leak_ranges() {
        assert_eq!(full_leak_error_range(0.0).unwrap(), [(0.0, 0.0), (PI, PI)]);
        let eps = 0.35;
        let [(a0, a1), (b0, b1)] = full_leak_error_range(eps).unwrap();
        for k in 0..=100 {
            let e = PI * k as f64 / 100.0;
            let inside = (a0..=a1).contains(&e) || (b0..=b1).contains(&e);
            let p = leak_prob_from_error(e, eps).unwrap().probability;
            if inside {
                assert_eq!(p, 1.0, "e = {e}");
            }
            if (e - FRAC_PI_2).abs() < 1e-12 {
                assert!(!inside);
            }
        }
    }

    #[test]
    fn qoe_inference_ranges() {
        let (rf, rs) = (r(0.873), r(1.4));
        let inf = infer_error_from_qoe(QoeValue::new(1.0).unwrap(), rf, rs).unwrap();
        assert_eq!(inf.case, OverlapCase::FovInSfov);
        assert_eq!(
            inf.kind,
            InferredError::Range {
                lo: 0.0,
                hi: 1.4 - 0.873
            }
        );
        let inf = infer_error_from_qoe(QoeValue::new(0.0).unwrap(), rf, r(1.0)).unwrap();
        assert_eq!(inf.case, OverlapCase::Disjoint);
        assert_eq!(
            inf.kind,
            InferredError::Range {
                lo: 0.873 + 1.0,
                hi: PI
            }
        );
    }

    #[test]
    fn qoe_inference_round_trip() {
        let (rf, rs, e) = (r(0.873), r(0.9), 0.5);
        let q = qoe::qoe(rf, rs, e).unwrap();
        let inf = infer_error_from_qoe(q, rf, rs).unwrap();
        match inf.kind {
            InferredError::Exact { e: got } => assert!((got - e).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert!(inf.iterations <= MAX_BISECTION_ITERS);
    }

    #[test]
    fn inconsistent_qoe_is_rejected() {
        // r_sv < r_fov can never cover the whole FoV
        let err = infer_error_from_qoe(QoeValue::new(0.99).unwrap(), r(0.873), r(0.3)).unwrap_err();
        assert!(matches!(err, Error::InconsistentQoe { .. }));
        assert!(infer_error_from_qoe(QoeValue::new(0.5).unwrap(), r(0.873), r(PI)).is_err());
    }

    #[test]
    fn qoe_upload_examples() {
        let eps = 0.3;
        let q = QoeValue::new(1.0).unwrap();
        let full = leak_prob_from_qoe(q, r(R_FOV), CapRadius::FULL, eps).unwrap();
        assert_eq!(full.zone_kind, ZoneKind::FullSphere);
        assert!((full.probability - (1.0 - eps.cos()) / 2.0).abs() < 1e-15);

        let tight = leak_prob_from_qoe(q, r(R_FOV), r(R_FOV + 0.2), eps).unwrap();
        assert_eq!(tight.probability, 1.0);
        assert_eq!(tight.zone_kind, ZoneKind::Cap);

        let near_pi = leak_prob_from_qoe(q, r(R_FOV), r(PI - 1e-9), eps).unwrap();
        let inf = (1.0 - eps.cos()) / (1.0 + R_FOV.cos());
        assert!((near_pi.probability - inf).abs() < 1e-8);
    }

    #[test]
    fn unified_matches_direct() {
        for &(case, rs) in &[
            (OverlapCase::FovInSfov, 2.0),
            (OverlapCase::SfovInFov, 0.3),
            (OverlapCase::Disjoint, 1.1),
            (OverlapCase::SfovComplementInFov, 2.9),
        ] {
            let a = constant_case_probability(case, R_FOV, rs, 0.2).unwrap();
            let b = constant_case_probability_direct(case, R_FOV, rs, 0.2).unwrap();
            assert!((a - b).abs() <= 1e-14 * b, "{case}: {a} vs {b}");
        }
    }

    #[test]
    fn extremes_examples() {
        let eps = 0.4 * R_FOV;
        let rep =
            table2_report(r(R_FOV), eps, r(R_FOV + 0.5 * eps), OverlapCase::FovInSfov).unwrap();
        assert!(rep.is_max);
        assert!((rep.infimum - (1.0 - eps.cos()) / (1.0 + R_FOV.cos())).abs() < 1e-15);
        let rep = table2_report(r(R_FOV), eps, r(0.2), OverlapCase::SfovInFov).unwrap();
        assert!(!rep.is_max);
        assert_eq!(rep.monotonicity, Monotonicity::Increasing);
        assert!(table2_report(r(R_FOV), eps, r(1.0), OverlapCase::Remaining).is_err());
        assert!(table2_report(r(R_FOV), eps, r(0.2), OverlapCase::FovInSfov).is_err());
    }

    #[test]
    fn min_comparison() {
        let c = min_prob_comparison(0.3, r(R_FOV)).unwrap();
        assert!(c.q_less_than_e);
        assert!((c.pr_q_min - (1.0 - 0.3f64.cos()) / 2.0).abs() < 1e-16);
        let c = min_prob_comparison(1e-9, r(R_FOV)).unwrap();
        assert!(c.q_less_than_e && c.pr_e_min < 1e-9);
        // equality only at the closure corner eps = r_fov = pi/2
        let c = min_prob_comparison(FRAC_PI_2, r(FRAC_PI_2)).unwrap();
        assert!((c.pr_q_min - 0.5).abs() < 1e-15 && (c.pr_e_min - 0.5).abs() < 1e-15);
        let c = min_prob_comparison(FRAC_PI_2 - 1e-6, r(FRAC_PI_2)).unwrap();
        assert!(c.q_less_than_e);
        assert!(min_prob_comparison(0.0, r(R_FOV)).is_err());
    }
}

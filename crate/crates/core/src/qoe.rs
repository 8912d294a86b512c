//! QoE of a frame as the covered fraction of the FoV cap, and the five-way
//! classification of the relative position of FoV and streamed FoV.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{self, CapRadius};

/// Relative position of the FoV (radius `r_fov`, centred on the real
/// viewpoint) and the streamed FoV (radius `r_sv`, centred on the predicted
/// viewpoint) at prediction error `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapCase {
    /// `r_sv ≥ r_fov + e`.
    FovInSfov,
    /// `r_fov ≥ r_sv + e`.
    SfovInFov,
    /// `e ≥ r_fov + r_sv`.
    Disjoint,
    /// `r_fov + r_sv + e ≥ 2π`: the complement of the SFoV lies in the FoV.
    SfovComplementInFov,
    /// Partial overlap.
    Remaining,
    /// `r_sv = 0`: nothing is streamed.
    DegenerateEmpty,
    /// `r_sv = π`: the whole sphere is streamed.
    DegenerateFull,
}

impl OverlapCase {
    /// The four cases in which QoE does not depend on `e`.
    pub const CONSTANT: [OverlapCase; 4] = [
        OverlapCase::FovInSfov,
        OverlapCase::SfovInFov,
        OverlapCase::Disjoint,
        OverlapCase::SfovComplementInFov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OverlapCase::FovInSfov => "fov_in_sfov",
            OverlapCase::SfovInFov => "sfov_in_fov",
            OverlapCase::Disjoint => "disjoint",
            OverlapCase::SfovComplementInFov => "sfov_complement_in_fov",
            OverlapCase::Remaining => "remaining",
            OverlapCase::DegenerateEmpty => "degenerate_empty",
            OverlapCase::DegenerateFull => "degenerate_full",
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            OverlapCase::DegenerateEmpty | OverlapCase::DegenerateFull
        )
    }
}

impl std::fmt::Display for OverlapCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// QoE as a fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QoeValue(f64);

impl QoeValue {
    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && (0.0..=1.0).contains(&v) {
            Ok(Self(v))
        } else {
            Err(Error::invalid("qoe", v, "must lie in [0, 1]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn clamped(v: f64) -> Self {
        Self(v.clamp(0.0, 1.0))
    }
}

impl TryFrom<f64> for QoeValue {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QoeValue> for f64 {
    fn from(q: QoeValue) -> f64 {
        q.0
    }
}

/// FoV radius of a physical HMD: `(0, π/2]`.
pub fn check_fov(r_fov: CapRadius) -> Result<()> {
    let v = r_fov.value();
    if v > 0.0 && v <= FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::invalid("r_fov", v, "must lie in (0, pi/2]"))
    }
}

/// Classifies without validating; ties resolve in declaration order.
pub(crate) fn classify_unchecked(r_fov: f64, r_sv: f64, e: f64) -> OverlapCase {
    if r_sv <= 0.0 {
        OverlapCase::DegenerateEmpty
    } else if r_sv >= PI {
        OverlapCase::DegenerateFull
    } else if r_sv >= r_fov + e {
        OverlapCase::FovInSfov
    } else if r_fov >= r_sv + e {
        OverlapCase::SfovInFov
    } else if e >= r_fov + r_sv {
        OverlapCase::Disjoint
    } else if r_fov + r_sv + e >= TAU {
        OverlapCase::SfovComplementInFov
    } else {
        OverlapCase::Remaining
    }
}

pub fn classify(r_fov: CapRadius, r_sv: CapRadius, e: f64) -> Result<OverlapCase> {
    check_fov(r_fov)?;
    sphere::check_distance(e)?;
    Ok(classify_unchecked(r_fov.value(), r_sv.value(), e))
}

/// QoE value of a constant case at `(r_fov, r_sv)`; `None` for the
/// remaining case.
pub fn case_constant_qoe(case: OverlapCase, r_fov: f64, r_sv: f64) -> Option<f64> {
    let denom = sphere::versine(r_fov);
    match case {
        OverlapCase::FovInSfov | OverlapCase::DegenerateFull => Some(1.0),
        OverlapCase::SfovInFov => Some((sphere::versine(r_sv) / denom).clamp(0.0, 1.0)),
        OverlapCase::Disjoint | OverlapCase::DegenerateEmpty => Some(0.0),
        OverlapCase::SfovComplementInFov => {
            Some(((-r_sv.cos() - r_fov.cos()) / denom).clamp(0.0, 1.0))
        }
        OverlapCase::Remaining => None,
    }
}

pub(crate) fn qoe_unchecked(r_fov: f64, r_sv: f64, e: f64) -> (OverlapCase, f64) {
    let case = classify_unchecked(r_fov, r_sv, e);
    let q = match case_constant_qoe(case, r_fov, r_sv) {
        Some(q) => q,
        None => {
            let lens = sphere::lens_area(r_fov, r_sv, e);
            (lens / (TAU * sphere::versine(r_fov))).clamp(0.0, 1.0)
        }
    };
    (case, q)
}

/// Fraction of the FoV covered by the streamed FoV.
pub fn qoe(r_fov: CapRadius, r_sv: CapRadius, e: f64) -> Result<QoeValue> {
    qoe_with_case(r_fov, r_sv, e).map(|(_, q)| q)
}

pub fn qoe_with_case(r_fov: CapRadius, r_sv: CapRadius, e: f64) -> Result<(OverlapCase, QoeValue)> {
    check_fov(r_fov)?;
    sphere::check_distance(e)?;
    let (case, q) = qoe_unchecked(r_fov.value(), r_sv.value(), e);
    Ok((case, QoeValue::clamped(q)))
}

/// Bracket of `r_sv` for which `e` falls in the partial-overlap case:
/// `[|r_fov − e|, min(r_fov + e, 2π − r_fov − e)]`.
pub fn remaining_sfov_bracket(r_fov: f64, e: f64) -> (f64, f64) {
    ((r_fov - e).abs(), (r_fov + e).min(TAU - r_fov - e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{cap_area, mc_cap_overlap};

    fn r(v: f64) -> CapRadius {
        CapRadius::new(v).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(r(0.873), r(2.0), 0.5).unwrap(),
            OverlapCase::FovInSfov
        );
        assert_eq!(
            classify(r(0.873), r(0.3), 0.2).unwrap(),
            OverlapCase::SfovInFov
        );
        assert_eq!(
            classify(r(0.873), r(0.9), 0.5).unwrap(),
            OverlapCase::Remaining
        );
        assert_eq!(
            classify(r(0.873), r(0.3), 2.0).unwrap(),
            OverlapCase::Disjoint
        );
        assert_eq!(
            classify(r(1.5), r(3.0), 3.0).unwrap(),
            OverlapCase::SfovComplementInFov
        );
        assert_eq!(
            classify(r(0.873), r(0.0), 1.0).unwrap(),
            OverlapCase::DegenerateEmpty
        );
        assert_eq!(
            classify(r(0.873), r(PI), 1.0).unwrap(),
            OverlapCase::DegenerateFull
        );
    }

    #[test]
    fn remaining_example_bracket_holds() {
        let (lo, hi) = remaining_sfov_bracket(0.873, 0.5);
        assert!(lo <= 0.9 && 0.9 <= hi);
    }

    #[test]
    fn classify_rejects_out_of_range() {
        assert!(classify(r(1.7), r(1.0), 0.1).is_err());
        assert!(classify(r(0.0), r(1.0), 0.1).is_err());
        assert!(classify(r(0.8), r(1.0), -0.1).is_err());
        assert!(classify(r(0.8), r(1.0), 3.2).is_err());
    }

    #[test]
    fn boundary_ties_follow_case_order() {
        // r_sv = r_fov + e exactly resolves to containment
        assert_eq!(
            classify(r(0.5), r(0.75), 0.25).unwrap(),
            OverlapCase::FovInSfov
        );
        // equal caps, zero error: both containment tests hold, first wins
        assert_eq!(
            classify(r(0.5), r(0.5), 0.0).unwrap(),
            OverlapCase::FovInSfov
        );
    }

    #[test]
    fn qoe_examples() {
        assert_eq!(qoe(r(0.873), r(2.0), 0.5).unwrap().value(), 1.0);
        assert_eq!(qoe(r(0.873), r(0.873), 0.0).unwrap().value(), 1.0);
        assert_eq!(qoe(r(0.873), r(0.3), 2.0).unwrap().value(), 0.0);
        let q = qoe(r(0.873), r(0.3), 0.1).unwrap().value();
        assert!((q - (1.0 - 0.3f64.cos()) / (1.0 - 0.873f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn qoe_remaining_matches_mc() {
        let (a, b, e) = (r(0.873), r(0.9), 0.5);
        let q = qoe(a, b, e).unwrap().value();
        let mc = mc_cap_overlap(a, b, e, 1_000_000, 17).unwrap();
        let fov = cap_area(a);
        assert!(
            (q - mc.estimate / fov).abs() <= 3.0 * mc.std_error / fov,
            "q = {q}, mc = {}",
            mc.estimate / fov
        );
    }

    #[test]
    fn qoe_degenerate() {
        for e in [0.0, 0.3, 1.5, PI] {
            assert_eq!(qoe(r(0.8), r(PI), e).unwrap().value(), 1.0);
            assert_eq!(qoe(r(0.8), r(0.0), e).unwrap().value(), 0.0);
        }
    }
}

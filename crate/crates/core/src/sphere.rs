//! Unit-sphere geometry: viewpoints, orthodromic distance, spherical caps and
//! the overlap of two caps.
//!
//! Latitude `phi` is measured from the equator (`0`) towards the north pole
//! (`π/2`); longitude `theta` lives in `[−π, π)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Samples per independent RNG stream in the Monte-Carlo estimators.
const MC_BLOCK: usize = 1 << 14;

/// A viewpoint on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    theta: f64,
    phi: f64,
}

impl SphericalPoint {
    /// Builds a point from longitude and latitude in radians.
    ///
    /// Longitude is wrapped into `[−π, π)`; latitude must already lie in
    /// `[−π/2, π/2]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid("theta", theta, "must be finite"));
        }
        if !phi.is_finite() || !(-FRAC_PI_2..=FRAC_PI_2).contains(&phi) {
            return Err(Error::invalid("phi", phi, "must lie in [-pi/2, pi/2]"));
        }
        Ok(Self {
            theta: wrap_longitude(theta),
            phi,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn north_pole() -> Self {
        Self {
            theta: 0.0,
            phi: FRAC_PI_2,
        }
    }

    pub fn antipode(&self) -> Self {
        Self {
            theta: wrap_longitude(self.theta + PI),
            phi: -self.phi,
        }
    }

    /// Cartesian coordinates on the unit sphere.
    pub fn to_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [cp * ct, cp * st, sp]
    }

    /// Inverse of [`to_vector`](Self::to_vector); the input is normalised first.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let n = norm(v);
        let [x, y, z] = [v[0] / n, v[1] / n, v[2] / n];
        Self {
            theta: wrap_longitude(y.atan2(x)),
            phi: z.clamp(-1.0, 1.0).asin(),
        }
    }
}

fn wrap_longitude(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= PI {
        t - TAU
    } else {
        t
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Angular radius of a spherical cap, in `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CapRadius(f64);

impl CapRadius {
    pub const ZERO: CapRadius = CapRadius(0.0);
    pub const FULL: CapRadius = CapRadius(PI);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=PI).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::invalid("cap radius", value, "must lie in [0, pi]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for CapRadius {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CapRadius> for f64 {
    fn from(r: CapRadius) -> f64 {
        r.0
    }
}

/// Orthodromic (great-circle) distance in `[0, π]`.
///
/// Equals `acos(cos φa cos φb cos|Δθ| + sin φa sin φb)`, evaluated as
/// `atan2(|a × b|, a · b)` so that coincident and antipodal points stay
/// exact and the result is symmetric bit for bit.
pub fn spherical_distance(a: &SphericalPoint, b: &SphericalPoint) -> f64 {
    vector_distance(a.to_vector(), b.to_vector())
}

/// Great-circle distance between unit vectors.
pub(crate) fn vector_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// `1 − cos x`, as `2 sin²(x/2)` so small angles keep full precision.
pub fn versine(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Area of a cap of radius `r` on the unit sphere: `2π(1 − cos r)`.
pub fn cap_area(r: CapRadius) -> f64 {
    TAU * versine(r.0)
}

fn clamped_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Intersection area of two caps with radii `r1`, `r2` whose centres are `d`
/// apart, valid for every configuration.
///
/// Containment, disjointness and the complement configuration
/// (`r1 + r2 + d ≥ 2π`) are routed by exact case tests, in that order, before
/// the general lens formula is evaluated.
pub fn cap_overlap_area(r1: CapRadius, r2: CapRadius, d: f64) -> Result<f64> {
    check_distance(d)?;
    let (a, b) = (r1.0, r2.0);
    let value = if b >= a + d {
        cap_area(r1)
    } else if a >= b + d {
        cap_area(r2)
    } else if d >= a + b {
        0.0
    } else if a + b + d >= TAU {
        cap_area(r1) + cap_area(r2) - 4.0 * PI
    } else {
        lens_area(a, b, d)
    };
    Ok(value.clamp(0.0, cap_area(r1).min(cap_area(r2))))
}

pub(crate) fn check_distance(d: f64) -> Result<()> {
    if d.is_finite() && (0.0..=PI).contains(&d) {
        Ok(())
    } else {
        Err(Error::invalid("distance", d, "must lie in [0, pi]"))
    }
}

/// Lens formula for two partially overlapping caps.
///
/// Only meaningful strictly inside the partial-overlap region, where every
/// sine in the denominators is positive. Callers route the other cases first.
pub(crate) fn lens_area(a: f64, b: f64, d: f64) -> f64 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sd, cd) = d.sin_cos();
    let apex = clamped_acos((cd - ca * cb) / (sa * sb));
    let at_b = clamped_acos((-ca + cd * cb) / (sd * sb));
    let at_a = clamped_acos((-cb + cd * ca) / (sd * sa));
    TAU - TAU * cb - TAU * ca - 2.0 * apex + 2.0 * cb * at_b + 2.0 * ca * at_a
}

/// Draws a point uniformly on the sphere as a unit vector: `z` uniform on
/// `[−1, 1]`, longitude uniform.
pub(crate) fn uniform_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let lon: f64 = rng.random_range(-PI..PI);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * lon.cos(), s * lon.sin(), z]
}

/// Returns `n` points drawn uniformly on the sphere, deterministic in `seed`.
pub fn sample_uniform_sphere(n: usize, seed: u64) -> Result<Vec<SphericalPoint>> {
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "sample count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let lon: f64 = rng.random_range(-PI..PI);
            SphericalPoint {
                theta: lon,
                phi: z.asin(),
            }
        })
        .collect())
}

/// Hit-count estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, samples: u64, total_measure: f64) -> Self {
        let p = hits as f64 / samples as f64;
        Self {
            estimate: total_measure * p,
            std_error: total_measure * (p * (1.0 - p) / samples as f64).sqrt(),
            hits,
            samples,
        }
    }
}

/// Monte-Carlo estimate of [`cap_overlap_area`], using the default executor.
pub fn mc_cap_overlap(
    r1: CapRadius,
    r2: CapRadius,
    d: f64,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    mc_cap_overlap_with(Exec::default(), r1, r2, d, n, seed)
}

/// Monte-Carlo estimate of the overlap of two caps `d` apart.
///
/// The first cap is centred on the north pole and the second on the meridian
/// `theta = 0`. Samples are split into fixed-size blocks, each with its own
/// ChaCha stream, so the result depends only on `(n, seed)`.
pub fn mc_cap_overlap_with(
    exec: Exec,
    r1: CapRadius,
    r2: CapRadius,
    d: f64,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_distance(d)?;
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "sample count must be at least 1"));
    }
    let c1 = [0.0, 0.0, 1.0];
    let c2 = [d.sin(), 0.0, d.cos()];
    let inside = |r: f64, c: [f64; 3], p: [f64; 3]| r >= PI || dot(c, p) >= r.cos();
    let blocks = n.div_ceil(MC_BLOCK);
    let hits: u64 = exec
        .map_range(blocks, |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = MC_BLOCK.min(n - b * MC_BLOCK);
            let mut h = 0u64;
            for _ in 0..len {
                let p = uniform_vector(&mut rng);
                if inside(r1.0, c1, p) && inside(r2.0, c2, p) {
                    h += 1;
                }
            }
            h
        })
        .into_iter()
        .sum();
    Ok(McEstimate::from_hits(hits, n as u64, 4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> CapRadius {
        CapRadius::new(v).unwrap()
    }

    #[test]
    fn distance_examples() {
        let o = SphericalPoint::new(0.0, 0.0).unwrap();
        assert_eq!(spherical_distance(&o, &o), 0.0);
        let near = SphericalPoint::new(PI - 1e-12, 0.0).unwrap();
        assert!((spherical_distance(&o, &near) - PI).abs() < 1e-6);
        let q = SphericalPoint::new(FRAC_PI_2, 0.0).unwrap();
        assert!((spherical_distance(&o, &q) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn antipode_is_pi_away() {
        for &(t, p) in &[
            (0.3, 0.2),
            (-3.0, -1.5),
            (3.1, std::f64::consts::FRAC_PI_2),
            (0.0, 0.0),
        ] {
            let a = SphericalPoint::new(t, p).unwrap();
            assert!((spherical_distance(&a, &a.antipode()) - PI).abs() < 1e-7);
            assert_eq!(spherical_distance(&a, &a), 0.0);
        }
    }

    #[test]
    fn point_validation() {
        assert!(SphericalPoint::new(0.0, 2.0).is_err());
        assert!(SphericalPoint::new(f64::NAN, 0.0).is_err());
        let p = SphericalPoint::new(3.0 * PI, 0.1).unwrap();
        assert!((-PI..PI).contains(&p.theta()));
        assert!((p.theta() - PI).abs() < 1e-12 || (p.theta() + PI).abs() < 1e-12);
        assert!(CapRadius::new(-0.1).is_err());
        assert!(CapRadius::new(3.2).is_err());
    }

    #[test]
    fn vector_round_trip() {
        let p = SphericalPoint::new(-2.0, 0.7).unwrap();
        let q = SphericalPoint::from_vector(p.to_vector());
        assert!(spherical_distance(&p, &q) < 1e-7);
    }

    #[test]
    fn versine_keeps_small_angles() {
        // 1 - cos(1e-8) rounds to 0 in f64
        assert_eq!(1.0 - 1e-8f64.cos(), 0.0);
        assert!((versine(1e-8) - 5e-17).abs() <= 1e-30);
        assert!((versine(2.0) - (1.0 - 2f64.cos())).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn cap_area_examples() {
        assert_eq!(cap_area(r(0.0)), 0.0);
        assert!((cap_area(r(PI)) - 4.0 * PI).abs() <= 4.0 * f64::EPSILON * 4.0 * PI);
        assert!((cap_area(r(FRAC_PI_2)) - TAU).abs() <= 4.0 * f64::EPSILON * TAU);
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(
            cap_overlap_area(r(0.5), r(0.5), 0.0).unwrap(),
            cap_area(r(0.5))
        );
        assert_eq!(cap_overlap_area(r(0.4), r(0.9), 1.5).unwrap(), 0.0);
        // two orthogonal hemispheres meet in a quarter sphere
        let v = cap_overlap_area(r(FRAC_PI_2), r(FRAC_PI_2), FRAC_PI_2).unwrap();
        assert!((v - PI).abs() < 1e-12);
        assert!(cap_overlap_area(r(0.5), r(0.5), 3.5).is_err());
    }

    #[test]
    fn orthogonal_hemispheres_match_mc() {
        let mc = mc_cap_overlap(r(FRAC_PI_2), r(FRAC_PI_2), FRAC_PI_2, 1_000_000, 11).unwrap();
        let v = cap_overlap_area(r(FRAC_PI_2), r(FRAC_PI_2), FRAC_PI_2).unwrap();
        assert!(
            (mc.estimate - v).abs() <= 3.0 * mc.std_error,
            "{mc:?} vs {v}"
        );
    }

    #[test]
    fn overlap_self_consistency_gate() {
        let (a, b, d) = (r(0.873), r(0.6), 0.3);
        let mc = mc_cap_overlap(a, b, d, 1_000_000, 5).unwrap();
        let v = cap_overlap_area(a, b, d).unwrap();
        assert!(
            (mc.estimate - v).abs() <= 3.0 * mc.std_error,
            "{mc:?} vs {v}"
        );
    }

    #[test]
    fn mc_full_caps_hit_everything() {
        let mc = mc_cap_overlap(r(PI), r(PI), 1.234, 10_000, 3).unwrap();
        assert_eq!(mc.estimate, 4.0 * PI);
        assert_eq!(mc.std_error, 0.0);
    }

    #[test]
    fn mc_containment() {
        let mc = mc_cap_overlap(r(0.2), r(0.5), 0.0, 1_000_000, 9).unwrap();
        assert!((mc.estimate - cap_area(r(0.2))).abs() <= 3.0 * mc.std_error);
    }

    #[test]
    fn mc_is_independent_of_executor() {
        let a = mc_cap_overlap_with(Exec::Sequential, r(0.7), r(1.1), 0.9, 100_003, 42).unwrap();
        let b = mc_cap_overlap_with(Exec::default(), r(0.7), r(1.1), 0.9, 100_003, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_sampling() {
        assert!(sample_uniform_sphere(0, 1).is_err());
        let one = sample_uniform_sphere(1, 99).unwrap();
        assert_eq!(one.len(), 1);
        assert!(SphericalPoint::new(one[0].theta(), one[0].phi()).is_ok());
        assert_eq!(
            sample_uniform_sphere(50, 4).unwrap(),
            sample_uniform_sphere(50, 4).unwrap()
        );

        let n = 1_000_000;
        let pts = sample_uniform_sphere(n, 7).unwrap();
        let pole = SphericalPoint::north_pole();
        let mean = pts
            .iter()
            .map(|p| spherical_distance(p, &pole).cos())
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean = {mean}");
    }
}

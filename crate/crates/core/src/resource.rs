//! Compute and communication budgets mapped to the streaming capability `C`
//! and the radius of the streamed field of view.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sphere::CapRadius;

const MC_BLOCK: usize = 1 << 14;

/// Geometry and encoding of a single tile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileSpec {
    pub px_w: u32,
    pub px_h: u32,
    pub bits_per_pixel: u32,
    /// Video compression ratio; at least 1 so that `s_com ≤ s_cpt`.
    pub compression_ratio: f64,
}

impl TileSpec {
    pub fn validate(&self) -> Result<()> {
        if self.px_w == 0 || self.px_h == 0 || self.bits_per_pixel == 0 {
            return Err(Error::invalid(
                "tile",
                0.0,
                "pixel dimensions and bits per pixel must be positive",
            ));
        }
        if !(self.compression_ratio.is_finite() && self.compression_ratio >= 1.0) {
            return Err(Error::invalid(
                "compression_ratio",
                self.compression_ratio,
                "must be finite and at least 1",
            ));
        }
        Ok(())
    }

    /// Bits rendered per tile, `px_w · px_h · b`, formed in integer arithmetic.
    pub fn render_bits(&self) -> f64 {
        (u64::from(self.px_w) * u64::from(self.px_h) * u64::from(self.bits_per_pixel)) as f64
    }

    /// Bits transmitted per tile after compression.
    pub fn transmit_bits(&self) -> f64 {
        self.render_bits() / self.compression_ratio
    }
}

/// Per-user resource budget for one streaming segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceConfig {
    /// Rendering budget at the server, FLOPs/s.
    pub compute_flops: f64,
    pub users: u32,
    /// FLOPs needed to render one bit.
    pub flops_per_bit: f64,
    /// Ensemble-average downlink rate, bit/s.
    pub avg_data_rate: f64,
    /// Time available for rendering plus transmission, seconds.
    pub cc_duration: f64,
    pub frames_per_segment: u32,
    pub tiles_per_frame: u32,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be finite and positive"))
    }
}

impl ResourceConfig {
    pub fn validate(&self) -> Result<()> {
        positive("compute_flops", self.compute_flops)?;
        positive("flops_per_bit", self.flops_per_bit)?;
        positive("avg_data_rate", self.avg_data_rate)?;
        if !(self.cc_duration.is_finite() && self.cc_duration >= 0.0) {
            return Err(Error::invalid(
                "cc_duration",
                self.cc_duration,
                "must be finite and non-negative",
            ));
        }
        if self.users == 0 || self.frames_per_segment == 0 || self.tiles_per_frame == 0 {
            return Err(Error::invalid(
                "resource counts",
                0.0,
                "users, frames_per_segment and tiles_per_frame must be positive",
            ));
        }
        Ok(())
    }

    /// Per-user rendering rate `F_cpt / (K · μ_r)`, bit/s.
    pub fn compute_rate(&self) -> f64 {
        self.compute_flops / (f64::from(self.users) * self.flops_per_bit)
    }
}

/// Every intermediate of the capability computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityBreakdown {
    pub transmit_bits: f64,
    pub render_bits: f64,
    pub compute_rate: f64,
    pub data_rate: f64,
    /// Time to render and transmit every tile of a segment, seconds.
    pub full_demand_time: f64,
    /// `T_cc / full_demand_time` before clamping.
    pub unclamped: f64,
    pub capability: f64,
    pub sfov_radius: f64,
}

/// Capability with all intermediates.
pub fn capability_breakdown(cfg: &ResourceConfig, tile: &TileSpec) -> Result<CapabilityBreakdown> {
    cfg.validate()?;
    tile.validate()?;
    let transmit_bits = tile.transmit_bits();
    let render_bits = tile.render_bits();
    let compute_rate = cfg.compute_rate();
    let per_tile = transmit_bits / cfg.avg_data_rate + render_bits / compute_rate;
    let full_demand_time =
        f64::from(cfg.frames_per_segment) * f64::from(cfg.tiles_per_frame) * per_tile;
    let unclamped = cfg.cc_duration / full_demand_time;
    let capability = unclamped.min(1.0);
    Ok(CapabilityBreakdown {
        transmit_bits,
        render_bits,
        compute_rate,
        data_rate: cfg.avg_data_rate,
        full_demand_time,
        unclamped,
        capability,
        sfov_radius: sfov_radius(capability)?.value(),
    })
}

/// Fraction of a segment's tiles that can be rendered and delivered in `T_cc`.
pub fn capability(cfg: &ResourceConfig, tile: &TileSpec) -> Result<f64> {
    capability_breakdown(cfg, tile).map(|b| b.capability)
}

/// Radius of the cap whose area is a fraction `c` of the sphere.
pub fn sfov_radius(c: f64) -> Result<CapRadius> {
    if !(c.is_finite() && (0.0..=1.0).contains(&c)) {
        return Err(Error::invalid("capability", c, "must lie in [0, 1]"));
    }
    // acos(1 - 2c), written to stay accurate near both ends
    CapRadius::new(2.0 * c.sqrt().atan2((1.0 - c).sqrt()))
}

pub fn capability_from_radius(r_sv: CapRadius) -> f64 {
    (0.5 * r_sv.value()).sin().powi(2).clamp(0.0, 1.0)
}

/// Multi-antenna downlink used to estimate the ensemble-average rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Hz.
    pub bandwidth: f64,
    /// Per-user transmit power, W. Equal allocation across users.
    pub tx_power: f64,
    /// Metres.
    pub distance: f64,
    pub pathloss_exp: f64,
    /// W.
    pub noise_power: f64,
    pub antennas: u32,
    pub users: u32,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        positive("bandwidth", self.bandwidth)?;
        positive("distance", self.distance)?;
        positive("pathloss_exp", self.pathloss_exp)?;
        positive("noise_power", self.noise_power)?;
        if !(self.tx_power.is_finite() && self.tx_power >= 0.0) {
            return Err(Error::invalid(
                "tx_power",
                self.tx_power,
                "must be non-negative",
            ));
        }
        if self.users == 0 || self.antennas == 0 {
            return Err(Error::invalid(
                "antennas",
                0.0,
                "antennas and users must be positive",
            ));
        }
        if self.users > self.antennas {
            return Err(Error::invalid(
                "users",
                f64::from(self.users),
                "zero-forcing needs users <= antennas",
            ));
        }
        Ok(())
    }

    /// Average received SNR before beamforming gain, `p · d^{−β} / σ²`.
    pub fn mean_snr(&self) -> f64 {
        self.tx_power * self.distance.powf(-self.pathloss_exp) / self.noise_power
    }

    /// Shape of the Gamma(·, 1) effective gain: `N_t − K + 1`.
    pub fn gain_shape(&self) -> f64 {
        f64::from(self.antennas - self.users + 1)
    }
}

/// Rate estimate with its standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

pub fn mc_avg_rate(ch: &ChannelConfig, n: usize, seed: u64) -> Result<RateEstimate> {
    mc_avg_rate_with(Exec::default(), ch, n, seed)
}

/// Monte-Carlo ensemble-average rate under zero-forcing with i.i.d.
/// unit-variance complex Gaussian channels.
///
/// The zero-forcing effective gain `|hᴴw|²` is Gamma distributed with shape
/// `N_t − K + 1` and unit scale (chi-squared with `2(N_t − K + 1)` degrees of
/// freedom, scaled by 1/2); it is sampled directly.
pub fn mc_avg_rate_with(
    exec: Exec,
    ch: &ChannelConfig,
    n: usize,
    seed: u64,
) -> Result<RateEstimate> {
    ch.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "sample count must be at least 1"));
    }
    let snr = ch.mean_snr();
    let gain = Gamma::new(ch.gain_shape(), 1.0).expect("shape is positive");
    let blocks = n.div_ceil(MC_BLOCK);
    let partial: Vec<(f64, f64)> = exec.map_range(blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let len = MC_BLOCK.min(n - b * MC_BLOCK);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            let g: f64 = gain.sample(&mut rng);
            let c = (snr * g).ln_1p() / std::f64::consts::LN_2;
            s += c;
            s2 += c * c;
        }
        (s, s2)
    });
    let (s, s2) = partial
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok(RateEstimate {
        mean: ch.bandwidth * mean,
        std_error: ch.bandwidth * (var / nf).sqrt(),
        samples: n as u64,
    })
}

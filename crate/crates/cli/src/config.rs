//! Scenario files (TOML) and their resolution into validated model inputs.
//!
//! ```toml
//! r_fov = { deg = 50 }
//! epsilon = { fraction = 0.4 }   # of r_fov; or { rad = 0.349 } / { deg = 20 }
//! seed = 7
//! r_sv_grid = "0:1pi:181"        # or r_sv = { rad = 1.2 }, or a [resource] block
//!
//! [sweep]
//! e = "0:1pi:181"
//! eps = "0.4fov"
//!
//! [privacy]
//! max_leak_prob = 0.2
//!
//! [traces.synthetic]
//! model = "random_walk"
//! kappa = 3000
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vrpl_core::resource::{ChannelConfig, ResourceConfig, TileSpec};
use vrpl_core::trace::{Predictor, SyntheticModel, WindowingConfig};
use vrpl_core::{CapRadius, PrivacyRequirement};

use crate::error::CliError;
use crate::grid::{self, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    #[default]
    Csv,
}

/// An angle written with an explicit unit.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angle {
    pub deg: Option<f64>,
    pub rad: Option<f64>,
}

impl Angle {
    fn resolve(&self, path: &str) -> Result<f64, CliError> {
        match (self.deg, self.rad) {
            (Some(d), None) => Ok(d.to_radians()),
            (None, Some(r)) => Ok(r),
            _ => Err(CliError::config(format!(
                "{path}: give exactly one of `deg` or `rad`"
            ))),
        }
    }
}

/// The sensitive radius, either absolute or as a fraction of `r_fov`.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Epsilon {
    pub fraction: Option<f64>,
    pub deg: Option<f64>,
    pub rad: Option<f64>,
}

impl Epsilon {
    fn resolve(&self, r_fov: f64) -> Result<f64, CliError> {
        match (self.fraction, self.deg, self.rad) {
            (Some(f), None, None) => Ok(f * r_fov),
            (None, Some(d), None) => Ok(d.to_radians()),
            (None, None, Some(r)) => Ok(r),
            _ => Err(CliError::config(
                "epsilon: give exactly one of `fraction`, `deg` or `rad`",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBlock {
    pub bandwidth: f64,
    pub tx_power: f64,
    pub distance: f64,
    pub pathloss_exp: f64,
    pub noise_power: f64,
    pub antennas: u32,
    pub users: u32,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

fn default_mc_samples() -> usize {
    100_000
}

impl ChannelBlock {
    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig {
            bandwidth: self.bandwidth,
            tx_power: self.tx_power,
            distance: self.distance,
            pathloss_exp: self.pathloss_exp,
            noise_power: self.noise_power,
            antennas: self.antennas,
            users: self.users,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileBlock {
    pub px_w: u32,
    pub px_h: u32,
    pub bits_per_pixel: u32,
    pub compression_ratio: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceBlock {
    pub compute_flops: f64,
    pub users: u32,
    pub flops_per_bit: f64,
    /// bit/s; estimated from `channel` when absent.
    pub avg_data_rate: Option<f64>,
    pub cc_duration: f64,
    pub frames_per_segment: u32,
    pub tiles_per_frame: u32,
    pub tile: TileBlock,
    pub channel: Option<ChannelBlock>,
}

impl ResourceBlock {
    pub fn tile(&self) -> TileSpec {
        TileSpec {
            px_w: self.tile.px_w,
            px_h: self.tile.px_h,
            bits_per_pixel: self.tile.bits_per_pixel,
            compression_ratio: self.tile.compression_ratio,
        }
    }

    pub fn config(&self, avg_data_rate: f64) -> ResourceConfig {
        ResourceConfig {
            compute_flops: self.compute_flops,
            users: self.users,
            flops_per_bit: self.flops_per_bit,
            avg_data_rate,
            cc_duration: self.cc_duration,
            frames_per_segment: self.frames_per_segment,
            tiles_per_frame: self.tiles_per_frame,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowingBlock {
    t_obw: Option<f64>,
    t_cc: Option<f64>,
    t_pdw: Option<f64>,
    sample_rate: Option<f64>,
    passive_prefix: Option<u32>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrivacyBlock {
    max_leak_prob: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepBlock {
    e: Option<String>,
    eps: Option<String>,
    /// Observed QoE values; sweep-leakage then skips the forward model.
    q: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelName {
    RandomWalk,
    GreatCircleDrift,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SyntheticBlock {
    model: ModelName,
    kappa: Option<f64>,
    /// rad/s
    drift_rate: Option<f64>,
    #[serde(default = "default_traces")]
    n_traces: usize,
    #[serde(default = "default_duration")]
    duration_s: f64,
}

fn default_traces() -> usize {
    10
}

fn default_duration() -> f64 {
    60.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceBlock {
    path: Option<PathBuf>,
    synthetic: Option<SyntheticBlock>,
    predictor: Option<Predictor>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputBlock {
    dir: Option<PathBuf>,
    format: Option<Format>,
}

/// A scenario file as written.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    r_fov: Option<Angle>,
    epsilon: Option<Epsilon>,
    r_sv: Option<Angle>,
    r_sv_grid: Option<String>,
    resource: Option<ResourceBlock>,
    windowing: Option<WindowingBlock>,
    privacy: Option<PrivacyBlock>,
    sweep: Option<SweepBlock>,
    traces: Option<TraceBlock>,
    seed: Option<u64>,
    output: Option<OutputBlock>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message())))
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    /// `name=spec` pairs; names are `e`, `eps`, `q` and `r_sv`.
    pub grids: Vec<String>,
}

/// Where the streamed-FoV radius comes from.
#[derive(Debug, Clone)]
pub enum SfovSource {
    Resource(ResourceBlock),
    Single(f64),
    Grid(Vec<f64>),
}

#[derive(Debug, Clone)]
pub enum TraceSource {
    File(PathBuf),
    Synthetic {
        model: SyntheticModel,
        n_traces: usize,
        duration: f64,
    },
}

/// A fully resolved and validated scenario; every angle is in radians.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub r_fov: CapRadius,
    pub epsilon: f64,
    pub sfov: Option<SfovSource>,
    pub windowing: WindowingConfig,
    pub privacy: Option<PrivacyRequirement>,
    pub e_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub q_grid: Option<Vec<f64>>,
    pub traces: Option<TraceSource>,
    pub predictor: Predictor,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
}

const DEFAULT_E_GRID: &str = "0:1pi:181";

fn at(path: &'static str) -> impl Fn(vrpl_core::Error) -> CliError {
    move |e| CliError::config(format!("{path}: {e}"))
}

impl Scenario {
    pub fn resolve(raw: RawConfig, ov: &Overrides) -> Result<Self, CliError> {
        let r_fov_rad = match &raw.r_fov {
            Some(a) => a.resolve("r_fov")?,
            None => 50f64.to_radians(),
        };
        let r_fov = CapRadius::new(r_fov_rad).map_err(at("r_fov"))?;
        vrpl_core::qoe::check_fov(r_fov).map_err(at("r_fov"))?;

        let epsilon = raw
            .epsilon
            .unwrap_or(Epsilon {
                fraction: Some(0.4),
                ..Default::default()
            })
            .resolve(r_fov_rad)?;
        check_eps("epsilon", epsilon, r_fov_rad)?;

        let mut grid_overrides: Vec<(String, String)> = Vec::new();
        for g in &ov.grids {
            let (name, spec) = g
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("--grid `{g}`: expected name=spec")))?;
            let name = name.trim();
            if !matches!(name, "e" | "eps" | "q" | "r_sv") {
                return Err(CliError::config(format!(
                    "--grid `{g}`: unknown grid `{name}` (expected e, eps, q or r_sv)"
                )));
            }
            grid_overrides.push((name.to_string(), spec.trim().to_string()));
        }
        let flag = |name: &str| {
            grid_overrides
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, s)| s.clone())
        };
        let parse = |path: &str, spec: &str| -> Result<Grid, CliError> {
            grid::parse(spec, r_fov_rad).map_err(|m| CliError::config(format!("{path}: {m}")))
        };

        let sweep = raw.sweep.clone().unwrap_or_default();
        let e_spec = flag("e")
            .or(sweep.e)
            .unwrap_or_else(|| DEFAULT_E_GRID.into());
        let e_grid = parse("sweep.e", &e_spec)?.values;
        if let Some(bad) = e_grid.iter().find(|e| !(0.0..=PI).contains(*e)) {
            return Err(CliError::config(format!("sweep.e: {bad} outside [0, pi]")));
        }
        let eps_grid = match flag("eps").or(sweep.eps) {
            Some(spec) => parse("sweep.eps", &spec)?.values,
            None => vec![epsilon],
        };
        for &eps in &eps_grid {
            check_eps("sweep.eps", eps, r_fov_rad)?;
        }
        let q_grid = match flag("q").or(sweep.q) {
            Some(spec) => {
                let g = parse("sweep.q", &spec)?.values;
                if let Some(bad) = g.iter().find(|q| !(0.0..=1.0).contains(*q)) {
                    return Err(CliError::config(format!("sweep.q: {bad} outside [0, 1]")));
                }
                Some(g)
            }
            None => None,
        };

        // a flag grid replaces whichever SFoV source the file names
        let sfov = if let Some(spec) = flag("r_sv") {
            Some(SfovSource::Grid(parse("--grid r_sv", &spec)?.values))
        } else {
            let present = [
                raw.resource.is_some(),
                raw.r_sv.is_some(),
                raw.r_sv_grid.is_some(),
            ];
            if present.iter().filter(|p| **p).count() > 1 {
                return Err(CliError::config(
                    "give exactly one of `resource`, `r_sv` or `r_sv_grid`",
                ));
            }
            if let Some(res) = raw.resource {
                Some(SfovSource::Resource(res))
            } else if let Some(a) = raw.r_sv {
                Some(SfovSource::Single(a.resolve("r_sv")?))
            } else if let Some(spec) = &raw.r_sv_grid {
                Some(SfovSource::Grid(parse("r_sv_grid", spec)?.values))
            } else {
                None
            }
        };
        match &sfov {
            Some(SfovSource::Single(r)) => {
                CapRadius::new(*r).map_err(at("r_sv"))?;
            }
            Some(SfovSource::Grid(g)) => {
                for &r in g {
                    CapRadius::new(r).map_err(at("r_sv_grid"))?;
                }
            }
            Some(SfovSource::Resource(res)) => {
                if res.avg_data_rate.is_none() && res.channel.is_none() {
                    return Err(CliError::config(
                        "resource: give `avg_data_rate` or a [resource.channel] block",
                    ));
                }
                res.tile().validate().map_err(at("resource.tile"))?;
                res.config(res.avg_data_rate.unwrap_or(1.0))
                    .validate()
                    .map_err(at("resource"))?;
                if let Some(ch) = &res.channel {
                    ch.channel().validate().map_err(at("resource.channel"))?;
                }
            }
            None => {}
        }

        let w = raw.windowing.unwrap_or_default();
        let d = WindowingConfig::default();
        let windowing = WindowingConfig {
            t_obw: w.t_obw.unwrap_or(d.t_obw),
            t_cc: w.t_cc.unwrap_or(d.t_cc),
            t_pdw: w.t_pdw.unwrap_or(d.t_pdw),
            sample_rate: w.sample_rate.unwrap_or(d.sample_rate),
            passive_prefix: w.passive_prefix.unwrap_or(d.passive_prefix),
        };
        windowing.validate().map_err(at("windowing"))?;

        let privacy = raw
            .privacy
            .map(|p| PrivacyRequirement::new(epsilon, p.max_leak_prob, r_fov))
            .transpose()
            .map_err(at("privacy"))?;

        let tb = raw.traces.unwrap_or_default();
        let traces = match (tb.path, tb.synthetic) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "traces: give either `path` or [traces.synthetic], not both",
                ))
            }
            (Some(p), None) => Some(TraceSource::File(p)),
            (None, Some(s)) => {
                let model = match s.model {
                    ModelName::RandomWalk => SyntheticModel::RandomWalk {
                        kappa: s.kappa.ok_or_else(|| {
                            CliError::config("traces.synthetic.kappa: required for random_walk")
                        })?,
                    },
                    ModelName::GreatCircleDrift => SyntheticModel::GreatCircleDrift {
                        rate: s.drift_rate.ok_or_else(|| {
                            CliError::config(
                                "traces.synthetic.drift_rate: required for great_circle_drift",
                            )
                        })?,
                    },
                };
                Some(TraceSource::Synthetic {
                    model,
                    n_traces: s.n_traces,
                    duration: s.duration_s,
                })
            }
            (None, None) => None,
        };

        let out = raw.output.unwrap_or_default();
        Ok(Scenario {
            r_fov,
            epsilon,
            sfov,
            windowing,
            privacy,
            e_grid,
            eps_grid,
            q_grid,
            traces,
            predictor: tb.predictor.unwrap_or(Predictor::LastPosition),
            seed: ov.seed.or(raw.seed).unwrap_or(0),
            out_dir: ov.out.clone().or(out.dir),
            format: ov.format.or(out.format).unwrap_or_default(),
        })
    }
}

fn check_eps(path: &str, eps: f64, r_fov: f64) -> Result<(), CliError> {
    if eps.is_finite() && (0.0..=r_fov).contains(&eps) {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "{path}: {eps} outside [0, r_fov = {r_fov}]"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<Scenario, CliError> {
        Scenario::resolve(RawConfig::parse(text)?, &Overrides::default())
    }

    #[test]
    fn empty_config_uses_defaults() {
        let s = resolve("").unwrap();
        assert!((s.r_fov.value() - 50f64.to_radians()).abs() < 1e-15);
        assert!((s.epsilon - 0.4 * s.r_fov.value()).abs() < 1e-15);
        assert_eq!(s.e_grid.len(), 181);
        assert_eq!(s.windowing, WindowingConfig::default());
        assert!(s.sfov.is_none());
    }

    #[test]
    fn unit_tags_agree() {
        let a = resolve("r_fov = { deg = 50 }\nepsilon = { fraction = 0.4 }").unwrap();
        let b = resolve(&format!(
            "r_fov = {{ rad = {} }}\nepsilon = {{ deg = 20 }}",
            50f64.to_radians()
        ))
        .unwrap();
        assert_eq!(a.r_fov, b.r_fov);
        assert!((a.epsilon - b.epsilon).abs() < 1e-15);
    }

    #[test]
    fn rejects_conflicting_sources() {
        let e = resolve("r_sv = { rad = 1.0 }\nr_sv_grid = \"0:1:3\"").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(resolve("r_fov = { deg = 50, rad = 1.0 }").is_err());
        assert!(resolve("r_fov = { deg = 120 }").is_err());
        assert!(resolve("epsilon = { fraction = 1.5 }").is_err());
        assert!(resolve("bogus = 1").is_err());
        assert!(resolve("[windowing]\nt_obw = 3.0").is_err());
    }

    #[test]
    fn flag_grid_wins() {
        let raw = RawConfig::parse("r_sv = { rad = 1.0 }").unwrap();
        let ov = Overrides {
            grids: vec!["r_sv=0.1:0.3:3".into(), "eps=0.1fov".into()],
            ..Default::default()
        };
        let s = Scenario::resolve(raw, &ov).unwrap();
        match s.sfov {
            Some(SfovSource::Grid(g)) => assert_eq!(g.len(), 3),
            other => panic!("{other:?}"),
        }
        assert!((s.eps_grid[0] - 0.1 * s.r_fov.value()).abs() < 1e-15);
    }
}

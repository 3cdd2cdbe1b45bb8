//! Experiment configuration files.
//!
//! A config is a TOML document with one table per concern: `[grid]`,
//! `[scene]`, `[energy]`, `[routing]`, `[sim]` and `[experiment]`. Every key
//! is optional and unknown keys are rejected. [`FileConfig::resolved`]
//! fills in every derived default, so its TOML rendering describes a run
//! completely and can be fed back in unchanged.

use std::path::Path;

use hypercp_core::energy::EnergyConfig;
use hypercp_core::scene::SceneConfig;
use hypercp_core::{Coord, GridTopology, RoutingConfig, RunConfig, Variant, Vec3};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub rows: u16,
    pub cols: u16,
    /// `[i, j]` pairs; defaults to the middle of each edge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gateways: Option<Vec<[u16; 2]>>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            rows: 31,
            cols: 31,
            gateways: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub y_max_cm: f64,
    pub z_max_cm: f64,
    /// `[x, y, z]`, cm.
    pub source_start_cm: [f64; 3],
    pub source_end_cm: [f64; 3],
    pub speed_cm_per_s: f64,
    pub cone_opening_deg: f64,
    pub tx_power_mw: f64,
}

impl Default for SceneSection {
    fn default() -> Self {
        let s = SceneConfig::default();
        Self {
            y_max_cm: s.y_max,
            z_max_cm: s.z_max,
            source_start_cm: [s.source_start.x, s.source_start.y, s.source_start.z],
            source_end_cm: [s.source_end.x, s.source_end.y, s.source_end.z],
            speed_cm_per_s: s.speed,
            cone_opening_deg: s.cone_opening_deg,
            tx_power_mw: s.tx_power,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    pub harvest_rate_pj_per_s: f64,
    pub drain_per_tx_pj: f64,
    pub capacity_pj: f64,
    pub rest_duration_s: f64,
    /// Defaults to the capacity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_battery_pj: Option<f64>,
}

impl Default for EnergySection {
    fn default() -> Self {
        let e = EnergyConfig::default();
        Self {
            harvest_rate_pj_per_s: e.harvest_rate,
            drain_per_tx_pj: e.drain_per_tx,
            capacity_pj: e.capacity,
            rest_duration_s: e.rest_duration,
            initial_battery_pj: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingSection {
    pub battery_threshold_fraction: f64,
    /// Hard-wired sense rate assumed by every node, packets/s. When absent
    /// it follows each run's sensing period as `1 / period`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sense_rate_global: Option<f64>,
}

impl Default for RoutingSection {
    fn default() -> Self {
        Self {
            battery_threshold_fraction: RoutingConfig::default().battery_threshold_fraction,
            sense_rate_global: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    /// Used when `[experiment].periods` is absent.
    pub sensing_period_s: f64,
    pub link_delay_s: f64,
    /// Defaults to the source traversal time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    pub queue_capacity: usize,
    pub metric_interval_s: f64,
    /// Defaults to `4 · (rows + cols)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hop_limit: Option<u32>,
}

impl Default for SimSection {
    fn default() -> Self {
        let r = RunConfig::new(1.0, Variant::Ideal);
        Self {
            sensing_period_s: r.sensing_period,
            link_delay_s: r.link_delay,
            duration_s: None,
            queue_capacity: r.queue_capacity,
            metric_interval_s: r.metric_interval,
            hop_limit: None,
        }
    }
}

/// Which routing variants a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Ideal,
    Estimated,
    Both,
}

impl VariantChoice {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantChoice::Ideal => vec![Variant::Ideal],
            VariantChoice::Estimated => vec![Variant::Estimated],
            VariantChoice::Both => Variant::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Sensing periods to sweep, s. Defaults to `[sim].sensing_period_s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods_s: Option<Vec<f64>>,
    pub replications: u32,
    pub variants: VariantChoice,
    /// Replication `k` runs with seed `seed + k`.
    pub seed: u64,
    pub trace: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            periods_s: None,
            replications: 1,
            variants: VariantChoice::Both,
            seed: 1,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub grid: GridSection,
    pub scene: SceneSection,
    pub energy: EnergySection,
    pub routing: RoutingSection,
    pub sim: SimSection,
    pub experiment: ExperimentSection,
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// The full sensing-period sweep with both variants.
    #[value(name = "paper-fig4-7")]
    PaperFig4To7,
}

impl Preset {
    pub const FIG4_7_PERIODS: [f64; 8] = [0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
    pub const FIG4_7_REPLICATIONS: u32 = 20;

    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperFig4To7 => "paper-fig4-7",
        }
    }

    pub fn apply(self, cfg: &mut FileConfig) {
        match self {
            Preset::PaperFig4To7 => {
                cfg.experiment.periods_s = Some(Self::FIG4_7_PERIODS.to_vec());
                cfg.experiment.replications = Self::FIG4_7_REPLICATIONS;
                cfg.experiment.variants = VariantChoice::Both;
            }
        }
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub periods: Option<Vec<f64>>,
    pub replications: Option<u32>,
    pub variants: Option<VariantChoice>,
    pub seed: Option<u64>,
    pub trace: bool,
}

impl Overrides {
    /// Applies the preset first, then the individual flags.
    pub fn apply(&self, cfg: &mut FileConfig) {
        if let Some(p) = self.preset {
            p.apply(cfg);
        }
        if let Some(p) = &self.periods {
            cfg.experiment.periods_s = Some(p.clone());
        }
        if let Some(r) = self.replications {
            cfg.experiment.replications = r;
        }
        if let Some(v) = self.variants {
            cfg.experiment.variants = v;
        }
        if let Some(s) = self.seed {
            cfg.experiment.seed = s;
        }
        if self.trace {
            cfg.experiment.trace = true;
        }
    }
}

/// A validated experiment: the run template plus the sweep axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    /// Template; period, sense rate, variant and seed are set per run.
    pub base: RunConfig,
    /// Whether the sense rate follows the period.
    pub sense_rate_follows_period: bool,
    pub periods: Vec<f64>,
    pub replications: u32,
    pub variants: Vec<Variant>,
    pub seed: u64,
    pub trace: bool,
}

impl Experiment {
    /// The configuration of one cell of the sweep.
    pub fn run_config(&self, period: f64, variant: Variant, replication: u32) -> RunConfig {
        let mut cfg = self.base.clone();
        cfg.sensing_period = period;
        if self.sense_rate_follows_period {
            cfg.routing.sense_rate_global = 1.0 / period;
        }
        cfg.routing.variant = variant;
        cfg.seed = self.seed.wrapping_add(u64::from(replication));
        cfg.record_trace = self.trace;
        cfg
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(vec![e.message().to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(vec![format!(
            "cannot read config {}: {e}",
            path.display()
        )]))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(v) => CliError::Config(v.into_iter().map(|m| format!("{}: {m}", path.display())).collect()),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    fn topology(&self) -> Result<GridTopology, Vec<String>> {
        let g = &self.grid;
        let topo = match &g.gateways {
            None => GridTopology::new(g.rows, g.cols),
            Some(list) => GridTopology::with_gateways(g.rows, g.cols, list.iter().map(|&[i, j]| Coord::new(i, j)).collect()),
        };
        topo.map_err(|e| match e {
            hypercp_core::Error::InvalidConfig(v) => v,
            other => vec![other.to_string()],
        })
    }

    fn scene(&self) -> SceneConfig {
        let s = &self.scene;
        SceneConfig {
            y_max: s.y_max_cm,
            z_max: s.z_max_cm,
            source_start: vec3(s.source_start_cm),
            source_end: vec3(s.source_end_cm),
            speed: s.speed_cm_per_s,
            cone_opening_deg: s.cone_opening_deg,
            tx_power: s.tx_power_mw,
        }
    }

    fn energy(&self) -> EnergyConfig {
        let e = &self.energy;
        EnergyConfig {
            harvest_rate: e.harvest_rate_pj_per_s,
            drain_per_tx: e.drain_per_tx_pj,
            capacity: e.capacity_pj,
            rest_duration: e.rest_duration_s,
            initial_battery: e.initial_battery_pj.unwrap_or(e.capacity_pj),
        }
    }

    /// Checks every constraint and builds the experiment, or lists every
    /// violation found.
    pub fn experiment(&self) -> Result<Experiment, CliError> {
        let mut violations = Vec::new();
        let topo = self.topology().map_err(|v| violations.extend(v)).ok();

        let x = &self.experiment;
        let periods = x.periods_s.clone().unwrap_or_else(|| vec![self.sim.sensing_period_s]);
        if periods.is_empty() {
            violations.push("experiment.periods_s must not be empty".to_string());
        }
        for &p in &periods {
            if !(p > 0.0 && p.is_finite()) {
                violations.push(format!("sensing period must be positive, got {p}"));
            }
        }
        if x.replications == 0 {
            violations.push("experiment.replications must be at least 1".to_string());
        }
        if !(self.sim.sensing_period_s > 0.0 && self.sim.sensing_period_s.is_finite()) {
            violations.push(format!(
                "sim.sensing_period_s must be positive, got {}",
                self.sim.sensing_period_s
            ));
        }

        let base = topo.map(|grid| {
            let period = periods.first().copied().filter(|p| *p > 0.0).unwrap_or(1.0);
            RunConfig {
                grid,
                scene: self.scene(),
                energy: self.energy(),
                routing: RoutingConfig {
                    battery_threshold_fraction: self.routing.battery_threshold_fraction,
                    sense_rate_global: self.routing.sense_rate_global.unwrap_or(1.0 / period),
                    variant: Variant::Ideal,
                },
                sensing_period: period,
                link_delay: self.sim.link_delay_s,
                seed: x.seed,
                duration: self.sim.duration_s,
                queue_capacity: self.sim.queue_capacity,
                metric_interval: self.sim.metric_interval_s,
                hop_limit: self.sim.hop_limit,
                record_trace: x.trace,
            }
        });
        if let Some(b) = &base {
            // Period problems were reported above with the period itself.
            violations.extend(b.violations().into_iter().filter(|v| !v.starts_with("sim.sensing_period")));
        }
        match base {
            Some(base) if violations.is_empty() => Ok(Experiment {
                base,
                sense_rate_follows_period: self.routing.sense_rate_global.is_none(),
                periods,
                replications: x.replications,
                variants: x.variants.variants(),
                seed: x.seed,
                trace: x.trace,
            }),
            _ => Err(CliError::Config(violations)),
        }
    }

    /// The same configuration with every derivable default written out.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let exp = self.experiment()?;
        let mut out = self.clone();
        out.grid.gateways = Some(exp.base.grid.gateways().iter().map(|g| [g.i, g.j]).collect());
        out.energy.initial_battery_pj = Some(exp.base.energy.initial_battery);
        out.sim.duration_s = Some(exp.base.effective_duration());
        out.sim.hop_limit = Some(exp.base.effective_hop_limit());
        out.experiment.periods_s = Some(exp.periods.clone());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = FileConfig::from_toml("").unwrap();
        assert_eq!(cfg, FileConfig::default());
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.base.grid.rows(), 31);
        assert_eq!(exp.base.energy.capacity, 1000.0);
        assert_eq!(exp.periods, vec![1.0]);
        assert_eq!(exp.variants, Variant::ALL.to_vec());
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = FileConfig::from_toml("[sim]\nsensing_perod_s = 2.0\n").unwrap_err();
        let CliError::Config(v) = err else { panic!() };
        assert!(v[0].contains("sensing_perod_s"), "{v:?}");
    }

    #[test]
    fn violations_are_collected() {
        let cfg = FileConfig::from_toml("[sim]\nsensing_period_s = -1.0\nlink_delay_s = 0.0\n").unwrap();
        let CliError::Config(v) = cfg.experiment().unwrap_err() else { panic!() };
        assert!(v.iter().any(|m| m.contains("-1")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("link_delay")), "{v:?}");
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = FileConfig::from_toml("[experiment]\nperiods_s = [0.5, 2.0]\n").unwrap();
        let resolved = cfg.resolved().unwrap();
        let text = resolved.to_toml();
        let back = FileConfig::from_toml(&text).unwrap();
        assert_eq!(back, resolved);
        assert_eq!(back.resolved().unwrap(), resolved);
        assert_eq!(back.experiment().unwrap(), resolved.experiment().unwrap());
        let (a, b) = (back.experiment().unwrap().base, cfg.experiment().unwrap().base);
        assert_eq!(a.effective_duration(), b.effective_duration());
        assert_eq!(a.effective_hop_limit(), b.effective_hop_limit());
    }

    #[test]
    fn overrides_beat_preset_and_file() {
        let mut cfg = FileConfig::from_toml("[experiment]\nreplications = 3\n").unwrap();
        Overrides {
            preset: Some(Preset::PaperFig4To7),
            replications: Some(2),
            ..Overrides::default()
        }
        .apply(&mut cfg);
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.replications, 2);
        assert_eq!(exp.periods, Preset::FIG4_7_PERIODS.to_vec());
    }

    #[test]
    fn sweep_cells_derive_seed_and_rate() {
        let exp = FileConfig::default().experiment().unwrap();
        let cell = exp.run_config(0.5, Variant::Estimated, 3);
        assert_eq!(cell.seed, exp.seed + 3);
        assert_eq!(cell.routing.sense_rate_global, 2.0);
        assert_eq!(cell.routing.variant, Variant::Estimated);
    }
}

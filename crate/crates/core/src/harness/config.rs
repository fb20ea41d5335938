use serde::{Deserialize, Serialize};

use crate::attention::AttentionConfig;
use crate::clustering::{ClustererConfig, ClustererKind};
use crate::error::{Error, Result};
use crate::filter::FilterConfig;
use crate::habituation::HabituationParams;

pub const SEED_ENV: &str = "NEOTAXIS_SEED";

/// How much evidence a sensor needs before the robot turns to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gating {
    pub confirm_ticks: u32,
    pub confirm_window: u32,
    pub settle_ticks: u32,
}

impl Gating {
    /// Defaults per network. The TKM reports on every tick and loses a fast
    /// flash between its pulses, so it gets a short, gappy window.
    pub fn for_kind(kind: ClustererKind) -> Self {
        match kind {
            ClustererKind::SomRing | ClustererKind::Kmeans => Self {
                confirm_ticks: 8,
                confirm_window: 12,
                settle_ticks: 6,
            },
            ClustererKind::Tkm => Self {
                confirm_ticks: 4,
                confirm_window: 6,
                settle_ticks: 0,
            },
        }
    }
}

/// Clusterer settings shared by the four per-sensor filters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub num_neurons: usize,
    /// Lag-vector width for the distance kinds; the TKM always takes one reading.
    pub lag_len: usize,
    pub eta: f64,
    pub gamma: f64,
    pub history_depth: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            num_neurons: 12,
            lag_len: 6,
            eta: 0.25,
            gamma: 0.4,
            history_depth: 3,
        }
    }
}

/// Everything needed to build a simulation. Loaded from TOML; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub kind: ClustererKind,
    pub forgetting: bool,
    pub boredom_threshold: f64,
    pub calibration: bool,
    pub scan_dwell: u32,
    /// Gating overrides; unset fields come from [`Gating::for_kind`].
    pub confirm_ticks: Option<u32>,
    pub confirm_window: Option<u32>,
    pub settle_ticks: Option<u32>,
    pub rank_by_peak: bool,
    /// Clear lag windows and TKM activities whenever the robot rotates.
    pub clear_context_on_turn: bool,
    pub noise_std: f64,
    /// Accepted for compatibility with published constant sets; has no effect.
    pub beta: Option<f64>,
    pub habituation: HabituationParams<f64>,
    pub network: NetworkConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            kind: ClustererKind::SomRing,
            forgetting: true,
            boredom_threshold: 0.4,
            calibration: false,
            scan_dwell: 12,
            confirm_ticks: None,
            confirm_window: None,
            settle_ticks: None,
            rank_by_peak: true,
            clear_context_on_turn: true,
            noise_std: 0.0,
            beta: None,
            habituation: HabituationParams::robot(),
            network: NetworkConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let config: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidScenario(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(beta) = self.beta {
            log::warn!("config key `beta` = {beta} is accepted but not used by any model");
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return Err(Error::InvalidParameter(format!("noise_std must be >= 0, got {}", self.noise_std)));
        }
        self.filter_config(0).validate()?;
        self.attention_config().validate()
    }

    /// Replaces the seed with `NEOTAXIS_SEED` when it is set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV}=`{raw}` is not an integer")))?;
        }
        Ok(())
    }

    /// Seed for one sensor's clusterer; filters differ so they do not mirror each other.
    pub fn sensor_seed(&self, sensor_id: usize) -> u64 {
        self.seed.wrapping_mul(0x5851_F42D_4C95_7F2D).wrapping_add(sensor_id as u64 + 1)
    }

    pub fn filter_config(&self, sensor_id: usize) -> FilterConfig<f64> {
        let mut clusterer = ClustererConfig::new(self.kind, self.sensor_seed(sensor_id));
        clusterer.num_neurons = self.network.num_neurons;
        clusterer.eta = self.network.eta;
        clusterer.gamma = self.network.gamma;
        clusterer.history_depth = self.network.history_depth;
        if self.kind != ClustererKind::Tkm {
            clusterer.input_dim = self.network.lag_len;
        }
        FilterConfig {
            clusterer,
            habituation: self.habituation,
            forgetting: self.forgetting,
            boredom_threshold: self.boredom_threshold,
        }
    }

    /// Gating after overrides. An explicit `confirm_ticks` without a window
    /// asks for consecutive novel reports.
    pub fn gating(&self) -> Gating {
        let preset = Gating::for_kind(self.kind);
        let confirm_ticks = self.confirm_ticks.unwrap_or(preset.confirm_ticks);
        let confirm_window = match (self.confirm_window, self.confirm_ticks) {
            (Some(w), _) => w,
            (None, Some(k)) => k,
            (None, None) => preset.confirm_window,
        };
        Gating {
            confirm_ticks,
            confirm_window,
            settle_ticks: self.settle_ticks.unwrap_or(preset.settle_ticks),
        }
    }

    pub fn attention_config(&self) -> AttentionConfig<f64> {
        let gating = self.gating();
        AttentionConfig {
            boredom_threshold: self.boredom_threshold,
            calibration: self.calibration,
            scan_dwell: self.scan_dwell,
            confirm_ticks: gating.confirm_ticks,
            confirm_window: Some(gating.confirm_window),
            settle_ticks: gating.settle_ticks,
            rank_by_peak: self.rank_by_peak,
        }
    }
}

/// Overlays `top` onto `base`, recursing into nested tables.
pub fn merge_tables(base: &mut toml::Table, top: &toml::Table) {
    for (key, value) in top {
        match (base.get_mut(key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge_tables(b, t),
            _ => {
                base.insert(key.clone(), value.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::habituation::Discretization;

    #[test]
    fn empty_toml_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_nested_tables() {
        let c = RunConfig::from_toml(
            "kind = 'tkm'\nforgetting = false\nbeta = 0.1\n[habituation]\ntau = 20.0\nalpha = 1.05\nmode = 'divisive'\n",
        )
        .unwrap();
        assert_eq!(c.kind, ClustererKind::Tkm);
        assert_eq!(c.habituation.mode, Discretization::Divisive);
        assert_eq!(c.habituation.y0, 1.0);
        assert_eq!(c.beta, Some(0.1));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml("gamma_ray = 1").is_err());
        assert!(RunConfig::from_toml("boredom_threshold = 1.5").is_err());
        assert!(RunConfig::from_toml("[habituation]\ntau = 0.1\nmode = 'divisive'").is_err());
    }

    #[test]
    fn tkm_takes_single_reading() {
        let c = RunConfig { kind: ClustererKind::Tkm, ..RunConfig::default() };
        assert_eq!(c.filter_config(0).clusterer.input_dim, 1);
        assert_eq!(RunConfig::default().filter_config(0).clusterer.input_dim, 6);
    }

    #[test]
    fn gating_overrides() {
        let c = RunConfig { kind: ClustererKind::Tkm, ..RunConfig::default() };
        assert_eq!(c.gating(), Gating::for_kind(ClustererKind::Tkm));
        let c = RunConfig { confirm_ticks: Some(2), ..RunConfig::default() };
        assert_eq!(c.gating().confirm_window, 2);
        let c = RunConfig::from_toml("confirm_ticks = 2\nconfirm_window = 5\nsettle_ticks = 1").unwrap();
        assert_eq!(c.gating(), Gating { confirm_ticks: 2, confirm_window: 5, settle_ticks: 1 });
        assert!(RunConfig::from_toml("confirm_ticks = 9\nconfirm_window = 5").is_err());
    }

    #[test]
    fn merge_is_recursive() {
        let mut base: toml::Table = toml::from_str("seed = 1\n[habituation]\ntau = 0.2\nalpha = 0.5").unwrap();
        let top: toml::Table = toml::from_str("[habituation]\ntau = 0.1").unwrap();
        merge_tables(&mut base, &top);
        let c = RunConfig::from_table(base).unwrap();
        assert_eq!(c.habituation.tau, 0.1);
        assert_eq!(c.habituation.alpha, 0.5);
    }
}

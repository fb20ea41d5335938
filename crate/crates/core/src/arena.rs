//! Discrete-time light arena.
//!
//! Lights sit on a bearing circle around a robot that can only rotate. The robot
//! carries four light sensors facing the cardinal directions relative to its
//! heading; each sees a hard-edged 90 degree field of view.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_SENSORS: usize = 4;
pub const SENSOR_SPACING_DEG: f64 = 90.0;
const HALF_FIELD_DEG: f64 = 45.0;

/// Wraps an angle into `[0, 360)`.
pub fn normalize_bearing(deg: f64) -> f64 {
    let b = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

/// Signed difference `to - from` in `[-180, 180)`.
pub fn angle_diff(from: f64, to: f64) -> f64 {
    (to - from + 180.0).rem_euclid(360.0) - 180.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    Short,
    Long,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlashPattern {
    Constant,
    Periodic {
        period: u32,
        duty: f64,
    },
    /// Morse-like loop: each symbol is lit for its length, then dark for `gap_ticks`.
    Sequence {
        symbols: Vec<Symbol>,
        short_ticks: u32,
        long_ticks: u32,
        gap_ticks: u32,
    },
}

impl FlashPattern {
    pub fn slow() -> Self {
        Self::Periodic { period: 12, duty: 0.5 }
    }

    pub fn fast() -> Self {
        Self::Periodic { period: 4, duty: 0.5 }
    }

    pub fn sequence(symbols: &[Symbol]) -> Self {
        Self::Sequence {
            symbols: symbols.to_vec(),
            short_ticks: 1,
            long_ticks: 4,
            gap_ticks: 1,
        }
    }

    /// short-short-long-long
    pub fn ssll() -> Self {
        use Symbol::*;
        Self::sequence(&[Short, Short, Long, Long])
    }

    /// short-long-short-long
    pub fn slsl() -> Self {
        use Symbol::*;
        Self::sequence(&[Short, Long, Short, Long])
    }

    /// Named presets: `constant`, `slow`, `fast`, `ssll`, `slsl`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "constant" => Some(Self::Constant),
            "slow" => Some(Self::slow()),
            "fast" => Some(Self::fast()),
            "ssll" => Some(Self::ssll()),
            "slsl" => Some(Self::slsl()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant => Ok(()),
            Self::Periodic { period, duty } => {
                if *period < 2 {
                    Err(Error::InvalidPattern(format!("period must be >= 2, got {period}")))
                } else if !(*duty > 0.0 && *duty < 1.0) {
                    Err(Error::InvalidPattern(format!("duty must lie in (0, 1), got {duty}")))
                } else {
                    Ok(())
                }
            }
            Self::Sequence { symbols, short_ticks, long_ticks, .. } => {
                if symbols.is_empty() {
                    Err(Error::InvalidPattern("empty symbol sequence".into()))
                } else if *short_ticks == 0 || *long_ticks == 0 {
                    Err(Error::InvalidPattern("symbol lengths must be positive".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Ticks after which the pattern repeats.
    pub fn cycle_length(&self) -> u64 {
        match self {
            Self::Constant => 1,
            Self::Periodic { period, .. } => u64::from(*period),
            Self::Sequence { symbols, short_ticks, long_ticks, gap_ticks } => symbols
                .iter()
                .map(|s| u64::from(symbol_ticks(*s, *short_ticks, *long_ticks) + gap_ticks))
                .sum(),
        }
    }

    /// Whether the light is lit at `tick` (1) or dark (0).
    pub fn sample(&self, tick: u64) -> u8 {
        match self {
            Self::Constant => 1,
            Self::Periodic { period, duty } => {
                let phase = tick % u64::from(*period);
                u8::from((phase as f64) < duty * f64::from(*period))
            }
            Self::Sequence { symbols, short_ticks, long_ticks, gap_ticks } => {
                let mut phase = tick % self.cycle_length();
                for s in symbols {
                    let on = u64::from(symbol_ticks(*s, *short_ticks, *long_ticks));
                    if phase < on {
                        return 1;
                    }
                    phase -= on;
                    if phase < u64::from(*gap_ticks) {
                        return 0;
                    }
                    phase -= u64::from(*gap_ticks);
                }
                unreachable!("phase reduced modulo cycle length")
            }
        }
    }
}

fn symbol_ticks(symbol: Symbol, short: u32, long: u32) -> u32 {
    match symbol {
        Symbol::Short => short,
        Symbol::Long => long,
    }
}

/// Free-function form of [`FlashPattern::sample`].
pub fn sample_pattern(pattern: &FlashPattern, tick: u64) -> u8 {
    pattern.sample(tick)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightSource {
    pub id: String,
    /// Absolute bearing in degrees.
    pub bearing: f64,
    pub intensity: f64,
    pub pattern: FlashPattern,
    #[serde(default = "default_true")]
    pub active: bool,
}

fn default_true() -> bool {
    true
}

impl LightSource {
    pub fn new(id: impl Into<String>, bearing: f64, pattern: FlashPattern) -> Self {
        Self {
            id: id.into(),
            bearing: normalize_bearing(bearing),
            intensity: 1.0,
            pattern,
            active: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pattern.validate()?;
        if !(self.intensity > 0.0 && self.intensity <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "light `{}` intensity must lie in (0, 1], got {}",
                self.id, self.intensity
            )));
        }
        if !self.bearing.is_finite() {
            return Err(Error::InvalidParameter(format!("light `{}` bearing is not finite", self.id)));
        }
        Ok(())
    }

    /// Light output at `tick`, zero when inactive.
    pub fn emission(&self, tick: u64) -> f64 {
        if self.active {
            self.intensity * f64::from(self.pattern.sample(tick))
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum WorldEvent {
    AddLight { light: LightSource },
    RemoveLight { id: String },
    SetActive { id: String, active: bool },
    SetPattern { id: String, pattern: FlashPattern },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub tick: u64,
    pub heading: f64,
    pub lights: Vec<LightSource>,
    pub noise_std: f64,
    pub rng_seed: u64,
}

impl World {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            tick: 0,
            heading: 0.0,
            lights: Vec::new(),
            noise_std: 0.0,
            rng_seed,
        }
    }

    /// Absolute bearing sensor `sensor_id` faces.
    pub fn sensor_facing(&self, sensor_id: usize) -> f64 {
        normalize_bearing(self.heading + SENSOR_SPACING_DEG * sensor_id as f64)
    }

    /// The sensor whose field of view contains `bearing`. Fields are half-open,
    /// `[-45, 45)` around each facing, so every bearing has exactly one sensor.
    pub fn sensor_for_bearing(&self, bearing: f64) -> usize {
        let rel = normalize_bearing(bearing - self.heading + HALF_FIELD_DEG);
        (rel / SENSOR_SPACING_DEG).floor() as usize % NUM_SENSORS
    }

    pub fn sees(&self, sensor_id: usize, bearing: f64) -> bool {
        let diff = angle_diff(self.sensor_facing(sensor_id), bearing);
        (-HALF_FIELD_DEG..HALF_FIELD_DEG).contains(&diff)
    }

    pub fn light(&self, id: &str) -> Option<&LightSource> {
        self.lights.iter().find(|l| l.id == id)
    }

    fn light_mut(&mut self, id: &str) -> Result<&mut LightSource> {
        self.lights
            .iter_mut()
            .find(|l| l.id == id)
            .ok_or_else(|| Error::UnknownLight(id.to_string()))
    }

    /// Photocell reading for one sensor at the current tick, clamped to `[0, 1]`.
    pub fn sensor_reading(&self, sensor_id: usize) -> f64 {
        let light: f64 = self
            .lights
            .iter()
            .filter(|l| self.sees(sensor_id, l.bearing))
            .map(|l| l.emission(self.tick))
            .sum();
        (light + self.noise(sensor_id)).clamp(0.0, 1.0)
    }

    pub fn readings(&self) -> [f64; NUM_SENSORS] {
        std::array::from_fn(|s| self.sensor_reading(s))
    }

    /// Gaussian noise keyed on (seed, tick, sensor), so a reading can be
    /// re-evaluated without disturbing any stream.
    fn noise(&self, sensor_id: usize) -> f64 {
        if self.noise_std <= 0.0 {
            return 0.0;
        }
        let key = self
            .rng_seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(self.tick.wrapping_mul(NUM_SENSORS as u64) + sensor_id as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        Normal::new(0.0, self.noise_std).map_or(0.0, |n| n.sample(&mut rng))
    }

    pub fn apply_event(&mut self, event: WorldEvent) -> Result<()> {
        match event {
            WorldEvent::AddLight { mut light } => {
                light.validate()?;
                if self.light(&light.id).is_some() {
                    return Err(Error::DuplicateLight(light.id));
                }
                light.bearing = normalize_bearing(light.bearing);
                self.lights.push(light);
            }
            WorldEvent::RemoveLight { id } => {
                let idx = self
                    .lights
                    .iter()
                    .position(|l| l.id == id)
                    .ok_or(Error::UnknownLight(id))?;
                self.lights.remove(idx);
            }
            WorldEvent::SetActive { id, active } => self.light_mut(&id)?.active = active,
            WorldEvent::SetPattern { id, pattern } => {
                pattern.validate()?;
                self.light_mut(&id)?.pattern = pattern;
            }
        }
        Ok(())
    }

    pub fn advance(&mut self) {
        self.tick += 1;
    }

    pub fn rotate(&mut self, degrees: f64) {
        self.heading = normalize_bearing(self.heading + degrees);
    }

    /// Whether the front sensor's field contains `bearing`.
    pub fn faces(&self, bearing: f64) -> bool {
        self.sees(0, bearing)
    }
}

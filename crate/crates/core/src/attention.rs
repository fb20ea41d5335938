//! Comparator and neotaxis policy.
//!
//! [`select`] picks the most novel above-threshold report, giving never-seen
//! stimuli priority (the bypass). [`Attention`] wraps it with per-sensor
//! confirmation: a sensor only competes once enough of its recent reports were
//! novel, and it stays quiet for a few ticks after every rotation. [`execute`]
//! turns the robot, or starts a [`CalibrationScan`] that rotates through all
//! four sensors.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::arena::{World, NUM_SENSORS, SENSOR_SPACING_DEG};
use crate::error::{Error, Result};
use crate::filter::NoveltyReport;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "sensor_id", rename_all = "snake_case")]
pub enum Action {
    None,
    Turn(usize),
    CalibrateScan(usize),
}

impl Action {
    pub fn sensor(&self) -> Option<usize> {
        match *self {
            Self::None => None,
            Self::Turn(s) | Self::CalibrateScan(s) => Some(s),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Turn(_) => "turn",
            Self::CalibrateScan(_) => "calibrate_scan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionDecision<T> {
    pub action: Action,
    pub chosen_report: Option<NoveltyReport<T>>,
}

impl<T> AttentionDecision<T> {
    pub fn none() -> Self {
        Self { action: Action::None, chosen_report: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar"))]
pub struct AttentionConfig<T> {
    pub boredom_threshold: T,
    /// Respond to brand-new stimuli with a full calibration scan instead of a turn.
    pub calibration: bool,
    /// Ticks spent at each of the scan's four pauses.
    pub scan_dwell: u32,
    /// Novel reports a sensor needs within the window before it may win attention.
    pub confirm_ticks: u32,
    /// Length of that window in ticks; `None` means the same as `confirm_ticks`,
    /// so the novel reports must be consecutive.
    pub confirm_window: Option<u32>,
    /// Ticks after a rotation during which reports are ignored.
    pub settle_ticks: u32,
    /// Rank confirmed sensors by the highest novelty seen in the window, and
    /// treat them as new if any report in the window was, instead of looking
    /// at the latest report only.
    pub rank_by_peak: bool,
}

impl<T: Scalar> Default for AttentionConfig<T> {
    fn default() -> Self {
        Self {
            boredom_threshold: T::lit(0.4),
            calibration: false,
            scan_dwell: 12,
            confirm_ticks: 1,
            confirm_window: None,
            settle_ticks: 0,
            rank_by_peak: false,
        }
    }
}

impl<T: Scalar> AttentionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.scan_dwell == 0 {
            return Err(Error::InvalidParameter("scan_dwell must be positive".into()));
        }
        if self.confirm_ticks == 0 {
            return Err(Error::InvalidParameter("confirm_ticks must be positive".into()));
        }
        let window = self.confirm_window();
        if window < self.confirm_ticks || window > 64 {
            return Err(Error::InvalidParameter(format!(
                "confirm_window must lie in [confirm_ticks, 64], got {window}"
            )));
        }
        Ok(())
    }

    pub fn confirm_window(&self) -> u32 {
        self.confirm_window.unwrap_or(self.confirm_ticks)
    }
}

/// Orders two novel reports; `Greater` means `a` should be attended over `b`.
fn priority<T: Scalar>(a: &NoveltyReport<T>, b: &NoveltyReport<T>) -> Ordering {
    let by_value = |x: T, y: T| x.partial_cmp(&y).unwrap_or(Ordering::Equal);
    a.is_new
        .cmp(&b.is_new)
        .then_with(|| {
            if a.is_new {
                by_value(a.raw_strength, b.raw_strength)
            } else {
                by_value(a.novelty, b.novelty)
            }
        })
        .then_with(|| b.sensor_id.cmp(&a.sensor_id))
}

/// The comparator: chooses which report, if any, the robot should respond to.
pub fn select<T: Scalar>(
    reports: &[NoveltyReport<T>],
    boredom_threshold: T,
    calibration: bool,
) -> Result<AttentionDecision<T>> {
    let mut seen = [false; NUM_SENSORS];
    for r in reports {
        if r.sensor_id >= NUM_SENSORS {
            return Err(Error::InvalidParameter(format!("sensor id {} out of range", r.sensor_id)));
        }
        if std::mem::replace(&mut seen[r.sensor_id], true) {
            return Err(Error::DuplicateSensor(r.sensor_id));
        }
    }
    let chosen = reports
        .iter()
        .filter(|r| r.is_novel(boredom_threshold))
        .max_by(|a, b| priority(a, b));
    Ok(match chosen {
        None => AttentionDecision::none(),
        Some(r) => AttentionDecision {
            action: if calibration && r.is_new {
                Action::CalibrateScan(r.sensor_id)
            } else {
                Action::Turn(r.sensor_id)
            },
            chosen_report: Some(*r),
        },
    })
}

/// Recent novelty of one sensor, most recent tick in bit 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub novel: u64,
    /// Ticks whose report had a never-fired winner.
    pub new: u64,
}

impl Evidence {
    fn push(&mut self, novel: bool, new: bool, window: u32) {
        let mask = if window >= 64 { u64::MAX } else { (1u64 << window) - 1 };
        self.novel = ((self.novel << 1) | novel as u64) & mask;
        self.new = ((self.new << 1) | (novel && new) as u64) & mask;
    }

    /// Novel reports within the window.
    pub fn count(&self) -> u32 {
        self.novel.count_ones()
    }

    pub fn is_current(&self) -> bool {
        self.novel & 1 == 1
    }

    pub fn saw_new(&self) -> bool {
        self.new != 0
    }
}

/// Novelty of the last few reports of one sensor, zero where not novel.
#[derive(Clone, Debug, Default, PartialEq)]
struct Window<T>(VecDeque<T>);

impl<T: Scalar> Window<T> {
    fn push(&mut self, value: T, len: usize) {
        self.0.push_back(value);
        while self.0.len() > len {
            self.0.pop_front();
        }
    }

    fn max(&self) -> T {
        self.0.iter().copied().fold(T::zero(), T::max)
    }
}

/// Stateful comparator: a sensor competes only while its latest report is novel
/// and at least `confirm_ticks` of its last `confirm_window` reports were.
#[derive(Clone, Debug, PartialEq)]
pub struct Attention<T> {
    config: AttentionConfig<T>,
    evidence: [Evidence; NUM_SENSORS],
    peaks: [Window<T>; NUM_SENSORS],
    settling: u32,
}

impl<T: Scalar> Attention<T> {
    pub fn new(config: AttentionConfig<T>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            evidence: [Evidence::default(); NUM_SENSORS],
            peaks: Default::default(),
            settling: 0,
        })
    }

    pub fn config(&self) -> &AttentionConfig<T> {
        &self.config
    }

    pub fn evidence(&self) -> &[Evidence; NUM_SENSORS] {
        &self.evidence
    }

    /// Folds this tick's reports into the evidence and decides. A sensor with no
    /// report this tick (warming up) counts as not novel.
    pub fn decide(&mut self, reports: &[NoveltyReport<T>]) -> Result<AttentionDecision<T>> {
        if self.settling > 0 {
            self.settling -= 1;
            return Ok(AttentionDecision::none());
        }
        let threshold = self.config.boredom_threshold;
        let mut current = [None; NUM_SENSORS];
        for r in reports {
            let s = r.sensor_id;
            if s >= NUM_SENSORS {
                return Err(Error::InvalidParameter(format!("sensor id {s} out of range")));
            }
            current[s] = Some(r);
        }
        let window = self.config.confirm_window();
        for ((ev, peak), r) in self.evidence.iter_mut().zip(self.peaks.iter_mut()).zip(current) {
            let novel = r.filter(|r| r.is_novel(threshold));
            ev.push(novel.is_some(), r.is_some_and(|r| r.is_new), window);
            peak.push(novel.map_or(T::zero(), |r| r.novelty), window as usize);
        }

        let confirm = self.config.confirm_ticks;
        let eligible: Vec<_> = reports
            .iter()
            .filter(|r| {
                let ev = &self.evidence[r.sensor_id];
                ev.is_current() && ev.count() >= confirm
            })
            .map(|r| {
                let mut r = *r;
                if self.config.rank_by_peak {
                    r.novelty = self.peaks[r.sensor_id].max();
                    r.is_new = self.evidence[r.sensor_id].saw_new();
                }
                r
            })
            .collect();
        let mut decision = select(&eligible, threshold, self.config.calibration)?;
        if let (Action::Turn(s), true) = (decision.action, self.config.calibration) {
            if self.evidence[s].saw_new() {
                decision.action = Action::CalibrateScan(s);
            }
        }
        Ok(decision)
    }

    /// Forgets all evidence and starts the settling period. Called after every rotation.
    pub fn clear(&mut self) {
        self.evidence = [Evidence::default(); NUM_SENSORS];
        self.peaks = Default::default();
        self.settling = self.config.settle_ticks;
    }
}

/// Progress report from [`CalibrationScan::tick`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanStep {
    Dwell,
    /// Rotated 90 degrees to the next pause.
    Rotated,
    /// Completed the full circle; the robot faces the stimulus again.
    Finished,
}

/// Four 90 degree pauses starting from the stimulus, so that each sensor in turn
/// faces it for `dwell` ticks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationScan {
    pub dwell: u32,
    pub pause: u32,
    pub elapsed: u32,
}

impl CalibrationScan {
    pub const PAUSES: u32 = NUM_SENSORS as u32;

    pub fn new(dwell: u32) -> Self {
        Self { dwell, pause: 0, elapsed: 0 }
    }

    /// Counts one sensed tick of the current pause; rotates when the pause is over.
    pub fn tick(&mut self, world: &mut World) -> ScanStep {
        self.elapsed += 1;
        if self.elapsed < self.dwell {
            return ScanStep::Dwell;
        }
        self.elapsed = 0;
        self.pause += 1;
        world.rotate(SENSOR_SPACING_DEG);
        if self.pause == Self::PAUSES {
            ScanStep::Finished
        } else {
            ScanStep::Rotated
        }
    }
}

/// Carries out a decision. Turns are instantaneous; a calibration scan first
/// turns to the stimulus and hands back the scan to be driven tick by tick.
pub fn execute<T>(decision: &AttentionDecision<T>, world: &mut World, scan_dwell: u32) -> Option<CalibrationScan> {
    match decision.action {
        Action::None => None,
        Action::Turn(s) => {
            world.rotate(SENSOR_SPACING_DEG * s as f64);
            None
        }
        Action::CalibrateScan(s) => {
            world.rotate(SENSOR_SPACING_DEG * s as f64);
            Some(CalibrationScan::new(scan_dwell))
        }
    }
}

//! Habituable synapses.
//!
//! The efficacy `y` of a synapse obeys
//!
//! ```text
//! tau * dy/dt = alpha * (y0 - y) - S
//! ```
//!
//! integrated with forward Euler. A stimulus `S > 0` drives the efficacy down
//! (habituation); with `S = 0` it relaxes back towards the resting value `y0`
//! (forgetting, or dishabituation).
//!
//! Two discretizations are provided. [`Discretization::Divisive`] is the literal
//! form `y += dt / tau * (...)`, stable only while `dt * alpha / tau <= 1`.
//! [`Discretization::Multiplicative`] uses `y += tau * dt * (...)`, which is the
//! reading under which small time constants such as `tau = 0.1` give slow,
//! observable habituation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    Divisive,
    #[default]
    Multiplicative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar"))]
pub struct HabituationParams<T> {
    pub tau: T,
    pub alpha: T,
    /// Resting efficacy.
    pub y0: T,
    pub dt: T,
    pub mode: Discretization,
    /// Lower clamp on efficacy.
    pub floor: T,
}

impl<T: Scalar> Default for HabituationParams<T> {
    fn default() -> Self {
        Self::robot()
    }
}

impl<T: Scalar> HabituationParams<T> {
    /// Parameters with `y0 = 1`, `dt = 1` and `floor = 0`.
    pub fn new(tau: T, alpha: T, mode: Discretization) -> Result<Self> {
        let params = Self {
            tau,
            alpha,
            y0: T::one(),
            dt: T::one(),
            mode,
            floor: T::zero(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Constants used on the robot: `tau = 0.1`, `alpha = 0.5`, multiplicative.
    pub fn robot() -> Self {
        Self {
            tau: T::lit(0.1),
            alpha: T::lit(0.5),
            y0: T::one(),
            dt: T::one(),
            mode: Discretization::Multiplicative,
            floor: T::zero(),
        }
    }

    /// Slow-decay curve constants: `tau = 20`, divisive, with the given `alpha`.
    pub fn curve(alpha: T) -> Result<Self> {
        Self::new(T::lit(20.0), alpha, Discretization::Divisive)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tau", self.tau)?;
        positive("alpha", self.alpha)?;
        positive("y0", self.y0)?;
        positive("dt", self.dt)?;
        if !(self.floor >= T::zero() && self.floor < self.y0) {
            return Err(Error::InvalidParameter(format!(
                "floor must lie in [0, y0), got {}",
                self.floor
            )));
        }
        if self.mode == Discretization::Divisive && self.dt / self.tau * self.alpha > T::one() {
            return Err(Error::InvalidParameter(format!(
                "divisive step unstable: dt/tau*alpha = {} > 1",
                self.dt / self.tau * self.alpha
            )));
        }
        Ok(())
    }

    /// Factor multiplying the derivative term in one Euler step.
    pub fn step_gain(&self) -> T {
        match self.mode {
            Discretization::Divisive => self.dt / self.tau,
            Discretization::Multiplicative => self.tau * self.dt,
        }
    }

    pub fn clamp(&self, y: T) -> T {
        y.max(self.floor).min(self.y0)
    }

    /// Efficacy at which a constant stimulus holds the synapse still, clamped to
    /// `[floor, y0]`.
    pub fn steady_state(&self, stimulus: T) -> Result<T> {
        self.validate()?;
        check_stimulus(stimulus)?;
        Ok(self.clamp(self.y0 - stimulus / self.alpha))
    }
}

fn check_stimulus<T: Scalar>(stimulus: T) -> Result<()> {
    if stimulus >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeStimulus(stimulus.as_f64()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynapseState<T> {
    pub efficacy: T,
    /// Set the first time the owning neuron wins; never cleared except by reset.
    pub ever_fired: bool,
}

impl<T: Scalar> SynapseState<T> {
    pub fn resting(params: &HabituationParams<T>) -> Self {
        Self {
            efficacy: params.y0,
            ever_fired: false,
        }
    }

    /// Advances the synapse by one tick.
    ///
    /// A positive stimulus means the neuron fired this tick. A zero stimulus means it
    /// did not; the synapse then recovers towards `y0` only when `forgetting` is on,
    /// and is otherwise returned untouched.
    pub fn step(self, stimulus: T, params: &HabituationParams<T>, forgetting: bool) -> Result<Self> {
        params.validate()?;
        check_stimulus(stimulus)?;
        let fired = stimulus > T::zero();
        if !fired && !forgetting {
            return Ok(self);
        }
        let y = self.efficacy;
        let drive = params.alpha * (params.y0 - y) - stimulus;
        Ok(Self {
            efficacy: params.clamp(y + params.step_gain() * drive),
            ever_fired: self.ever_fired || fired,
        })
    }
}

/// One stretch of constant stimulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusSegment<T> {
    pub duration: u32,
    pub stimulus: T,
}

impl<T> StimulusSegment<T> {
    pub fn new(duration: u32, stimulus: T) -> Self {
        Self { duration, stimulus }
    }
}

/// Efficacy after every tick of `schedule`, starting from rest, with the synapse
/// stimulated directly (forgetting on).
pub fn simulate_trace<T: Scalar>(
    params: &HabituationParams<T>,
    schedule: &[StimulusSegment<T>],
) -> Result<Vec<T>> {
    params.validate()?;
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty stimulus schedule".into()));
    }
    if let Some(seg) = schedule.iter().find(|s| s.duration == 0) {
        return Err(Error::InvalidParameter(format!(
            "segment duration must be >= 1 (stimulus {})",
            seg.stimulus
        )));
    }
    let total = schedule.iter().map(|s| s.duration as usize).sum();
    let mut trace = Vec::with_capacity(total);
    let mut state = SynapseState::resting(params);
    for seg in schedule {
        for _ in 0..seg.duration {
            state = state.step(seg.stimulus, params, true)?;
            trace.push(state.efficacy);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot() -> HabituationParams<f64> {
        HabituationParams::robot()
    }

    #[test]
    fn resting_state_is_fixed_point() {
        for params in [robot(), HabituationParams::curve(1.05).unwrap()] {
            let s = SynapseState::resting(&params).step(0.0, &params, true).unwrap();
            assert_eq!(s.efficacy, 1.0);
            assert!(!s.ever_fired);
        }
    }

    #[test]
    fn first_robot_steps() {
        let params = robot();
        let mut s = SynapseState::resting(&params);
        let expected = [0.9, 0.805, 0.71475];
        for want in expected {
            s = s.step(1.0, &params, false).unwrap();
            assert!((s.efficacy - want).abs() < 1e-12, "{} vs {want}", s.efficacy);
        }
        assert!(s.ever_fired);
    }

    #[test]
    fn rejects_negative_stimulus() {
        let params = robot();
        let s = SynapseState::resting(&params);
        assert!(matches!(s.step(-0.1, &params, true), Err(Error::NegativeStimulus(_))));
        assert!(params.steady_state(-1.0).is_err());
    }

    #[test]
    fn rejects_unstable_divisive() {
        // dt/tau*alpha = 10 * 0.5
        assert!(HabituationParams::<f64>::new(0.1, 0.5, Discretization::Divisive).is_err());
        assert!(HabituationParams::<f64>::new(20.0, 1.2, Discretization::Divisive).is_ok());
    }

    #[test]
    fn rejects_bad_floor_and_nonpositive() {
        let mut p = robot();
        p.floor = 1.0;
        assert!(p.validate().is_err());
        let mut p = robot();
        p.tau = 0.0;
        assert!(p.validate().is_err());
        let mut p = robot();
        p.alpha = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn frozen_when_not_firing_without_forgetting() {
        let params = robot();
        let s = SynapseState { efficacy: 0.3, ever_fired: true };
        let mut t = s;
        for _ in 0..50 {
            t = t.step(0.0, &params, false).unwrap();
        }
        assert_eq!(t, s);
    }

    #[test]
    fn steady_state_examples() {
        assert_eq!(robot().steady_state(0.0).unwrap(), 1.0);
        let p = HabituationParams::<f64>::curve(1.05).unwrap();
        assert!((p.steady_state(1.0).unwrap() - 0.047_619).abs() < 1e-5);
        // 1 - 1/0.5 = -1 clamps to the floor
        assert_eq!(robot().steady_state(1.0).unwrap(), 0.0);
    }

    #[test]
    fn trace_examples() {
        let flat = simulate_trace(&robot(), &[StimulusSegment::new(10, 0.0)]).unwrap();
        assert_eq!(flat, vec![1.0; 10]);
        let one = simulate_trace(&robot(), &[StimulusSegment::new(1, 1.0)]).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0] - 0.9).abs() < 1e-12);
        assert!(simulate_trace::<f64>(&robot(), &[]).is_err());
        assert!(simulate_trace(&robot(), &[StimulusSegment::new(0, 1.0)]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let params = HabituationParams::<f32>::robot();
        let s = SynapseState::resting(&params).step(1.0, &params, true).unwrap();
        assert!((s.efficacy - 0.9).abs() < 1e-6);
    }
}

//! Can a single filter tell two flash sequences apart?
//!
//! One filter watches the first pattern until its winners settle, then the
//! light switches to the second pattern. The two patterns are told apart when
//! their stable winner sets differ and, soon after the switch, a neuron outside
//! the first set reports novelty.
//!
//! The default order is short-long-short-long first. Every lag vector of that
//! pattern also occurs in short-short-long-long, so the opposite switch cannot
//! look new to a lag-vector network.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::arena::FlashPattern;
use crate::clustering::ClustererKind;
use crate::error::Result;
use crate::filter::NoveltyFilter;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationSetup {
    pub first: FlashPattern,
    pub second: FlashPattern,
    /// Ticks spent on each pattern.
    pub ticks_per_pattern: u64,
    /// Trailing ticks of each phase whose winners form the stable set.
    pub stable_ticks: u64,
    /// Ticks after the switch in which a novel report must appear.
    pub renovelty_ticks: u64,
    pub forgetting: bool,
}

impl Default for DiscriminationSetup {
    fn default() -> Self {
        Self {
            first: FlashPattern::slsl(),
            second: FlashPattern::ssll(),
            ticks_per_pattern: 800,
            stable_ticks: 200,
            renovelty_ticks: 40,
            forgetting: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminationOutcome {
    pub kind: ClustererKind,
    pub seed: u64,
    pub first_winners: BTreeSet<usize>,
    pub second_winners: BTreeSet<usize>,
    /// Tick after the switch of the first novel report from a neuron outside
    /// the first stable set, if any.
    pub renovelty_at: Option<u64>,
}

impl DiscriminationOutcome {
    pub fn distinct(&self) -> bool {
        self.first_winners != self.second_winners
    }

    pub fn passed(&self, setup: &DiscriminationSetup) -> bool {
        self.distinct() && self.renovelty_at.is_some_and(|t| t < setup.renovelty_ticks)
    }
}

/// Feeds sensor 0's filter with the two patterns in turn.
pub fn discriminate(kind: ClustererKind, seed: u64, setup: &DiscriminationSetup) -> Result<DiscriminationOutcome> {
    let config = RunConfig { kind, seed, forgetting: setup.forgetting, ..RunConfig::default() };
    config.validate()?;
    let mut filter = NoveltyFilter::new(0, config.filter_config(0))?;
    let mut phase = |pattern: &FlashPattern, known: Option<&BTreeSet<usize>>| -> Result<(BTreeSet<usize>, Option<u64>)> {
        let mut winners = BTreeSet::new();
        let mut first_novel = None;
        for t in 0..setup.ticks_per_pattern {
            let reading = f64::from(pattern.sample(t));
            let Some(report) = filter.ingest(reading)? else { continue };
            let unfamiliar = known.is_some_and(|k| !k.contains(&report.winner));
            if unfamiliar && first_novel.is_none() && report.is_novel(config.boredom_threshold) {
                first_novel = Some(t);
            }
            if t + setup.stable_ticks >= setup.ticks_per_pattern {
                winners.insert(report.winner);
            }
        }
        Ok((winners, first_novel))
    };
    let (first_winners, _) = phase(&setup.first, None)?;
    let (second_winners, renovelty_at) = phase(&setup.second, Some(&first_winners))?;
    Ok(DiscriminationOutcome { kind, seed, first_winners, second_winners, renovelty_at })
}

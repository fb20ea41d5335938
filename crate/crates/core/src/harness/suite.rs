//! Scenario x clusterer matrices.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::scenario::{run_scenario, ScenarioScript};
use crate::clustering::ClustererKind;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    /// Labels of the expectations that failed.
    Fail { failed: Vec<String> },
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteCell {
    pub scenario: String,
    pub kind: ClustererKind,
    pub seed: u64,
    /// False for kinds the scenario lists as non-gating.
    pub gating: bool,
    #[serde(flatten)]
    pub status: CellStatus,
}

impl SuiteCell {
    pub fn passed(&self) -> bool {
        self.status == CellStatus::Pass
    }

    fn label(&self) -> &'static str {
        match (&self.status, self.gating) {
            (CellStatus::Pass, _) => "pass",
            (CellStatus::Fail { .. }, true) => "FAIL",
            (CellStatus::Fail { .. }, false) => "fail*",
            (CellStatus::Error { .. }, _) => "ERROR",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub kinds: Vec<ClustererKind>,
    pub cells: Vec<SuiteCell>,
}

impl SuiteReport {
    /// True when every gating cell passed.
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed() || (!c.gating && !matches!(c.status, CellStatus::Error { .. })))
    }

    pub fn cell(&self, scenario: &str, kind: ClustererKind) -> Option<&SuiteCell> {
        self.cells.iter().find(|c| c.scenario == scenario && c.kind == kind)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scenario", "kind", "seed", "gating", "status", "detail"])?;
        for c in &self.cells {
            let (status, detail) = match &c.status {
                CellStatus::Pass => ("pass", String::new()),
                CellStatus::Fail { failed } => ("fail", failed.join("; ")),
                CellStatus::Error { message } => ("error", message.clone()),
            };
            w.write_record([
                c.scenario.as_str(),
                c.kind.name(),
                &c.seed.to_string(),
                &c.gating.to_string(),
                status,
                &detail,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.cells.iter().map(|c| c.scenario.len()).max().unwrap_or(8).max(8);
        write!(f, "{:width$}", "scenario")?;
        for k in &self.kinds {
            write!(f, "  {:>9}", k.name())?;
        }
        writeln!(f)?;
        let mut rows: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !rows.contains(&c.scenario.as_str()) {
                rows.push(&c.scenario);
            }
        }
        for row in rows {
            write!(f, "{row:width$}")?;
            for &k in &self.kinds {
                let label = self.cell(row, k).map_or("-", SuiteCell::label);
                write!(f, "  {label:>9}")?;
            }
            writeln!(f)?;
        }
        if self.cells.iter().any(|c| !c.gating && !c.passed()) {
            writeln!(f, "* non-gating")?;
        }
        Ok(())
    }
}

/// Runs every script against every kind, each cell from a fresh simulation.
/// A cell that errors is recorded and the suite carries on.
pub fn run_suite(
    scripts: &[ScenarioScript],
    kinds: &[ClustererKind],
    base: &toml::Table,
    seed: u64,
) -> Result<SuiteReport> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("suite needs at least one clusterer kind".into()));
    }
    if scripts.is_empty() {
        return Err(Error::InvalidParameter("suite needs at least one scenario".into()));
    }
    let jobs: Vec<(&ScenarioScript, ClustererKind)> =
        scripts.iter().flat_map(|s| kinds.iter().map(move |&k| (s, k))).collect();
    let cells = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(script, kind)| scope.spawn(move || run_cell(script, kind, base, seed)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite cell panicked")).collect()
    });
    Ok(SuiteReport { kinds: kinds.to_vec(), cells })
}

fn run_cell(script: &ScenarioScript, kind: ClustererKind, base: &toml::Table, seed: u64) -> SuiteCell {
    let mut table = base.clone();
    table.insert("kind".into(), kind.name().into());
    let status = match run_scenario(script, &table, seed) {
        Ok(log) if log.all_passed() => CellStatus::Pass,
        Ok(log) => CellStatus::Fail {
            failed: log.failures().into_iter().map(|v| v.expectation.clone()).collect(),
        },
        Err(e) => CellStatus::Error { message: e.to_string() },
    };
    SuiteCell {
        scenario: script.name.clone(),
        kind,
        seed,
        gating: !script.non_gating_kinds.contains(&kind),
        status,
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use neotaxis::harness::{run_suite, run_with_config, serve, RunConfig, ScenarioScript, ServiceOptions};
use neotaxis::{simulate_trace, ClustererKind, Discretization, HabituationParams, StimulusSegment};

#[derive(Parser)]
#[command(name = "neotaxis", version, about = "Novelty-seeking robot simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its log as JSONL.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<ClustererKind>,
        #[arg(long)]
        forgetting: Option<bool>,
        /// Log destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run scenarios against clusterer kinds and print the pass/fail matrix.
    Suite {
        /// Scenario files; every `*.toml` under `scenarios/` when omitted.
        scenarios: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Comma separated; all kinds when omitted.
        #[arg(long, value_delimiter = ',')]
        kind: Vec<ClustererKind>,
        /// Summary CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the simulation in real time behind an NDJSON socket.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<ClustererKind>,
        #[arg(long)]
        forgetting: Option<bool>,
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: std::net::SocketAddr,
        #[arg(long, default_value_t = 100)]
        tick_ms: u64,
        /// Stop after this many ticks.
        #[arg(long)]
        ticks: Option<u64>,
    },
    /// Dump a habituation curve as CSV.
    Trace {
        /// `duration:stimulus` segments.
        #[arg(long, value_delimiter = ',', default_value = "150:1,50:0,100:1")]
        schedule: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1.05,1.2")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 20.0)]
        tau: f64,
        #[arg(long, default_value = "divisive")]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Base configuration TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides NEOTAXIS_SEED and the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn base(&self) -> anyhow::Result<toml::Table> {
        let Some(path) = &self.config else { return Ok(toml::Table::new()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        text.parse().with_context(|| format!("parsing {}", path.display()))
    }

    fn resolve_seed(&self, config: &mut RunConfig) -> anyhow::Result<()> {
        config.apply_env()?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(())
    }
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(
    scenario: &Path,
    common: &Common,
    kind: Option<ClustererKind>,
    forgetting: Option<bool>,
    out: Option<&Path>,
) -> anyhow::Result<bool> {
    let script = ScenarioScript::load(scenario).with_context(|| format!("loading {}", scenario.display()))?;
    let mut config = script.resolve_config(&common.base()?)?;
    common.resolve_seed(&mut config)?;
    if let Some(kind) = kind {
        config.kind = kind;
    }
    if let Some(f) = forgetting {
        config.forgetting = f;
    }
    config.validate()?;
    let log = run_with_config(&script, config)?;
    let mut w = sink(out)?;
    log.write_jsonl(&mut w)?;
    w.flush()?;
    for v in &log.verdicts {
        eprintln!("{} [{}] {}", if v.pass { "pass" } else { "FAIL" }, v.index, v.expectation);
    }
    Ok(log.all_passed())
}

fn default_scenarios() -> anyhow::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir("scenarios")
        .context("no scenarios given and ./scenarios is not readable")?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    Ok(paths)
}

fn suite(scenarios: &[PathBuf], common: &Common, kinds: &[ClustererKind], out: Option<&Path>) -> anyhow::Result<bool> {
    let paths = if scenarios.is_empty() { default_scenarios()? } else { scenarios.to_vec() };
    let scripts = paths
        .iter()
        .map(|p| ScenarioScript::load(p).with_context(|| format!("loading {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let kinds = if kinds.is_empty() { ClustererKind::ALL.to_vec() } else { kinds.to_vec() };
    let base = common.base()?;
    let mut seed_config = RunConfig::from_table(base.clone())?;
    common.resolve_seed(&mut seed_config)?;
    let report = run_suite(&scripts, &kinds, &base, seed_config.seed)?;
    print!("{report}");
    if let Some(path) = out {
        report.write_csv(File::create(path).with_context(|| format!("creating {}", path.display()))?)?;
    }
    Ok(report.passed())
}

fn parse_schedule(raw: &[String]) -> anyhow::Result<Vec<StimulusSegment<f64>>> {
    raw.iter()
        .map(|seg| {
            let (d, s) = seg.split_once(':').with_context(|| format!("segment `{seg}` is not duration:stimulus"))?;
            Ok(StimulusSegment::new(d.trim().parse()?, s.trim().parse()?))
        })
        .collect()
}

fn trace(schedule: &[String], alphas: &[f64], tau: f64, mode: &str, out: Option<&Path>) -> anyhow::Result<()> {
    let mode = match mode {
        "divisive" => Discretization::Divisive,
        "multiplicative" => Discretization::Multiplicative,
        other => bail!("unknown mode `{other}`"),
    };
    let schedule = parse_schedule(schedule)?;
    let traces = alphas
        .iter()
        .map(|&a| simulate_trace(&HabituationParams::new(tau, a, mode)?, &schedule))
        .collect::<neotaxis::Result<Vec<_>>>()?;
    let mut w = sink(out)?;
    write!(w, "tick,stimulus")?;
    for a in alphas {
        write!(w, ",alpha_{a}")?;
    }
    writeln!(w)?;
    let stimuli = schedule.iter().flat_map(|s| std::iter::repeat_n(s.stimulus, s.duration as usize));
    for (t, s) in stimuli.enumerate() {
        write!(w, "{t},{s}")?;
        for tr in &traces {
            write!(w, ",{}", tr[t])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> anyhow::Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let ok = match &cli.command {
        Cmd::Run { scenario, common, kind, forgetting, out } => {
            run(scenario, common, *kind, *forgetting, out.as_deref())?
        }
        Cmd::Suite { scenarios, common, kind, out } => suite(scenarios, common, kind, out.as_deref())?,
        Cmd::Serve { common, kind, forgetting, addr, tick_ms, ticks } => {
            let mut config = RunConfig::from_table(common.base()?)?;
            common.resolve_seed(&mut config)?;
            if let Some(kind) = kind {
                config.kind = *kind;
            }
            if let Some(f) = forgetting {
                config.forgetting = *f;
            }
            config.validate()?;
            let options =
                ServiceOptions { addr: *addr, tick_interval: Duration::from_millis(*tick_ms), max_ticks: *ticks };
            let handle = serve(config, options)?;
            eprintln!("listening on {}", handle.local_addr());
            handle.wait();
            true
        }
        Cmd::Trace { schedule, alpha, tau, mode, out } => {
            trace(schedule, alpha, *tau, mode, out.as_deref())?;
            true
        }
    };
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gresilience::game;
use gresilience::harness::{self, RunOptions, TechniqueOptions};
use gresilience::measurement::{CandidateAction, Confidence, DEFAULT_SMOOTHING};
use gresilience::report::{self, OutputFormat};
use gresilience::wsm::{self, WeightVector, WsmMode};
use gresilience::{Error, ExperimentLog, ScenarioConfig, Technique};
use serde_json::json;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(name = "gresilience", version, about = "Pick recovery actions trading off greenness against resilience")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TechniqueArg {
    Wsm,
    Game,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Search,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a disruption and recover from it with one or both techniques.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        technique: TechniqueArg,
        #[arg(long = "wsm-mode", value_enum, default_value = "fixed")]
        wsm_mode: ModeArg,
        /// w_t,w_h,w_co2 on the simplex; defaults to equal weights.
        #[arg(long)]
        weights: Option<String>,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "max-iterations", default_value_t = harness::DEFAULT_MAX_ITERATIONS)]
        max_iterations: usize,
        /// Sampling rounds before the game falls back to a pure equilibrium.
        #[arg(long = "max-rounds", default_value_t = game::DEFAULT_MAX_ROUNDS)]
        max_rounds: u32,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smoothing: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Compare JSON experiment logs of the same scenario and seed.
    Compare {
        #[arg(long, num_args = 2.., required = true)]
        logs: Vec<PathBuf>,
        /// Report path; `.csv` writes CSV, anything else JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the payoff matrix, pure and mixed equilibria for two actions.
    SolveGame {
        #[arg(long)]
        attrs: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Print weighted-sum scores and the selected action.
    SolveScore {
        #[arg(long)]
        attrs: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long = "wsm-mode", value_enum, default_value = "fixed")]
        wsm_mode: ModeArg,
    },
}

fn parse_weights(raw: Option<&str>) -> Result<WeightVector, Error> {
    let Some(raw) = raw else {
        return Ok(WeightVector::equal());
    };
    let parts: Vec<f64> = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Config(format!("--weights: {e}")))?;
    let [w_t, w_h, w_co2] = parts[..] else {
        return Err(Error::Config(format!("--weights needs three values, got {}", parts.len())));
    };
    WeightVector::new(w_t, w_h, w_co2).map_err(|e| Error::Config(format!("--weights: {e}")))
}

fn wsm_mode(mode: ModeArg, weights: Option<&str>) -> Result<WsmMode, Error> {
    Ok(match mode {
        ModeArg::Fixed => WsmMode::Fixed(parse_weights(weights)?),
        ModeArg::Search => WsmMode::WeightSearch,
    })
}

fn confidence(epsilon: f64) -> Result<Confidence, Error> {
    Confidence::new(epsilon).map_err(|e| Error::Config(format!("--epsilon: {e}")))
}

fn scenario_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
}

fn print_summary(log: &ExperimentLog) {
    let s = &log.summary;
    println!(
        "{:<5} recovered={} iterations={} elapsed_s={} co2_g={} human={}",
        log.technique,
        s.recovered,
        s.iterations_to_recover,
        s.total_elapsed_s,
        s.total_co2_g,
        s.total_human_interactions
    );
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn load_pair(path: &Path) -> Result<[CandidateAction; 2], Error> {
    let actions = report::read_candidates(path)?;
    let n = actions.len();
    <[CandidateAction; 2]>::try_from(actions)
        .map_err(|_| Error::Config(format!("{}: the game needs exactly 2 actions, got {n}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    scenario: &Path,
    technique: TechniqueArg,
    mode: ModeArg,
    weights: Option<&str>,
    seed: Option<u64>,
    max_iterations: usize,
    max_rounds: u32,
    smoothing: f64,
    out: &Path,
    format: OutputFormat,
) -> Result<(), Error> {
    let mut cfg = ScenarioConfig::from_path(scenario)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let id = scenario_id(scenario);
    let wsm = TechniqueOptions::Wsm(wsm_mode(mode, weights)?);
    let game = TechniqueOptions::Game { max_rounds };
    let chosen = match technique {
        TechniqueArg::Wsm => vec![wsm],
        TechniqueArg::Game => vec![game],
        TechniqueArg::Both => vec![wsm, game],
    };
    let mut logs = Vec::new();
    for t in chosen {
        let log = harness::run_experiment(&id, &cfg, &RunOptions { technique: t, smoothing, max_iterations })?;
        let name = match log.technique {
            Technique::Wsm => "wsm",
            Technique::Game => "game",
        };
        report::emit_log(&log, format, out.join(format!("{name}.{}", format.extension())))?;
        print_summary(&log);
        logs.push(log);
    }
    if logs.len() > 1 {
        let rep = report::compare(&logs)?;
        report::emit_report(&rep, format, out.join(format!("comparison.{}", format.extension())))?;
        for d in &rep.deltas {
            println!(
                "{}-{} iterations={} elapsed_s={} co2_g={} human={} agreement={}",
                d.left, d.right, d.iterations, d.elapsed_s, d.co2_g, d.human_interactions, d.agreement_rate
            );
        }
    }
    Ok(())
}

fn cmd_compare(logs: &[PathBuf], out: &Path) -> Result<(), Error> {
    let logs: Vec<ExperimentLog> = logs.iter().map(report::read_log).collect::<Result<_, _>>()?;
    let rep = report::compare(&logs)?;
    report::emit_report(&rep, OutputFormat::from_path(out), out)
}

fn cmd_solve_game(attrs: &Path, epsilon: f64) -> Result<(), Error> {
    let eps = confidence(epsilon)?;
    let [a1, a2] = load_pair(attrs)?;
    let m = game::build_payoff_matrix(&a1, &a2, eps)?;
    let solution = game::solve(&m);
    let ids = [a1.id.as_str(), a2.id.as_str()];
    let psne: Vec<_> = solution.psne.iter().map(|p| [ids[p.resilience], ids[p.greenness]]).collect();
    print_json(&json!({
        "epsilon": epsilon,
        "actions": ids,
        "matrix": m.cells,
        "psne": psne,
        "msne": solution.msne,
        "expected_payoffs": solution.expected,
    }));
    Ok(())
}

fn cmd_solve_score(attrs: &Path, epsilon: f64, weights: Option<&str>, mode: ModeArg) -> Result<(), Error> {
    let eps = confidence(epsilon)?;
    let actions = report::read_candidates(attrs)?;
    let decision = wsm::select_action(&actions, eps, &wsm_mode(mode, weights)?)?;
    print_json(&serde_json::to_value(&decision).expect("decision serializes"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run {
            scenario,
            technique,
            wsm_mode,
            weights,
            seed,
            max_iterations,
            max_rounds,
            smoothing,
            out,
            format,
        } => cmd_run(
            scenario,
            *technique,
            *wsm_mode,
            weights.as_deref(),
            *seed,
            *max_iterations,
            *max_rounds,
            *smoothing,
            out,
            (*format).into(),
        ),
        Command::Compare { logs, out } => cmd_compare(logs, out),
        Command::SolveGame { attrs, epsilon } => cmd_solve_game(attrs, *epsilon),
        Command::SolveScore { attrs, epsilon, weights, wsm_mode } => {
            cmd_solve_score(attrs, *epsilon, weights.as_deref(), *wsm_mode)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

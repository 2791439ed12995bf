//! Cross-technique comparison and CSV/JSON output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_input, Error, Result};
use crate::harness::{DecisionDetail, EpisodeSummary, ExperimentLog, IterationRecord, Technique};
use crate::measurement::CandidateAction;

/// Column order of per-iteration CSV logs.
pub const LOG_COLUMNS: [&str; 23] = [
    "technique",
    "iteration",
    "state_before",
    "state_after",
    "action_id",
    "action_kind",
    "perf_start",
    "perf_end",
    "e_t_est",
    "e_co2_est",
    "h_est",
    "epsilon",
    "p",
    "q",
    "rounds",
    "w_t",
    "w_h",
    "w_co2",
    "score_selected",
    "clock_start_s",
    "clock_end_s",
    "co2_cum_g",
    "human_cum",
];

pub const REPORT_COLUMNS: [&str; 9] = [
    "row",
    "technique",
    "other",
    "iterations",
    "elapsed_s",
    "co2_g",
    "human_interactions",
    "recovered",
    "agreement_rate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    /// `.csv` paths are CSV; everything else is JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension() {
            Some(e) if e.eq_ignore_ascii_case("csv") => OutputFormat::Csv,
            _ => OutputFormat::Json,
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::config(format!("unknown output format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueSummary {
    pub technique: Technique,
    pub summary: EpisodeSummary,
}

/// `left − right`, field by field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDelta {
    pub left: Technique,
    pub right: Technique,
    pub iterations: i64,
    pub elapsed_s: f64,
    pub co2_g: f64,
    pub human_interactions: i64,
    /// Share of common iteration indices where both picked the same kind of
    /// action.
    pub agreement_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub seed: u64,
    pub summaries: Vec<TechniqueSummary>,
    pub deltas: Vec<PairwiseDelta>,
}

fn agreement(left: &[IterationRecord], right: &[IterationRecord]) -> f64 {
    let common = left.len().min(right.len());
    if common == 0 {
        return 1.0;
    }
    let same = left.iter().zip(right).filter(|(a, b)| a.action_kind == b.action_kind).count();
    same as f64 / common as f64
}

fn delta(left: &ExperimentLog, right: &ExperimentLog) -> PairwiseDelta {
    let (l, r) = (&left.summary, &right.summary);
    PairwiseDelta {
        left: left.technique,
        right: right.technique,
        iterations: l.iterations_to_recover as i64 - r.iterations_to_recover as i64,
        elapsed_s: l.total_elapsed_s - r.total_elapsed_s,
        co2_g: l.total_co2_g - r.total_co2_g,
        human_interactions: l.total_human_interactions as i64 - r.total_human_interactions as i64,
        agreement_rate: agreement(&left.records, &right.records),
    }
}

/// Summaries of every log plus deltas for every ordered pair `(i, j)`, `i < j`.
pub fn compare(logs: &[ExperimentLog]) -> Result<ComparisonReport> {
    let [first, rest @ ..] = logs else {
        return Err(Error::domain("compare needs at least two logs"));
    };
    if rest.is_empty() {
        return Err(Error::domain("compare needs at least two logs"));
    }
    if let Some(odd) = rest.iter().find(|l| l.scenario != first.scenario || l.seed != first.seed) {
        return Err(Error::domain(format!(
            "logs disagree on scenario/seed: {}/{} vs {}/{}",
            first.scenario, first.seed, odd.scenario, odd.seed
        )));
    }
    let mut deltas = Vec::new();
    for (i, a) in logs.iter().enumerate() {
        for b in &logs[i + 1..] {
            deltas.push(delta(a, b));
        }
    }
    Ok(ComparisonReport {
        scenario: first.scenario.clone(),
        seed: first.seed,
        summaries: logs
            .iter()
            .map(|l| TechniqueSummary { technique: l.technique, summary: l.summary.clone() })
            .collect(),
        deltas,
    })
}

fn csv_row(fields: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).map_err(|e| Error::domain(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::domain(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(x: f64) -> String {
    // Display prints the shortest decimal that round-trips
    format!("{x}")
}

pub fn log_to_csv(log: &ExperimentLog) -> Result<String> {
    let mut out = csv_row(&LOG_COLUMNS.map(String::from))?;
    for r in &log.records {
        let blank = String::new;
        let (p, q, rounds, w_t, w_h, w_co2, score) = match &r.decision {
            DecisionDetail::Game { p, q, rounds, .. } => {
                (num(*p), num(*q), rounds.to_string(), blank(), blank(), blank(), blank())
            }
            DecisionDetail::Wsm { weights, score_selected, .. } => (
                blank(),
                blank(),
                blank(),
                num(weights.w_t),
                num(weights.w_h),
                num(weights.w_co2),
                num(*score_selected),
            ),
        };
        out.push_str(&csv_row(&[
            r.technique.to_string(),
            r.iteration.to_string(),
            r.state_before.to_string(),
            r.state_after.to_string(),
            r.action_id.to_string(),
            r.action_kind.to_string(),
            num(r.perf_start),
            num(r.perf_end),
            num(r.estimates.e_t),
            num(r.estimates.e_co2),
            num(r.estimates.h),
            num(r.epsilon),
            p,
            q,
            rounds,
            w_t,
            w_h,
            w_co2,
            score,
            num(r.clock_start_s),
            num(r.clock_end_s),
            num(r.co2_cum_g),
            r.human_cum.to_string(),
        ])?);
    }
    Ok(out)
}

pub fn report_to_csv(report: &ComparisonReport) -> Result<String> {
    let mut out = csv_row(&REPORT_COLUMNS.map(String::from))?;
    for s in &report.summaries {
        let m = &s.summary;
        out.push_str(&csv_row(&[
            "summary".into(),
            s.technique.to_string(),
            String::new(),
            m.iterations_to_recover.to_string(),
            num(m.total_elapsed_s),
            num(m.total_co2_g),
            m.total_human_interactions.to_string(),
            m.recovered.to_string(),
            String::new(),
        ])?);
    }
    for d in &report.deltas {
        out.push_str(&csv_row(&[
            "delta".into(),
            d.left.to_string(),
            d.right.to_string(),
            d.iterations.to_string(),
            num(d.elapsed_s),
            num(d.co2_g),
            d.human_interactions.to_string(),
            String::new(),
            num(d.agreement_rate),
        ])?);
    }
    Ok(out)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::domain(e.to_string()))?;
    let _ = writeln!(s);
    Ok(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

pub fn render_log(log: &ExperimentLog, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => log_to_csv(log),
        OutputFormat::Json => to_json(log),
    }
}

pub fn render_report(report: &ComparisonReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => report_to_csv(report),
        OutputFormat::Json => to_json(report),
    }
}

pub fn emit_log(log: &ExperimentLog, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &render_log(log, format)?)
}

pub fn emit_report(report: &ComparisonReport, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &render_report(report, format)?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateFile {
    actions: Vec<CandidateAction>,
}

/// Reads candidate actions from a TOML (`.toml`) or JSON file holding an
/// `actions` list.
pub fn read_candidates(path: impl AsRef<Path>) -> Result<Vec<CandidateAction>> {
    let path = path.as_ref();
    let text = read_input(path)?;
    let format_err = |message: String| Error::Format { path: path.into(), message };
    let file: CandidateFile = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
        toml::from_str(&text).map_err(|e| format_err(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| format_err(e.to_string()))?
    };
    for a in &file.actions {
        a.attrs.validate().map_err(|e| format_err(format!("action {}: {e}", a.id)))?;
    }
    Ok(file.actions)
}

/// Reads a log previously emitted as JSON.
pub fn read_log(path: impl AsRef<Path>) -> Result<ExperimentLog> {
    let path = path.as_ref();
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, RunOptions, TechniqueOptions};
    use crate::sim::ScenarioConfig;

    fn log(t: Technique) -> ExperimentLog {
        run_experiment("ref", &ScenarioConfig::reference(), &RunOptions::new(TechniqueOptions::default_for(t))).unwrap()
    }

    #[test]
    fn identical_logs_have_zero_deltas() {
        let l = log(Technique::Wsm);
        let r = compare(&[l.clone(), l]).unwrap();
        let d = &r.deltas[0];
        assert_eq!((d.iterations, d.human_interactions), (0, 0));
        assert_eq!((d.elapsed_s, d.co2_g, d.agreement_rate), (0.0, 0.0, 1.0));
    }

    #[test]
    fn agreement_over_common_prefix() {
        let mut a = log(Technique::Wsm);
        while a.records.len() < 5 {
            let mut extra = a.records[0].clone();
            extra.iteration = a.records.len() + 1;
            a.records.push(extra);
        }
        a.records.truncate(5);
        a.summary = EpisodeSummary::fold(&a.records, true, a.summary.timeline);
        let mut b = a.clone();
        b.records.truncate(3);
        b.records[2].action_kind = crate::measurement::ActionKind::Operating;
        b.summary = EpisodeSummary::fold(&b.records, true, b.summary.timeline);
        let r = compare(&[b, a]).unwrap();
        assert_eq!(r.deltas[0].iterations, -2);
        assert!((r.deltas[0].agreement_rate - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn compare_rejects_mismatched_or_single() {
        let a = log(Technique::Wsm);
        let mut b = a.clone();
        b.seed += 1;
        assert!(compare(&[a.clone(), b]).is_err());
        assert!(compare(&[a]).is_err());
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut l = log(Technique::Game);
        l.records.clear();
        let csv = log_to_csv(&l).unwrap();
        assert_eq!(csv, format!("{}\n", LOG_COLUMNS.join(",")));
    }

    #[test]
    fn inapplicable_columns_are_empty() {
        let csv = log_to_csv(&log(Technique::Game)).unwrap();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row.len(), LOG_COLUMNS.len());
        assert!(row[15..19].iter().all(|f| f.is_empty()));
        assert!(!row[12].is_empty());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let l = log(Technique::Game);
        let path = dir.path().join("nested/game.json");
        emit_log(&l, OutputFormat::Json, &path).unwrap();
        assert_eq!(read_log(&path).unwrap(), l);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_log(&log(Technique::Wsm), OutputFormat::Csv, blocker.join("out.csv")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}

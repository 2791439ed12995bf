//! Experiment protocol: wait for a disruption, then alternate between
//! deciding on a recovery action, running it and measuring, until the
//! performance is acceptable again. Every pass of that loop is logged.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsm::{transition, EpisodeTimeline, RecoveryEvent, RecoveryState};
use crate::game;
use crate::measurement::{ActionId, ActionKind, AttributeVector, CandidateAction, Confidence, DEFAULT_SMOOTHING};
use crate::sim::{self, Disruption, ScenarioConfig, SimState};
use crate::wsm::{self, ScoredAction, WeightVector, WsmMode};

pub const DEFAULT_MAX_ITERATIONS: usize = 100;

/// Random stream reserved for game play, distinct from the simulator's.
const GAME_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Technique {
    #[serde(rename = "WSM")]
    Wsm,
    Game,
}

impl Technique {
    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Wsm => "WSM",
            Technique::Game => "Game",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wsm" => Ok(Technique::Wsm),
            "game" => Ok(Technique::Game),
            _ => Err(Error::config(format!("unknown technique {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TechniqueOptions {
    Wsm(WsmMode),
    Game { max_rounds: u32 },
}

impl TechniqueOptions {
    pub fn technique(&self) -> Technique {
        match self {
            TechniqueOptions::Wsm(_) => Technique::Wsm,
            TechniqueOptions::Game { .. } => Technique::Game,
        }
    }

    pub fn default_for(technique: Technique) -> Self {
        match technique {
            Technique::Wsm => TechniqueOptions::Wsm(WsmMode::Fixed(WeightVector::equal())),
            Technique::Game => TechniqueOptions::Game { max_rounds: game::DEFAULT_MAX_ROUNDS },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub technique: TechniqueOptions,
    /// EWMA factor for attribute re-estimation.
    pub smoothing: f64,
    pub max_iterations: usize,
}

impl RunOptions {
    pub fn new(technique: TechniqueOptions) -> Self {
        Self { technique, smoothing: DEFAULT_SMOOTHING, max_iterations: DEFAULT_MAX_ITERATIONS }
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "technique")]
pub enum DecisionDetail {
    #[serde(rename = "WSM")]
    Wsm {
        weights: WeightVector,
        scores: Vec<ScoredAction>,
        score_selected: f64,
    },
    Game {
        p: f64,
        q: f64,
        rounds: u32,
        psne_fallback: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub technique: Technique,
    pub iteration: usize,
    pub state_before: RecoveryState,
    pub state_after: RecoveryState,
    pub action_id: ActionId,
    pub action_kind: ActionKind,
    pub perf_start: f64,
    pub perf_end: f64,
    /// Estimates of the selected action at decision time.
    pub estimates: AttributeVector,
    pub epsilon: f64,
    pub decision: DecisionDetail,
    pub clock_start_s: f64,
    pub clock_end_s: f64,
    pub co2_cum_g: f64,
    pub human_cum: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub iterations_to_recover: usize,
    pub total_elapsed_s: f64,
    pub total_co2_g: f64,
    pub total_human_interactions: u64,
    pub recovered: bool,
    pub timeline: EpisodeTimeline,
}

impl EpisodeSummary {
    /// Aggregates over the records. Cumulative counters start at zero at the
    /// beginning of an episode, so the last record carries the totals.
    pub fn fold(records: &[IterationRecord], recovered: bool, timeline: EpisodeTimeline) -> Self {
        EpisodeSummary {
            iterations_to_recover: records.len(),
            total_elapsed_s: records.iter().map(|r| r.clock_end_s - r.clock_start_s).sum(),
            total_co2_g: records.last().map_or(0.0, |r| r.co2_cum_g),
            total_human_interactions: records.last().map_or(0, |r| r.human_cum),
            recovered,
            timeline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentLog {
    pub scenario: String,
    pub seed: u64,
    pub technique: Technique,
    pub records: Vec<IterationRecord>,
    pub summary: EpisodeSummary,
    /// Disruptions scheduled after the first one; not applied within this
    /// episode.
    #[serde(default)]
    pub deferred_disruptions: Vec<Disruption>,
}

impl ExperimentLog {
    pub fn final_state(&self) -> RecoveryState {
        match self.records.last() {
            Some(r) => r.state_after,
            None if self.summary.recovered => RecoveryState::Steady,
            None => RecoveryState::TradeOff,
        }
    }
}

struct Candidates {
    estimates: [AttributeVector; 2],
}

impl Candidates {
    const IDS: [&'static str; 2] = ["a1", "a2"];

    fn new(cfg: &ScenarioConfig) -> Self {
        Candidates { estimates: ActionKind::ALL.map(|k| cfg.action(k).nominal_attributes(cfg.carbon_intensity)) }
    }

    fn actions(&self) -> Vec<CandidateAction> {
        ActionKind::ALL
            .iter()
            .zip(Self::IDS)
            .zip(&self.estimates)
            .map(|((&kind, id), &attrs)| CandidateAction::new(id, kind, attrs))
            .collect()
    }

    fn observe(&mut self, kind: ActionKind, observed: &AttributeVector, smoothing: f64) -> Result<()> {
        let slot = &mut self.estimates[kind as usize];
        *slot = slot.blend(observed, smoothing)?;
        Ok(())
    }
}

struct Choice {
    index: usize,
    detail: DecisionDetail,
}

fn decide(
    options: &TechniqueOptions,
    actions: &[CandidateAction],
    epsilon: Confidence,
    game_rng: &mut ChaCha8Rng,
) -> Result<Choice> {
    match options {
        TechniqueOptions::Wsm(mode) => {
            let d = wsm::select_action(actions, epsilon, mode)?;
            let index = actions.iter().position(|a| a.id == d.selected).expect("selected from candidates");
            let selected = d.selected_score().clone();
            Ok(Choice {
                index,
                detail: DecisionDetail::Wsm {
                    weights: selected.weights,
                    score_selected: selected.score,
                    scores: d.scores,
                },
            })
        }
        TechniqueOptions::Game { max_rounds } => {
            let m = game::build_payoff_matrix(&actions[0], &actions[1], epsilon)?;
            let s = game::solve_msne(&m);
            let out = game::play(&m, &s, game_rng, *max_rounds)?;
            Ok(Choice {
                index: out.action,
                detail: DecisionDetail::Game { p: s.p, q: s.q, rounds: out.rounds, psne_fallback: out.fallback },
            })
        }
    }
}

/// Runs one disruption-to-recovery episode.
pub fn run_experiment(scenario: &str, cfg: &ScenarioConfig, options: &RunOptions) -> Result<ExperimentLog> {
    cfg.validate()?;
    if options.max_iterations == 0 {
        return Err(Error::config("max_iterations must be at least 1"));
    }
    if !(0.0..=1.0).contains(&options.smoothing) {
        return Err(Error::config(format!("smoothing must lie in [0, 1], got {}", options.smoothing)));
    }
    let technique = options.technique.technique();
    let mut log = ExperimentLog {
        scenario: scenario.to_owned(),
        seed: cfg.seed,
        technique,
        records: Vec::new(),
        summary: EpisodeSummary::fold(&[], true, EpisodeTimeline::default()),
        deferred_disruptions: cfg.disruptions.iter().skip(1).copied().collect(),
    };
    let Some(disruption) = cfg.disruptions.first() else {
        return Ok(log);
    };

    let mut sim_state = SimState::new(cfg);
    let mut game_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    game_rng.set_stream(GAME_STREAM);
    let mut timeline = EpisodeTimeline::default();

    sim_state.clock = sim_state.clock.max(disruption.time);
    timeline.t_e = Some(sim_state.clock);
    sim_state = sim::inject_disruption(sim_state, disruption);
    sim_state.advance(cfg.tick);
    let mut sample = sim::measure(&mut sim_state, cfg);
    if !sim::detect_degradation(sample, cfg) {
        log.summary = EpisodeSummary::fold(&[], true, timeline);
        return Ok(log);
    }

    let mut state = transition(RecoveryState::Steady, RecoveryEvent::DegradationDetected)?;
    timeline.t_d = Some(sim_state.clock);
    state = transition(state, RecoveryEvent::TradeOffRequested)?;

    let mut candidates = Candidates::new(cfg);
    let mut recovered = false;
    for iteration in 1..=options.max_iterations {
        let state_before = state;
        let actions = candidates.actions();
        let epsilon = Confidence::saturating(sim_state.epsilon);
        let choice = decide(&options.technique, &actions, epsilon, &mut game_rng)?;
        let chosen = &actions[choice.index];

        // the first pass leaves the trade-off state; later passes re-decide
        // while resuming from the measuring state
        let event = if state == RecoveryState::TradeOff {
            RecoveryEvent::ActionSelected(chosen.kind)
        } else {
            RecoveryEvent::PerfNotAcceptable(chosen.kind)
        };
        state = transition(state, event)?;

        let clock_start = sim_state.clock;
        let perf_start = sample;
        let (next, observed) = sim::execute_action(sim_state, chosen.kind, cfg);
        sim_state = next;
        candidates.observe(chosen.kind, &observed, options.smoothing)?;

        state = transition(state, RecoveryEvent::MeasurementTaken)?;
        sample = sim::measure(&mut sim_state, cfg);
        if sample >= cfg.recovery_threshold {
            state = transition(state, RecoveryEvent::PerfAcceptable)?;
            recovered = true;
            timeline.t_r = Some(sim_state.clock);
        }

        log.records.push(IterationRecord {
            technique,
            iteration,
            state_before,
            state_after: state,
            action_id: chosen.id.clone(),
            action_kind: chosen.kind,
            perf_start,
            perf_end: sample,
            estimates: chosen.attrs,
            epsilon: epsilon.value(),
            decision: choice.detail,
            clock_start_s: clock_start,
            clock_end_s: sim_state.clock,
            co2_cum_g: sim_state.co2_cum,
            human_cum: sim_state.human_interactions_cum,
        });
        if recovered {
            break;
        }
    }

    log.summary = EpisodeSummary::fold(&log.records, recovered, timeline);
    Ok(log)
}

/// Runs the optimization and game techniques on the same scenario and seed.
pub fn run_both(
    scenario: &str,
    cfg: &ScenarioConfig,
    wsm: TechniqueOptions,
    game: TechniqueOptions,
    smoothing: f64,
    max_iterations: usize,
) -> Result<[ExperimentLog; 2]> {
    let opts = |t| RunOptions { technique: t, smoothing, max_iterations };
    Ok([run_experiment(scenario, cfg, &opts(wsm))?, run_experiment(scenario, cfg, &opts(game))?])
}

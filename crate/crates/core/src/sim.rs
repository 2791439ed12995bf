//! Discrete-time stand-in for a collaborative robot that classifies objects
//! on a conveyor belt.
//!
//! Performance (classification accuracy proxy) tracks the AI component's
//! confidence. Disruptions such as losing the lights or an extra human in the
//! camera's view knock both down. Learning raises confidence at the cost of
//! time, energy and human demonstrations; Operating only re-aligns
//! performance with the current confidence.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{read_input, Error, Result};
use crate::measurement::{ActionKind, AttributeVector};

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DisruptionKind {
    LightLoss,
    ExtraHuman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disruption {
    /// Scheduled time, seconds.
    pub time: f64,
    pub kind: DisruptionKind,
    pub perf_drop: f64,
    pub epsilon_drop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    /// Seconds per execution.
    pub base_duration: f64,
    /// Electrical power draw, watts.
    pub power: f64,
    pub human_interactions: u32,
    /// Confidence gained per execution; only meaningful for Learning.
    #[serde(default)]
    pub learning_gain: f64,
}

impl ActionSpec {
    pub fn energy_wh(&self) -> f64 {
        self.power * self.base_duration / SECONDS_PER_HOUR
    }

    /// Attributes of one execution under the given carbon intensity.
    pub fn nominal_attributes(&self, carbon_intensity: f64) -> AttributeVector {
        AttributeVector {
            e_t: self.base_duration,
            e_co2: self.energy_wh() * carbon_intensity,
            h: f64::from(self.human_interactions),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub initial_perf: f64,
    pub steady_threshold: f64,
    pub recovery_threshold: f64,
    pub initial_epsilon: f64,
    /// Seconds per simulation step.
    pub tick: f64,
    #[serde(default)]
    pub disruptions: Vec<Disruption>,
    pub learning: ActionSpec,
    pub operating: ActionSpec,
    /// Grams CO₂ per watt-hour.
    pub carbon_intensity: f64,
    #[serde(default)]
    pub noise_amplitude: f64,
    pub seed: u64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be > 0, got {v}")))
    }
}

impl ScenarioConfig {
    /// The reference recovery scenario: a light loss drops performance to
    /// 0.4 and recovery needs 0.75.
    pub fn reference() -> Self {
        ScenarioConfig {
            initial_perf: 0.9,
            steady_threshold: 0.8,
            recovery_threshold: 0.75,
            initial_epsilon: 0.9,
            tick: 1.0,
            disruptions: vec![Disruption {
                time: 10.0,
                kind: DisruptionKind::LightLoss,
                perf_drop: 0.5,
                epsilon_drop: 0.5,
            }],
            // 720 W for 20 s at 0.5 g/Wh emits 2 g
            learning: ActionSpec { base_duration: 20.0, power: 720.0, human_interactions: 4, learning_gain: 0.2 },
            // 3840 W for 15 s at 0.5 g/Wh emits 8 g
            operating: ActionSpec { base_duration: 15.0, power: 3840.0, human_interactions: 1, learning_gain: 0.0 },
            carbon_intensity: 0.5,
            noise_amplitude: 0.02,
            seed: 42,
        }
    }

    /// Reads a scenario from TOML (`.toml`) or JSON (anything else).
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_input(path)?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let cfg: ScenarioConfig = if is_toml {
            toml::from_str(&text).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("initial_perf", self.initial_perf)?;
        check_unit("steady_threshold", self.steady_threshold)?;
        check_unit("recovery_threshold", self.recovery_threshold)?;
        check_unit("initial_epsilon", self.initial_epsilon)?;
        if self.recovery_threshold > self.steady_threshold {
            return Err(Error::config(format!(
                "recovery_threshold ({}) must not exceed steady_threshold ({})",
                self.recovery_threshold, self.steady_threshold
            )));
        }
        check_positive("tick", self.tick)?;
        check_positive("carbon_intensity", self.carbon_intensity)?;
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(Error::config(format!("noise_amplitude must be >= 0, got {}", self.noise_amplitude)));
        }
        for (name, spec) in [("learning", &self.learning), ("operating", &self.operating)] {
            check_positive(&format!("{name}.base_duration"), spec.base_duration)?;
            check_positive(&format!("{name}.power"), spec.power)?;
            check_unit(&format!("{name}.learning_gain"), spec.learning_gain)?;
        }
        let mut last = f64::NEG_INFINITY;
        for (i, d) in self.disruptions.iter().enumerate() {
            if !(d.time.is_finite() && d.time >= 0.0) {
                return Err(Error::config(format!("disruptions[{i}].time must be >= 0, got {}", d.time)));
            }
            if d.time <= last {
                return Err(Error::config(format!("disruptions[{i}].time must be strictly increasing")));
            }
            last = d.time;
            check_unit(&format!("disruptions[{i}].perf_drop"), d.perf_drop)?;
            check_unit(&format!("disruptions[{i}].epsilon_drop"), d.epsilon_drop)?;
        }
        Ok(())
    }

    pub fn action(&self, kind: ActionKind) -> &ActionSpec {
        match kind {
            ActionKind::Learning => &self.learning,
            ActionKind::Operating => &self.operating,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Seconds since the start of the run.
    pub clock: f64,
    pub perf: f64,
    pub epsilon: f64,
    pub co2_cum: f64,
    pub energy_cum: f64,
    pub human_interactions_cum: u64,
    carbon_intensity: f64,
    rng: ChaCha8Rng,
}

impl SimState {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        SimState {
            clock: 0.0,
            perf: cfg.initial_perf.clamp(0.0, 1.0),
            epsilon: cfg.initial_epsilon.clamp(0.0, 1.0),
            co2_cum: 0.0,
            energy_cum: 0.0,
            human_interactions_cum: 0,
            carbon_intensity: cfg.carbon_intensity,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    /// Moves the clock forward without any activity.
    pub fn advance(&mut self, seconds: f64) {
        if seconds > 0.0 {
            self.clock += seconds;
        }
    }

    fn noise(&mut self, amplitude: f64) -> f64 {
        if amplitude > 0.0 {
            self.rng.gen_range(-amplitude..=amplitude)
        } else {
            0.0
        }
    }
}

pub fn inject_disruption(mut s: SimState, d: &Disruption) -> SimState {
    s.perf = (s.perf - d.perf_drop).max(0.0);
    s.epsilon = (s.epsilon - d.epsilon_drop).max(0.0);
    s
}

/// Runs one recovery action and returns the new state together with what was
/// observed about the execution.
pub fn execute_action(mut s: SimState, kind: ActionKind, cfg: &ScenarioConfig) -> (SimState, AttributeVector) {
    let spec = cfg.action(kind);
    if kind == ActionKind::Learning {
        s.epsilon = (s.epsilon + spec.learning_gain).min(1.0);
    }
    let noise = s.noise(cfg.noise_amplitude);
    s.perf = (s.epsilon + noise).clamp(0.0, 1.0);

    let energy = spec.energy_wh();
    s.clock += spec.base_duration;
    s.energy_cum += energy;
    s.co2_cum = s.energy_cum * s.carbon_intensity;
    s.human_interactions_cum += u64::from(spec.human_interactions);

    let observed = AttributeVector {
        e_t: spec.base_duration,
        e_co2: energy * s.carbon_intensity,
        h: f64::from(spec.human_interactions),
    };
    (s, observed)
}

/// Noisy performance sample; advances the random stream.
pub fn measure(s: &mut SimState, cfg: &ScenarioConfig) -> f64 {
    let noise = s.noise(cfg.noise_amplitude);
    (s.perf + noise).clamp(0.0, 1.0)
}

pub fn detect_degradation(sample: f64, cfg: &ScenarioConfig) -> bool {
    sample < cfg.steady_threshold
}

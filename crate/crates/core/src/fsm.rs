//! Recovery state diagram.
//!
//! ```text
//! Steady ──DegradationDetected──▶ Disruptive ──PolicyRecovered──▶ Recovered
//!                                     │
//!                              TradeOffRequested
//!                                     ▼
//!                                 TradeOff ──ActionSelected(k)──▶ Learning | Operating
//!                                                                     │  ▲
//!                                                       MeasurementTaken  PerfNotAcceptable(k)
//!                                                                     ▼  │
//!                                                                  Measuring ──PerfAcceptable──▶ Recovered
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::ActionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RecoveryState {
    Steady,
    Disruptive,
    TradeOff,
    Learning,
    Operating,
    Measuring,
    Recovered,
}

impl RecoveryState {
    pub const ALL: [RecoveryState; 7] = [
        RecoveryState::Steady,
        RecoveryState::Disruptive,
        RecoveryState::TradeOff,
        RecoveryState::Learning,
        RecoveryState::Operating,
        RecoveryState::Measuring,
        RecoveryState::Recovered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecoveryState::Steady => "Steady",
            RecoveryState::Disruptive => "Disruptive",
            RecoveryState::TradeOff => "TradeOff",
            RecoveryState::Learning => "Learning",
            RecoveryState::Operating => "Operating",
            RecoveryState::Measuring => "Measuring",
            RecoveryState::Recovered => "Recovered",
        }
    }

    /// The state an action of this kind drives the system into.
    pub fn acting(kind: ActionKind) -> Self {
        match kind {
            ActionKind::Learning => RecoveryState::Learning,
            ActionKind::Operating => RecoveryState::Operating,
        }
    }

    pub fn is_terminal(self) -> bool {
        self == RecoveryState::Recovered
    }
}

impl fmt::Display for RecoveryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RecoveryState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RecoveryState::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown recovery state {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecoveryEvent {
    DegradationDetected,
    PolicyRecovered,
    TradeOffRequested,
    ActionSelected(ActionKind),
    MeasurementTaken,
    PerfAcceptable,
    /// Carries the kind of action to resume.
    PerfNotAcceptable(ActionKind),
}

impl RecoveryEvent {
    pub fn all() -> Vec<RecoveryEvent> {
        use RecoveryEvent::*;
        let mut events = vec![DegradationDetected, PolicyRecovered, TradeOffRequested];
        events.extend(ActionKind::ALL.map(ActionSelected));
        events.extend([MeasurementTaken, PerfAcceptable]);
        events.extend(ActionKind::ALL.map(PerfNotAcceptable));
        events
    }
}

impl fmt::Display for RecoveryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecoveryEvent::ActionSelected(k) => write!(f, "ActionSelected({k})"),
            RecoveryEvent::PerfNotAcceptable(k) => write!(f, "PerfNotAcceptable({k})"),
            other => write!(f, "{other:?}"),
        }
    }
}

pub fn transition(state: RecoveryState, event: RecoveryEvent) -> Result<RecoveryState> {
    use RecoveryEvent as E;
    use RecoveryState as S;
    let next = match (state, event) {
        (S::Steady, E::DegradationDetected) => S::Disruptive,
        // no degradation: stay put
        (S::Steady, _) => S::Steady,
        (S::Disruptive, E::PolicyRecovered) => S::Recovered,
        (S::Disruptive, E::TradeOffRequested) => S::TradeOff,
        (S::TradeOff, E::ActionSelected(k)) => S::acting(k),
        (S::Learning | S::Operating, E::MeasurementTaken) => S::Measuring,
        (S::Measuring, E::PerfAcceptable) => S::Recovered,
        (S::Measuring, E::PerfNotAcceptable(k)) => S::acting(k),
        (state, event) => return Err(Error::InvalidTransition { state: state.to_string(), event: event.to_string() }),
    };
    Ok(next)
}

pub fn is_terminal(state: RecoveryState) -> bool {
    state.is_terminal()
}

/// Times of the disruptive event, entry into the disruptive state, and
/// recovery, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTimeline {
    pub t_e: Option<f64>,
    pub t_d: Option<f64>,
    pub t_r: Option<f64>,
}

impl EpisodeTimeline {
    pub fn is_ordered(&self) -> bool {
        let present: Vec<f64> = [self.t_e, self.t_d, self.t_r].into_iter().flatten().collect();
        present.windows(2).all(|w| w[0] <= w[1])
    }
}

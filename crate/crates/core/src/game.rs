//! Two-agent technique: the resilience/greenness coordination game.
//!
//! The resilience player `P_r` picks rows, the greenness player `P_g` picks
//! columns. Both choose between the same two actions `a1` and `a2`. Payoffs
//! are
//!
//! ```text
//! P_r(a) = ε · α / E_t          P_g(a) = (1 − ε) · α / (H · E_co2)
//! ```
//!
//! with the matching factor `α = 2` when both players land on the same action
//! and `α = 1` otherwise. `p` is the probability that `P_g` picks `a1`, `q` the
//! probability that `P_r` picks `a1`.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{ActionId, CandidateAction, Confidence, CO2_MIN};
use crate::scalar::Scalar;

/// Denominators at or below this magnitude mean dominance or indifference.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Default number of sampling rounds in [`play`].
pub const DEFAULT_MAX_ROUNDS: u32 = 10;

/// The matching factor α.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    /// Players chose different actions, α = 1.
    Mismatched,
    /// Players chose the same action, α = 2.
    Matched,
}

impl Matching {
    pub fn factor<T: Scalar>(self) -> T {
        match self {
            Matching::Mismatched => T::one(),
            Matching::Matched => T::of(2.0),
        }
    }
}

/// Payoff formulas with a configurable CO₂ floor.
#[derive(Debug, Clone, Copy)]
pub struct Payoffs<T = f64> {
    pub co2_min: T,
}

impl<T: Scalar> Default for Payoffs<T> {
    fn default() -> Self {
        Self { co2_min: T::of(CO2_MIN) }
    }
}

impl<T: Scalar> Payoffs<T> {
    pub fn resilience(&self, action: &CandidateAction<T>, epsilon: Confidence<T>, alpha: Matching) -> T {
        epsilon.value() * alpha.factor::<T>() / action.attrs.e_t
    }

    pub fn greenness(&self, action: &CandidateAction<T>, epsilon: Confidence<T>, alpha: Matching) -> T {
        let attrs = &action.attrs;
        epsilon.complement() * alpha.factor::<T>() / attrs.floored_h() / attrs.floored_co2(self.co2_min)
    }

    pub fn build_matrix(
        &self,
        a1: &CandidateAction<T>,
        a2: &CandidateAction<T>,
        epsilon: Confidence<T>,
    ) -> Result<PayoffMatrix<T>> {
        if a1.id == a2.id {
            return Err(Error::domain(format!("game actions must differ, both are {}", a1.id)));
        }
        a1.attrs.validate()?;
        a2.attrs.validate()?;
        let cell = |row: &CandidateAction<T>, col: &CandidateAction<T>| {
            let alpha = if row.id == col.id { Matching::Matched } else { Matching::Mismatched };
            Cell { resilience: self.resilience(row, epsilon, alpha), greenness: self.greenness(col, epsilon, alpha) }
        };
        PayoffMatrix::from_cells(
            [ActionLabel::of(a1), ActionLabel::of(a2)],
            [[cell(a1, a1), cell(a1, a2)], [cell(a2, a1), cell(a2, a2)]],
        )
    }
}

/// `ε · α / E_t` with the default floors.
pub fn resilience_payoff<T: Scalar>(action: &CandidateAction<T>, epsilon: Confidence<T>, alpha: Matching) -> T {
    Payoffs::default().resilience(action, epsilon, alpha)
}

/// `(1 − ε) · α / (H · E_co2)` with the default floors.
pub fn greenness_payoff<T: Scalar>(action: &CandidateAction<T>, epsilon: Confidence<T>, alpha: Matching) -> T {
    Payoffs::default().greenness(action, epsilon, alpha)
}

pub fn build_payoff_matrix<T: Scalar>(
    a1: &CandidateAction<T>,
    a2: &CandidateAction<T>,
    epsilon: Confidence<T>,
) -> Result<PayoffMatrix<T>> {
    Payoffs::default().build_matrix(a1, a2, epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell<T = f64> {
    pub resilience: T,
    pub greenness: T,
}

impl<T: Scalar> Cell<T> {
    pub fn new(resilience: T, greenness: T) -> Self {
        Self { resilience, greenness }
    }
}

/// Row/column label: the action id plus its run time for tie-breaking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionLabel<T = f64> {
    pub id: ActionId,
    pub e_t: T,
}

impl<T: Scalar> ActionLabel<T> {
    pub fn of(action: &CandidateAction<T>) -> Self {
        Self { id: action.id.clone(), e_t: action.attrs.e_t }
    }
}

/// 2×2 bimatrix indexed `[P_r action][P_g action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix<T = f64> {
    pub actions: [ActionLabel<T>; 2],
    pub cells: [[Cell<T>; 2]; 2],
}

/// A pure strategy profile, as action indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile {
    pub resilience: usize,
    pub greenness: usize,
}

impl Profile {
    pub fn is_matched(self) -> bool {
        self.resilience == self.greenness
    }
}

impl<T: Scalar> PayoffMatrix<T> {
    pub fn from_cells(actions: [ActionLabel<T>; 2], cells: [[Cell<T>; 2]; 2]) -> Result<Self> {
        if actions[0].id == actions[1].id {
            return Err(Error::domain("payoff matrix actions must have distinct ids"));
        }
        for c in cells.iter().flatten() {
            for v in [c.resilience, c.greenness] {
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::domain(format!("payoff must be finite and >= 0, got {v}")));
                }
            }
        }
        Ok(Self { actions, cells })
    }

    pub fn cell(&self, p: Profile) -> Cell<T> {
        self.cells[p.resilience][p.greenness]
    }

    pub fn profiles() -> [Profile; 4] {
        [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(r, g)| Profile { resilience: r, greenness: g })
    }
}

/// Every cell where neither player can strictly gain by deviating alone.
pub fn find_psne<T: Scalar>(m: &PayoffMatrix<T>) -> Vec<Profile> {
    PayoffMatrix::<T>::profiles()
        .into_iter()
        .filter(|&p| {
            let here = m.cell(p);
            let r_dev = m.cells[1 - p.resilience][p.greenness].resilience;
            let g_dev = m.cells[p.resilience][1 - p.greenness].greenness;
            here.resilience >= r_dev && here.greenness >= g_dev
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy<T = f64> {
    /// Probability that the greenness player picks `a1`.
    pub p: T,
    /// Probability that the resilience player picks `a1`.
    pub q: T,
    /// False when either probability was clamped or left undetermined.
    pub interior: bool,
}

impl<T: Scalar> MixedStrategy<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        if !(unit(p) && unit(q)) {
            return Err(Error::domain(format!("probabilities must lie in [0, 1]: p={p}, q={q}")));
        }
        let open = |x: T| x > T::zero() && x < T::one();
        Ok(Self { p, q, interior: open(p) && open(q) })
    }
}

/// Solves `x·d = n` for a probability. Returns the clamped value and whether
/// the unclamped solution was already strictly inside `(0, 1)`.
fn indifference_point<T: Scalar>(numerator: T, denominator: T) -> (T, bool) {
    let tiny = T::of(DEGENERATE_DENOMINATOR);
    if denominator.abs() <= tiny {
        // dominance or total indifference: no unique mixing point
        let x = if numerator.abs() <= tiny {
            T::of(0.5)
        } else if numerator * denominator.signum() > T::zero() {
            T::one()
        } else {
            T::zero()
        };
        return (x, false);
    }
    let x = numerator / denominator;
    if x > T::zero() && x < T::one() {
        (x, true)
    } else {
        (x.max(T::zero()).min(T::one()), false)
    }
}

/// Mixed equilibrium by equating each player's expected payoffs.
///
/// `p` makes the resilience player indifferent between its rows, `q` makes
/// the greenness player indifferent between its columns.
pub fn solve_msne<T: Scalar>(m: &PayoffMatrix<T>) -> MixedStrategy<T> {
    let r = |i: usize, j: usize| m.cells[i][j].resilience;
    let g = |i: usize, j: usize| m.cells[i][j].greenness;
    // p·r11 + (1−p)·r12 = p·r21 + (1−p)·r22
    let (p, p_in) = indifference_point(r(1, 1) - r(0, 1), r(0, 0) - r(0, 1) - r(1, 0) + r(1, 1));
    // q·g11 + (1−q)·g21 = q·g12 + (1−q)·g22
    let (q, q_in) = indifference_point(g(1, 1) - g(1, 0), g(0, 0) - g(1, 0) - g(0, 1) + g(1, 1));
    MixedStrategy { p, q, interior: p_in && q_in }
}

/// Expected payoff of each player for each of its own actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPayoffs<T = f64> {
    /// `P_r` playing `[a1, a2]` against `P_g`'s mixture `p`.
    pub resilience: [T; 2],
    /// `P_g` playing `[a1, a2]` against `P_r`'s mixture `q`.
    pub greenness: [T; 2],
}

impl<T: Scalar> ExpectedPayoffs<T> {
    pub fn resilience_gap(&self) -> T {
        (self.resilience[0] - self.resilience[1]).abs()
    }

    pub fn greenness_gap(&self) -> T {
        (self.greenness[0] - self.greenness[1]).abs()
    }
}

pub fn expected_payoffs<T: Scalar>(m: &PayoffMatrix<T>, s: &MixedStrategy<T>) -> ExpectedPayoffs<T> {
    let (p, q) = (s.p, s.q);
    let r = |i: usize, j: usize| m.cells[i][j].resilience;
    let g = |i: usize, j: usize| m.cells[i][j].greenness;
    ExpectedPayoffs {
        resilience: [p * r(0, 0) + (T::one() - p) * r(0, 1), p * r(1, 0) + (T::one() - p) * r(1, 1)],
        greenness: [q * g(0, 0) + (T::one() - q) * g(1, 0), q * g(0, 1) + (T::one() - q) * g(1, 1)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution<T = f64> {
    pub psne: Vec<Profile>,
    pub msne: MixedStrategy<T>,
    pub expected: ExpectedPayoffs<T>,
}

pub fn solve<T: Scalar>(m: &PayoffMatrix<T>) -> GameSolution<T> {
    let msne = solve_msne(m);
    GameSolution { psne: find_psne(m), expected: expected_payoffs(m, &msne), msne }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayOutcome {
    /// Index of the agreed action in the matrix labels.
    pub action: usize,
    pub id: ActionId,
    pub rounds: u32,
    /// True when no round matched and the fallback equilibrium was used.
    pub fallback: bool,
}

/// Repeated independent draws from the mixed strategy until both players
/// pick the same action.
///
/// After `max_rounds` mismatches the matched equilibrium with the largest
/// payoff sum is taken; ties go to the faster action, then the smaller id.
/// When no matched equilibrium exists all matched cells are considered.
pub fn play<T: Scalar, R: Rng + ?Sized>(
    m: &PayoffMatrix<T>,
    s: &MixedStrategy<T>,
    rng: &mut R,
    max_rounds: u32,
) -> Result<PlayOutcome> {
    if max_rounds == 0 {
        return Err(Error::domain("max_rounds must be at least 1"));
    }
    let (p, q) = (s.p.to_f64_lossy(), s.q.to_f64_lossy());
    for round in 1..=max_rounds {
        let r_pick = if rng.gen::<f64>() < q { 0 } else { 1 };
        let g_pick = if rng.gen::<f64>() < p { 0 } else { 1 };
        if r_pick == g_pick {
            return Ok(PlayOutcome {
                action: r_pick,
                id: m.actions[r_pick].id.clone(),
                rounds: round,
                fallback: false,
            });
        }
    }
    let matched: Vec<usize> = find_psne(m).into_iter().filter(|p| p.is_matched()).map(|p| p.resilience).collect();
    let pool = if matched.is_empty() { vec![0, 1] } else { matched };
    let total = |i: usize| {
        let c = m.cells[i][i];
        c.resilience + c.greenness
    };
    let action = pool
        .into_iter()
        .min_by(|&a, &b| {
            total(b)
                .partial_cmp(&total(a))
                .unwrap_or(Ordering::Equal)
                .then_with(|| m.actions[a].e_t.partial_cmp(&m.actions[b].e_t).unwrap_or(Ordering::Equal))
                .then_with(|| m.actions[a].id.cmp(&m.actions[b].id))
        })
        .expect("pool is never empty");
    Ok(PlayOutcome { action, id: m.actions[action].id.clone(), rounds: max_rounds, fallback: true })
}

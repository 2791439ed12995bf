//! One-agent technique: weighted-sum scoring of candidate actions.
//!
//! The global score of an action is
//!
//! ```text
//! S(a) = w_t·ε·N(1/E_t) + (1 − ε)·( w_h·N(H) + w_co2·N(1/E_co2) )
//! ```
//!
//! with `N` the max-normalization over the candidate set. Human labor enters
//! un-inverted.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{ActionId, CandidateAction, Confidence, NormalizationContext};
use crate::scalar::Scalar;

const SIMPLEX_TOL: f64 = 1e-9;

/// Attribute weights on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector<T = f64> {
    pub w_t: T,
    pub w_h: T,
    pub w_co2: T,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(w_t: T, w_h: T, w_co2: T) -> Result<Self> {
        let w = Self { w_t, w_h, w_co2 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: T| x.is_finite() && x >= T::zero() && x <= T::one();
        if !(in_unit(self.w_t) && in_unit(self.w_h) && in_unit(self.w_co2)) {
            return Err(Error::domain(format!("weights must lie in [0, 1]: {self:?}")));
        }
        let sum = self.w_t + self.w_h + self.w_co2;
        if (sum - T::one()).abs() > T::of(SIMPLEX_TOL) {
            return Err(Error::domain(format!("weights must sum to 1, got {sum}")));
        }
        Ok(())
    }

    pub fn equal() -> Self {
        let third = T::one() / T::of(3.0);
        Self { w_t: third, w_h: third, w_co2: third }
    }

    /// The simplex vertices in tie-break order: time, labor, CO₂.
    pub fn vertices() -> [Self; 3] {
        let (o, z) = (T::one(), T::zero());
        [Self { w_t: o, w_h: z, w_co2: z }, Self { w_t: z, w_h: o, w_co2: z }, Self { w_t: z, w_h: z, w_co2: o }]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredAction<T = f64> {
    pub id: ActionId,
    pub score: T,
    pub weights: WeightVector<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WsmMode<T = f64> {
    Fixed(WeightVector<T>),
    WeightSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WsmModeTag {
    Fixed,
    WeightSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WsmDecision<T = f64> {
    pub selected: ActionId,
    pub scores: Vec<ScoredAction<T>>,
    pub mode: WsmModeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<String>,
}

impl<T: Scalar> WsmDecision<T> {
    pub fn selected_score(&self) -> &ScoredAction<T> {
        self.scores.iter().find(|s| s.id == self.selected).expect("selected action is always scored")
    }
}

/// Global score of one action under fixed weights.
pub fn score<T: Scalar>(
    action: &CandidateAction<T>,
    epsilon: Confidence<T>,
    weights: &WeightVector<T>,
    ctx: &NormalizationContext<T>,
) -> Result<ScoredAction<T>> {
    weights.validate()?;
    let n = ctx.terms(&action.id)?;
    let eps = epsilon.value();
    let s = weights.w_t * eps * n.inv_time + epsilon.complement() * (weights.w_h * n.labor + weights.w_co2 * n.inv_co2);
    Ok(ScoredAction { id: action.id.clone(), score: s, weights: *weights })
}

/// Weights on the simplex maximizing one action's score.
///
/// The score is linear in the weights, so a vertex is optimal. Ties between
/// vertices go to time, then labor, then CO₂.
pub fn best_weights<T: Scalar>(
    action: &CandidateAction<T>,
    epsilon: Confidence<T>,
    ctx: &NormalizationContext<T>,
) -> Result<(WeightVector<T>, T)> {
    let n = ctx.terms(&action.id)?;
    let values = [epsilon.value() * n.inv_time, epsilon.complement() * n.labor, epsilon.complement() * n.inv_co2];
    let mut best = 0;
    for i in 1..3 {
        if values[i] > values[best] {
            best = i;
        }
    }
    Ok((WeightVector::vertices()[best], values[best]))
}

/// Scores every candidate and returns the highest-scoring one.
///
/// Equal scores are resolved by smaller run time, then by id.
pub fn select_action<T: Scalar>(
    candidates: &[CandidateAction<T>],
    epsilon: Confidence<T>,
    mode: &WsmMode<T>,
) -> Result<WsmDecision<T>> {
    if candidates.len() < 2 {
        return Err(Error::domain(format!("need at least 2 candidate actions, got {}", candidates.len())));
    }
    let ctx = NormalizationContext::new(candidates)?;
    let scores: Vec<ScoredAction<T>> = match mode {
        WsmMode::Fixed(w) => candidates.iter().map(|c| score(c, epsilon, w, &ctx)).collect::<Result<_>>()?,
        WsmMode::WeightSearch => candidates
            .iter()
            .map(|c| {
                best_weights(c, epsilon, &ctx).map(|(weights, score)| ScoredAction { id: c.id.clone(), score, weights })
            })
            .collect::<Result<_>>()?,
    };

    let top = scores.iter().map(|s| s.score).fold(T::neg_infinity(), T::max);
    let mut tied: Vec<&CandidateAction<T>> =
        candidates.iter().zip(&scores).filter(|(_, s)| s.score == top).map(|(c, _)| c).collect();
    tied.sort_by(|a, b| a.attrs.e_t.partial_cmp(&b.attrs.e_t).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id)));
    let tie_break = (tied.len() > 1).then(|| {
        let ids: Vec<&str> = tied.iter().map(|c| c.id.as_str()).collect();
        format!("score tie between {}; resolved by run time then id", ids.join(", "))
    });

    Ok(WsmDecision {
        selected: tied[0].id.clone(),
        scores,
        mode: match mode {
            WsmMode::Fixed(_) => WsmModeTag::Fixed,
            WsmMode::WeightSearch => WsmModeTag::WeightSearch,
        },
        tie_break,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{ActionKind, AttributeVector};
    use proptest::prelude::*;

    fn reference_pair() -> Vec<CandidateAction> {
        vec![
            CandidateAction::new("a1", ActionKind::Learning, AttributeVector::new(20.0, 2.0, 4.0).unwrap()),
            CandidateAction::new("a2", ActionKind::Operating, AttributeVector::new(15.0, 8.0, 1.0).unwrap()),
        ]
    }

    fn eps(x: f64) -> Confidence {
        Confidence::new(x).unwrap()
    }

    #[test]
    fn reference_scores() {
        let c = reference_pair();
        let ctx = NormalizationContext::new(&c).unwrap();
        let w = WeightVector::equal();
        let s1 = score(&c[0], eps(0.5), &w, &ctx).unwrap().score;
        let s2 = score(&c[1], eps(0.5), &w, &ctx).unwrap().score;
        assert!((s1 - 0.458_333_333).abs() < 1e-5, "{s1}");
        assert!((s2 - 0.25).abs() < 1e-5, "{s2}");
        let d = select_action(&c, eps(0.5), &WsmMode::Fixed(w)).unwrap();
        assert_eq!(d.selected.as_str(), "a1");
        assert!(d.tie_break.is_none());
    }

    #[test]
    fn full_confidence_scores_time_only() {
        let c = reference_pair();
        let ctx = NormalizationContext::new(&c).unwrap();
        let w = WeightVector::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(score(&c[1], eps(1.0), &w, &ctx).unwrap().score, 1.0);
        let d = select_action(&c, eps(1.0), &WsmMode::Fixed(w)).unwrap();
        assert_eq!(d.selected.as_str(), "a2");
        let (bw, s) = best_weights(&c[0], eps(1.0), &ctx).unwrap();
        assert_eq!(bw, WeightVector::new(1.0, 0.0, 0.0).unwrap());
        assert!((s - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_confidence_drops_time_term() {
        let c = reference_pair();
        let ctx = NormalizationContext::new(&c).unwrap();
        let w = WeightVector::new(0.5, 0.25, 0.25).unwrap();
        let s = score(&c[1], eps(0.0), &w, &ctx).unwrap().score;
        assert!((s - (0.25 * 0.25 + 0.25 * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn vertex_tie_prefers_labor_over_co2() {
        let c = reference_pair();
        let ctx = NormalizationContext::new(&c).unwrap();
        // a1 has N(H) = N(1/E_co2) = 1
        let (w, s) = best_weights(&c[0], eps(0.0), &ctx).unwrap();
        assert_eq!(w, WeightVector::new(0.0, 1.0, 0.0).unwrap());
        assert_eq!(s, 1.0);
        let (w, s) = best_weights(&c[0], eps(0.5), &ctx).unwrap();
        assert_eq!(w, WeightVector::new(0.0, 1.0, 0.0).unwrap());
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_actions_tie_on_id() {
        let a = AttributeVector::new(10.0, 3.0, 2.0).unwrap();
        let c = vec![
            CandidateAction::new("b", ActionKind::Operating, a),
            CandidateAction::new("a", ActionKind::Learning, a),
        ];
        let d = select_action(&c, eps(0.3), &WsmMode::Fixed(WeightVector::equal())).unwrap();
        assert_eq!(d.selected.as_str(), "a");
        assert!(d.tie_break.is_some());
    }

    #[test]
    fn tie_prefers_faster_action() {
        // ε = 0 hides run time from the score
        let c = vec![
            CandidateAction::new("a", ActionKind::Learning, AttributeVector::new(30.0, 3.0, 2.0).unwrap()),
            CandidateAction::new("b", ActionKind::Operating, AttributeVector::new(10.0, 3.0, 2.0).unwrap()),
        ];
        let d = select_action(&c, eps(0.0), &WsmMode::Fixed(WeightVector::equal())).unwrap();
        assert_eq!(d.selected.as_str(), "b");
    }

    #[test]
    fn rejects_single_candidate_and_bad_weights() {
        let c = reference_pair();
        assert!(select_action(&c[..1], eps(0.5), &WsmMode::WeightSearch).is_err());
        assert!(WeightVector::new(0.5, 0.5, 0.5).is_err());
        assert!(WeightVector::new(-0.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn weight_search_selects_max_of_vertices() {
        let c = reference_pair();
        let d = select_action(&c, eps(0.5), &WsmMode::WeightSearch).unwrap();
        // a1: max(0.375, 0.5, 0.5) = 0.5 ; a2: max(0.5, 0.125, 0.125) = 0.5 -> tie, a2 faster
        assert_eq!(d.selected.as_str(), "a2");
        assert!(d.tie_break.is_some());
        assert_eq!(d.mode, WsmModeTag::WeightSearch);
    }

    #[test]
    fn single_precision_reference() {
        let c: Vec<CandidateAction<f32>> = vec![
            CandidateAction::new("a1", ActionKind::Learning, AttributeVector::new(20.0f32, 2.0, 4.0).unwrap()),
            CandidateAction::new("a2", ActionKind::Operating, AttributeVector::new(15.0f32, 8.0, 1.0).unwrap()),
        ];
        let d = select_action(&c, Confidence::new(0.5f32).unwrap(), &WsmMode::Fixed(WeightVector::equal())).unwrap();
        assert_eq!(d.selected.as_str(), "a1");
        assert!((d.selected_score().score - 0.458_333_3).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn faster_never_scores_lower(
            t in 1.0f64..100.0, shrink in 0.1f64..1.0, other_t in 0.5f64..100.0,
            e in 0.0f64..=1.0,
        ) {
            // other action keeps the time maximum of 1/E_t fixed
            let fast_other = other_t.min(t * shrink) * 0.5;
            let mk = |t1: f64| vec![
                CandidateAction::new("x", ActionKind::Learning, AttributeVector::new(t1, 2.0, 3.0).unwrap()),
                CandidateAction::new("y", ActionKind::Operating, AttributeVector::new(fast_other, 5.0, 1.0).unwrap()),
            ];
            let w = WeightVector::equal();
            let before = mk(t);
            let after = mk(t * shrink);
            let sb = score(&before[0], eps(e), &w, &NormalizationContext::new(&before).unwrap()).unwrap().score;
            let sa = score(&after[0], eps(e), &w, &NormalizationContext::new(&after).unwrap()).unwrap().score;
            prop_assert!(sa >= sb);
        }

        #[test]
        fn fixed_mode_is_deterministic(t1 in 1.0f64..100.0, t2 in 1.0f64..100.0, e in 0.0f64..=1.0) {
            let c = vec![
                CandidateAction::new("a", ActionKind::Learning, AttributeVector::new(t1, 2.0, 3.0).unwrap()),
                CandidateAction::new("b", ActionKind::Operating, AttributeVector::new(t2, 5.0, 1.0).unwrap()),
            ];
            let m = WsmMode::Fixed(WeightVector::equal());
            prop_assert_eq!(select_action(&c, eps(e), &m).unwrap(), select_action(&c, eps(e), &m).unwrap());
        }
    }
}

//! Greenness and resilience measurements for candidate recovery actions.
//!
//! Every action is described by three attributes: its estimated run time,
//! its estimated CO₂ footprint and the number of human interactions it needs.
//! The AI component's confidence weighs resilience against greenness in both
//! decision techniques.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Human labor below this count is raised to it before inversion.
pub const H_MIN: f64 = 1.0;

/// Default floor (grams) applied to a zero CO₂ footprint before inversion.
pub const CO2_MIN: f64 = 1e-6;

/// Default EWMA smoothing factor for attribute re-estimation.
pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// Per-action measurements.
///
/// `h` counts human interactions. It is kept as a real so that running
/// estimates of it can be stored in the same vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributeVector<T = f64> {
    /// Estimated run time, seconds.
    pub e_t: T,
    /// Estimated CO₂ footprint, grams CO₂-equivalent.
    pub e_co2: T,
    /// Human labor cost, number of interactions.
    pub h: T,
}

impl<T: Scalar> AttributeVector<T> {
    pub fn new(e_t: T, e_co2: T, h: T) -> Result<Self> {
        let v = Self { e_t, e_co2, h };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_t.is_finite() && self.e_co2.is_finite() && self.h.is_finite()) {
            return Err(Error::domain(format!("non-finite attribute in {self:?}")));
        }
        if self.e_t <= T::zero() {
            return Err(Error::domain(format!("run time must be > 0, got {}", self.e_t)));
        }
        if self.e_co2 < T::zero() {
            return Err(Error::domain(format!("CO2 footprint must be >= 0, got {}", self.e_co2)));
        }
        if self.h < T::zero() {
            return Err(Error::domain(format!("human labor must be >= 0, got {}", self.h)));
        }
        Ok(())
    }

    /// Folds an observation into this estimate, attribute by attribute.
    pub fn blend(&self, observed: &Self, smoothing: T) -> Result<Self> {
        Self::new(
            update_estimate(self.e_t, observed.e_t, smoothing)?,
            update_estimate(self.e_co2, observed.e_co2, smoothing)?,
            update_estimate(self.h, observed.h, smoothing)?,
        )
    }

    /// Human labor with zero raised to [`H_MIN`].
    pub fn floored_h(&self) -> T {
        self.h.max(T::of(H_MIN))
    }

    /// CO₂ footprint with values below `co2_min` raised to it.
    pub fn floored_co2(&self, co2_min: T) -> T {
        self.e_co2.max(co2_min)
    }
}

/// Confidence of the AI component's model, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Confidence<T = f64>(T);

impl<T: Scalar> Confidence<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if epsilon.is_finite() && epsilon >= T::zero() && epsilon <= T::one() {
            Ok(Self(epsilon))
        } else {
            Err(Error::domain(format!("confidence must lie in [0, 1], got {epsilon}")))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn saturating(epsilon: T) -> Self {
        if epsilon.is_nan() {
            return Self(T::zero());
        }
        Self(epsilon.max(T::zero()).min(T::one()))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `1 - ε`, the weight given to greenness.
    pub fn complement(self) -> T {
        T::one() - self.0
    }
}

/// Recovery state an action drives the AI component into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Learning,
    Operating,
}

impl ActionKind {
    pub const ALL: [ActionKind; 2] = [ActionKind::Learning, ActionKind::Operating];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Learning => "Learning",
            ActionKind::Operating => "Operating",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub String);

impl ActionId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ActionId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAction<T = f64> {
    pub id: ActionId,
    pub kind: ActionKind,
    pub attrs: AttributeVector<T>,
}

impl<T: Scalar> CandidateAction<T> {
    pub fn new(id: impl Into<String>, kind: ActionKind, attrs: AttributeVector<T>) -> Self {
        Self { id: ActionId::new(id), kind, attrs }
    }
}

/// Max-normalized attribute columns over one candidate set.
#[derive(Debug, Clone)]
pub struct NormalizationContext<T = f64> {
    ids: Vec<ActionId>,
    inv_time: Vec<T>,
    labor: Vec<T>,
    inv_co2: Vec<T>,
}

/// Normalized terms of a single action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedTerms<T> {
    /// N(E_t⁻¹)
    pub inv_time: T,
    /// N(H)
    pub labor: T,
    /// N(E_CO2⁻¹)
    pub inv_co2: T,
}

impl<T: Scalar> NormalizationContext<T> {
    /// Builds the context with the default CO₂ floor.
    pub fn new(candidates: &[CandidateAction<T>]) -> Result<Self> {
        Self::with_co2_floor(candidates, T::of(CO2_MIN))
    }

    pub fn with_co2_floor(candidates: &[CandidateAction<T>], co2_min: T) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::domain("normalization context needs at least one action"));
        }
        for (i, c) in candidates.iter().enumerate() {
            c.attrs.validate()?;
            if candidates[..i].iter().any(|o| o.id == c.id) {
                return Err(Error::domain(format!("duplicate action id {}", c.id)));
            }
        }
        let inv_time: Vec<T> = candidates.iter().map(|c| inverse_attr(c.attrs.e_t)).collect::<Result<_>>()?;
        let labor: Vec<T> = candidates.iter().map(|c| c.attrs.h).collect();
        let inv_co2: Vec<T> =
            candidates.iter().map(|c| inverse_attr(c.attrs.floored_co2(co2_min))).collect::<Result<_>>()?;
        Ok(Self {
            ids: candidates.iter().map(|c| c.id.clone()).collect(),
            inv_time: normalize(&inv_time)?,
            labor: normalize(&labor).map_err(|e| Error::Degenerate(format!("human labor column: {e}")))?,
            inv_co2: normalize(&inv_co2)?,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn terms(&self, id: &ActionId) -> Result<NormalizedTerms<T>> {
        let i = self
            .ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::domain(format!("action {id} is not in the normalization context")))?;
        Ok(NormalizedTerms { inv_time: self.inv_time[i], labor: self.labor[i], inv_co2: self.inv_co2[i] })
    }
}

/// Divides every value by the maximum of the sequence.
pub fn normalize<T: Scalar>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::domain("cannot normalize an empty sequence"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < T::zero()) {
        return Err(Error::domain(format!("cannot normalize value {v}")));
    }
    let max = values.iter().copied().fold(T::zero(), T::max);
    if max <= T::zero() {
        return Err(Error::Degenerate("all values are zero".into()));
    }
    Ok(values.iter().map(|&v| v / max).collect())
}

/// `1 / x` for a strictly positive, finite `x`.
pub fn inverse_attr<T: Scalar>(x: T) -> Result<T> {
    if x > T::zero() && x.is_finite() {
        Ok(T::one() / x)
    } else {
        Err(Error::domain(format!("cannot invert {x}")))
    }
}

/// Exponentially weighted moving average step.
pub fn update_estimate<T: Scalar>(prev: T, observed: T, smoothing: T) -> Result<T> {
    if !(smoothing >= T::zero() && smoothing <= T::one()) {
        return Err(Error::domain(format!("smoothing must lie in [0, 1], got {smoothing}")));
    }
    if !prev.is_finite() || !observed.is_finite() {
        return Err(Error::domain("estimate update with non-finite input"));
    }
    let next = (T::one() - smoothing) * prev + smoothing * observed;
    // keep the convex-combination bound exact under rounding
    Ok(next.max(prev.min(observed)).min(prev.max(observed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[2.0, 4.0]).unwrap(), vec![0.5, 1.0]);
        assert_eq!(normalize(&[3.0, 3.0, 3.0]).unwrap(), vec![1.0, 1.0, 1.0]);
        let n = normalize(&[1.0f64 / 20.0, 1.0 / 15.0]).unwrap();
        assert!((n[0] - 0.75).abs() < 1e-12);
        assert_eq!(n[1], 1.0);
    }

    #[test]
    fn normalize_errors() {
        assert!(matches!(normalize::<f64>(&[]), Err(Error::Domain(_))));
        assert!(matches!(normalize(&[0.0, 0.0]), Err(Error::Degenerate(_))));
        assert!(matches!(normalize(&[1.0, f64::NAN]), Err(Error::Domain(_))));
        assert!(matches!(normalize(&[1.0, f64::INFINITY]), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse_attr(4.0).unwrap(), 0.25);
        assert_eq!(inverse_attr(1.0).unwrap(), 1.0);
        assert!(inverse_attr(0.0).is_err());
        assert!(inverse_attr(-2.0).is_err());
        let a = AttributeVector::new(10.0, 1.0, 0.0).unwrap();
        assert_eq!(inverse_attr(a.floored_h()).unwrap(), 1.0);
    }

    #[test]
    fn ewma_examples() {
        assert_eq!(update_estimate(10.0, 20.0, 1.0).unwrap(), 20.0);
        assert_eq!(update_estimate(10.0, 20.0, 0.0).unwrap(), 10.0);
        assert_eq!(update_estimate(10.0, 20.0, 0.5).unwrap(), 15.0);
        assert!(update_estimate(10.0, 20.0, 1.5).is_err());
        assert!(update_estimate(10.0, 20.0, -0.1).is_err());
    }

    #[test]
    fn attribute_invariants() {
        assert!(AttributeVector::new(0.0, 1.0, 1.0).is_err());
        assert!(AttributeVector::new(1.0, -1.0, 1.0).is_err());
        assert!(AttributeVector::new(1.0, 1.0, -1.0).is_err());
        assert!(AttributeVector::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(Confidence::new(1.01).is_err());
        assert!(Confidence::new(-0.01).is_err());
        assert_eq!(Confidence::new(0.25).unwrap().complement(), 0.75);
    }

    #[test]
    fn context_rejects_duplicates_and_all_zero_labor() {
        let a = AttributeVector::new(1.0, 1.0, 0.0).unwrap();
        let dup =
            [CandidateAction::new("a", ActionKind::Learning, a), CandidateAction::new("a", ActionKind::Operating, a)];
        assert!(NormalizationContext::new(&dup).is_err());
        let zero =
            [CandidateAction::new("a", ActionKind::Learning, a), CandidateAction::new("b", ActionKind::Operating, a)];
        assert!(matches!(NormalizationContext::new(&zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let n = normalize(&[2.0f32, 8.0]).unwrap();
        assert_eq!(n, vec![0.25f32, 1.0]);
    }

    proptest! {
        #[test]
        fn normalize_scale_invariant(v in prop::collection::vec(0.0f64..1e3, 1..8), c in 1e-3f64..1e3) {
            prop_assume!(v.iter().any(|x| *x > 0.0));
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let a = normalize(&v).unwrap();
            let b = normalize(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn normalize_idempotent(v in prop::collection::vec(0.0f64..1e3, 1..8)) {
            prop_assume!(v.iter().any(|x| *x > 0.0));
            let once = normalize(&v).unwrap();
            let twice = normalize(&once).unwrap();
            for (x, y) in once.iter().zip(&twice) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            prop_assert_eq!(once.iter().copied().fold(0.0, f64::max), 1.0);
        }

        #[test]
        fn ewma_stays_between(prev in -1e6f64..1e6, obs in -1e6f64..1e6, s in 0.0f64..=1.0) {
            let x = update_estimate(prev, obs, s).unwrap();
            prop_assert!(x >= prev.min(obs) && x <= prev.max(obs));
        }

        #[test]
        fn inverse_strictly_decreasing(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            prop_assume!(a < b);
            prop_assert!(inverse_attr(a).unwrap() > inverse_attr(b).unwrap());
        }
    }
}

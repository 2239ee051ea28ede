//! Finite signed measures and their calculus.
//!
//! A signed measure on a finite space is a weight per point; every event mass
//! is a finite sum. This module supplies the pieces the rest of the crate
//! leans on: the Jordan decomposition `m = m₊ − m₋` with its uniqueness
//! property, the total-variation norm, the supremum-over-events deviation of
//! two probability measures (equal to the positive-part sum on a finite
//! space), domination, Radon–Nikodym densities in their canonical version
//! (zero on the base's null set), the isometry `‖f‖₁ = ‖Φ(f)‖_TV` between
//! densities and dominated signed measures, and convex mixtures.

use crate::numeric::Scalar;
use crate::space::{Event, FiniteSpace};
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("weight count {got} does not match space size {expected}")]
    WeightCount { expected: usize, got: usize },
    #[error("non-finite weight at point {point}")]
    NonFiniteWeight { point: String },
    #[error("negative weight {weight} at point {point} in a probability measure")]
    NegativeWeight { point: String, weight: String },
    #[error("total mass {total} differs from 1")]
    NotNormalized { total: String },
    #[error("measures live on different spaces")]
    SpaceMismatch,
    #[error("no density: point {point} carries mass but the base measure is null there")]
    NoDensity { point: String },
    #[error("density is nonzero at {point}, a null point of its base")]
    NonCanonicalDensity { point: String },
    #[error("mixture weights sum to {total}, expected 1")]
    BadMixtureWeights { total: String },
    #[error("negative mixture weight {weight}")]
    NegativeMixtureWeight { weight: String },
    #[error("mixture needs at least one term")]
    EmptyMixture,
    #[error("conditioning event has zero mass")]
    NullConditioning,
}

/// A finite signed measure: one scalar weight per point of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure<S: Scalar> {
    space: Arc<FiniteSpace>,
    weights: Vec<S>,
}

impl<S: Scalar> SignedMeasure<S> {
    pub fn new(space: Arc<FiniteSpace>, weights: Vec<S>) -> Result<Self, MeasureError> {
        if weights.len() != space.len() {
            return Err(MeasureError::WeightCount {
                expected: space.len(),
                got: weights.len(),
            });
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.to_f64().is_finite() && !S::EXACT {
                return Err(MeasureError::NonFiniteWeight {
                    point: space.label(i).to_string(),
                });
            }
        }
        Ok(SignedMeasure { space, weights })
    }

    pub fn zero(space: Arc<FiniteSpace>) -> Self {
        let weights = vec![S::zero(); space.len()];
        SignedMeasure { space, weights }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> &S {
        &self.weights[index]
    }

    /// Mass of an event: the finite sum of member weights.
    pub fn mass_of(&self, event: &Event) -> S {
        assert_eq!(event.universe(), self.space.len(), "event universe mismatch");
        event
            .iter()
            .fold(S::zero(), |acc, i| acc + self.weights[i].clone())
    }

    pub fn total_mass(&self) -> S {
        self.mass_of(&self.space.full_event())
    }

    /// Points with mode-nonzero weight.
    pub fn support(&self) -> Event {
        Event::from_indices(
            self.space.len(),
            (0..self.space.len()).filter(|&i| !self.weights[i].approx_zero()),
        )
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights
            .iter()
            .all(|w| !w.is_negative() || w.approx_zero())
    }

    pub fn scaled(&self, factor: &S) -> Self {
        let weights = self
            .weights
            .iter()
            .map(|w| w.clone() * factor.clone())
            .collect();
        SignedMeasure {
            space: self.space.clone(),
            weights,
        }
    }

    /// Σ f·dm for a pointwise function given as a slice over point indices.
    pub fn integrate(&self, f: &[S]) -> S {
        assert_eq!(f.len(), self.space.len(), "function length mismatch");
        self.weights
            .iter()
            .zip(f)
            .fold(S::zero(), |acc, (w, v)| acc + w.clone() * v.clone())
    }

    /// Mode-aware pointwise equality.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.space == other.space
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.approx_eq(b))
    }

    /// Jordan decomposition: minimal split into nonnegative parts with
    /// disjoint supports, plus the total variation `|m| = m₊ + m₋`.
    pub fn jordan_decompose(&self) -> JordanParts<S> {
        let mut pos = Vec::with_capacity(self.weights.len());
        let mut neg = Vec::with_capacity(self.weights.len());
        let mut abs = Vec::with_capacity(self.weights.len());
        for w in &self.weights {
            if w.is_negative() {
                pos.push(S::zero());
                neg.push(w.clone().neg());
            } else {
                pos.push(w.clone());
                neg.push(S::zero());
            }
            abs.push(w.abs());
        }
        JordanParts {
            positive: SignedMeasure {
                space: self.space.clone(),
                weights: pos,
            },
            negative: SignedMeasure {
                space: self.space.clone(),
                weights: neg,
            },
            total_variation: SignedMeasure {
                space: self.space.clone(),
                weights: abs,
            },
        }
    }

    /// `‖m‖_TV = |m|(Ω) = Σ |weights|`.
    pub fn tv_norm(&self) -> S {
        self.weights
            .iter()
            .fold(S::zero(), |acc, w| acc + w.abs())
    }

    /// Whether `q` dominates this measure: every `q`-null point is `|m|`-null.
    pub fn dominated_by(&self, q: &ProbabilityMeasure<S>) -> Result<bool, MeasureError> {
        if self.space != *q.space() {
            return Err(MeasureError::SpaceMismatch);
        }
        Ok(self
            .weights
            .iter()
            .zip(q.weights())
            .all(|(w, qw)| !qw.approx_zero() || w.approx_zero()))
    }

    /// Radon–Nikodym derivative `dm/dq` in its canonical version.
    ///
    /// Fails with the offending point if `q` does not dominate `m`.
    pub fn radon_nikodym(&self, q: &ProbabilityMeasure<S>) -> Result<Density<S>, MeasureError> {
        if self.space != *q.space() {
            return Err(MeasureError::SpaceMismatch);
        }
        let mut values = Vec::with_capacity(self.weights.len());
        for (i, (w, qw)) in self.weights.iter().zip(q.weights()).enumerate() {
            if qw.approx_zero() {
                if !w.approx_zero() {
                    return Err(MeasureError::NoDensity {
                        point: self.space.label(i).to_string(),
                    });
                }
                values.push(S::zero());
            } else {
                values.push(w.clone() / qw.clone());
            }
        }
        Ok(Density {
            base: q.clone(),
            values,
        })
    }
}

impl<S: Scalar> Add for &SignedMeasure<S> {
    type Output = SignedMeasure<S>;
    fn add(self, rhs: Self) -> SignedMeasure<S> {
        assert_eq!(self.space, rhs.space, "space mismatch");
        let weights = self
            .weights
            .iter()
            .zip(&rhs.weights)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        SignedMeasure {
            space: self.space.clone(),
            weights,
        }
    }
}

impl<S: Scalar> Sub for &SignedMeasure<S> {
    type Output = SignedMeasure<S>;
    fn sub(self, rhs: Self) -> SignedMeasure<S> {
        assert_eq!(self.space, rhs.space, "space mismatch");
        let weights = self
            .weights
            .iter()
            .zip(&rhs.weights)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        SignedMeasure {
            space: self.space.clone(),
            weights,
        }
    }
}

impl<S: Scalar> Neg for &SignedMeasure<S> {
    type Output = SignedMeasure<S>;
    fn neg(self) -> SignedMeasure<S> {
        let weights = self.weights.iter().map(|w| w.clone().neg()).collect();
        SignedMeasure {
            space: self.space.clone(),
            weights,
        }
    }
}

/// The Jordan decomposition of a signed measure.
///
/// `positive − negative` reconstructs the original, the supports are
/// disjoint, and any other split into nonnegative measures exceeds these
/// parts by one common nonnegative measure δ.
#[derive(Debug, Clone)]
pub struct JordanParts<S: Scalar> {
    pub positive: SignedMeasure<S>,
    pub negative: SignedMeasure<S>,
    pub total_variation: SignedMeasure<S>,
}

/// A probability measure: nonnegative weights of total mass one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMeasure<S: Scalar>(SignedMeasure<S>);

impl<S: Scalar> ProbabilityMeasure<S> {
    pub fn new(measure: SignedMeasure<S>) -> Result<Self, MeasureError> {
        for (i, w) in measure.weights.iter().enumerate() {
            if w.is_negative() && !w.approx_zero() {
                return Err(MeasureError::NegativeWeight {
                    point: measure.space.label(i).to_string(),
                    weight: w.render(),
                });
            }
        }
        let total = measure.total_mass();
        if !total.approx_eq(&S::one()) {
            return Err(MeasureError::NotNormalized {
                total: total.render(),
            });
        }
        Ok(ProbabilityMeasure(measure))
    }

    pub fn from_weights(space: Arc<FiniteSpace>, weights: Vec<S>) -> Result<Self, MeasureError> {
        Self::new(SignedMeasure::new(space, weights)?)
    }

    /// Internal constructor for results of mass-preserving operations.
    pub(crate) fn new_unchecked(measure: SignedMeasure<S>) -> Self {
        debug_assert!(measure.total_mass().approx_eq(&S::one()));
        ProbabilityMeasure(measure)
    }

    pub fn uniform(space: Arc<FiniteSpace>) -> Self {
        let n = space.len();
        let w = S::one() / S::from_int(n as i64);
        ProbabilityMeasure(SignedMeasure {
            space,
            weights: vec![w; n],
        })
    }

    pub fn point_mass(space: Arc<FiniteSpace>, index: usize) -> Self {
        let mut weights = vec![S::zero(); space.len()];
        weights[index] = S::one();
        ProbabilityMeasure(SignedMeasure { space, weights })
    }

    /// Uniform distribution on an event.
    pub fn uniform_on(space: Arc<FiniteSpace>, event: &Event) -> Self {
        assert!(!event.is_empty(), "uniform_on needs a nonempty event");
        let share = S::one() / S::from_int(event.len() as i64);
        let mut weights = vec![S::zero(); space.len()];
        for i in event.iter() {
            weights[i] = share.clone();
        }
        ProbabilityMeasure(SignedMeasure { space, weights })
    }

    pub fn signed(&self) -> &SignedMeasure<S> {
        &self.0
    }

    pub fn into_signed(self) -> SignedMeasure<S> {
        self.0
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.0.space
    }

    pub fn weights(&self) -> &[S] {
        &self.0.weights
    }

    pub fn weight(&self, index: usize) -> &S {
        &self.0.weights[index]
    }

    pub fn mass_of(&self, event: &Event) -> S {
        self.0.mass_of(event)
    }

    pub fn support(&self) -> Event {
        self.0.support()
    }

    pub fn integrate(&self, f: &[S]) -> S {
        self.0.integrate(f)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.0.approx_eq(&other.0)
    }

    /// The conditional measure `p(· ∩ event) / p(event)`.
    pub fn conditioned_on(&self, event: &Event) -> Result<Self, MeasureError> {
        let mass = self.mass_of(event);
        if mass.approx_zero() {
            return Err(MeasureError::NullConditioning);
        }
        let weights = (0..self.0.weights.len())
            .map(|i| {
                if event.contains(i) {
                    self.0.weights[i].clone() / mass.clone()
                } else {
                    S::zero()
                }
            })
            .collect();
        Ok(ProbabilityMeasure(SignedMeasure {
            space: self.0.space.clone(),
            weights,
        }))
    }
}

/// Supremum over all events of `|a(B) − b(B)|`.
///
/// On a finite space this equals the sum of the positive pointwise
/// differences, and `½·‖a − b‖_TV`.
pub fn event_sup_deviation<S: Scalar>(
    a: &ProbabilityMeasure<S>,
    b: &ProbabilityMeasure<S>,
) -> Result<S, MeasureError> {
    if a.space() != b.space() {
        return Err(MeasureError::SpaceMismatch);
    }
    Ok(a.weights()
        .iter()
        .zip(b.weights())
        .fold(S::zero(), |acc, (x, y)| {
            let d = x.clone() - y.clone();
            if d.is_positive() {
                acc + d
            } else {
                acc
            }
        }))
}

/// Convex mixture of probability measures.
///
/// Weights must be nonnegative and sum to one; the result dominates every
/// term entering with positive weight.
pub fn mixture<S: Scalar>(
    terms: &[(S, ProbabilityMeasure<S>)],
) -> Result<ProbabilityMeasure<S>, MeasureError> {
    let (first, rest) = terms.split_first().ok_or(MeasureError::EmptyMixture)?;
    let mut total_weight = S::zero();
    let mut acc = SignedMeasure::zero(first.1.space().clone());
    for (w, m) in terms {
        if m.space() != first.1.space() {
            return Err(MeasureError::SpaceMismatch);
        }
        if w.is_negative() && !w.approx_zero() {
            return Err(MeasureError::NegativeMixtureWeight { weight: w.render() });
        }
        total_weight = total_weight + w.clone();
        acc = &acc + &m.signed().scaled(w);
    }
    let _ = rest;
    if !total_weight.approx_eq(&S::one()) {
        return Err(MeasureError::BadMixtureWeights {
            total: total_weight.render(),
        });
    }
    Ok(ProbabilityMeasure::new_unchecked(acc))
}

/// A Radon–Nikodym density against a probability base, in the canonical
/// version that vanishes on the base's null set.
#[derive(Debug, Clone, PartialEq)]
pub struct Density<S: Scalar> {
    base: ProbabilityMeasure<S>,
    values: Vec<S>,
}

impl<S: Scalar> Density<S> {
    /// Build a density, rejecting values that are nonzero on base-null points.
    pub fn new(base: ProbabilityMeasure<S>, values: Vec<S>) -> Result<Self, MeasureError> {
        if values.len() != base.space().len() {
            return Err(MeasureError::WeightCount {
                expected: base.space().len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if base.weight(i).approx_zero() && !v.approx_zero() {
                return Err(MeasureError::NonCanonicalDensity {
                    point: base.space().label(i).to_string(),
                });
            }
        }
        Ok(Density { base, values })
    }

    /// Build a density, forcing zero on base-null points.
    pub fn canonical(base: ProbabilityMeasure<S>, mut values: Vec<S>) -> Self {
        assert_eq!(values.len(), base.space().len());
        for (i, v) in values.iter_mut().enumerate() {
            if base.weight(i).approx_zero() {
                *v = S::zero();
            }
        }
        Density { base, values }
    }

    pub fn constant_one(base: ProbabilityMeasure<S>) -> Self {
        let values = (0..base.space().len())
            .map(|i| {
                if base.weight(i).approx_zero() {
                    S::zero()
                } else {
                    S::one()
                }
            })
            .collect();
        Density { base, values }
    }

    pub fn base(&self) -> &ProbabilityMeasure<S> {
        &self.base
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn value(&self, index: usize) -> &S {
        &self.values[index]
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        self.base.space()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values
            .iter()
            .all(|v| !v.is_negative() || v.approx_zero())
    }

    /// `∫_B f dq`.
    pub fn integral_over(&self, event: &Event) -> S {
        event.iter().fold(S::zero(), |acc, i| {
            acc + self.values[i].clone() * self.base.weight(i).clone()
        })
    }

    /// `‖f‖₁ = ∫ |f| dq`.
    pub fn l1_norm(&self) -> S {
        self.values
            .iter()
            .zip(self.base.weights())
            .fold(S::zero(), |acc, (v, q)| acc + v.abs() * q.clone())
    }

    /// `∫_B |f| dq` restricted to an event.
    pub fn l1_norm_over(&self, event: &Event) -> S {
        event.iter().fold(S::zero(), |acc, i| {
            acc + self.values[i].abs() * self.base.weight(i).clone()
        })
    }

    /// The induced signed measure `Φ(f)(B) = ∫_B f dq`.
    pub fn to_signed_measure(&self) -> SignedMeasure<S> {
        let weights = self
            .values
            .iter()
            .zip(self.base.weights())
            .map(|(v, q)| v.clone() * q.clone())
            .collect();
        SignedMeasure {
            space: self.base.space().clone(),
            weights,
        }
    }

    /// Pointwise difference of two densities over the same base.
    pub fn sub(&self, other: &Density<S>) -> Density<S> {
        assert!(
            self.base.approx_eq(&other.base),
            "densities built over different bases"
        );
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Density {
            base: self.base.clone(),
            values,
        }
    }

    pub fn approx_eq(&self, other: &Density<S>) -> bool {
        self.base.approx_eq(&other.base)
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.approx_eq(b))
    }
}

/// Evaluate both sides of the isometry `‖f‖₁ = ‖Φ(f)‖_TV`.
///
/// Returns the pair `(‖f‖₁, ‖Φ(f)‖_TV)`; the two components must agree.
pub fn phi_isometry_check<S: Scalar>(f: &Density<S>) -> (S, S) {
    (f.l1_norm(), f.to_signed_measure().tv_norm())
}

//! Entropy rates of shift sources, in bits per symbol.
//!
//! For a Markov class with injective emission the rate has the closed form
//! `−Σ_s π(s) Σ_t p(s,t)·log₂ p(s,t)`. A non-injective emission map has no
//! closed form; those classes get certified bracketing bounds instead of a
//! point estimate: the conditional block entropy `H(X_L | X_1…X_{L−1})`
//! decreases to the rate from above, and conditioning additionally on the
//! first hidden state approaches it from below. The source-level rate is the
//! weight-average of the per-class rates.

use super::{marginal, MarkovSource, SourceDecomposition, SourceError};
use crate::numeric::Scalar;

/// Either an exact rate or certified bounds at a stated depth.
#[derive(Debug, Clone, PartialEq)]
pub enum RateEstimate {
    Exact(f64),
    Bounds { lower: f64, upper: f64, depth: usize },
}

impl RateEstimate {
    pub fn lower(&self) -> f64 {
        match self {
            RateEstimate::Exact(r) => *r,
            RateEstimate::Bounds { lower, .. } => *lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            RateEstimate::Exact(r) => *r,
            RateEstimate::Bounds { upper, .. } => *upper,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, RateEstimate::Exact(_))
    }
}

/// Rate of one recurrent class.
#[derive(Debug, Clone)]
pub struct ClassRate {
    pub states: Vec<usize>,
    pub weight: f64,
    pub rate: RateEstimate,
}

/// Per-class rates and their weight-average.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub per_class: Vec<ClassRate>,
    pub average: RateEstimate,
}

/// Block entropy `H(X_1…X_L)` in bits.
pub fn block_entropy<S: Scalar>(
    src: &MarkovSource<S>,
    depth: usize,
    budget: u64,
) -> Result<f64, SourceError> {
    Ok(marginal(src, depth, budget)?.entropy_bits())
}

/// Per-class entropy rates and their weighted average.
///
/// Classes whose emission is injective on the class get the exact Markov
/// rate; others get `[H(X_L|X_…, S_1), H(X_L|X_…)]` bounds evaluated at
/// `depth`, flagged as bounds. The average is exact only if every class is.
pub fn entropy_rate<S: Scalar>(
    src: &MarkovSource<S>,
    decomposition: &SourceDecomposition<S>,
    depth: usize,
    budget: u64,
) -> Result<EntropyReport, SourceError> {
    assert!(depth >= 1, "bounds need depth >= 1");
    let mut per_class = Vec::with_capacity(decomposition.classes.len());
    for class in &decomposition.classes {
        let rate = if src.emission_injective_on(&class.states) {
            RateEstimate::Exact(markov_rate(src, &class.states, &class.stationary))
        } else {
            hidden_bounds(src, &class.states, &class.stationary, depth, budget)?
        };
        per_class.push(ClassRate {
            states: class.states.clone(),
            weight: class.weight.to_f64(),
            rate,
        });
    }

    let average = if per_class.iter().all(|c| c.rate.is_exact()) {
        RateEstimate::Exact(
            per_class
                .iter()
                .map(|c| c.weight * c.rate.lower())
                .sum(),
        )
    } else {
        RateEstimate::Bounds {
            lower: per_class.iter().map(|c| c.weight * c.rate.lower()).sum(),
            upper: per_class.iter().map(|c| c.weight * c.rate.upper()).sum(),
            depth,
        }
    };
    Ok(EntropyReport { per_class, average })
}

/// `−Σ_s π(s) Σ_t p(s,t) log₂ p(s,t)` over one class.
fn markov_rate<S: Scalar>(src: &MarkovSource<S>, states: &[usize], stationary: &[S]) -> f64 {
    let mut rate = 0.0;
    for (&s, pi) in states.iter().zip(stationary) {
        let pi = pi.to_f64();
        if pi <= 0.0 {
            continue;
        }
        for &t in states {
            let p = src.transition()[s][t].to_f64();
            if p > 0.0 {
                rate -= pi * p * p.log2();
            }
        }
    }
    rate
}

/// Bracketing bounds for a class with lossy emission:
/// `H(X_L | X_1…X_{L−1}, S_1) ≤ rate ≤ H(X_L | X_1…X_{L−1})`, both computed
/// from block entropies of the class restricted to itself and started at its
/// stationary law.
fn hidden_bounds<S: Scalar>(
    src: &MarkovSource<S>,
    states: &[usize],
    stationary: &[S],
    depth: usize,
    budget: u64,
) -> Result<RateEstimate, SourceError> {
    let restricted = src.restricted_to(states, stationary.to_vec());
    let h = |k: usize| -> Result<f64, SourceError> {
        if k == 0 {
            Ok(0.0)
        } else {
            block_entropy(&restricted, k, budget)
        }
    };
    let upper = h(depth)? - h(depth - 1)?;

    let mut lower = 0.0;
    for (i, pi) in stationary.iter().enumerate() {
        let weight = pi.to_f64();
        if weight <= 0.0 {
            continue;
        }
        let mut delta = vec![S::zero(); states.len()];
        delta[i] = S::one();
        let pinned = restricted
            .with_initial(delta)
            .expect("point mass is a valid initial distribution");
        let h_pinned = |k: usize| -> Result<f64, SourceError> {
            if k == 0 {
                Ok(0.0)
            } else {
                block_entropy(&pinned, k, budget)
            }
        };
        lower += weight * (h_pinned(depth)? - h_pinned(depth - 1)?);
    }
    Ok(RateEstimate::Bounds {
        lower,
        upper,
        depth,
    })
}

//! One-sided finite-alphabet shift sources.
//!
//! A [`MarkovSource`] is a finite-state chain (transition matrix plus initial
//! distribution) with an optional deterministic emission map, read as a
//! probability measure on one-sided symbol sequences through its cylinder
//! marginals. The shift acts by dropping the first symbol, so the ergodic
//! components of the source correspond to the closed communicating classes
//! of the chain: [`recurrent_classes`] finds them, solves the absorption
//! probabilities from the initial distribution by exact linear algebra, and
//! attaches each class's stationary distribution — solved directly rather
//! than by power iteration, which fails for periodic classes. The Cesàro
//! limit of the shifted source is then [`stationary_mean_source`].
//!
//! Two-sided sources are out of scope; the stationary-case reduction known
//! for them is not needed here.

mod entropy;
mod sampling;

pub use entropy::{block_entropy, entropy_rate, ClassRate, EntropyReport, RateEstimate};
pub use sampling::{empirical_frequency, sample_path, sample_paths};

use crate::numeric::Scalar;

/// Default ceiling on `|alphabet|^depth` for cylinder enumeration.
pub const DEFAULT_CYLINDER_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SourceError {
    #[error("source needs at least one state")]
    Empty,
    #[error("duplicate state label {0:?}")]
    DuplicateState(String),
    #[error("transition matrix row for state {state} has {got} entries, expected {expected}")]
    BadRowLength {
        state: String,
        expected: usize,
        got: usize,
    },
    #[error("initial distribution has {got} entries, expected {expected}")]
    BadInitialLength { expected: usize, got: usize },
    #[error("transition row for state {state} sums to {total}, expected 1")]
    NonStochasticRow { state: String, total: String },
    #[error("negative transition probability from {state} to {target}")]
    NegativeTransition { state: String, target: String },
    #[error("initial distribution sums to {total}, expected 1")]
    BadInitialSum { total: String },
    #[error("negative initial probability at state {state}")]
    NegativeInitial { state: String },
    #[error("emission map has {got} entries, expected one per state ({expected})")]
    EmissionLength { expected: usize, got: usize },
    #[error("emission of state {state} points at symbol index {symbol}, outside the alphabet")]
    EmissionOutOfRange { state: String, symbol: usize },
    #[error("emission alphabet must not be empty")]
    EmptyAlphabet,
    #[error(
        "cylinder budget exceeded: depth {requested} needs {needed} strings, budget is {budget}; \
         deepest depth within budget is {max_depth}"
    )]
    BudgetExceeded {
        requested: usize,
        needed: u128,
        budget: u64,
        max_depth: usize,
    },
    #[error("pattern symbol index {symbol} outside alphabet of size {alphabet}")]
    BadPatternSymbol { symbol: usize, alphabet: usize },
}

/// A finite-alphabet one-sided shift source: a Markov chain with an optional
/// deterministic emission map (identity when absent).
#[derive(Debug, Clone)]
pub struct MarkovSource<S: Scalar> {
    states: Vec<String>,
    transition: Vec<Vec<S>>,
    initial: Vec<S>,
    symbols: Vec<String>,
    /// Symbol emitted by each state.
    emission: Vec<usize>,
    /// Whether an explicit (possibly lossy) emission map was supplied.
    hidden: bool,
}

impl<S: Scalar> MarkovSource<S> {
    /// A plain Markov source: states are the emitted symbols.
    pub fn new(
        states: Vec<String>,
        transition: Vec<Vec<S>>,
        initial: Vec<S>,
    ) -> Result<Self, SourceError> {
        let symbols = states.clone();
        let emission = (0..states.len()).collect();
        Self::build(states, transition, initial, symbols, emission, false)
    }

    /// A function-of-Markov (hidden-Markov) source with a deterministic
    /// emission map `state index → symbol index`.
    pub fn with_emission(
        states: Vec<String>,
        transition: Vec<Vec<S>>,
        initial: Vec<S>,
        symbols: Vec<String>,
        emission: Vec<usize>,
    ) -> Result<Self, SourceError> {
        Self::build(states, transition, initial, symbols, emission, true)
    }

    fn build(
        states: Vec<String>,
        transition: Vec<Vec<S>>,
        initial: Vec<S>,
        symbols: Vec<String>,
        emission: Vec<usize>,
        hidden: bool,
    ) -> Result<Self, SourceError> {
        let n = states.len();
        if n == 0 {
            return Err(SourceError::Empty);
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(SourceError::DuplicateState(s.clone()));
            }
        }
        if symbols.is_empty() {
            return Err(SourceError::EmptyAlphabet);
        }
        if transition.len() != n {
            return Err(SourceError::BadRowLength {
                state: states[transition.len().min(n - 1)].clone(),
                expected: n,
                got: transition.len(),
            });
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != n {
                return Err(SourceError::BadRowLength {
                    state: states[i].clone(),
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, w) in row.iter().enumerate() {
                if w.is_negative() && !w.approx_zero() {
                    return Err(SourceError::NegativeTransition {
                        state: states[i].clone(),
                        target: states[j].clone(),
                    });
                }
            }
            let total = row.iter().fold(S::zero(), |acc, w| acc + w.clone());
            if !total.approx_eq(&S::one()) {
                return Err(SourceError::NonStochasticRow {
                    state: states[i].clone(),
                    total: total.render(),
                });
            }
        }
        if initial.len() != n {
            return Err(SourceError::BadInitialLength {
                expected: n,
                got: initial.len(),
            });
        }
        for (i, w) in initial.iter().enumerate() {
            if w.is_negative() && !w.approx_zero() {
                return Err(SourceError::NegativeInitial {
                    state: states[i].clone(),
                });
            }
        }
        let total = initial.iter().fold(S::zero(), |acc, w| acc + w.clone());
        if !total.approx_eq(&S::one()) {
            return Err(SourceError::BadInitialSum {
                total: total.render(),
            });
        }
        if emission.len() != n {
            return Err(SourceError::EmissionLength {
                expected: n,
                got: emission.len(),
            });
        }
        for (i, &sym) in emission.iter().enumerate() {
            if sym >= symbols.len() {
                return Err(SourceError::EmissionOutOfRange {
                    state: states[i].clone(),
                    symbol: sym,
                });
            }
        }
        Ok(MarkovSource {
            states,
            transition,
            initial,
            symbols,
            emission,
            hidden,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.symbols.len()
    }

    pub fn transition(&self) -> &[Vec<S>] {
        &self.transition
    }

    pub fn initial(&self) -> &[S] {
        &self.initial
    }

    pub fn emission(&self) -> &[usize] {
        &self.emission
    }

    pub fn is_hidden(&self) -> bool {
        self.hidden
    }

    /// Whether the emission map separates the given states.
    pub fn emission_injective_on(&self, states: &[usize]) -> bool {
        for (i, &a) in states.iter().enumerate() {
            for &b in &states[i + 1..] {
                if self.emission[a] == self.emission[b] {
                    return false;
                }
            }
        }
        true
    }

    /// Advance a state distribution one step: `v ↦ v·P`.
    pub(crate) fn step(&self, v: &[S]) -> Vec<S> {
        let n = self.state_count();
        let mut out = vec![S::zero(); n];
        for (s, w) in v.iter().enumerate() {
            if w.approx_zero() {
                continue;
            }
            for (t, p) in self.transition[s].iter().enumerate() {
                out[t] = out[t].clone() + w.clone() * p.clone();
            }
        }
        out
    }

    /// A copy with a different initial distribution.
    pub fn with_initial(&self, initial: Vec<S>) -> Result<Self, SourceError> {
        Self::build(
            self.states.clone(),
            self.transition.clone(),
            initial,
            self.symbols.clone(),
            self.emission.clone(),
            self.hidden,
        )
    }

    /// The source restricted to a closed class, started at `initial` (given
    /// over the class states, in their listed order).
    pub(crate) fn restricted_to(&self, class: &[usize], initial: Vec<S>) -> Self {
        let states = class.iter().map(|&s| self.states[s].clone()).collect();
        let transition = class
            .iter()
            .map(|&s| class.iter().map(|&t| self.transition[s][t].clone()).collect())
            .collect();
        let emission = class.iter().map(|&s| self.emission[s]).collect();
        MarkovSource {
            states,
            transition,
            initial,
            symbols: self.symbols.clone(),
            emission,
            hidden: self.hidden,
        }
    }
}

/// Exact distribution over all symbol strings of one depth.
#[derive(Debug, Clone)]
pub struct CylinderMarginal<S: Scalar> {
    depth: usize,
    symbols: Vec<String>,
    /// Probability per string, indexed base-`|alphabet|`, first symbol most
    /// significant.
    dist: Vec<S>,
}

impl<S: Scalar> CylinderMarginal<S> {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn dist(&self) -> &[S] {
        &self.dist
    }

    pub fn index_of(&self, pattern: &[usize]) -> usize {
        assert_eq!(pattern.len(), self.depth, "pattern length mismatch");
        pattern
            .iter()
            .fold(0usize, |acc, &sym| acc * self.symbols.len() + sym)
    }

    pub fn pattern_of(&self, mut index: usize) -> Vec<usize> {
        let mut pattern = vec![0usize; self.depth];
        for slot in pattern.iter_mut().rev() {
            *slot = index % self.symbols.len();
            index /= self.symbols.len();
        }
        pattern
    }

    pub fn prob(&self, pattern: &[usize]) -> S {
        self.dist[self.index_of(pattern)].clone()
    }

    pub fn total(&self) -> S {
        self.dist.iter().fold(S::zero(), |acc, p| acc + p.clone())
    }

    /// `−Σ p·log₂ p` over the strings, in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.dist
            .iter()
            .map(|p| p.to_f64())
            .filter(|p| *p > 0.0)
            .map(|p| -p * p.log2())
            .sum()
    }

    /// Sum out the last symbol, yielding the depth-`L−1` marginal.
    pub fn project_last(&self) -> CylinderMarginal<S> {
        assert!(self.depth >= 2, "cannot project a depth-1 marginal");
        let a = self.symbols.len();
        let dist = self
            .dist
            .chunks(a)
            .map(|chunk| chunk.iter().fold(S::zero(), |acc, p| acc + p.clone()))
            .collect();
        CylinderMarginal {
            depth: self.depth - 1,
            symbols: self.symbols.clone(),
            dist,
        }
    }
}

fn check_budget(alphabet: usize, depth: usize, budget: u64) -> Result<usize, SourceError> {
    assert!(depth >= 1, "marginals need depth >= 1");
    let needed = (alphabet as u128).pow(depth as u32);
    if needed <= budget as u128 {
        return Ok(needed as usize);
    }
    let mut max_depth = 0usize;
    let mut size: u128 = 1;
    loop {
        size *= alphabet as u128;
        if size > budget as u128 {
            break;
        }
        max_depth += 1;
    }
    Err(SourceError::BudgetExceeded {
        requested: depth,
        needed,
        budget,
        max_depth,
    })
}

/// Exact depth-`L` cylinder marginal by chain-rule enumeration.
pub fn marginal<S: Scalar>(
    src: &MarkovSource<S>,
    depth: usize,
    budget: u64,
) -> Result<CylinderMarginal<S>, SourceError> {
    let strings = check_budget(src.alphabet_size(), depth, budget)?;
    let mut dist = vec![S::zero(); strings];
    descend(src, &src.initial.to_vec(), depth, 0, &mut dist);
    Ok(CylinderMarginal {
        depth,
        symbols: src.symbols.clone(),
        dist,
    })
}

/// DFS over symbol prefixes carrying the joint state distribution.
/// `dist_before` is the distribution of the current state before its symbol
/// is constrained.
fn descend<S: Scalar>(
    src: &MarkovSource<S>,
    dist_before: &[S],
    remaining: usize,
    prefix_index: usize,
    out: &mut [S],
) {
    let a = src.alphabet_size();
    for sym in 0..a {
        let masked: Vec<S> = dist_before
            .iter()
            .enumerate()
            .map(|(s, w)| {
                if src.emission[s] == sym {
                    w.clone()
                } else {
                    S::zero()
                }
            })
            .collect();
        let index = prefix_index * a + sym;
        if masked.iter().all(|w| w.approx_zero()) {
            continue; // whole subtree carries no mass
        }
        if remaining == 1 {
            out[index] = masked.iter().fold(S::zero(), |acc, w| acc + w.clone());
        } else {
            descend(src, &src.step(&masked), remaining - 1, index, out);
        }
    }
}

/// `P(X_i … X_{i+L−1} = pattern)`: propagate the initial distribution `i`
/// steps, then apply the chain rule along the pattern.
pub fn shifted_cylinder_prob<S: Scalar>(
    src: &MarkovSource<S>,
    pattern: &[usize],
    shift: u64,
) -> Result<S, SourceError> {
    for &sym in pattern {
        if sym >= src.alphabet_size() {
            return Err(SourceError::BadPatternSymbol {
                symbol: sym,
                alphabet: src.alphabet_size(),
            });
        }
    }
    let mut dist = src.initial.to_vec();
    for _ in 0..shift {
        dist = src.step(&dist);
    }
    for (pos, &sym) in pattern.iter().enumerate() {
        for (s, w) in dist.iter_mut().enumerate() {
            if src.emission[s] != sym {
                *w = S::zero();
            }
        }
        if pos + 1 < pattern.len() {
            dist = src.step(&dist);
        }
    }
    Ok(dist.into_iter().fold(S::zero(), |acc, w| acc + w))
}

/// One closed communicating class with its absorption weight and stationary
/// distribution.
#[derive(Debug, Clone)]
pub struct RecurrentClass<S: Scalar> {
    /// Member state indices, ascending.
    pub states: Vec<usize>,
    /// Probability of ending up in this class from the initial distribution.
    pub weight: S,
    /// Stationary distribution of the restricted chain, aligned with
    /// `states`. Cesàro-valid even for periodic classes.
    pub stationary: Vec<S>,
}

/// Recurrent classes, their weights and stationary laws, plus the transient
/// states.
#[derive(Debug, Clone)]
pub struct SourceDecomposition<S: Scalar> {
    pub classes: Vec<RecurrentClass<S>>,
    pub transient: Vec<usize>,
}

/// Find the closed communicating classes, solve the absorption probabilities
/// from the initial distribution, and solve each class's stationary
/// distribution — all by exact linear algebra.
pub fn recurrent_classes<S: Scalar>(src: &MarkovSource<S>) -> SourceDecomposition<S> {
    let n = src.state_count();

    // Reachability closure over the support graph.
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|t| s == t || !src.transition[s][t].approx_zero())
                .collect()
        })
        .collect();
    for k in 0..n {
        for s in 0..n {
            if reach[s][k] {
                #[allow(clippy::needless_range_loop)]
                for t in 0..n {
                    if reach[k][t] {
                        reach[s][t] = true;
                    }
                }
            }
        }
    }

    // Communicating classes, then keep the closed ones.
    let mut class_of = vec![usize::MAX; n];
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if class_of[s] != usize::MAX {
            continue;
        }
        let id = sccs.len();
        let members: Vec<usize> = (s..n).filter(|&t| reach[s][t] && reach[t][s]).collect();
        for &m in &members {
            class_of[m] = id;
        }
        sccs.push(members);
    }
    let mut recurrent: Vec<Vec<usize>> = Vec::new();
    let mut transient: Vec<usize> = Vec::new();
    for scc in &sccs {
        let closed = scc.iter().all(|&s| {
            (0..n).all(|t| src.transition[s][t].approx_zero() || class_of[t] == class_of[s])
        });
        if closed {
            recurrent.push(scc.clone());
        } else {
            transient.extend(scc.iter().copied());
        }
    }
    transient.sort_unstable();

    // Absorption probabilities from the transient part:
    // (I − P_TT)·a(·, c) = P_T→c·1.
    let t_index: Vec<usize> = transient.clone();
    let t_count = t_index.len();
    let mut absorb = vec![vec![S::zero(); recurrent.len()]; t_count];
    if t_count > 0 {
        let matrix: Vec<Vec<S>> = (0..t_count)
            .map(|i| {
                (0..t_count)
                    .map(|j| {
                        let p = src.transition[t_index[i]][t_index[j]].clone();
                        if i == j {
                            S::one() - p
                        } else {
                            -p
                        }
                    })
                    .collect()
            })
            .collect();
        for (c, class) in recurrent.iter().enumerate() {
            let rhs: Vec<S> = (0..t_count)
                .map(|i| {
                    class.iter().fold(S::zero(), |acc, &r| {
                        acc + src.transition[t_index[i]][r].clone()
                    })
                })
                .collect();
            let solution = solve_linear(matrix.clone(), rhs)
                .expect("every transient state reaches a recurrent class");
            for (i, value) in solution.into_iter().enumerate() {
                absorb[i][c] = value;
            }
        }
    }

    let classes = recurrent
        .iter()
        .enumerate()
        .map(|(c, class)| {
            let mut weight = class
                .iter()
                .fold(S::zero(), |acc, &s| acc + src.initial[s].clone());
            for (i, &t) in t_index.iter().enumerate() {
                weight = weight + src.initial[t].clone() * absorb[i][c].clone();
            }
            RecurrentClass {
                states: class.clone(),
                weight,
                stationary: class_stationary(src, class),
            }
        })
        .collect();

    SourceDecomposition { classes, transient }
}

/// Stationary distribution of the chain restricted to a closed class:
/// solve `π(P_C − I) = 0` with the normalisation `Σπ = 1`. Unique for an
/// irreducible class regardless of periodicity.
#[allow(clippy::needless_range_loop)]
fn class_stationary<S: Scalar>(src: &MarkovSource<S>, class: &[usize]) -> Vec<S> {
    let m = class.len();
    let mut matrix = vec![vec![S::zero(); m]; m];
    let mut rhs = vec![S::zero(); m];
    // Rows 0..m−1: columns of (P_C − I); the dropped row is dependent.
    for i in 0..m.saturating_sub(1) {
        for j in 0..m {
            let p = src.transition[class[j]][class[i]].clone();
            matrix[i][j] = if i == j { p - S::one() } else { p };
        }
    }
    for j in 0..m {
        matrix[m - 1][j] = S::one();
    }
    rhs[m - 1] = S::one();
    solve_linear(matrix, rhs).expect("irreducible class has a unique stationary law")
}

/// Replace the initial distribution by its exact Cesàro limit
/// `Σ_c weight_c · π_c`; the resulting source is shift-stationary at every
/// depth.
pub fn stationary_mean_source<S: Scalar>(src: &MarkovSource<S>) -> MarkovSource<S> {
    let decomposition = recurrent_classes(src);
    let mut initial = vec![S::zero(); src.state_count()];
    for class in &decomposition.classes {
        for (&s, pi) in class.states.iter().zip(&class.stationary) {
            initial[s] = initial[s].clone() + class.weight.clone() * pi.clone();
        }
    }
    src.with_initial(initial)
        .expect("convex combination of stationary laws")
}

/// Gaussian elimination with partial pivoting; `None` for a singular system.
#[allow(clippy::needless_range_loop)]
fn solve_linear<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r1, &r2| {
            a[r1][col]
                .abs()
                .partial_cmp(&a[r2][col].abs())
                .expect("weights are ordered")
        })?;
        if a[pivot][col].approx_zero() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let lead = a[col][col].clone();
        for j in col..n {
            a[col][j] = a[col][j].clone() / lead.clone();
        }
        b[col] = b[col].clone() / lead;
        for row in 0..n {
            if row == col || a[row][col].approx_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for j in col..n {
                a[row][j] = a[row][j].clone() - factor.clone() * a[col][j].clone();
            }
            b[row] = b[row].clone() - factor * b[col].clone();
        }
    }
    Some(b)
}

//! Ergodic decomposition of a measure under a finite endomap.
//!
//! The regular conditional probability of `P` given the invariant σ-algebra
//! is, on a finite space, just conditioning on the invariant atoms: each atom
//! `A` with `P(A) > 0` carries the component measure `P_ω = P(·∩A)/P(A)`.
//! [`decompose`] certifies what the decomposition theorem asserts about these
//! components — each is ergodic and asymptotically mean stationary with
//! stationary mean `P̄_ω` — by running the per-component contraction engine
//! and comparing its iterative limit against the closed-form mean density
//! ("f*₍ω₎ = f̄₍ω₎"). Atoms of zero mass are reported as residual and carry
//! no invented conditional: versions of a conditional probability are free on
//! null sets, so nothing is asserted there.
//!
//! [`verify_decomposition`] checks the three decomposition properties (orbit
//! constancy, mixture reconstruction over every event, and the integral
//! identity on a function basis), and [`conditional_identity_suite`] checks the
//! supporting identities that tie global and per-component objects together:
//! conditionals of pushforwards, the closed form of the conditional
//! dominating measure, the restriction behaviour of the densities `fₙ`, and
//! the invariant-integral identity.

use crate::dynamics::{EndoMap, InvariantPartition};
use crate::krengel::{build_dominating, periodic_tail_average, ContractionState};
use crate::measure::{event_sup_deviation, ProbabilityMeasure};
use crate::numeric::Scalar;
use crate::rng::SplitMix64;
use crate::space::{Event, MAX_BRUTE_FORCE_POINTS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecompositionError {
    #[error("report does not belong to this system: {0}")]
    ReportMismatch(String),
}

/// One ergodic component: an invariant atom with its conditional measure,
/// stationary mean, conditional dominating measure and ergodicity
/// certificate.
#[derive(Debug, Clone)]
pub struct ErgodicComponent<S: Scalar> {
    pub atom: Event,
    /// `P(atom)`; strictly positive for every emitted component.
    pub weight: S,
    /// `P_ω = P(·∩atom)/P(atom)`.
    pub p_omega: ProbabilityMeasure<S>,
    /// Stationary mean of `P_ω`.
    pub p_bar_omega: ProbabilityMeasure<S>,
    /// `Q_ω`, the dominating measure built from `P_ω`.
    pub q_omega: ProbabilityMeasure<S>,
    /// Both certificates: one cycle per atom with uniform mean mass, and the
    /// 0/1 law over invariant events.
    pub ergodic: bool,
}

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckResult<S: Scalar> {
    pub name: String,
    pub passed: bool,
    /// Largest observed deviation (0 for structural checks that pass).
    pub deviation: S,
}

impl<S: Scalar> CheckResult<S> {
    fn exact(name: impl Into<String>, deviation: S) -> Self {
        CheckResult {
            name: name.into(),
            passed: deviation.approx_zero(),
            deviation,
        }
    }

    fn boolean(name: impl Into<String>, passed: bool) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            deviation: if passed { S::zero() } else { S::one() },
        }
    }
}

/// The full decomposition: components, the invariant carrier `E` of full
/// mass, residual (zero-mass) atoms, and the built-in certification checks.
#[derive(Debug, Clone)]
pub struct DecompositionReport<S: Scalar> {
    pub components: Vec<ErgodicComponent<S>>,
    /// Union of the positive-mass atoms; `P(E) = 1`.
    pub support_event: Event,
    /// Union of the zero-mass atoms.
    pub residual: Event,
    pub checks: Vec<CheckResult<S>>,
}

impl<S: Scalar> DecompositionReport<S> {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Conditional measures of `p` given the invariant atoms: pairs
/// `(atom, p(·∩atom)/p(atom))` for atoms of positive mass, plus the list of
/// residual (zero-mass) atoms, which get no measure.
pub fn conditional_measures<S: Scalar>(
    p: &ProbabilityMeasure<S>,
    partition: &InvariantPartition,
) -> (Vec<(Event, ProbabilityMeasure<S>)>, Vec<Event>) {
    let mut conditionals = Vec::new();
    let mut residual = Vec::new();
    for atom in partition.atoms() {
        if p.mass_of(atom).approx_zero() {
            residual.push(*atom);
        } else {
            let conditional = p.conditioned_on(atom).expect("positive mass");
            conditionals.push((*atom, conditional));
        }
    }
    (conditionals, residual)
}

/// Decompose `p` into ergodic components along the invariant atoms of `map`,
/// certifying each component.
pub fn decompose<S: Scalar>(p: &ProbabilityMeasure<S>, map: &EndoMap) -> DecompositionReport<S> {
    assert_eq!(p.space(), map.space(), "space mismatch");
    let universe = map.space().len();
    let partition = map.invariant_atoms();
    let orbits = map.orbit_structure();
    let (conditionals, residual_atoms) = conditional_measures(p, &partition);

    let invariant_events = if partition.atoms().len() <= 16 {
        Some(partition.invariant_events(universe))
    } else {
        None
    };

    let mut components = Vec::with_capacity(conditionals.len());
    let mut checks: Vec<CheckResult<S>> = Vec::new();
    for (index, (atom, p_omega)) in conditionals.into_iter().enumerate() {
        let weight = p.mass_of(&atom);
        let p_bar_omega = map.stationary_mean(&p_omega);
        let q_omega = build_dominating(&p_omega, map);
        let state = ContractionState::new(q_omega.clone(), map.clone())
            .expect("component lives on the same space");

        // Step 2/3: the iterative contraction limit must equal the
        // closed-form mean density dP̄_ω/dQ_ω on supp Q_ω.
        let f1 = p_omega
            .signed()
            .radon_nikodym(&q_omega)
            .expect("Q_ω dominates P_ω");
        let f_star = periodic_tail_average(&f1, &state).expect("base matches");
        let f_bar = p_bar_omega
            .signed()
            .radon_nikodym(&q_omega)
            .expect("Q_ω dominates the mean");
        let step3_dev = f_star
            .values()
            .iter()
            .zip(f_bar.values())
            .fold(S::zero(), |acc, (a, b)| {
                let d = (a.clone() - b.clone()).abs();
                if d > acc {
                    d
                } else {
                    acc
                }
            });
        checks.push(CheckResult::exact(
            format!("component {index}: contraction limit equals mean density"),
            step3_dev,
        ));

        // Structural ergodicity: the atom holds exactly one cycle and the
        // mean is uniform on it.
        let cycles_inside: Vec<usize> = (0..orbits.cycles.len())
            .filter(|&id| orbits.cycle_event(id, universe).is_subset_of(&atom))
            .collect();
        let structural = cycles_inside.len() == 1 && {
            let cycle = orbits.cycle_event(cycles_inside[0], universe);
            p_bar_omega.approx_eq(&ProbabilityMeasure::uniform_on(
                map.space().clone(),
                &cycle,
            ))
        };

        // 0/1 law over invariant events (all atom unions when enumerable,
        // single atoms otherwise — sufficient by additivity).
        let zero_one = match &invariant_events {
            Some(events) => events.iter().all(|event| {
                let mass = p_bar_omega.mass_of(event);
                mass.approx_zero() || mass.approx_eq(&S::one())
            }),
            None => partition.atoms().iter().all(|event| {
                let mass = p_bar_omega.mass_of(event);
                mass.approx_zero() || mass.approx_eq(&S::one())
            }),
        };
        let ergodic = structural && zero_one;
        checks.push(CheckResult::boolean(
            format!("component {index}: ergodic (structural and 0/1 law)"),
            ergodic,
        ));

        // AMS certificate: n·dev stays under the orbit-derived constant.
        let mean_bound = map.deviation_bound(&p_omega);
        let mut ams_excess = S::zero();
        for n in crate::krengel::default_schedule() {
            let avg = map.cesaro_average(&p_omega, n);
            let dev = event_sup_deviation(&avg, &p_bar_omega).expect("same space");
            let scaled = dev * S::from_int(n as i64);
            if scaled > mean_bound {
                let excess = scaled - mean_bound.clone();
                if excess > ams_excess {
                    ams_excess = excess;
                }
            }
        }
        checks.push(CheckResult::exact(
            format!("component {index}: AMS with O(1/n) orbit bound"),
            ams_excess,
        ));

        components.push(ErgodicComponent {
            atom,
            weight,
            p_omega,
            p_bar_omega,
            q_omega,
            ergodic,
        });
    }

    let support_event = components
        .iter()
        .fold(Event::empty(universe), |acc, c| acc.union(&c.atom));
    let residual = residual_atoms
        .iter()
        .fold(Event::empty(universe), |acc, a| acc.union(a));

    let weight_sum = components
        .iter()
        .fold(S::zero(), |acc, c| acc + c.weight.clone());
    checks.push(CheckResult::exact(
        "component weights sum to one",
        (weight_sum - S::one()).abs(),
    ));
    checks.push(CheckResult::exact(
        "carrier event has full mass",
        (p.mass_of(&support_event) - S::one()).abs(),
    ));
    let concentration = components.iter().fold(S::zero(), |acc, c| {
        let d = (c.p_omega.mass_of(&c.atom) - S::one()).abs();
        if d > acc {
            d
        } else {
            acc
        }
    });
    checks.push(CheckResult::exact(
        "conditionals concentrate on their atoms",
        concentration,
    ));
    let stationarity = components.iter().fold(S::zero(), |acc, c| {
        let pushed = map.pushforward(&c.p_bar_omega, 1);
        let d = event_sup_deviation(&pushed, &c.p_bar_omega).expect("same space");
        if d > acc {
            d
        } else {
            acc
        }
    });
    checks.push(CheckResult::exact(
        "component means are stationary",
        stationarity,
    ));

    DecompositionReport {
        components,
        support_event,
        residual,
        checks,
    }
}

/// Verify the three decomposition properties for a report produced from
/// `(p, map)`:
///
/// * (a) the component assignment is constant along orbits;
/// * (b) `p(B) = Σ_c weight_c · P_ω,c(B)` for every event (all `2^|Ω|` when
///   enumerable, pointwise always);
/// * (c) `∫f dp = Σ_c weight_c ∫f dP_ω,c` on the indicator basis plus
///   seeded random functions.
pub fn verify_decomposition<S: Scalar>(
    report: &DecompositionReport<S>,
    p: &ProbabilityMeasure<S>,
    map: &EndoMap,
) -> Result<Vec<CheckResult<S>>, DecompositionError> {
    if p.space() != map.space() {
        return Err(DecompositionError::ReportMismatch(
            "measure and map spaces differ".into(),
        ));
    }
    for c in &report.components {
        if c.p_omega.space() != p.space() {
            return Err(DecompositionError::ReportMismatch(
                "component space differs from system space".into(),
            ));
        }
        if !c.weight.approx_eq(&p.mass_of(&c.atom)) {
            return Err(DecompositionError::ReportMismatch(
                "component weight does not match the measure".into(),
            ));
        }
    }
    let universe = map.space().len();
    let mut checks = Vec::new();

    // (a) Same atom before and after one map step, for every carried point.
    let mut violations = 0i64;
    for x in report.support_event.iter() {
        let home = report.components.iter().position(|c| c.atom.contains(x));
        let image = report
            .components
            .iter()
            .position(|c| c.atom.contains(map.next(x)));
        if home != image {
            violations += 1;
        }
    }
    checks.push(CheckResult::exact(
        "decomposition: components constant along orbits",
        S::from_int(violations),
    ));

    // (b) Mixture reconstruction.
    let mixture_mass = |event: &Event| -> S {
        report.components.iter().fold(S::zero(), |acc, c| {
            acc + c.weight.clone() * c.p_omega.mass_of(event)
        })
    };
    let mut dev_b = S::zero();
    if universe <= MAX_BRUTE_FORCE_POINTS {
        for event in Event::all_events(universe) {
            let d = (p.mass_of(&event) - mixture_mass(&event)).abs();
            if d > dev_b {
                dev_b = d;
            }
        }
    } else {
        for x in 0..universe {
            let event = Event::singleton(universe, x);
            let d = (p.mass_of(&event) - mixture_mass(&event)).abs();
            if d > dev_b {
                dev_b = d;
            }
        }
    }
    checks.push(CheckResult::exact(
        "decomposition: mixture reconstructs the measure on every event",
        dev_b,
    ));

    // (c) Indicator basis plus seeded random functions.
    let mut dev_c = S::zero();
    let mut assess = |f: &[S]| {
        let lhs = p.integrate(f);
        let rhs = report.components.iter().fold(S::zero(), |acc, c| {
            acc + c.weight.clone() * c.p_omega.integrate(f)
        });
        let d = (lhs - rhs).abs();
        if d > dev_c {
            dev_c = d;
        }
    };
    for x in 0..universe {
        let mut indicator = vec![S::zero(); universe];
        indicator[x] = S::one();
        assess(&indicator);
    }
    let mut rng = SplitMix64::new(0x1d_ec0);
    for _ in 0..20 {
        let f: Vec<S> = (0..universe)
            .map(|_| S::from_ratio(rng.next_below(33) as i64 - 16, 1 + rng.next_below(6) as i64))
            .collect();
        assess(&f);
    }
    checks.push(CheckResult::exact(
        "decomposition: integrals agree on indicator and random bases",
        dev_c,
    ));

    Ok(checks)
}

/// The uniform-convergence profile `n ↦ sup_B |Pₙ(B) − P̄(B)|` along a
/// schedule. Exact in rational mode.
pub fn uniform_convergence_profile<S: Scalar>(
    p: &ProbabilityMeasure<S>,
    map: &EndoMap,
    schedule: &[u64],
) -> Vec<(u64, S)> {
    assert!(!schedule.is_empty(), "schedule must be nonempty");
    assert!(
        schedule.windows(2).all(|w| w[0] < w[1]),
        "schedule must be strictly increasing"
    );
    let mean = map.stationary_mean(p);
    schedule
        .iter()
        .map(|&n| {
            let avg = map.cesaro_average(p, n);
            let dev = event_sup_deviation(&avg, &mean).expect("same space");
            (n, dev)
        })
        .collect()
}

/// A conditional expectation given the invariant σ-algebra: constant per
/// atom, zero (and flagged) on residual atoms.
#[derive(Debug, Clone)]
pub struct ConditionalExpectation<S: Scalar> {
    /// Value per point; constant on each atom.
    pub values: Vec<S>,
    /// Points of zero-mass atoms, where no version is determined.
    pub residual: Event,
}

/// `E(f|𝓘)(ω) = ∫ f dP_ω` on positive-mass atoms.
pub fn conditional_expectation<S: Scalar>(
    f: &[S],
    p: &ProbabilityMeasure<S>,
    partition: &InvariantPartition,
) -> ConditionalExpectation<S> {
    let universe = p.space().len();
    assert_eq!(f.len(), universe, "function length mismatch");
    let mut values = vec![S::zero(); universe];
    let mut residual = Event::empty(universe);
    for atom in partition.atoms() {
        if p.mass_of(atom).approx_zero() {
            residual = residual.union(atom);
            continue;
        }
        let conditional = p.conditioned_on(atom).expect("positive mass");
        let value = conditional.integrate(f);
        for x in atom.iter() {
            values[x] = value.clone();
        }
    }
    ConditionalExpectation { values, residual }
}

/// The supporting identities behind the decomposition, checked exactly:
///
/// * (i) the conditional of `p∘T⁻ⁿ` given the atoms is `P_ω∘T⁻ⁿ`;
/// * (ii) the conditional of the dominating measure is the closed-form
///   per-component dominating measure;
/// * (iii) the global densities `fₙ` and `f̄` restrict to the per-component
///   ones wherever `Q_ω` charges;
/// * (iv) functions constant on atoms integrate identically against `p`,
///   `p∘T⁻ⁿ`, `Pₙ`, `P̄` and `Q`.
pub fn conditional_identity_suite<S: Scalar>(
    p: &ProbabilityMeasure<S>,
    map: &EndoMap,
) -> Vec<CheckResult<S>> {
    assert_eq!(p.space(), map.space(), "space mismatch");
    let universe = map.space().len();
    let partition = map.invariant_atoms();
    let (conditionals, _) = conditional_measures(p, &partition);
    let q = build_dominating(p, map);
    let mean = map.stationary_mean(p);
    let steps: &[u64] = &[1, 2, 4, 8, 16];

    let max = |acc: S, d: S| if d > acc { d } else { acc };

    // (i) Conditionals of pushforwards.
    let mut dev_i = S::zero();
    for n in steps {
        let pushed = map.pushforward(p, *n);
        for (atom, p_omega) in &conditionals {
            let lhs = pushed.conditioned_on(atom).expect("invariant atom keeps mass");
            let rhs = map.pushforward(p_omega, *n);
            for x in 0..universe {
                dev_i = max(dev_i, (lhs.weight(x).clone() - rhs.weight(x).clone()).abs());
            }
        }
    }

    // (ii) Conditional dominating measure in closed form.
    let mut dev_ii = S::zero();
    for (atom, p_omega) in &conditionals {
        let lhs = q.conditioned_on(atom).expect("atom carries Q mass");
        let rhs = build_dominating(p_omega, map);
        for x in 0..universe {
            dev_ii = max(dev_ii, (lhs.weight(x).clone() - rhs.weight(x).clone()).abs());
        }
    }

    // (iii) Density restriction: fₙ and f̄ agree with their per-component
    // versions wherever Q_ω charges.
    let mut dev_iii = S::zero();
    let f_bar = mean.signed().radon_nikodym(&q).expect("Q dominates the mean");
    for (atom, p_omega) in &conditionals {
        let q_omega = build_dominating(p_omega, map);
        let mean_omega = map.stationary_mean(p_omega);
        let f_bar_omega = mean_omega
            .signed()
            .radon_nikodym(&q_omega)
            .expect("Q_ω dominates the component mean");
        for n in steps {
            let f_n = map
                .cesaro_average(p, *n)
                .signed()
                .radon_nikodym(&q)
                .expect("Q dominates Pₙ");
            let f_n_omega = map
                .cesaro_average(p_omega, *n)
                .signed()
                .radon_nikodym(&q_omega)
                .expect("Q_ω dominates the component average");
            for x in atom.iter() {
                if q_omega.weight(x).approx_zero() {
                    continue;
                }
                dev_iii = max(
                    dev_iii,
                    (f_n.value(x).clone() - f_n_omega.value(x).clone()).abs(),
                );
            }
        }
        for x in atom.iter() {
            if q_omega.weight(x).approx_zero() {
                continue;
            }
            dev_iii = max(
                dev_iii,
                (f_bar.value(x).clone() - f_bar_omega.value(x).clone()).abs(),
            );
        }
    }

    // (iv) Invariant integrals: atom indicators plus seeded invariant
    // functions, against all five measure families.
    let mut dev_iv = S::zero();
    let mut rng = SplitMix64::new(0x1d_ec1);
    let mut invariant_functions: Vec<Vec<S>> = partition
        .atoms()
        .iter()
        .map(|atom| {
            (0..universe)
                .map(|x| if atom.contains(x) { S::one() } else { S::zero() })
                .collect()
        })
        .collect();
    for _ in 0..5 {
        let per_atom: Vec<S> = partition
            .atoms()
            .iter()
            .map(|_| S::from_ratio(rng.next_below(21) as i64 - 10, 1 + rng.next_below(4) as i64))
            .collect();
        let mut g = vec![S::zero(); universe];
        for (atom, value) in partition.atoms().iter().zip(&per_atom) {
            for x in atom.iter() {
                g[x] = value.clone();
            }
        }
        invariant_functions.push(g);
    }
    for g in &invariant_functions {
        debug_assert!(partition.is_invariant_function(g));
        let base = p.integrate(g);
        for n in steps {
            dev_iv = max(
                dev_iv,
                (map.pushforward_signed(p.signed(), *n).integrate(g) - base.clone()).abs(),
            );
            dev_iv = max(
                dev_iv,
                (map.cesaro_average(p, *n).integrate(g) - base.clone()).abs(),
            );
        }
        dev_iv = max(dev_iv, (mean.integrate(g) - base.clone()).abs());
        dev_iv = max(dev_iv, (q.integrate(g) - base.clone()).abs());
    }

    vec![
        CheckResult::exact("conditionals commute with pushforwards", dev_i),
        CheckResult::exact("conditional dominating measure matches the closed form", dev_ii),
        CheckResult::exact("global densities restrict to the component densities", dev_iii),
        CheckResult::exact("invariant integrals agree across all measure families", dev_iv),
    ]
}

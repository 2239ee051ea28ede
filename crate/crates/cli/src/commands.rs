//! Command pipelines, generic over the numeric mode.

use crate::document::{NumericMode, SystemDocument, ValidatedSystem};
use crate::report::{
    BlockRow, CheckRow, ClassRateRow, ComponentRow, EntropyBlock, NEpsilon, ProfileRow, RateRow,
    ReportDocument, TraceRow,
};
use amsdec_core::decomposition::{
    conditional_identity_suite, decompose, verify_decomposition, CheckResult,
};
use amsdec_core::krengel::{
    classify_convergence, krengel_average, liminf_identity_check, ContractionState,
};
use amsdec_core::measure::{event_sup_deviation, ProbabilityMeasure};
use amsdec_core::numeric::{parse_scalar, Scalar};
use amsdec_core::sources::{
    block_entropy, entropy_rate, marginal, recurrent_classes, sample_paths,
    stationary_mean_source, MarkovSource, RateEstimate, SourceError,
};
use amsdec_core::EndoMap;

/// Failures that map to dedicated exit codes (2 = invalid, 3 = budget).
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Budget(String),
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

/// Flag/document/default resolution happens in `main`; commands receive the
/// final values.
#[derive(Debug, Clone)]
pub struct CommandOptions {
    pub schedule: Vec<u64>,
    pub epsilon: Option<String>,
    pub max_depth: usize,
    pub budget: u64,
    pub seed: u64,
}

fn resolve_epsilon<S: Scalar>(
    options: &CommandOptions,
    doc: &SystemDocument,
) -> Result<S, CliError> {
    if let Some(text) = &options.epsilon {
        return parse_scalar::<S>(text).map_err(|e| CliError::Invalid(e.to_string()));
    }
    if let Some(value) = doc
        .epsilon_value::<S>()
        .map_err(CliError::Invalid)?
    {
        return Ok(value);
    }
    Ok(S::from_ratio(1, 1_000_000))
}

fn check_rows<S: Scalar>(checks: &[CheckResult<S>]) -> Vec<CheckRow> {
    checks
        .iter()
        .map(|c| CheckRow {
            name: c.name.clone(),
            passed: c.passed,
            max_deviation: c.deviation.render(),
        })
        .collect()
}

fn render_weights<S: Scalar>(weights: &[S]) -> Vec<String> {
    weights.iter().map(|w| w.render()).collect()
}

fn base_report(command: &str, mode: NumericMode, input: serde_json::Value) -> ReportDocument {
    ReportDocument {
        command: command.to_string(),
        numeric_mode: mode.as_str().to_string(),
        input,
        components: Vec::new(),
        checks: Vec::new(),
        profile: Vec::new(),
        trace: Vec::new(),
        entropy: None,
        n_epsilon: None,
        all_checks_passed: true,
    }
}

pub fn run_decompose<S: Scalar>(
    doc: &SystemDocument,
    input_echo: serde_json::Value,
    mode: NumericMode,
    options: &CommandOptions,
) -> Result<ReportDocument, CliError> {
    let mut report = base_report("decompose", mode, input_echo);
    match doc.validate::<S>().map_err(CliError::Invalid)? {
        ValidatedSystem::Finite {
            space,
            map,
            measure,
        } => {
            let decomposition = decompose(&measure, &map);
            report.components = decomposition
                .components
                .iter()
                .enumerate()
                .map(|(id, c)| ComponentRow {
                    id,
                    members: c.atom.iter().map(|i| space.label(i).to_string()).collect(),
                    weight: c.weight.render(),
                    conditional: render_weights(c.p_omega.weights()),
                    stationary_mean: render_weights(c.p_bar_omega.weights()),
                    ergodic: c.ergodic,
                })
                .collect();
            report.checks = check_rows(&decomposition.checks);
            let decomposition_checks = verify_decomposition(&decomposition, &measure, &map)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            report.checks.extend(check_rows(&decomposition_checks));
            report
                .checks
                .extend(check_rows(&conditional_identity_suite(&measure, &map)));
        }
        ValidatedSystem::Source(src) => {
            source_decompose_into(&src, options, &mut report)?;
        }
    }
    report.all_checks_passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

fn source_decompose_into<S: Scalar>(
    src: &MarkovSource<S>,
    options: &CommandOptions,
    report: &mut ReportDocument,
) -> Result<(), CliError> {
    let decomposition = recurrent_classes(src);
    report.components = decomposition
        .classes
        .iter()
        .enumerate()
        .map(|(id, class)| {
            let mut embedded = vec![S::zero(); src.state_count()];
            for (&s, pi) in class.states.iter().zip(&class.stationary) {
                embedded[s] = pi.clone();
            }
            ComponentRow {
                id,
                members: class
                    .states
                    .iter()
                    .map(|&s| src.states()[s].to_string())
                    .collect(),
                weight: class.weight.render(),
                conditional: render_weights(&embedded),
                stationary_mean: Vec::new(),
                ergodic: true,
            }
        })
        .collect();

    let weight_sum = decomposition
        .classes
        .iter()
        .fold(S::zero(), |acc, c| acc + c.weight.clone());
    let mut checks = vec![CheckRow {
        name: "class weights sum to one".into(),
        passed: weight_sum.approx_eq(&S::one()),
        max_deviation: (weight_sum - S::one()).abs().render(),
    }];

    // Stationarity of each class law under the restricted chain.
    let mut stationary_dev = S::zero();
    for class in &decomposition.classes {
        for (j, &t) in class.states.iter().enumerate() {
            let flowed = class
                .states
                .iter()
                .zip(&class.stationary)
                .fold(S::zero(), |acc, (&s, pi)| {
                    acc + pi.clone() * src.transition()[s][t].clone()
                });
            let d = (flowed - class.stationary[j].clone()).abs();
            if d > stationary_dev {
                stationary_dev = d;
            }
        }
    }
    checks.push(CheckRow {
        name: "class laws are stationary for the restricted chains".into(),
        passed: stationary_dev.approx_zero(),
        max_deviation: stationary_dev.render(),
    });

    // Shift invariance of the stationary mean at small depth, and mixture
    // reconstruction of its marginals from the class-conditioned sources.
    let depth = options.max_depth.clamp(1, 4);
    let mean = stationary_mean_source(src);
    let mean_marginal = marginal(&mean, depth, options.budget)?;
    let mut shift_dev = S::zero();
    for index in 0..mean_marginal.dist().len() {
        let pattern = mean_marginal.pattern_of(index);
        for shift in 1..=2u64 {
            let shifted = amsdec_core::sources::shifted_cylinder_prob(&mean, &pattern, shift)?;
            let d = (shifted - mean_marginal.dist()[index].clone()).abs();
            if d > shift_dev {
                shift_dev = d;
            }
        }
    }
    checks.push(CheckRow {
        name: format!("stationary mean is shift-invariant at depth {depth}"),
        passed: shift_dev.approx_zero(),
        max_deviation: shift_dev.render(),
    });

    let mut mixture_dev = S::zero();
    let mut mixed = vec![S::zero(); mean_marginal.dist().len()];
    for class in &decomposition.classes {
        let mut class_initial = vec![S::zero(); src.state_count()];
        for (&s, pi) in class.states.iter().zip(&class.stationary) {
            class_initial[s] = pi.clone();
        }
        let conditioned = src
            .with_initial(class_initial)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let part = marginal(&conditioned, depth, options.budget)?;
        for (acc, p) in mixed.iter_mut().zip(part.dist()) {
            *acc = acc.clone() + class.weight.clone() * p.clone();
        }
    }
    for (a, b) in mixed.iter().zip(mean_marginal.dist()) {
        let d = (a.clone() - b.clone()).abs();
        if d > mixture_dev {
            mixture_dev = d;
        }
    }
    checks.push(CheckRow {
        name: format!("mean marginals are the class mixture at depth {depth}"),
        passed: mixture_dev.approx_zero(),
        max_deviation: mixture_dev.render(),
    });

    report.checks = checks;
    Ok(())
}

pub fn run_verify<S: Scalar>(
    doc: &SystemDocument,
    input_echo: serde_json::Value,
    mode: NumericMode,
    options: &CommandOptions,
) -> Result<ReportDocument, CliError> {
    let mut report = base_report("verify", mode, input_echo);
    let epsilon = resolve_epsilon::<S>(options, doc)?;
    match doc.validate::<S>().map_err(CliError::Invalid)? {
        ValidatedSystem::Finite { map, measure, .. } => {
            verify_finite_into(&map, &measure, &epsilon, options, &mut report)?;
        }
        ValidatedSystem::Source(src) => {
            verify_source_into(&src, &epsilon, options, &mut report)?;
        }
    }
    report.all_checks_passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

fn verify_finite_into<S: Scalar>(
    map: &EndoMap,
    measure: &ProbabilityMeasure<S>,
    epsilon: &S,
    options: &CommandOptions,
    report: &mut ReportDocument,
) -> Result<(), CliError> {
    let q = amsdec_core::krengel::build_dominating(measure, map);
    let mean = map.stationary_mean(measure);
    let f_bar = mean
        .signed()
        .radon_nikodym(&q)
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    let mut equivalence_dev = S::zero();
    let mut n_epsilon = None;
    for &n in &options.schedule {
        let pn = map.cesaro_average(measure, n);
        let sup = event_sup_deviation(&pn, &mean).map_err(|e| CliError::Invalid(e.to_string()))?;
        let f_n = pn
            .signed()
            .radon_nikodym(&q)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let diff = f_n.sub(&f_bar);
        let l1 = diff.l1_norm();
        let exceed = amsdec_core::Event::from_indices(
            q.space().len(),
            (0..q.space().len()).filter(|&x| diff.value(x).abs() > *epsilon),
        );
        let exceedance = q.mass_of(&exceed);
        let gap = (l1.clone() - sup.clone() * S::from_int(2)).abs();
        if gap > equivalence_dev {
            equivalence_dev = gap;
        }
        if n_epsilon.is_none() && sup <= *epsilon {
            n_epsilon = Some(n);
        }
        report.profile.push(ProfileRow {
            n,
            sup_deviation: sup.render(),
            l1_density_distance: Some(l1.render()),
            exceedance_mass: Some(exceedance.render()),
        });
    }
    report.checks.push(CheckRow {
        name: "L1 density distance equals twice the sup-event deviation".into(),
        passed: equivalence_dev.approx_zero(),
        max_deviation: equivalence_dev.render(),
    });
    report.n_epsilon = Some(NEpsilon {
        epsilon: epsilon.render(),
        n: n_epsilon,
    });
    Ok(())
}

fn verify_source_into<S: Scalar>(
    src: &MarkovSource<S>,
    epsilon: &S,
    options: &CommandOptions,
    report: &mut ReportDocument,
) -> Result<(), CliError> {
    let depth = options.max_depth.clamp(1, 6);
    let mean = stationary_mean_source(src);
    let mean_marginal = marginal(&mean, depth, options.budget)?;
    let strings = mean_marginal.dist().len();

    // Running sum of the shifted marginals gives the Cesàro averages.
    let mut shifted_sum = vec![S::zero(); strings];
    let mut current = src.clone();
    let mut next_shift = 0u64;
    let mut n_epsilon = None;
    for &n in &options.schedule {
        while next_shift < n {
            let m = marginal(&current, depth, options.budget)?;
            for (acc, p) in shifted_sum.iter_mut().zip(m.dist()) {
                *acc = acc.clone() + p.clone();
            }
            let stepped = current.initial().to_vec();
            let stepped = {
                let mut v = stepped;
                v = step_initial(&current, &v);
                v
            };
            current = current
                .with_initial(stepped)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            next_shift += 1;
        }
        let scale = S::one() / S::from_int(n as i64);
        // Sup over the depth-L cylinder field = half the L1 distance.
        let l1 = shifted_sum
            .iter()
            .zip(mean_marginal.dist())
            .fold(S::zero(), |acc, (a, b)| {
                acc + (a.clone() * scale.clone() - b.clone()).abs()
            });
        let sup = l1.clone() * S::half();
        if n_epsilon.is_none() && sup <= *epsilon {
            n_epsilon = Some(n);
        }
        report.profile.push(ProfileRow {
            n,
            sup_deviation: sup.render(),
            l1_density_distance: Some(l1.render()),
            exceedance_mass: None,
        });
    }

    let consistency = {
        let mut dev = S::zero();
        if depth >= 2 {
            let projected = mean_marginal.project_last();
            let shallow = marginal(&mean, depth - 1, options.budget)?;
            for (a, b) in projected.dist().iter().zip(shallow.dist()) {
                let d = (a.clone() - b.clone()).abs();
                if d > dev {
                    dev = d;
                }
            }
        }
        dev
    };
    report.checks.push(CheckRow {
        name: "mean marginals are projection-consistent".into(),
        passed: consistency.approx_zero(),
        max_deviation: consistency.render(),
    });
    report.n_epsilon = Some(NEpsilon {
        epsilon: epsilon.render(),
        n: n_epsilon,
    });
    Ok(())
}

fn step_initial<S: Scalar>(src: &MarkovSource<S>, v: &[S]) -> Vec<S> {
    let n = src.state_count();
    let mut out = vec![S::zero(); n];
    for (s, w) in v.iter().enumerate() {
        if w.approx_zero() {
            continue;
        }
        for (t, p) in src.transition()[s].iter().enumerate() {
            out[t] = out[t].clone() + w.clone() * p.clone();
        }
    }
    out
}

pub fn run_entropy<S: Scalar>(
    doc: &SystemDocument,
    input_echo: serde_json::Value,
    mode: NumericMode,
    options: &CommandOptions,
) -> Result<ReportDocument, CliError> {
    let mut report = base_report("entropy", mode, input_echo);
    let src = match doc.validate::<S>().map_err(CliError::Invalid)? {
        ValidatedSystem::Source(src) => src,
        ValidatedSystem::Finite { .. } => {
            return Err(CliError::Invalid(
                "entropy needs a source document (type \"markov\" or \"hmm\")".into(),
            ))
        }
    };
    let decomposition = recurrent_classes(&src);
    let bound_depth = options.max_depth.max(1);
    let rates = entropy_rate(&src, &decomposition, bound_depth, options.budget)?;

    let mean = stationary_mean_source(&src);
    let mut block_table = Vec::new();
    for depth in 1..=options.max_depth.max(1) {
        let h = block_entropy(&mean, depth, options.budget)?;
        block_table.push(BlockRow {
            depth,
            block_entropy_bits: h,
            per_symbol_bits: h / depth as f64,
        });
    }

    let rate_row = |r: &RateEstimate| match r {
        RateEstimate::Exact(v) => RateRow {
            exact: true,
            lower_bits: *v,
            upper_bits: *v,
            bound_depth: None,
        },
        RateEstimate::Bounds {
            lower,
            upper,
            depth,
        } => RateRow {
            exact: false,
            lower_bits: *lower,
            upper_bits: *upper,
            bound_depth: Some(*depth),
        },
    };
    report.entropy = Some(EntropyBlock {
        per_class: rates
            .per_class
            .iter()
            .map(|c| ClassRateRow {
                members: c
                    .states
                    .iter()
                    .map(|&s| src.states()[s].to_string())
                    .collect(),
                weight: c.weight,
                rate: rate_row(&c.rate),
            })
            .collect(),
        average: rate_row(&rates.average),
        block_table,
    });

    let weight_sum = decomposition
        .classes
        .iter()
        .fold(S::zero(), |acc, c| acc + c.weight.clone());
    report.checks.push(CheckRow {
        name: "class weights sum to one".into(),
        passed: weight_sum.approx_eq(&S::one()),
        max_deviation: (weight_sum - S::one()).abs().render(),
    });
    report.all_checks_passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

pub fn run_trace<S: Scalar>(
    doc: &SystemDocument,
    input_echo: serde_json::Value,
    mode: NumericMode,
    options: &CommandOptions,
) -> Result<ReportDocument, CliError> {
    let mut report = base_report("trace", mode, input_echo);
    let epsilon = resolve_epsilon::<S>(options, doc)?;
    let (space, map, measure) = match doc.validate::<S>().map_err(CliError::Invalid)? {
        ValidatedSystem::Finite {
            space,
            map,
            measure,
        } => (space, map, measure),
        ValidatedSystem::Source(_) => {
            return Err(CliError::Invalid(
                "trace needs a finite-system document (type \"finite\")".into(),
            ))
        }
    };
    let state = ContractionState::from_source(&measure, &map);
    let f1 = measure
        .signed()
        .radon_nikodym(state.dominating())
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let trace = krengel_average(&f1, &state, &options.schedule)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let classification = classify_convergence(&trace, &state, &epsilon);
    let (hopf_c, _) = state.hopf_parts();

    for ((n, avg), row) in trace.entries().iter().zip(&classification.rows) {
        for x in 0..space.len() {
            let part = if state.dominating().weight(x).approx_zero() {
                "null"
            } else if hopf_c.contains(x) {
                "C"
            } else {
                "D"
            };
            report.trace.push(TraceRow {
                n: *n,
                point: space.label(x).to_string(),
                value: avg.value(x).render(),
                part: part.to_string(),
                l1_dist_c: row.l1_dist_c.render(),
                exceedance_mass_d: row.exceedance_mass_d.render(),
            });
        }
    }

    let liminf_ok = liminf_identity_check(&trace, &state)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    report.checks.push(CheckRow {
        name: "liminf of averages equals the limit density".into(),
        passed: liminf_ok,
        max_deviation: if liminf_ok { "0".into() } else { "1".into() },
    });
    let f_bar = map
        .stationary_mean(&measure)
        .signed()
        .radon_nikodym(state.dominating())
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut limit_dev = S::zero();
    for (a, b) in trace.limit().values().iter().zip(f_bar.values()) {
        let d = (a.clone() - b.clone()).abs();
        if d > limit_dev {
            limit_dev = d;
        }
    }
    report.checks.push(CheckRow {
        name: "limit density equals the stationary-mean density".into(),
        passed: limit_dev.approx_zero(),
        max_deviation: limit_dev.render(),
    });
    report.all_checks_passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

/// Sampled trajectories, one rendered path per line.
pub fn run_sample<S: Scalar>(
    doc: &SystemDocument,
    options: &CommandOptions,
    length: usize,
    trials: usize,
) -> Result<String, CliError> {
    let src = match doc.validate::<S>().map_err(CliError::Invalid)? {
        ValidatedSystem::Source(src) => src,
        ValidatedSystem::Finite { .. } => {
            return Err(CliError::Invalid(
                "sample needs a source document (type \"markov\" or \"hmm\")".into(),
            ))
        }
    };
    let paths = sample_paths(&src, length, options.seed, trials);
    let single_char = src.symbols().iter().all(|s| s.chars().count() == 1);
    let mut out = String::new();
    for path in paths {
        let rendered: Vec<&str> = path.iter().map(|&s| src.symbols()[s].as_str()).collect();
        out.push_str(&rendered.join(if single_char { "" } else { " " }));
        out.push('\n');
    }
    Ok(out)
}

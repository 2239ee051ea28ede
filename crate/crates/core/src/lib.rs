//! Exact ergodic decomposition on finite dynamical systems and
//! finite-alphabet Markov sources.
//!
//! The crate makes the classical chain of constructions behind the ergodic
//! decomposition of asymptotically mean stationary measures computable and
//! machine-checkable at desk scale:
//!
//! * [`measure`] — finite signed measures, Jordan decomposition,
//!   total-variation norm, Radon–Nikodym densities, the density/measure
//!   isometry, convex mixtures;
//! * [`dynamics`] — endomaps of finite spaces, pushforwards, Cesàro averages,
//!   exact stationary means, invariant atoms;
//! * [`krengel`] — the positive contraction induced by a map relative to a
//!   dominating measure, its averages, Hopf decomposition and convergence
//!   classification;
//! * [`decomposition`] — regular conditional measures given the invariant
//!   σ-algebra, component-level certification, and the identity suites tying
//!   the global and per-component constructions together;
//! * [`sources`] — one-sided Markov and hidden-Markov shift sources:
//!   cylinder marginals, recurrent classes, stationary means, entropy rates
//!   and seeded sampling.
//!
//! Arithmetic is generic over [`numeric::Scalar`] with two modes: exact
//! rationals (identities hold exactly) and `f64` within an absolute `1e-9`.

pub mod decomposition;
pub mod dynamics;
pub mod krengel;
pub mod measure;
pub mod numeric;
mod rng;
pub mod sources;
pub mod space;

pub use decomposition::{
    conditional_identity_suite, conditional_expectation, conditional_measures, decompose,
    uniform_convergence_profile, verify_decomposition, CheckResult, DecompositionReport,
    ErgodicComponent,
};
pub use dynamics::{EndoMap, InvariantPartition, OrbitStructure};
pub use krengel::{
    build_dominating, classify_convergence, krengel_average, liminf_identity_check, AverageTrace,
    ContractionState, ConvergenceReport,
};
pub use measure::{
    event_sup_deviation, mixture, phi_isometry_check, Density, JordanParts, MeasureError,
    ProbabilityMeasure, SignedMeasure,
};
pub use numeric::{parse_scalar, Scalar, FLOAT_TOLERANCE};
pub use sources::{
    empirical_frequency, entropy_rate, marginal, recurrent_classes, sample_path, sample_paths,
    shifted_cylinder_prob, stationary_mean_source, CylinderMarginal, MarkovSource,
    SourceDecomposition,
};
pub use space::{Event, FiniteSpace};

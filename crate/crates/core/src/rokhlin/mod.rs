//! Conjugator synthesis over Rokhlin towers and the density constructions
//! built on it.

pub mod density;
pub mod metric;
pub mod synthesis;

pub use density::{
    aperiodic_lift, approx_conjugate_constant, class_part, conjugate_into_neighborhood, diagonal_experiment,
    interleave, plan_density, ConstantConjugacy, CoordinateReport, DensityOutcome, DensityPlan, DiagonalReport,
};
pub use metric::{
    check_deviation, synthesize_conjugator_metric, CycleTypeOracle, DeviationCheck, MetricSynthesisResult, WindowOracle,
};
pub use synthesis::{
    agreement_measure, check_commutation, check_telescoping, synthesize_conjugator, tower_product, EquationCheck,
    SurrogateBudget, SynthesisResult, SynthesisTask, TelescopeCheck,
};

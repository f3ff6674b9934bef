//! The isometry group `L⁰([0,1], G) ⋊ Aut([0,1])` of a randomization.

pub mod element;
pub mod pointwise;
pub mod uniform;

pub use element::{dhat_x, TildeElement};
pub use pointwise::{
    certify_pointwise_to_product, certify_product_to_pointwise, nbhd_pointwise_to_product, nbhd_product_to_pointwise,
    pointwise_metric, test_functions, truncation_bound, Certificate, PointwiseSpec, PointwiseToProduct, ProductSpec,
    Residuals,
};
pub use uniform::{lu_bounds, lu_bounds_with, lu_estimate, lu_exact_discrete, witness, LuBounds};

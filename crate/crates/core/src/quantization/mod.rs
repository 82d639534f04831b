//! Conformally invariant quantization, curvature of chart metrics and the
//! Sasaki-type metric of a Finsler model.
//!
//! Curvature follows `R^a_bcd = ∂_cΓ^a_db − …` and `R_bd = R^a_bad`, so the
//! round sphere has positive scalar curvature. This is the sign under which
//! the quantization map is independent of conformal rescalings;
//! [`CurvatureSign::Reversed`] gives the opposite convention.

mod metric;
mod operator;
mod sasaki;

pub use metric::{levi_civita, ricci_scalar, ricci_scalar_signed, riemann, CurvatureSign, MetricField};
pub use operator::{
    beta_constants, density_test_basis, quantize, BetaConstants, OperatorAt, OperatorCoefficients, QuantizedOperator,
    SymbolJets,
};
pub use sasaki::{
    descent_probe, embed_density, kinetic_formula, lift_symbol, omega_coefficient, q01_descended, restricted_quantization,
    ricci_contractions_flat, sasaki_metric, DescentReport, DescentVerdict, LiftedSymbol, RestrictedQuantization,
    DESCENDS_BELOW, OBSTRUCTED_ABOVE,
};

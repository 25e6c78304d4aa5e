//! Statistical field theory on a finite index set Λ: Green function and
//! cumulant tables, Dyson–Schwinger residuals, Legendre duality, the
//! hierarchy expansion of cumulants and Wick monomials, with quadrature and
//! Monte Carlo oracles for the underlying measure.

mod expansion;
mod legendre;
mod model;
mod oracle;
mod scalar;
mod table;
mod wick;

pub use expansion::{
    cumulant_by_recurrence, effective_action_from_cumulants, hierarchy_cumulant_expansion, hierarchy_symbols,
    EffectiveActionTable, HierarchyExpansion, HierarchyTerm, UpsilonConvention,
};
pub use legendre::{
    leibniz_check, legendre_duality_check, mean_field_tree_expansion, self_energy_check, LegendreReport,
    LeibnizReport, SelfEnergyReport,
};
pub use model::{FieldModel, ModelFile, VertexEntry};
pub use oracle::{measure_oracle, monte_carlo, Estimate, MonteCarloConfig, OracleMethod, Quadrature};
pub use scalar::{invert, Scalar};
pub use table::{
    all_multisets, cumulants_to_greens, ds_residual, greens_to_cumulants, isserlis_green, isserlis_table,
    multiplicity_factorial, GreenTable, Multiset, TableKind,
};
pub use wick::{wick_monomial, wick_product_expectation, wick_product_expectation_brute, WickPolynomial};

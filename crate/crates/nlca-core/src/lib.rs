//! Exact symbolic calculus for finite n-Lie conformal algebras.
//!
//! Everything is computed over the rationals with no floating point:
//! multivariate polynomials in the translation generator `d` and spectral
//! variables, bracket tables on canonical generator tuples, axiom checkers,
//! index-expanded annihilation algebras, conformal modules and their
//! cohomology.

pub mod algebra;
pub mod annihilation;
pub mod arith;
pub mod cohomology;
pub mod combi;
pub mod constructions;
pub mod formats;
pub mod poly;
pub mod random;
pub mod report;
pub mod repr;

pub use algebra::{
    slot_var, AlgebraError, ConformalElement, GeneratorId, NlcaPresentation, PolyValue,
};
pub use annihilation::{
    ann_bracket, ann_basis_bracket, check_ann_filippov, check_reconstruction,
    commutativity_check, dti_action, embed_at, filtration_degree, filtration_shift, induce_hom,
    partial_action, AnnElement, AnnError, AnnGenerator, CommutativityOutcome, InduceError,
    InducedHom,
};
pub use arith::{binomial, factorial, multinomial, rat, ratio, render_rational, Rational};
pub use cohomology::{
    ann_cochain_partial, cochain_differential, nlie_cochain_differential, partial_on_cochain,
    phi_map, random_cochain, reduced_equal, Cochain, CohomologyError,
};
pub use constructions::{
    check_nlie, current_algebra, filippov_constraint_residual, h_from_matrix, plucker_check,
    pseudo_translate, rank2_family_i, rank2_family_ii, simple_3lie, zeroth_product_algebra,
    ConstructionError, NLieAlgebra, PseudoBracketTable,
};
pub use formats::{
    parse_algebra, parse_cochain, parse_module, render_algebra, render_cochain, render_module,
    render_report, render_report_machine, FormatError,
};
pub use poly::{poly_sum, vandermonde, MultiPoly, VarId};
pub use repr::{
    adjoint_module, cend_bracket, check_ann_rep, check_derivation, inner_derivation,
    module_to_ann_rep, semidirect_sum, trivial_module, CendOperator, ConformalModule, ReprError,
};
pub use random::SeededRng;
pub use report::{CheckReport, Failure};

//! Solver library for a budget-constrained local public good game played on
//! an endogenous directed network.
//!
//! Players split their wealth between own provision of a public good,
//! a private good, and costly links; a link lets its sponsor free ride on
//! the target's provision. The crate computes best responses, verifies and
//! enumerates Nash / sociable / strict equilibria, constructs equilibria by
//! growing a reciprocated core, analyzes the resulting network structure,
//! and implements the planner's instruments: the efficient star,
//! welfare-improving and welfare-maximizing transfers, and personalized
//! prices, plus inequality and core-share scaling diagnostics.

pub mod config;
pub mod econ;
pub mod equilibrium;
pub mod error;
pub mod graph;
pub mod policy;

pub use econ::{
    consumption_report, validate_profile, validate_profile_with_tol, ConsumptionReport, Economy,
    FeasibilityReport, LinkProfile, NumericUtility, Player, Preference, StrategyProfile,
    Tolerances, Violation,
};
pub use equilibrium::{
    best_response, check_equilibrium, consumption_fixed_point, core_construction, empty_profile,
    enumerate_equilibria, recursive_construction, solve_equilibrium, BestResponseSet, BrStrategy,
    CoreCandidate, DeviationWitness, EnumerationResult, EquilibriumVerdict, FoundEquilibrium,
    Refinement,
};
pub use error::{Error, Result};
pub use graph::{
    cells, classify_core_periphery, closure, components, export_dot, is_nested_split, to_edge_csv,
    CpViolation, NestedSplitVerdict, StructureReport, Undirected,
};
pub use policy::{
    efficient_solution, improving_transfers, inequality_report, law_of_few_csv,
    law_of_few_experiment, personalized_prices, second_best, second_best_linear, welfare,
    EfficientShape, EfficientSolution, InequalityReport, LawOfFewConfig, LawOfFewRow, PairGap,
    PriceScheme, TransferScheme, WealthDistribution,
};

use thiserror::Error;

/// Errors produced by solvers and policy routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The Engel curve is flat at the requested consumption level, so no
    /// income maps to it uniquely.
    #[error("no inverse: Engel curve is flat at public consumption {xbar}")]
    NoInverse { xbar: f64 },

    #[error("fixed point did not converge (residual {residual:.3e} after {sweeps} sweeps)")]
    NonConvergence { residual: f64, sweeps: usize },

    #[error("problem size {n} exceeds the exhaustive-search guard ({max})")]
    SizeGuard { n: usize, max: usize },

    #[error("operation requires identical preferences and private-good prices for all players")]
    Heterogeneous,

    /// The aggregate core consumption equation has no solution for this
    /// member set.
    #[error("no core consumption level solves the aggregate equation for this member set")]
    NoCoreRoot,

    #[error("core candidate rejected: player {player} provides {provision:.6} < linking cost {cost:.6}")]
    CoreProvisionBelowCost {
        player: usize,
        provision: f64,
        cost: f64,
    },

    #[error("assembled profile is not an equilibrium: player {player} gains {gain:.3e} by deviating")]
    CandidateNotEquilibrium { player: usize, gain: f64 },

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("policy verification failed: {0}")]
    PolicyCheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid argument (NaN input, nonpositive mass, bad bounds, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Square-well evaluation at or beyond the infinite walls.
    #[error("infinite-wall region: |x| = {x} >= b/2 = {half_width}")]
    WallRegion { x: f64, half_width: f64 },

    /// No classically forbidden barrier exists at the requested energy.
    #[error("no classically forbidden barrier at energy {energy}")]
    NoBarrier { energy: f64 },

    /// The transcendental level conditions have no root below the barrier.
    #[error("no sub-barrier doublet below V0 = {v0}")]
    NoSubBarrierDoublet { v0: f64 },

    /// A wavefunction assembled from a non-root wavenumber fails to match.
    #[error("matching discontinuity: relative jump {jump:.3e} at the barrier edge")]
    Matching { jump: f64 },

    /// Eigenvalue bracketing failed (e.g. node count mismatch after convergence).
    #[error("bracketing error: {0}")]
    Bracketing(String),

    /// Wavefunction tails do not decay on the supplied grid.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// Spectrum pair with e1 <= e0.
    #[error("energy ordering violated: e1 = {e1} <= e0 = {e0}")]
    EnergyOrdering { e0: f64, e1: f64 },

    /// A requested position lies outside the state's grid.
    #[error("position {x} outside grid [{lo}, {hi}]")]
    OutOfGrid { x: f64, lo: f64, hi: f64 },

    /// Numerical failure (overflow, NaN mid-integration, non-convergence).
    #[error("numerical failure: {0}")]
    Numerics(String),

    /// A discretized quantity did not converge under grid refinement.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Too few samples for the requested statistic.
    #[error("insufficient data: needed {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The parameter fit could not reach its target.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// A pipeline stage failed; carries the stage tag.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with a pipeline stage tag.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

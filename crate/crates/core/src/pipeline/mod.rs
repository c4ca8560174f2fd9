//! Certificate pipelines for relative balls of free products, pullbacks
//! along fiberings, and the end-to-end extension from the relative Cayley
//! graph to the group.

mod extend;
mod fibering;
mod osin;

pub use extend::{extend_group_chain, PipelineParameters, PipelineReport, Stage};
pub use fibering::{pullback_chain, ExplicitFibers, FiberProvider, FiberingInput, GroupFibers};
pub use osin::{ball_chain, find_separating_radius, osin_cover, BallChain, OsinCover, Separation};

use thiserror::Error;

use crate::groups::GroupError;
use crate::metric::{Dist, MetricError};
use crate::search::SearchError;
use crate::witness::WitnessError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("window of radius {radius} is too small for relative radius {n}")]
    WindowTooSmall { radius: u64, n: Dist },
    #[error("no separating radius up to {0}")]
    NotFound(Dist),
    #[error("scale mismatch: {0}")]
    ScaleMismatch(String),
    #[error("no fiber chain for {0}")]
    MissingFiber(String),
    #[error("translation failed: {0}")]
    TranslateFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn check_increasing(scales: &[Dist]) -> Result<(), PipelineError> {
    if scales.windows(2).any(|w| w[0] >= w[1]) || scales.first() == Some(&0) {
        return Err(PipelineError::InvalidInput(format!(
            "scales must be positive and strictly increasing, got {scales:?}"
        )));
    }
    Ok(())
}

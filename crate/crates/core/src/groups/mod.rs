//! Word metrics, balls, cosets and relative Cayley graph windows for free,
//! free abelian, finite cyclic groups and free products of those.

mod element;
mod window;

pub use element::{Element, GroupSpec, Syllable};
pub use window::{
    coset_partition, enumerate_ball, enumerate_ball_with_budget, enumerate_relative_window,
    relative_ball, translate, GroupWindow, TranslationAction, DEFAULT_BUDGET,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("unsupported group: {0}")]
    UnsupportedSpec(String),
    #[error("malformed element {0}")]
    MalformedElement(String),
    #[error("window would exceed the budget of {0} elements")]
    BudgetExceeded(usize),
    #[error("the group has no peripheral subgroups")]
    NoPeripherals,
    #[error("translate leaves the window at {0}")]
    LeavesWindow(String),
}

/// Word length of `g` in `spec`; see [`GroupSpec::word_length`].
pub fn word_length(spec: &GroupSpec, g: &Element) -> Result<u64, GroupError> {
    spec.word_length(g)
}

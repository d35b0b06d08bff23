//! B-spline KAN layers, the MLP baseline and the per-residue probability head.

mod checkpoint;
mod dense;
mod kan;
mod spline;
mod stack;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use dense::{DenseLayer, DenseTape};
pub use kan::{silu, silu_derivative, KanGrads, KanLayer, KanTape};
pub use spline::{bspline_basis, cox_de_boor, LocalBasis, SplineGrid, MAX_DEGREE};
pub use stack::{Gradients, InputScaler, InstanceForward, KanStack, Mode, StackConfig, StackTape};

pub(crate) use kan::logistic;

use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{what}: expected length {expected}, got {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("tape does not belong to the current parameters of this layer")]
    StaleTape,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

static NEXT_LAYER_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn next_layer_id() -> u64 {
    NEXT_LAYER_ID.fetch_add(1, Ordering::Relaxed)
}

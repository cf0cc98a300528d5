//! Reversible Karatsuba multiply-accumulate in linear space, emulated on
//! classical bits with Toffoli and space accounting.
//!
//! The building blocks, bottom up:
//!
//! * [`bitbuf`]: registers and aliasing windows.
//! * [`tracer`]: the Toffoli counter and allocation high-water mark.
//! * [`revarith`]: in-place addition and schoolbook multiply-accumulate,
//!   priced by a [`CostModel`].
//! * [`karatsuba`]: padded piece arrays, the inline recursion and the
//!   top-level compute/fold/uncompute multiplier.
//! * [`analysis`]: data-free cost and space predictions, slope fits and a
//!   classical reference multiplier.

pub mod analysis;
pub mod bitbuf;
pub mod context;
pub mod error;
pub mod karatsuba;
pub mod measure;
pub mod revarith;
pub mod tracer;

pub use analysis::{
    classical_karatsuba_multiply, fit_loglog_slope, predicted_fold_toffoli,
    predicted_recursion_toffoli, predicted_schoolbook_space_bits, predicted_schoolbook_toffoli,
    predicted_space_bits, predicted_toffoli_count, predicted_toffoli_for, Algorithm,
    SpacePrediction, SweepPoint,
};
pub use bitbuf::{BitBuffer, BufferId, RegisterFile, Window};
pub use context::Context;
pub use error::{Error, Result};
pub use karatsuba::{
    add_product_into_pieces, add_product_into_pieces_with, allocate_output_pieces,
    apply_inverse_scaling, apply_scaling, choose_parameters, fold_pieces_into_target, multiply_add,
    multiply_add_schoolbook, multiply_add_with, split_into_padded_pieces, unsplit_padded_pieces,
    Frame, MultiplierConfig, NoProbe, PieceArray, Probe,
};
pub use measure::{trace_multiply, Trace};
pub use revarith::{plus_equal, plus_equal_product_schoolbook, xor_into, Affine, CostModel, Sign};
pub use tracer::{Phase, ResourceLog, Summary};

//! Models, program interpretation and graded satisfaction.

mod eval;
mod model;

pub use eval::{
    interpret_program, sat, sat_all, validity, DiamondMode, EvalError, EvalModes, Evaluator, Interpretation,
    SatResult, TraceRow, Validity,
};
pub use model::{
    state_names, CgdlModel, LatticeField, ModelError, ModelFile, PairField, Signature, TargetField, ValueLiteral,
};

//! State and input transformations, the triangular-form verifier and the
//! constructive pipelines into triangular and chained form.

mod change;
mod pattern;
mod pipeline;

pub use change::{apply_feedback, pushforward, CoordChange, ElementaryStep, Feedback};
pub use pattern::{verify_triangular_form, TriangularCheck, TriangularPattern};
pub use pipeline::{
    adapted_sequence, chained_transform, run_pipeline, verify_adapted_coordinates, PipelineOptions,
    PipelineResult, TranscriptEntry,
};

use alloc::format;
use alloc::string::String;

use crate::symx::Symbol;

/// Two input names that clash with none of `taken`.
pub(crate) fn fresh_inputs<'a>(taken: impl Iterator<Item = &'a Symbol> + Clone) -> [Symbol; 2] {
    let clash = |s: &str| taken.clone().any(|x| &**x == s);
    let mut base = String::from("u");
    while clash(&format!("{}1", base)) || clash(&format!("{}2", base)) {
        base.push('_');
    }
    [format!("{}1", base).into(), format!("{}2", base).into()]
}

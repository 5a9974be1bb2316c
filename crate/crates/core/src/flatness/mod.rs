//! Decision procedures: static feedback linearizability, (extended) chained
//! form, the triangular-form conditions, case classification and flat outputs.

mod output;
mod sequence;
mod structure;
mod system;

use alloc::string::{String, ToString};

use crate::{Error, Result};

pub use output::{flat_output, suggest_flat_output, verify_flat_output, FlatOutputCandidate};
pub(crate) use sequence::derived_flags;
pub use sequence::{
    bracket_step, chain_lengths, check_chained, check_extended_chained, check_linearizable,
    compute_di_sequence, ChainedReport, DiOutcome, DiSequence, ExtendedChainedReport,
};
pub use structure::{
    analyze, check_structure, classify_case, Analysis, Case, CrossCheck, Overall, StructureKind,
    StructureReport,
};
pub use system::AffineSystem;

/// Outcome of one checked condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
    /// The probabilistic engine could not decide.
    Undecided(String),
    /// The condition does not apply (with the reason).
    Omitted(String),
    /// An earlier failure prevented evaluation.
    NotReached,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    /// Passing or not applicable.
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Pass | Verdict::Omitted(_))
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Verdict::Undecided(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Undecided(_) => "cannot decide",
            Verdict::Omitted(_) => "omitted",
            Verdict::NotReached => "not reached",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match self {
            Verdict::Fail(s) | Verdict::Undecided(s) | Verdict::Omitted(s) => Some(s),
            _ => None,
        }
    }

    /// Conjunction: the first failure wins, then the first indecision.
    pub fn all<'a, I: IntoIterator<Item = &'a Verdict>>(parts: I) -> Verdict {
        let mut undecided = None;
        let mut reached = false;
        for v in parts {
            match v {
                Verdict::Fail(_) => return v.clone(),
                Verdict::Undecided(_) if undecided.is_none() => undecided = Some(v.clone()),
                Verdict::NotReached => {}
                _ => reached = true,
            }
        }
        match undecided {
            Some(u) => u,
            None if reached => Verdict::Pass,
            None => Verdict::NotReached,
        }
    }
}

/// Turn a boolean test into a verdict, keeping indecision as data.
pub(crate) fn decide(r: Result<bool>, fail: impl Into<String>) -> Result<Verdict> {
    match r {
        Ok(true) => Ok(Verdict::Pass),
        Ok(false) => Ok(Verdict::Fail(fail.into())),
        Err(e) if undecidable(&e) => Ok(Verdict::Undecided(e.to_string())),
        Err(e) => Err(e),
    }
}

pub(crate) fn undecidable(e: &Error) -> bool {
    e.is_undecided()
}

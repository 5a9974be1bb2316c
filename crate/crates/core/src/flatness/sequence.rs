use alloc::format;
use alloc::vec::Vec;

use super::{decide, AffineSystem, Verdict};
use crate::geom::{
    cauchy_characteristics, derived_flag_step, is_involutive, lie_bracket, lie_flag_step,
    Distribution,
};
use crate::symx::{is_zero, ZeroTestConfig};
use crate::{Error, Result};

/// How the sequence `D_{i+1} = D_i + [a, D_i]` ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiOutcome {
    /// `D_{n3+1}` is the first non-involutive member.
    NonInvolutive { n3: usize },
    /// Every member is involutive and the sequence reaches `T(X)`;
    /// `chains` holds the Brunovsky chain lengths, longest first.
    Linearizable { chains: [usize; 2] },
    /// Every member is involutive but the sequence stalls below `T(X)`.
    NotAccessible { dim: usize },
}

#[derive(Clone, Debug)]
pub struct DiSequence {
    /// `D_1, D_2, ...` up to the member that decided the outcome.
    pub dists: Vec<Distribution>,
    pub outcome: DiOutcome,
}

impl DiSequence {
    pub fn dims(&self) -> Vec<usize> {
        self.dists.iter().map(Distribution::dim).collect()
    }

    pub fn n3(&self) -> Option<usize> {
        match self.outcome {
            DiOutcome::NonInvolutive { n3 } => Some(n3),
            _ => None,
        }
    }
}

/// `D + [v, D]`.
pub fn bracket_step(v: &crate::geom::VectorField, d: &Distribution) -> Result<Distribution> {
    let st = d.states().clone();
    let mut out = d.clone();
    for g in d.generators() {
        if out.is_full() {
            break;
        }
        out.extend([lie_bracket(v, g, &st)])?;
    }
    Ok(out)
}

/// Chain lengths from the dimension increments of a nested sequence:
/// the number of chains of length at least `k` is the `k`-th increment.
pub fn chain_lengths(increments: &[usize]) -> [usize; 2] {
    let count = |j| increments.iter().filter(|&&r| r >= j).count();
    [count(1), count(2)]
}

/// `D_1 = span{b1, b2}`, `D_{i+1} = D_i + [a, D_i]` until the first
/// non-involutive member or saturation.
pub fn compute_di_sequence(sys: &AffineSystem, cfg: &ZeroTestConfig) -> Result<DiSequence> {
    let st = sys.states().clone();
    let mut d = Distribution::span(st, sys.inputs().iter().cloned(), cfg)?;
    if d.dim() != 2 {
        return Err(Error::Precondition(
            "input vector fields are dependent at generic points".into(),
        ));
    }
    let mut dists = Vec::new();
    loop {
        let involutive = is_involutive(&d)?;
        dists.push(d.clone());
        if !involutive {
            let n3 = dists.len() - 1;
            return Ok(DiSequence {
                dists,
                outcome: DiOutcome::NonInvolutive { n3 },
            });
        }
        if d.is_full() {
            let mut prev = 0;
            let inc: Vec<usize> = dists
                .iter()
                .map(|x| {
                    let r = x.dim() - prev;
                    prev = x.dim();
                    r
                })
                .collect();
            return Ok(DiSequence {
                dists,
                outcome: DiOutcome::Linearizable {
                    chains: chain_lengths(&inc),
                },
            });
        }
        let next = bracket_step(sys.drift(), &d)?;
        if next.dim() == d.dim() {
            let dim = d.dim();
            return Ok(DiSequence {
                dists,
                outcome: DiOutcome::NotAccessible { dim },
            });
        }
        d = next;
    }
}

/// All `D_i` involutive and `D_{n-1} = T(X)`.
pub fn check_linearizable(sys: &AffineSystem, cfg: &ZeroTestConfig) -> Result<bool> {
    let seq = compute_di_sequence(sys, cfg)?;
    Ok(matches!(seq.outcome, DiOutcome::Linearizable { .. }))
}

/// Dimension ladders of the derived and Lie flags of `span{b1, b2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainedReport {
    /// `dim D^{(i)}` for `i = 0, ..., n-2`.
    pub derived: Vec<usize>,
    /// `dim D_{(i)}` for `i = 0, ..., n-2`.
    pub lie: Vec<usize>,
    pub derived_ok: bool,
    pub regular_ok: bool,
}

impl ChainedReport {
    pub fn passes(&self) -> bool {
        self.derived_ok && self.regular_ok
    }
}

fn ladder_ok(dims: &[usize]) -> bool {
    dims.iter().enumerate().all(|(i, &d)| d == 2 + i)
}

pub(crate) fn derived_flags(d: &Distribution, upto: usize) -> Result<Vec<Distribution>> {
    let mut out = alloc::vec![d.clone()];
    while out.len() <= upto {
        let last = out.last().unwrap();
        let next = if last.is_full() {
            last.clone()
        } else {
            derived_flag_step(last)?
        };
        out.push(next);
    }
    Ok(out)
}

/// Conditions for a driftless system to be equivalent to the chained form.
pub fn check_chained(sys: &AffineSystem, cfg: &ZeroTestConfig) -> Result<ChainedReport> {
    for e in sys.drift().components() {
        if !is_zero(e, cfg)? {
            return Err(Error::Precondition(format!(
                "chained-form test needs a driftless system; drift has `{}`",
                e
            )));
        }
    }
    chained_ladders(sys, cfg)
}

fn chained_ladders(sys: &AffineSystem, cfg: &ZeroTestConfig) -> Result<ChainedReport> {
    let n = sys.n();
    let top = n.saturating_sub(2);
    let d = Distribution::span(sys.states().clone(), sys.inputs().iter().cloned(), cfg)?;
    let derived: Vec<usize> = derived_flags(&d, top)?
        .iter()
        .map(Distribution::dim)
        .collect();
    let mut lie = alloc::vec![d.dim()];
    let mut cur = d.clone();
    while lie.len() <= top {
        if !cur.is_full() {
            cur = lie_flag_step(&d, &cur)?;
        }
        lie.push(cur.dim());
    }
    Ok(ChainedReport {
        derived_ok: ladder_ok(&derived),
        regular_ok: ladder_ok(&lie),
        derived,
        lie,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedChainedReport {
    pub chained: ChainedReport,
    /// `[a, C(D^{(i)})] ⊂ D^{(i)}` for `i = 1, ..., n-3`.
    pub compatibility: Vec<(usize, Verdict)>,
}

impl ExtendedChainedReport {
    pub fn passes(&self) -> bool {
        self.chained.passes() && self.compatibility.iter().all(|(_, v)| v.is_pass())
    }
}

/// `[a, C(D)] ⊂ D`, checked on the generators of `C(D)`.
pub(crate) fn drift_compatible(
    a: &crate::geom::VectorField,
    d: &Distribution,
) -> Result<(bool, usize)> {
    let c = cauchy_characteristics(d)?;
    let st = d.states().clone();
    for g in c.generators() {
        if !d.contains(&lie_bracket(a, g, &st))? {
            return Ok((false, c.dim()));
        }
    }
    Ok((true, c.dim()))
}

/// Conditions for equivalence to the extended chained form.
pub fn check_extended_chained(
    sys: &AffineSystem,
    cfg: &ZeroTestConfig,
) -> Result<ExtendedChainedReport> {
    let chained = chained_ladders(sys, cfg)?;
    let mut compatibility = Vec::new();
    if chained.passes() {
        let n = sys.n();
        let d = Distribution::span(sys.states().clone(), sys.inputs().iter().cloned(), cfg)?;
        let flags = derived_flags(&d, n.saturating_sub(3))?;
        for (i, di) in flags.iter().enumerate().skip(1) {
            let v = decide(
                drift_compatible(sys.drift(), di).map(|r| r.0),
                format!("[a, C(D^({}))] is not contained in D^({})", i, i),
            )?;
            compatibility.push((i, v));
        }
    }
    Ok(ExtendedChainedReport {
        chained,
        compatibility,
    })
}

//! Evaluation of rational-only trees modulo a 61-bit prime.
//!
//! Zero tests and pointwise ranks only need to know whether values vanish,
//! so rational trees are evaluated in `Z/pZ` at the same sample points.
//! Arithmetic is exact and word-sized; a nonzero value that happens to be
//! divisible by `p` is as unlikely as hitting a root of the polynomial.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::eval::Point;
use super::expr::{Expr, Kind};
use super::Rational;
use crate::{Error, Result};

/// The Mersenne prime `2^61 - 1`.
pub const P: u64 = (1 << 61) - 1;

pub(crate) fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

pub(crate) fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

pub(crate) fn sub(a: u64, b: u64) -> u64 {
    add(a, P - b)
}

fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    acc
}

pub(crate) fn inv(a: u64) -> Result<u64> {
    if a == 0 {
        return Err(Error::DivisionByZero);
    }
    Ok(pow(a, P - 2))
}

fn reduce(n: &BigInt) -> u64 {
    n.mod_floor(&BigInt::from(P)).to_u64().unwrap_or(0)
}

/// Image of a rational in `Z/pZ`; `None` when `p` divides the denominator.
pub fn residue(r: &Rational) -> Option<u64> {
    let d = reduce(r.denom());
    if d == 0 {
        return None;
    }
    Some(mul(reduce(r.numer()), pow(d, P - 2)))
}

struct ModEval<'a, Q: Point + ?Sized> {
    point: &'a Q,
    memo: BTreeMap<usize, u64>,
}

impl<Q: Point + ?Sized> ModEval<'_, Q> {
    fn go(&mut self, e: &Expr) -> Result<u64> {
        if let Some(v) = self.memo.get(&e.node_id()) {
            return Ok(*v);
        }
        let v = match e.kind() {
            Kind::Const(c) => residue(c).ok_or(Error::DivisionByZero)?,
            Kind::Var(s) => {
                let r = self
                    .point
                    .value(s)
                    .ok_or_else(|| Error::Unassigned(s.to_string()))?;
                residue(&r).ok_or(Error::DivisionByZero)?
            }
            Kind::Add(ts) => {
                let mut acc = 0;
                for t in ts {
                    acc = add(acc, self.go(t)?);
                }
                acc
            }
            Kind::Mul(fs) => {
                let mut acc = 1;
                for f in fs {
                    acc = mul(acc, self.go(f)?);
                    if acc == 0 {
                        break;
                    }
                }
                acc
            }
            Kind::Pow(b, k) => {
                let base = self.go(b)?;
                let base = if *k < 0 { inv(base)? } else { base };
                pow(base, k.unsigned_abs() as u64)
            }
            Kind::Func(..) | Kind::Root(..) => {
                return Err(Error::Precondition(
                    "modular evaluation of a non-rational tree".into(),
                ))
            }
        };
        self.memo.insert(e.node_id(), v);
        Ok(v)
    }
}

/// Values of rational-only trees modulo [`P`], sharing the node cache.
///
/// A pole modulo `p` is reported as [`Error::DivisionByZero`].
pub(crate) fn eval_mod_many_at<Q: Point + ?Sized>(es: &[Expr], p: &Q) -> Result<Vec<u64>> {
    let mut ev = ModEval {
        point: p,
        memo: BTreeMap::new(),
    };
    es.iter().map(|e| ev.go(e)).collect()
}

/// True iff every tree is rational-only and so admits modular evaluation.
pub(crate) fn modular(es: &[Expr]) -> bool {
    es.iter().all(|e| !e.is_approximate())
}

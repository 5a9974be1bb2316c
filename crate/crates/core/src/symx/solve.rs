use alloc::string::ToString;

use num_traits::ToPrimitive;

use super::diff::differentiate;
use super::eval::eval;
use super::expr::{Expr, Symbol};
use super::subst::substitute_one;
use super::zero::{depends_on, is_resample, is_zero, sample_points, ZeroTestConfig};
use crate::{Error, Result};

fn not_invertible(target: &str, def: &Expr) -> Error {
    Error::NotInvertible {
        target: target.to_string(),
        expr: def.to_string(),
    }
}

/// Coefficients `(alpha, beta)` with `def = alpha + beta * t`, if affine in `t`.
fn affine_split(def: &Expr, t: &Symbol, cfg: &ZeroTestConfig) -> Result<Option<(Expr, Expr)>> {
    let beta = differentiate(def, t);
    if depends_on(&beta, t, cfg)? {
        return Ok(None);
    }
    for probe in [Expr::zero(), Expr::one()] {
        let b = substitute_one(&beta, t, &probe);
        let a = substitute_one(def, t, &probe) - &b * &probe;
        let check = &a + &b * Expr::var(t.clone()) - def;
        match is_zero(&check, cfg) {
            Ok(true) => return Ok(Some((a, b))),
            Ok(false) => {}
            Err(e) if e.is_undecided() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Exponent `k` and cofactor `c` with `def = c * t^k`, `c` free of `t`.
fn power_split(def: &Expr, t: &Symbol, cfg: &ZeroTestConfig) -> Result<Option<(i32, Expr)>> {
    let tv = Expr::var(t.clone());
    let ratio = &tv * differentiate(def, t) / def;
    let mut k = None;
    for p in sample_points(cfg) {
        match eval(&ratio, &p) {
            Ok(v) => {
                let r = match v.as_exact() {
                    Some(r) => r.clone(),
                    None => return Ok(None),
                };
                if !r.is_integer() {
                    return Ok(None);
                }
                k = r.numer().to_i32();
                break;
            }
            Err(e) if is_resample(&e) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some(k) = k.filter(|k| *k != 0) else {
        return Ok(None);
    };
    let c = def * tv.pow(-k);
    if depends_on(&c, t, cfg)? {
        return Ok(None);
    }
    // `c` may still mention `t` in cancelling form; pin it to a probe value.
    for probe in [Expr::one(), Expr::int(2), Expr::int(3)] {
        let pinned = substitute_one(&c, t, &probe);
        match is_zero(&(&pinned - &c), cfg) {
            Ok(true) => return Ok(Some((k, pinned))),
            Ok(false) => {}
            Err(e) if e.is_undecided() || is_resample(&e) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn solve(
    new: &Symbol,
    def: &Expr,
    target: &Symbol,
    cfg: &ZeroTestConfig,
    local: bool,
) -> Result<Expr> {
    if !depends_on(def, target, cfg)? {
        return Err(not_invertible(target, def));
    }
    let nv = Expr::var(new.clone());
    let sol = if let Some((a, b)) = affine_split(def, target, cfg)? {
        (nv - a) / b
    } else if let Some((k, c)) = power_split(def, target, cfg)? {
        let z = nv / c;
        match k {
            1 => z,
            -1 => z.recip(),
            _ if !local => return Err(not_invertible(target, def)),
            _ => {
                let r = z.root(k.unsigned_abs());
                if k.is_negative() {
                    r.recip()
                } else {
                    r
                }
            }
        }
    } else {
        return Err(not_invertible(target, def));
    };
    let back = substitute_one(def, target, &sol) - Expr::var(new.clone());
    if !is_zero(&back, cfg)? {
        return Err(not_invertible(target, def));
    }
    Ok(sol)
}

/// Solve `new = def` for the variable `target`.
///
/// Succeeds when `def` is affine in `target`, or of the form
/// `c * target^k` with `k = ±1` and `c` free of `target`. The result is
/// verified by back-substitution.
pub fn solve_for(new: &Symbol, def: &Expr, target: &Symbol, cfg: &ZeroTestConfig) -> Result<Expr> {
    solve(new, def, target, cfg, false)
}

/// Like [`solve_for`], but also inverts `c * target^k` for `|k| >= 2` on the
/// principal-root branch (a local inverse around generic points).
pub fn solve_for_local(
    new: &Symbol,
    def: &Expr,
    target: &Symbol,
    cfg: &ZeroTestConfig,
) -> Result<Expr> {
    solve(new, def, target, cfg, true)
}

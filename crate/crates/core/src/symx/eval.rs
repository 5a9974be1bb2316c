use alloc::collections::BTreeMap;
use alloc::string::ToString;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Func, Kind, Symbol};
use super::Rational;
use crate::{Error, Result};

/// Working precision of the floating-point path, in bits.
pub(crate) const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Anything that assigns rational values to variable names.
pub trait Point {
    fn value(&self, name: &str) -> Option<Rational>;
}

/// Explicit finite assignment.
pub type RationalPoint = BTreeMap<Symbol, Rational>;

impl Point for RationalPoint {
    fn value(&self, name: &str) -> Option<Rational> {
        self.get(name).cloned()
    }
}

/// Result of evaluating an expression at a point.
#[derive(Clone, Debug)]
pub enum Value {
    /// Rational-only tree: exact.
    Exact(Rational),
    /// A transcendental or root node was involved. `scale` bounds the
    /// magnitude of intermediate terms and is the reference for relative
    /// zero classification.
    Approx { value: BigFloat, scale: BigFloat },
}

pub(crate) fn big_to_float(n: &BigInt) -> BigFloat {
    let base = BigFloat::from_u128(1u128 << 64, PREC);
    let (sign, digits) = n.to_u64_digits();
    let mut acc = BigFloat::from_u64(0, PREC);
    for d in digits.iter().rev() {
        acc = acc
            .mul(&base, PREC, RM)
            .add(&BigFloat::from_u64(*d, PREC), PREC, RM);
    }
    if sign == num_bigint::Sign::Minus {
        acc = acc.neg();
    }
    acc
}

pub(crate) fn rat_to_float(r: &Rational) -> BigFloat {
    big_to_float(r.numer()).div(&big_to_float(r.denom()), PREC, RM)
}

fn ldexp(mut m: f64, mut e: i64) -> f64 {
    while e > 0 {
        let step = e.min(60);
        m *= (1u64 << step) as f64;
        e -= step;
        if m.is_infinite() {
            return m;
        }
    }
    while e < 0 {
        let step = (-e).min(60);
        m /= (1u64 << step) as f64;
        e += step;
        if m == 0.0 {
            return m;
        }
    }
    m
}

pub(crate) fn float_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().unwrap_or(&0) as u64;
    let m = ldexp(top as f64, -64);
    let v = ldexp(m, i64::from(exp));
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

impl Value {
    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Approx { value, .. } => float_to_f64(value),
        }
    }

    pub(crate) fn to_float(&self) -> BigFloat {
        match self {
            Value::Exact(r) => rat_to_float(r),
            Value::Approx { value, .. } => value.clone(),
        }
    }

    /// Zero classification: exact for rationals; `|v| <= tol * scale` otherwise.
    pub fn is_zero_within(&self, tol: &BigFloat) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Approx { value, scale } => {
                if value.is_zero() {
                    return true;
                }
                let bound = tol.mul(scale, PREC, RM);
                value.abs().cmp(&bound).is_some_and(|c| c <= 0)
            }
        }
    }
}

fn approx(value: BigFloat, scale: BigFloat) -> Result<Value> {
    if value.is_nan() || value.is_inf() || scale.is_nan() || scale.is_inf() {
        return Err(Error::Domain);
    }
    Ok(Value::Approx { value, scale })
}

struct Eval<'a, P: Point + ?Sized> {
    point: &'a P,
    memo: BTreeMap<usize, Value>,
    consts: Option<Consts>,
}

impl<P: Point + ?Sized> Eval<'_, P> {
    fn consts(&mut self) -> &mut Consts {
        self.consts
            .get_or_insert_with(|| Consts::new().expect("constant cache allocation"))
    }

    fn go(&mut self, e: &Expr) -> Result<Value> {
        if let Some(v) = self.memo.get(&e.node_id()) {
            return Ok(v.clone());
        }
        let v = self.compute(e)?;
        self.memo.insert(e.node_id(), v.clone());
        Ok(v)
    }

    fn compute(&mut self, e: &Expr) -> Result<Value> {
        match e.kind() {
            Kind::Const(c) => Ok(Value::Exact(c.clone())),
            Kind::Var(s) => self
                .point
                .value(s)
                .map(Value::Exact)
                .ok_or_else(|| Error::Unassigned(s.to_string())),
            Kind::Add(ts) => {
                let mut exact = Rational::zero();
                let mut fl: Option<(BigFloat, BigFloat)> = None;
                for t in ts {
                    match self.go(t)? {
                        Value::Exact(r) => exact += r,
                        Value::Approx { value, scale } => {
                            let (v, s) = fl.get_or_insert_with(|| {
                                (BigFloat::from_u64(0, PREC), BigFloat::from_u64(0, PREC))
                            });
                            *v = v.add(&value, PREC, RM);
                            *s = s.add(&scale, PREC, RM);
                        }
                    }
                }
                match fl {
                    None => Ok(Value::Exact(exact)),
                    Some((v, s)) => {
                        let ex = rat_to_float(&exact);
                        approx(v.add(&ex, PREC, RM), s.add(&ex.abs(), PREC, RM))
                    }
                }
            }
            Kind::Mul(fs) => {
                let mut exact = Rational::one();
                let mut fl: Option<(BigFloat, BigFloat)> = None;
                for f in fs {
                    match self.go(f)? {
                        Value::Exact(r) => exact *= r,
                        Value::Approx { value, scale } => {
                            let (v, s) = fl.get_or_insert_with(|| {
                                (BigFloat::from_u64(1, PREC), BigFloat::from_u64(1, PREC))
                            });
                            *v = v.mul(&value, PREC, RM);
                            *s = s.mul(&scale, PREC, RM);
                        }
                    }
                }
                match fl {
                    None => Ok(Value::Exact(exact)),
                    Some((v, s)) => {
                        let ex = rat_to_float(&exact);
                        approx(v.mul(&ex, PREC, RM), s.mul(&ex.abs(), PREC, RM))
                    }
                }
            }
            Kind::Pow(b, k) => match self.go(b)? {
                Value::Exact(r) => {
                    if r.is_zero() && *k < 0 {
                        return Err(Error::DivisionByZero);
                    }
                    let base = if *k < 0 { r.recip() } else { r };
                    Ok(Value::Exact(num_traits::pow(
                        base,
                        k.unsigned_abs() as usize,
                    )))
                }
                Value::Approx { value, scale } => {
                    if value.is_zero() && *k < 0 {
                        return Err(Error::DivisionByZero);
                    }
                    let n = k.unsigned_abs() as usize;
                    let v = value.powi(n, PREC, RM);
                    if *k > 0 {
                        approx(v, scale.powi(n, PREC, RM))
                    } else {
                        let inv = v.reciprocal(PREC, RM);
                        let s = inv.abs();
                        approx(inv, s)
                    }
                }
            },
            Kind::Func(f, a) => {
                let arg = self.go(a)?;
                if let (Func::Ln, Value::Exact(r)) = (f, &arg) {
                    if !r.is_positive() {
                        return Err(Error::Domain);
                    }
                }
                let x = arg.to_float();
                if *f == Func::Ln && !x.is_positive() {
                    return Err(Error::Domain);
                }
                let cc = self.consts();
                let v = match f {
                    Func::Sin => x.sin(PREC, RM, cc),
                    Func::Cos => x.cos(PREC, RM, cc),
                    Func::Exp => x.exp(PREC, RM, cc),
                    Func::Ln => x.ln(PREC, RM, cc),
                };
                let one = BigFloat::from_u64(1, PREC);
                let s = if v.abs().cmp(&one).is_some_and(|c| c > 0) {
                    v.abs()
                } else {
                    one
                };
                approx(v, s)
            }
            Kind::Root(a, k) => {
                let arg = self.go(a)?;
                if let Value::Exact(r) = &arg {
                    if r.is_negative() && k % 2 == 0 {
                        return Err(Error::Domain);
                    }
                    let root = Expr::constant(r.clone()).root(*k);
                    if let Some(c) = root.as_const() {
                        return Ok(Value::Exact(c.clone()));
                    }
                }
                let x = arg.to_float();
                if x.is_negative() && k % 2 == 0 {
                    return Err(Error::Domain);
                }
                let ax = x.abs();
                let v = if ax.is_zero() {
                    ax
                } else if *k == 2 {
                    ax.sqrt(PREC, RM)
                } else {
                    let kf = BigFloat::from_u32(*k, PREC);
                    let cc = self.consts();
                    let l = ax.ln(PREC, RM, cc).div(&kf, PREC, RM);
                    l.exp(PREC, RM, cc)
                };
                let v = if x.is_negative() { v.neg() } else { v };
                let s = v.abs();
                approx(v, s)
            }
        }
    }
}

/// Evaluate `e` at `p`. Rational-only trees evaluate exactly; trees with
/// `sin cos exp ln root` use 256-bit binary floating point.
///
/// Errors: [`Error::DivisionByZero`] at a pole, [`Error::Domain`] outside the
/// domain of `ln` or an even root, [`Error::Unassigned`] for a missing name.
pub fn eval<P: Point + ?Sized>(e: &Expr, p: &P) -> Result<Value> {
    Eval {
        point: p,
        memo: BTreeMap::new(),
        consts: None,
    }
    .go(e)
}

/// Evaluate several expressions at one point, sharing the node cache.
pub(crate) fn eval_many_at<P: Point + ?Sized>(
    es: &[Expr],
    p: &P,
) -> Result<alloc::vec::Vec<Value>> {
    let mut ev = Eval {
        point: p,
        memo: BTreeMap::new(),
        consts: None,
    };
    es.iter().map(|e| ev.go(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symx::{parse, Vocabulary};

    fn at(pairs: &[(&str, i64, i64)]) -> RationalPoint {
        pairs
            .iter()
            .map(|(n, a, b)| (Symbol::from(*n), Rational::new((*a).into(), (*b).into())))
            .collect()
    }

    #[test]
    fn exact_values() {
        let v = Vocabulary::new(["x", "x4"]);
        let e = parse("(x+1)/(x-1)", &v).unwrap();
        assert_eq!(
            eval(&e, &at(&[("x", 3, 1)])).unwrap().as_exact().unwrap(),
            &Rational::from_integer(2.into())
        );
        let e = parse("x4 + 1", &v).unwrap();
        assert_eq!(
            eval(&e, &at(&[("x4", 0, 1)])).unwrap().as_exact().unwrap(),
            &Rational::from_integer(1.into())
        );
        let e = parse("x**2 - 2", &v).unwrap();
        assert_eq!(
            eval(&e, &at(&[("x", 3, 2)])).unwrap().as_exact().unwrap(),
            &Rational::new(1.into(), 4.into())
        );
    }

    #[test]
    fn poles_and_domains() {
        let v = Vocabulary::new(["x"]);
        assert_eq!(
            eval(&parse("1/(x-1)", &v).unwrap(), &at(&[("x", 1, 1)])).unwrap_err(),
            Error::DivisionByZero
        );
        assert_eq!(
            eval(&parse("ln(x)", &v).unwrap(), &at(&[("x", -1, 1)])).unwrap_err(),
            Error::Domain
        );
        assert!(matches!(
            eval(&parse("x", &v).unwrap(), &at(&[])),
            Err(Error::Unassigned(_))
        ));
    }

    #[test]
    fn float_path() {
        let v = Vocabulary::new(["x"]);
        let e = parse("sin(x)**2 + cos(x)**2", &v).unwrap();
        let r = eval(&e, &at(&[("x", 7, 3)])).unwrap();
        assert!((r.to_f64() - 1.0).abs() < 1e-15);
        let e = parse("root(x, 3)", &v).unwrap();
        assert!(
            (eval(&e, &at(&[("x", -27, 2)])).unwrap().to_f64() + 2.381101577952299).abs() < 1e-12
        );
        let e = parse("root(x, 2)", &v).unwrap();
        assert!(eval(&e, &at(&[("x", 9, 4)])).unwrap().is_exact());
    }
}

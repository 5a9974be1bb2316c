//! Pointwise echelon forms at random rational points.
//!
//! A [`SampledSpan`] keeps a list of expression rows together with their
//! numeric echelon form at a growing set of sample points. Membership and
//! independence questions are answered at the points where the stored rows
//! attain their generic rank.

use alloc::format;
use alloc::vec::Vec;

use astro_float::{BigFloat, RoundingMode};
use num_traits::Zero;

use crate::symx::modp;
use crate::symx::{eval_many_at, eval_mod_many_at, is_resample, modular};
use crate::symx::{Expr, Rational, SamplePoint, Value, ZeroTestConfig};
use crate::{Error, Result};

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Clone, Debug)]
enum Echelon {
    /// Reduced rows over Z/pZ for rational-only rows.
    Modular(Vec<(usize, Vec<u64>)>),
    /// Reduced rows over Q with their pivot columns.
    Exact(Vec<(usize, Vec<Rational>)>),
    /// Float rows plus the largest input magnitude seen (zero reference).
    Float(Vec<(usize, Vec<BigFloat>)>, BigFloat),
}

fn fzero() -> BigFloat {
    BigFloat::from_u64(0, PREC)
}

fn fle(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b).is_some_and(|c| c <= 0)
}

impl Echelon {
    fn rank(&self) -> usize {
        match self {
            Echelon::Modular(r) => r.len(),
            Echelon::Exact(r) => r.len(),
            Echelon::Float(r, _) => r.len(),
        }
    }

    fn reduce_row(&mut self, v: &Row, tol: &BigFloat) -> Option<Residual> {
        match (self, v) {
            (Echelon::Modular(rows), Row::Modular(v)) => {
                let mut w = v.clone();
                for (p, r) in rows.iter() {
                    let f = w[*p];
                    if f != 0 {
                        for (wj, rj) in w.iter_mut().zip(r) {
                            *wj = modp::sub(*wj, modp::mul(f, *rj));
                        }
                    }
                }
                let piv = w.iter().position(|x| *x != 0)?;
                let inv = modp::inv(w[piv]).ok()?;
                for x in w.iter_mut() {
                    *x = modp::mul(*x, inv);
                }
                Some(Residual::Modular(piv, w))
            }
            (ech, Row::Real(v)) => ech.reduce(v, tol),
            (_, Row::Modular(_)) => unreachable!("modular rows only meet modular echelons"),
        }
    }

    fn to_float(&mut self) {
        if let Echelon::Exact(rows) = self {
            let mut scale = fzero();
            let conv: Vec<(usize, Vec<BigFloat>)> = rows
                .iter()
                .map(|(p, r)| {
                    let fr: Vec<BigFloat> = r.iter().map(crate::symx::rat_to_float).collect();
                    for x in &fr {
                        if !fle(&x.abs(), &scale) {
                            scale = x.abs();
                        }
                    }
                    (*p, fr)
                })
                .collect();
            *self = Echelon::Float(conv, scale);
        }
    }

    /// Residual of `v` after reduction, or `None` when it reduces to zero.
    fn reduce(&mut self, v: &[Value], tol: &BigFloat) -> Option<Residual> {
        let all_exact = v.iter().all(Value::is_exact);
        if !all_exact {
            self.to_float();
        }
        match self {
            Echelon::Exact(rows) => {
                let mut w: Vec<Rational> =
                    v.iter().map(|x| x.as_exact().unwrap().clone()).collect();
                for (p, r) in rows.iter() {
                    if !w[*p].is_zero() {
                        let f = w[*p].clone();
                        for (wj, rj) in w.iter_mut().zip(r) {
                            if !rj.is_zero() {
                                *wj -= &f * rj;
                            }
                        }
                    }
                }
                let piv = w.iter().position(|x| !x.is_zero())?;
                let inv = w[piv].recip();
                for x in w.iter_mut() {
                    *x *= &inv;
                }
                Some(Residual::Exact(piv, w))
            }
            Echelon::Float(rows, scale) => {
                let mut w: Vec<BigFloat> = v.iter().map(Value::to_float).collect();
                let mut sc = scale.clone();
                for x in &w {
                    if !fle(&x.abs(), &sc) {
                        sc = x.abs();
                    }
                }
                for (p, r) in rows.iter() {
                    if !w[*p].is_zero() {
                        let f = w[*p].clone();
                        for (wj, rj) in w.iter_mut().zip(r) {
                            *wj = wj.sub(&f.mul(rj, PREC, RM), PREC, RM);
                        }
                    }
                }
                let thr = tol.mul(&sc, PREC, RM);
                let mut best: Option<(usize, BigFloat)> = None;
                for (j, x) in w.iter().enumerate() {
                    let a = x.abs();
                    if fle(&a, &thr) {
                        continue;
                    }
                    if best.as_ref().map_or(true, |(_, b)| !fle(&a, b)) {
                        best = Some((j, a));
                    }
                }
                let (piv, _) = best?;
                let inv = w[piv].reciprocal(PREC, RM);
                for x in w.iter_mut() {
                    *x = x.mul(&inv, PREC, RM);
                }
                w[piv] = BigFloat::from_u64(1, PREC);
                Some(Residual::Float(piv, w, sc))
            }
            Echelon::Modular(_) => unreachable!("real rows never meet modular echelons"),
        }
    }

    fn insert(&mut self, r: Residual) {
        match (self, r) {
            (Echelon::Modular(rows), Residual::Modular(p, w)) => {
                for (_, row) in rows.iter_mut() {
                    let f = row[p];
                    if f != 0 {
                        for (x, y) in row.iter_mut().zip(&w) {
                            *x = modp::sub(*x, modp::mul(f, *y));
                        }
                    }
                }
                rows.push((p, w));
            }
            (Echelon::Exact(rows), Residual::Exact(p, w)) => {
                for (_, row) in rows.iter_mut() {
                    if !row[p].is_zero() {
                        let f = row[p].clone();
                        for (x, y) in row.iter_mut().zip(&w) {
                            if !y.is_zero() {
                                *x -= &f * y;
                            }
                        }
                    }
                }
                rows.push((p, w));
            }
            (Echelon::Float(rows, scale), Residual::Float(p, w, sc)) => {
                for (_, row) in rows.iter_mut() {
                    if !row[p].is_zero() {
                        let f = row[p].clone();
                        for (x, y) in row.iter_mut().zip(&w) {
                            *x = x.sub(&f.mul(y, PREC, RM), PREC, RM);
                        }
                        row[p] = fzero();
                    }
                }
                rows.push((p, w));
                *scale = sc;
            }
            _ => unreachable!("residual kind matches echelon kind"),
        }
    }
}

enum Residual {
    Modular(usize, Vec<u64>),
    Exact(usize, Vec<Rational>),
    Float(usize, Vec<BigFloat>, BigFloat),
}

/// Values of one row at one point.
enum Row {
    Modular(Vec<u64>),
    Real(Vec<Value>),
}

#[derive(Clone, Debug)]
struct PointState {
    point: SamplePoint,
    /// False once some stored row could not be evaluated here.
    usable: bool,
    ech: Echelon,
}

/// A growing set of expression rows with cached pointwise echelon forms.
#[derive(Clone, Debug)]
pub struct SampledSpan {
    cfg: ZeroTestConfig,
    tol: BigFloat,
    cols: usize,
    rows: Vec<Vec<Expr>>,
    points: Vec<PointState>,
    next_index: u64,
    /// All rows seen so far are rational-only: echelons live in Z/pZ.
    modular: bool,
}

impl SampledSpan {
    pub fn new(cols: usize, cfg: &ZeroTestConfig) -> Self {
        SampledSpan {
            cfg: cfg.clone(),
            tol: BigFloat::from_f64(cfg.float_tolerance, PREC),
            cols,
            rows: Vec::new(),
            points: Vec::new(),
            next_index: 0,
            modular: true,
        }
    }

    /// Independent rows kept so far.
    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn config(&self) -> &ZeroTestConfig {
        &self.cfg
    }

    fn new_point(&mut self) -> Option<usize> {
        if self.next_index >= self.cfg.attempt_budget() as u64 {
            return None;
        }
        let point = SamplePoint::new(&self.cfg, self.next_index);
        self.next_index += 1;
        let st = self.fill(point);
        self.points.push(st);
        Some(self.points.len() - 1)
    }

    fn values(&self, v: &[Expr], point: &SamplePoint) -> Result<Row> {
        if self.modular {
            eval_mod_many_at(v, point).map(Row::Modular)
        } else {
            eval_many_at(v, point).map(Row::Real)
        }
    }

    /// Echelon form of the stored rows at `point`.
    fn fill(&self, point: SamplePoint) -> PointState {
        let mut st = PointState {
            point,
            usable: true,
            ech: if self.modular {
                Echelon::Modular(Vec::new())
            } else {
                Echelon::Exact(Vec::new())
            },
        };
        for r in &self.rows {
            match self.values(r, &st.point) {
                Ok(vals) => {
                    if let Some(res) = st.ech.reduce_row(&vals, &self.tol) {
                        st.ech.insert(res);
                    }
                }
                Err(_) => {
                    st.usable = false;
                    break;
                }
            }
        }
        st
    }

    /// Switch to rational or float echelons once a row needs them.
    fn admit(&mut self, v: &[Expr]) {
        if self.modular && !modular(v) {
            self.modular = false;
            let pts: Vec<SamplePoint> = self.points.iter().map(|s| s.point.clone()).collect();
            self.points = pts.into_iter().map(|p| self.fill(p)).collect();
        }
    }

    /// Decide whether `v` lies in the span of the stored rows.
    ///
    /// Returns the membership verdict and, when `v` is independent, the
    /// index of a witnessing point with its residual.
    fn classify(&mut self, v: &[Expr]) -> Result<(bool, Option<usize>)> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        if v.iter().all(Expr::is_zero_literal) {
            return Ok((true, None));
        }
        self.admit(v);
        let k = self.rows.len();
        let mut good = 0;
        let mut idx = 0;
        loop {
            if idx == self.points.len() && self.new_point().is_none() {
                break;
            }
            let st = &self.points[idx];
            idx += 1;
            if !st.usable || st.ech.rank() != k {
                continue;
            }
            let vals = match self.values(v, &st.point) {
                Ok(vals) => vals,
                Err(e) if is_resample(&e) => continue,
                Err(e) => return Err(e),
            };
            let mut probe = st.ech.clone();
            if probe.reduce_row(&vals, &self.tol).is_some() {
                return Ok((false, Some(idx - 1)));
            }
            good += 1;
            if good == self.cfg.samples {
                return Ok((true, None));
            }
        }
        Err(Error::CannotDecide(format!(
            "span membership: only {} of {} admissible sample points",
            good, self.cfg.samples
        )))
    }

    /// Membership of `v` in the span (generic-point semantics).
    pub fn contains(&mut self, v: &[Expr]) -> Result<bool> {
        Ok(self.classify(v)?.0)
    }

    /// Append `v` if it is independent of the stored rows; returns whether it was added.
    pub fn push(&mut self, v: Vec<Expr>) -> Result<bool> {
        if self.classify(&v)?.0 {
            return Ok(false);
        }
        for i in 0..self.points.len() {
            if !self.points[i].usable {
                continue;
            }
            match self.values(&v, &self.points[i].point) {
                Ok(vals) => {
                    let st = &mut self.points[i];
                    if let Some(res) = st.ech.reduce_row(&vals, &self.tol) {
                        st.ech.insert(res);
                    }
                }
                Err(_) => self.points[i].usable = false,
            }
        }
        self.rows.push(v);
        Ok(true)
    }
}

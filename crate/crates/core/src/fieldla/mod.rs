//! Linear algebra over the field of functions: generic rank, span
//! membership and nullspaces of expression matrices.

mod sampled;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::symx::{is_zero, Expr, Kind, Rational, ZeroTestConfig};
use crate::{Error, Result};

pub use sampled::SampledSpan;

/// Dense matrix of expressions, row-major.
#[derive(Clone, PartialEq)]
pub struct FnMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl FnMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FnMatrix {
            rows,
            cols,
            data: alloc::vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FnMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Expr::one());
        }
        m
    }

    /// Build from rows; all rows must have `cols` entries.
    pub fn from_rows(rows: Vec<Vec<Expr>>, cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend(r.iter().cloned());
        }
        Ok(FnMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn row(&self, i: usize) -> &[Expr] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Expr>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> FnMatrix {
        let mut t = FnMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Result<Vec<Expr>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                Expr::sum(
                    self.row(i)
                        .iter()
                        .zip(v)
                        .map(|(a, b)| a * b)
                        .collect::<Vec<_>>(),
                )
            })
            .collect())
    }

    pub fn mul(&self, other: &FnMatrix) -> Result<FnMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FnMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let terms: Vec<Expr> = (0..self.cols)
                    .map(|k| self.get(i, k) * other.get(k, j))
                    .collect();
                out.set(i, j, Expr::sum(terms));
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for FnMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FnMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for (j, e) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", e)?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Rank over the function field: the largest exact rank over the sample points.
pub fn generic_rank(m: &FnMatrix, cfg: &ZeroTestConfig) -> Result<usize> {
    let mut s = SampledSpan::new(m.ncols(), cfg);
    for i in 0..m.nrows() {
        s.push(m.row(i).to_vec())?;
        if s.rank() == m.ncols() {
            break;
        }
    }
    Ok(s.rank())
}

/// True iff appending `v` as a row does not raise the generic rank of `m`.
pub fn in_span(v: &[Expr], m: &FnMatrix, cfg: &ZeroTestConfig) -> Result<bool> {
    let mut s = SampledSpan::new(m.ncols(), cfg);
    for i in 0..m.nrows() {
        s.push(m.row(i).to_vec())?;
    }
    s.contains(v)
}

fn is_zero_entry(e: &Expr, cfg: &ZeroTestConfig) -> Result<bool> {
    if e.is_zero_literal() {
        return Ok(true);
    }
    if e.as_const().is_some() {
        return Ok(false);
    }
    is_zero(e, cfg)
}

/// Reduced row echelon form by symbolic Gauss-Jordan elimination.
///
/// Pivots are chosen column by column; a constant nonzero entry is
/// preferred, otherwise the first entry whose zero test fails. Entries that
/// test zero are replaced by a literal `0`. Returns the reduced matrix and
/// the pivot columns.
pub fn row_reduce(m: &FnMatrix, cfg: &ZeroTestConfig) -> Result<(FnMatrix, Vec<usize>)> {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut pick = None;
        for i in r..rows {
            if a.get(i, c).as_const().is_some_and(|x| !x.is_zero()) {
                pick = Some(i);
                break;
            }
        }
        if pick.is_none() {
            for i in r..rows {
                if is_zero_entry(a.get(i, c), cfg)? {
                    a.set(i, c, Expr::zero());
                } else {
                    pick = Some(i);
                    break;
                }
            }
        }
        let Some(p) = pick else { continue };
        if p != r {
            for j in 0..cols {
                let t = a.get(p, j).clone();
                a.set(p, j, a.get(r, j).clone());
                a.set(r, j, t);
            }
        }
        let inv = a.get(r, c).recip();
        for j in 0..cols {
            if j == c {
                a.set(r, j, Expr::one());
            } else if !a.get(r, j).is_zero_literal() {
                a.set(r, j, a.get(r, j) * &inv);
            }
        }
        for i in 0..rows {
            if i == r || a.get(i, c).is_zero_literal() {
                continue;
            }
            let f = a.get(i, c).clone();
            for j in 0..cols {
                if j == c {
                    a.set(i, j, Expr::zero());
                } else if !a.get(r, j).is_zero_literal() {
                    let e = a.get(i, j) - &f * a.get(r, j);
                    let e = if is_zero_entry(&e, cfg)? {
                        Expr::zero()
                    } else {
                        e
                    };
                    a.set(i, j, e);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok((a, pivots))
}

/// Negative-power factors of `e` as `(base, exponent magnitude)`.
fn denominators(e: &Expr) -> Vec<(Expr, i32)> {
    let mut out = Vec::new();
    let mut push = |f: &Expr| {
        if let Kind::Pow(b, k) = f.kind() {
            if *k < 0 {
                out.push((b.clone(), -*k));
            }
        }
    };
    match e.kind() {
        Kind::Mul(fs) => fs.iter().for_each(&mut push),
        _ => push(e),
    }
    out
}

fn const_denominator(e: &Expr) -> BigInt {
    match e.kind() {
        Kind::Const(c) => c.denom().clone(),
        Kind::Mul(fs) => fs[0]
            .as_const()
            .map_or_else(BigInt::one, |c| c.denom().clone()),
        _ => BigInt::one(),
    }
}

/// Multiply `v` by the product of all syntactic denominators of its entries.
fn clear_denominators(v: Vec<Expr>) -> Vec<Expr> {
    let nz: Vec<&Expr> = v.iter().filter(|e| !e.is_zero_literal()).collect();
    if nz.is_empty() {
        return v;
    }
    let mut common: Vec<(Expr, i32)> = Vec::new();
    for e in &nz {
        for (b, k) in denominators(e) {
            match common.iter_mut().find(|(c, _)| *c == b) {
                Some((_, m)) => *m = (*m).max(k),
                None => common.push((b, k)),
            }
        }
    }
    let lcm = nz
        .iter()
        .fold(BigInt::one(), |acc, e| acc.lcm(&const_denominator(e)));
    if common.is_empty() && lcm.is_one() {
        return v;
    }
    let mut factors: Vec<Expr> = common.into_iter().map(|(b, k)| b.pow(k)).collect();
    factors.push(Expr::constant(Rational::from_integer(lcm)));
    let scale = Expr::product(factors);
    v.into_iter().map(|e| &e * &scale).collect()
}

/// Basis of `{v : m v = 0}` over the function field.
///
/// Every returned vector is checked by zero-testing `m v`, and the count is
/// checked against `cols - generic_rank(m)`.
pub fn nullspace(m: &FnMatrix, cfg: &ZeroTestConfig) -> Result<Vec<Vec<Expr>>> {
    let cols = m.ncols();
    let (red, pivots) = row_reduce(m, cfg)?;
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = alloc::vec![Expr::zero(); cols];
        v[f] = Expr::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -red.get(i, f);
        }
        basis.push(clear_denominators(v));
    }
    for v in &basis {
        for e in m.mul_vec(v)? {
            if !is_zero_entry(&e, cfg)? {
                return Err(Error::CannotDecide(format!(
                    "nullspace vector failed verification: {}",
                    e
                )));
            }
        }
    }
    let rank = generic_rank(m, cfg)?;
    if rank + basis.len() != cols {
        return Err(Error::CannotDecide(format!(
            "elimination found rank {} but sampling found {}",
            cols - basis.len(),
            rank
        )));
    }
    Ok(basis)
}

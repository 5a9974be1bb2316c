use alloc::format;
use alloc::vec::Vec;

use super::{lie_bracket, Codistribution, Distribution, OneForm, VectorField};
use crate::fieldla::{nullspace, FnMatrix};
use crate::symx::{Expr, ZeroTestConfig};
use crate::{Error, Result};

/// `D^{(1)} = D + [D, D]`.
pub fn derived_flag_step(d: &Distribution) -> Result<Distribution> {
    let st = d.states().clone();
    let g = d.generators();
    let mut out = d.clone();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if out.is_full() {
                return Ok(out);
            }
            out.extend([lie_bracket(&g[i], &g[j], &st)])?;
        }
    }
    Ok(out)
}

/// `D_{(i+1)} = D_{(i)} + [D, D_{(i)}]` with `d0 = D`, `di = D_{(i)}`.
pub fn lie_flag_step(d0: &Distribution, di: &Distribution) -> Result<Distribution> {
    let st = di.states().clone();
    let mut out = di.clone();
    for v in d0.generators() {
        for w in di.generators() {
            if out.is_full() {
                return Ok(out);
            }
            out.extend([lie_bracket(v, w, &st)])?;
        }
    }
    Ok(out)
}

/// Involutive closure through the derived flag, with the dimension of every
/// flag member starting at `D` itself.
pub fn involutive_closure(d: &Distribution) -> Result<(Distribution, Vec<usize>)> {
    let mut cur = d.clone();
    let mut trace = alloc::vec![cur.dim()];
    loop {
        let next = derived_flag_step(&cur)?;
        if next.dim() == cur.dim() {
            return Ok((cur, trace));
        }
        trace.push(next.dim());
        cur = next;
    }
}

/// True iff every pairwise generator bracket stays in `D`.
pub fn is_involutive(d: &Distribution) -> Result<bool> {
    if d.is_full() {
        return Ok(true);
    }
    let st = d.states().clone();
    let g = d.generators();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if !d.contains(&lie_bracket(&g[i], &g[j], &st))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One-forms vanishing on `D`.
pub fn annihilator(d: &Distribution) -> Result<Codistribution> {
    let st = d.states().clone();
    let cfg = d.config().clone();
    if d.dim() == 0 {
        let n = st.len();
        return Codistribution::span(st, (0..n).map(|i| OneForm::coordinate(n, i)), &cfg);
    }
    let ker = nullspace(&d.matrix(), &cfg)?;
    Codistribution::span(st, ker.into_iter().map(OneForm), &cfg)
}

/// Vector fields annihilated by every form of `P`.
pub fn kernel(p: &Codistribution, cfg: &ZeroTestConfig) -> Result<Distribution> {
    let st = p.states().clone();
    let n = st.len();
    if p.dim() == 0 {
        return Distribution::full(st, cfg);
    }
    let m = FnMatrix::from_rows(p.generators().iter().map(|w| w.0.clone()).collect(), n)?;
    let ker = nullspace(&m, cfg)?;
    Distribution::span(st, ker.into_iter().map(VectorField), cfg)
}

/// Cauchy characteristics `C(D)`.
///
/// With `c = λ^i b_i`, the condition `[c, b_j] ∈ D` is `λ^i [b_i, b_j] ≡ 0 mod D`,
/// a pointwise linear system for `λ` whose rows are the pairings of the
/// brackets with a basis of `D^⊥`.
pub fn cauchy_characteristics(d: &Distribution) -> Result<Distribution> {
    if d.is_full() || d.dim() <= 1 {
        return Ok(d.clone());
    }
    let st = d.states().clone();
    let cfg = d.config().clone();
    let b = d.generators();
    let k = b.len();
    let ann = annihilator(d)?;
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    for j in 0..k {
        let br: Vec<VectorField> = (0..k)
            .map(|i| {
                if i == j {
                    VectorField::zero(st.len())
                } else {
                    lie_bracket(&b[i], &b[j], &st)
                }
            })
            .collect();
        for w in ann.generators() {
            let row: Vec<Expr> = br.iter().map(|v| w.pair(v)).collect();
            if row.iter().any(|e| !e.is_zero_literal()) {
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return Ok(d.clone());
    }
    let m = FnMatrix::from_rows(rows, k)?;
    let lambdas = nullspace(&m, &cfg)?;
    let fields = lambdas.into_iter().map(|l| {
        let mut c = VectorField::zero(st.len());
        for (li, bi) in l.iter().zip(b) {
            if !li.is_zero_literal() {
                c = c.add(&bi.scale(li));
            }
        }
        c
    });
    let cd = Distribution::span(st.clone(), fields, &cfg)?;
    for c in cd.generators() {
        for bj in b {
            if !d.contains(&lie_bracket(c, bj, &st))? {
                return Err(Error::CannotDecide(format!(
                    "characteristic candidate {:?} fails [c, D] in D",
                    c
                )));
            }
        }
    }
    Ok(cd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{states, States};
    use crate::symx::{parse, Vocabulary, ZeroTestConfig};

    fn vf(st: &States, comps: &[&str]) -> VectorField {
        let v = Vocabulary::new(st.iter());
        VectorField(comps.iter().map(|c| parse(c, &v).unwrap()).collect())
    }

    fn academic_d2(cfg: &ZeroTestConfig) -> (States, Distribution) {
        let st = states(["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"]);
        let d = Distribution::span(
            st.clone(),
            [
                VectorField::coordinate(8, 7),
                VectorField::coordinate(8, 6),
                VectorField::coordinate(8, 5),
                vf(&st, &["0", "0", "1", "x6", "x4", "0", "0", "0"]),
            ],
            cfg,
        )
        .unwrap();
        (st, d)
    }

    #[test]
    fn academic_closure_and_characteristics() {
        let cfg = ZeroTestConfig::default();
        let (st, d2) = academic_d2(&cfg);
        assert!(!is_involutive(&d2).unwrap());
        let d21 = derived_flag_step(&d2).unwrap();
        assert_eq!(d21.dim(), 5);
        assert!(d21.contains(&VectorField::coordinate(8, 3)).unwrap());
        let (bar, trace) = involutive_closure(&d2).unwrap();
        assert_eq!(trace, [4, 5, 6]);
        let c = cauchy_characteristics(&d2).unwrap();
        let d1 = Distribution::coordinates(st.clone(), &[6, 7], &cfg).unwrap();
        assert!(c.equals(&d1).unwrap());
        let ann = annihilator(&bar).unwrap();
        let expect = Codistribution::span(
            st.clone(),
            [OneForm::coordinate(8, 0), OneForm::coordinate(8, 1)],
            &cfg,
        )
        .unwrap();
        assert!(ann.equals(&expect).unwrap());
        assert_eq!(ann.generators()[0], OneForm::coordinate(8, 0));
    }

    #[test]
    fn involutive_inputs() {
        let cfg = ZeroTestConfig::default();
        let st = states(["x", "y", "z"]);
        let d = Distribution::coordinates(st.clone(), &[0, 2], &cfg).unwrap();
        assert!(is_involutive(&d).unwrap());
        assert_eq!(involutive_closure(&d).unwrap().1, [2]);
        assert!(cauchy_characteristics(&d).unwrap().equals(&d).unwrap());
        let full = Distribution::full(st.clone(), &cfg).unwrap();
        assert_eq!(annihilator(&full).unwrap().dim(), 0);
        let k = kernel(&annihilator(&d).unwrap(), &cfg).unwrap();
        assert!(k.equals(&d).unwrap());
    }

    #[test]
    fn chained_flags() {
        let cfg = ZeroTestConfig::default();
        let st = states(["x1", "x2", "x3", "x4", "x5"]);
        let d = Distribution::span(
            st.clone(),
            [
                VectorField::coordinate(5, 4),
                vf(&st, &["1", "x3", "x4", "x5", "0"]),
            ],
            &cfg,
        )
        .unwrap();
        let l1 = lie_flag_step(&d, &d).unwrap();
        assert_eq!(l1.dim(), 3);
        assert_eq!(lie_flag_step(&d, &l1).unwrap().dim(), 4);
        assert_eq!(derived_flag_step(&d).unwrap().dim(), 3);
    }
}

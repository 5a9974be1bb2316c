use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::structure::{Analysis, Case};
use super::{decide, AffineSystem, Verdict};
use crate::geom::{annihilator, cauchy_characteristics, lie_derivative, Codistribution, OneForm};
use crate::symx::{Expr, ZeroTestConfig};
use crate::{Error, Result};

/// A flat-output pair with the conditions it was checked against.
#[derive(Clone, Debug)]
pub struct FlatOutputCandidate {
    pub phi1: Expr,
    pub phi2: Option<Expr>,
    pub case: Case,
    /// Chain lengths attached to `phi1` and `phi2` in the `x1` subsystem.
    pub chains: [usize; 2],
    /// `L^⊥` of the case (for case 1 the span of the output differentials
    /// together with their drift derivatives).
    pub l_perp: Codistribution,
    /// Named conditions and their verdicts.
    pub checks: Vec<(String, Verdict)>,
}

impl FlatOutputCandidate {
    pub fn verified(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(_, v)| v.is_pass())
    }

    pub fn failures(&self) -> impl Iterator<Item = &(String, Verdict)> {
        self.checks.iter().filter(|(_, v)| !v.is_pass())
    }
}

struct Ctx<'a> {
    sys: &'a AffineSystem,
    an: &'a Analysis,
    cfg: &'a ZeroTestConfig,
}

impl Ctx<'_> {
    fn d(&self, f: &Expr) -> OneForm {
        OneForm::exact(f, self.sys.states())
    }

    fn la(&self, f: &Expr, k: usize) -> Expr {
        lie_derivative(f, self.sys.drift(), k, self.sys.states())
    }

    fn span(&self, forms: impl IntoIterator<Item = OneForm>) -> Result<Codistribution> {
        Codistribution::span(self.sys.states().clone(), forms, self.cfg)
    }

    /// `(D_{n3+1}^{(n2-3)})^⊥`.
    fn q(&self) -> Result<Codistribution> {
        let n2 = self.an.report.n2.unwrap_or(3);
        annihilator(&self.an.derived[n2 - 3])
    }

    /// `C(D_{n3+1}^{(n2-3)})`.
    fn c_top(&self) -> Result<crate::geom::Distribution> {
        let n2 = self.an.report.n2.unwrap_or(3);
        if n2 >= 4 {
            Ok(self.an.cauchy[n2 - 4].clone())
        } else {
            cauchy_characteristics(&self.an.derived[0])
        }
    }

    /// `d L_a^j φ` for `j = 0..=upto`.
    fn ladder(&self, f: &Expr, upto: usize) -> Vec<OneForm> {
        (0..=upto).map(|j| self.d(&self.la(f, j))).collect()
    }

    /// `G_k^⊥`.
    fn g_perp(&self, k: usize) -> Result<Codistribution> {
        annihilator(&self.an.g[k])
    }
}

fn ready(an: &Analysis) -> Result<Case> {
    if !an.report.passes() {
        return Err(Error::Precondition(
            "flat outputs are only determined for systems that pass the structure check".into(),
        ));
    }
    an.report
        .case
        .ok_or_else(|| Error::Precondition("no case classification available".into()))
}

/// Candidate functions for the integration heuristic: user hints, single
/// coordinates, then sums, differences, products and squares of two
/// coordinates from the support of the target.
fn candidates(target: &Codistribution, hints: &[Expr]) -> Vec<Expr> {
    let st = target.states();
    let support: Vec<usize> = (0..st.len())
        .filter(|&i| {
            target
                .generators()
                .iter()
                .any(|w| !w.0[i].is_zero_literal())
        })
        .collect();
    let x = |i: usize| Expr::var(st[i].clone());
    let mut out: Vec<Expr> = hints.to_vec();
    out.extend(support.iter().map(|&i| x(i)));
    for (a, &i) in support.iter().enumerate() {
        out.push(x(i).pow(2));
        for &j in &support[a + 1..] {
            out.push(x(i) + x(j));
            out.push(x(i) - x(j));
            out.push(x(i) * x(j));
        }
    }
    out
}

/// Find `need` functions whose differentials lie in `target` and extend `have`.
fn integrate(
    target: &Codistribution,
    have: &Codistribution,
    need: usize,
    hints: &[Expr],
    skip: usize,
) -> Result<Option<Vec<Expr>>> {
    let st = target.states().clone();
    let mut cur = have.clone();
    let mut found = Vec::new();
    let mut skipped = 0;
    if need == 0 {
        return Ok(Some(found));
    }
    for f in candidates(target, hints) {
        let w = OneForm::exact(&f, &st);
        if !target.contains(&w)? || cur.contains(&w)? {
            continue;
        }
        if found.is_empty() && skipped < skip {
            skipped += 1;
            continue;
        }
        cur.extend([w])?;
        found.push(f);
        if found.len() == need {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

fn heuristic_failed(what: &str) -> Error {
    Error::structure(
        "flat output",
        format!(
            "heuristic integration of {} failed; supply candidate functions",
            what
        ),
    )
}

/// Suggest a flat output from the distributions of the analysis.
pub fn suggest_flat_output(
    sys: &AffineSystem,
    an: &Analysis,
    cfg: &ZeroTestConfig,
    hints: &[Expr],
) -> Result<FlatOutputCandidate> {
    let case = ready(an)?;
    let cx = Ctx { sys, an, cfg };
    let chains = an.report.chains.unwrap_or([0, 0]);
    let (phi1, phi2) = match case {
        Case::BothChains => {
            // Linearizing outputs of the x1 subsystem, level by level.
            let s = chains[0];
            let mut outs: Vec<(Expr, usize)> = Vec::new();
            for k in (1..=s).rev() {
                let target = cx.g_perp(k - 1)?;
                let have = cx.span(outs.iter().flat_map(|(f, l)| cx.ladder(f, l - k)))?;
                let need = target.dim().saturating_sub(have.dim());
                let found = integrate(&target, &have, need, hints, 0)?
                    .ok_or_else(|| heuristic_failed(&format!("G_{}^⊥", k - 1)))?;
                outs.extend(found.into_iter().map(|f| (f, k)));
            }
            if outs.len() != 2 {
                return Err(heuristic_failed("the x1 subsystem"));
            }
            (outs[0].0.clone(), outs[1].0.clone())
        }
        Case::OneChain => {
            let s = chains[0];
            let target = cx.g_perp(s - 1)?;
            let none = cx.span([])?;
            let phi1 = integrate(&target, &none, 1, hints, 0)?
                .ok_or_else(|| heuristic_failed(&format!("G_{}^⊥", s - 1)))?
                .remove(0);
            let l_perp = cx.q()?.with([cx.d(&cx.la(&phi1, s))])?;
            let have = cx.span(cx.ladder(&phi1, s))?;
            let need = l_perp.dim().saturating_sub(have.dim());
            if need != 1 {
                return Err(heuristic_failed("L^⊥"));
            }
            let phi2 = integrate(&l_perp, &have, 1, hints, 0)?
                .ok_or_else(|| heuristic_failed("L^⊥"))?
                .remove(0);
            (phi1, phi2)
        }
        Case::NoChains => {
            let q = cx.q()?;
            let p = annihilator(&cx.c_top()?)?;
            let mut pick = None;
            for skip in 0..p.states().len() {
                let Some(mut f) = integrate(&p, &q, 1, hints, skip)? else {
                    break;
                };
                let phi1 = f.remove(0);
                let l_perp = q.with([cx.d(&phi1)])?;
                let have = cx.span([cx.d(&phi1)])?;
                if l_perp.dim() != 2 {
                    continue;
                }
                if let Some(mut g) = integrate(&l_perp, &have, 1, hints, 0)? {
                    pick = Some((phi1, g.remove(0)));
                    break;
                }
            }
            pick.ok_or_else(|| heuristic_failed("L^⊥"))?
        }
    };
    verify_flat_output(sys, an, cfg, &phi1, Some(&phi2))
}

/// Check a user-supplied pair against the conditions of its case.
pub fn verify_flat_output(
    sys: &AffineSystem,
    an: &Analysis,
    cfg: &ZeroTestConfig,
    phi1: &Expr,
    phi2: Option<&Expr>,
) -> Result<FlatOutputCandidate> {
    let case = ready(an)?;
    let cx = Ctx { sys, an, cfg };
    let chains = an.report.chains.unwrap_or([0, 0]);
    let first = check_pair(&cx, case, chains, phi1, phi2)?;
    if first.verified() {
        return Ok(first);
    }
    // The pair may be listed in the other order.
    if let Some(p2) = phi2 {
        let second = check_pair(&cx, case, chains, p2, Some(phi1))?;
        if second.verified() {
            return Ok(second);
        }
    }
    Ok(first)
}

fn check_pair(
    cx: &Ctx<'_>,
    case: Case,
    chains: [usize; 2],
    phi1: &Expr,
    phi2: Option<&Expr>,
) -> Result<FlatOutputCandidate> {
    let mut checks = Vec::new();
    let Some(phi2) = phi2 else {
        checks.push((
            "a second component is required".into(),
            Verdict::Fail("phi2 missing".into()),
        ));
        return Ok(FlatOutputCandidate {
            phi1: phi1.clone(),
            phi2: None,
            case,
            chains,
            l_perp: cx.span([])?,
            checks,
        });
    };
    let pair = cx.span([cx.d(phi1), cx.d(phi2)])?;
    checks.push((
        "dphi1 ^ dphi2 != 0".into(),
        if pair.dim() == 2 {
            Verdict::Pass
        } else {
            Verdict::Fail("differentials are dependent".into())
        },
    ));
    let l_perp = match case {
        Case::BothChains => {
            let s = chains[0];
            let lens = [chains[0], chains[1]];
            let outs = [phi1, phi2];
            let mut all = cx.span([])?;
            for k in 1..=s {
                let forms: Vec<OneForm> = outs
                    .iter()
                    .zip(lens)
                    .filter(|(_, l)| *l >= k)
                    .flat_map(|(f, l)| cx.ladder(f, l - k))
                    .collect();
                let count = forms.len();
                let span = cx.span(forms)?;
                let target = cx.g_perp(k - 1)?;
                let v = decide(
                    span.equals(&target).map(|eq| eq && span.dim() == count),
                    format!(
                        "the output ladder does not span G_{}^⊥ independently",
                        k - 1
                    ),
                )?;
                checks.push((format!("span{{d L_a^j phi}} = G_{}^⊥", k - 1), v));
                if k == 1 {
                    all = span;
                }
            }
            all
        }
        Case::OneChain => {
            let s = chains[0];
            for k in 1..=s {
                let forms = cx.ladder(phi1, s - k);
                let count = forms.len();
                let span = cx.span(forms)?;
                let target = cx.g_perp(k - 1)?;
                let v = decide(
                    span.equals(&target).map(|eq| eq && span.dim() == count),
                    format!("d L_a^j phi1 does not span G_{}^⊥", k - 1),
                )?;
                checks.push((
                    format!("span{{d L_a^j phi1, j <= {}}} = G_{}^⊥", s - k, k - 1),
                    v,
                ));
            }
            let l_perp = cx.q()?.with([cx.d(&cx.la(phi1, s))])?;
            let mut forms = cx.ladder(phi1, s);
            forms.push(cx.d(phi2));
            let count = forms.len();
            let span = cx.span(forms)?;
            let v = decide(
                span.equals(&l_perp).map(|eq| eq && span.dim() == count),
                "dphi2 together with d L_a^j phi1 (j <= s) must span L^⊥ independently",
            )?;
            checks.push(("span{dphi1, ..., d L_a^s phi1, dphi2} = L^⊥".into(), v));
            l_perp
        }
        Case::NoChains => {
            let c = cx.c_top()?;
            let w = cx.d(phi1);
            let ann = c
                .generators()
                .iter()
                .map(|g| crate::symx::is_zero(&w.pair(g), cx.cfg))
                .try_fold(true, |acc, r| r.map(|b| acc && b));
            checks.push((
                "dphi1 annihilates C(D^(n2-3))".into(),
                decide(ann, "dphi1 does not annihilate the characteristics")?,
            ));
            let q = cx.q()?;
            checks.push((
                "L = span{dphi1, dphi2}^⊥ ⊂ D^(n2-3)".into(),
                decide(
                    pair.contains_all(&q),
                    "(D^(n2-3))^⊥ is not inside span{dphi1, dphi2}",
                )?,
            ));
            q.with([w])?
        }
    };
    Ok(FlatOutputCandidate {
        phi1: phi1.clone(),
        phi2: Some(phi2.clone()),
        case,
        chains,
        l_perp,
        checks,
    })
}

/// Verify two supplied functions, otherwise suggest a pair (using any
/// supplied functions as hints for the heuristic).
pub fn flat_output(
    sys: &AffineSystem,
    an: &Analysis,
    cfg: &ZeroTestConfig,
    user: &[Expr],
) -> Result<FlatOutputCandidate> {
    if user.len() == 2 {
        verify_flat_output(sys, an, cfg, &user[0], Some(&user[1]))
    } else {
        suggest_flat_output(sys, an, cfg, user)
    }
}

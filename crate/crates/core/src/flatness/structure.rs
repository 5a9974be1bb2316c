use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::sequence::{bracket_step, chain_lengths, compute_di_sequence, DiOutcome, DiSequence};
use super::{decide, AffineSystem, Verdict};
use crate::geom::{cauchy_characteristics, derived_flag_step, is_involutive, Distribution};
use crate::symx::{Confidence, ZeroTestConfig};
use crate::Result;

/// Which `x1` chains exist in the triangular form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Case {
    /// Both chains have length at least one.
    BothChains = 1,
    /// No `x1` subsystem.
    NoChains = 2,
    /// Exactly one chain.
    OneChain = 3,
}

impl Case {
    pub fn number(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureKind {
    /// `D_{n3+1}` exists; the triangular-form items were evaluated.
    Triangular,
    /// All `D_i` involutive with `D_{n-1} = T(X)`.
    Linearizable { chains: [usize; 2] },
    /// All `D_i` involutive but below `T(X)`.
    NotAccessible { dim: usize },
}

/// Overall outcome of a structure check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overall {
    Pass,
    Fail,
    Undecided,
    Linearizable,
    NotAccessible,
}

impl Overall {
    pub fn label(self) -> &'static str {
        match self {
            Overall::Pass => "pass",
            Overall::Fail => "fail",
            Overall::Undecided => "cannot decide",
            Overall::Linearizable => "static feedback linearizable",
            Overall::NotAccessible => "not accessible",
        }
    }
}

/// A dimension identity implied by the conditions, recorded as a sanity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub name: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub system: String,
    pub n: usize,
    pub kind: StructureKind,
    /// `dim D_i` for `i = 1, 2, ...`.
    pub di_dims: Vec<usize>,
    pub n3: Option<usize>,
    pub item_a: Verdict,
    /// `dim D_{n3+1}^{(i)}` up to the involutive closure.
    pub derived_trace: Vec<usize>,
    pub n2: Option<usize>,
    pub item_b: Verdict,
    /// Drift compatibility `[a, C(D^{(i)})] ⊂ D^{(i)}` per `i`.
    pub compatibility: Vec<(usize, Verdict)>,
    /// Coupling condition on `dim(closure + [a, D^{(n2-3)}])`.
    pub coupling: Verdict,
    /// `(dim(closure + [a, D^{(n2-3)}]), dim closure)` when evaluated.
    pub coupling_dims: Option<(usize, usize)>,
    pub item_c: Verdict,
    pub item_d: Verdict,
    /// `dim G_i` for `i = 0, 1, ...`.
    pub g_trace: Vec<usize>,
    pub s: Option<usize>,
    pub item_e: Verdict,
    /// `(n11, n12)`, longest first.
    pub chains: Option<[usize; 2]>,
    pub case: Option<Case>,
    /// The involutive closure of `D_{n3+1}` is the whole tangent space.
    pub degenerate: bool,
    /// Degenerate with `n3 = 0`: the conditions are those of the extended chained form.
    pub extended_chained: bool,
    pub cross_checks: Vec<CrossCheck>,
    pub config: ZeroTestConfig,
    pub confidence: Confidence,
}

impl StructureReport {
    fn empty(
        sys: &AffineSystem,
        cfg: &ZeroTestConfig,
        kind: StructureKind,
        di_dims: Vec<usize>,
    ) -> Self {
        StructureReport {
            system: sys.name().into(),
            n: sys.n(),
            kind,
            di_dims,
            n3: None,
            item_a: Verdict::NotReached,
            derived_trace: Vec::new(),
            n2: None,
            item_b: Verdict::NotReached,
            compatibility: Vec::new(),
            coupling: Verdict::NotReached,
            coupling_dims: None,
            item_c: Verdict::NotReached,
            item_d: Verdict::NotReached,
            g_trace: Vec::new(),
            s: None,
            item_e: Verdict::NotReached,
            chains: None,
            case: None,
            degenerate: false,
            extended_chained: false,
            cross_checks: Vec::new(),
            config: cfg.clone(),
            confidence: sys.confidence(),
        }
    }

    pub fn items(&self) -> [(&'static str, &Verdict); 5] {
        [
            ("a", &self.item_a),
            ("b", &self.item_b),
            ("c", &self.item_c),
            ("d", &self.item_d),
            ("e", &self.item_e),
        ]
    }

    pub fn overall(&self) -> Overall {
        match self.kind {
            StructureKind::Linearizable { .. } => return Overall::Linearizable,
            StructureKind::NotAccessible { .. } => return Overall::NotAccessible,
            StructureKind::Triangular => {}
        }
        let items = self.items();
        if items.iter().any(|(_, v)| v.is_fail()) {
            return Overall::Fail;
        }
        if items.iter().any(|(_, v)| v.is_undecided()) {
            return Overall::Undecided;
        }
        if items.iter().all(|(_, v)| v.is_ok()) {
            Overall::Pass
        } else {
            Overall::Fail
        }
    }

    pub fn passes(&self) -> bool {
        self.overall() == Overall::Pass
    }

    /// `n1 = n11 + n12`.
    pub fn n1(&self) -> Option<usize> {
        self.chains.map(|c| c[0] + c[1])
    }
}

/// Every distribution computed while checking the conditions.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: StructureReport,
    pub di: DiSequence,
    /// `D_{n3+1}^{(i)}`, `i = 0, ..., n2-2`.
    pub derived: Vec<Distribution>,
    /// `C(D_{n3+1}^{(i)})`, `i = 1, ..., n2-3` (entry `i-1`).
    pub cauchy: Vec<Distribution>,
    /// `G_0, G_1, ...`.
    pub g: Vec<Distribution>,
}

impl Analysis {
    pub fn n3(&self) -> Option<usize> {
        self.report.n3
    }

    /// `D_i` for `i >= 1`, or the zero distribution for `i = 0`.
    pub fn d(&self, i: usize) -> Distribution {
        if i == 0 {
            let d1 = &self.di.dists[0];
            return Distribution::zero(d1.states().clone(), d1.config());
        }
        self.di.dists[i - 1].clone()
    }

    pub fn closure(&self) -> Option<&Distribution> {
        self.derived.last()
    }
}

/// Case tag from the dimension test on `G_1`.
pub fn classify_case(report: &StructureReport) -> Option<Case> {
    if report.kind != StructureKind::Triangular {
        return None;
    }
    if report.degenerate {
        return Some(Case::NoChains);
    }
    match (report.g_trace.first(), report.g_trace.get(1)) {
        (Some(&g0), Some(&g1)) if g1 == g0 + 2 => Some(Case::BothChains),
        (Some(&g0), Some(&g1)) if g1 == g0 + 1 => Some(Case::OneChain),
        _ => None,
    }
}

pub fn check_structure(sys: &AffineSystem, cfg: &ZeroTestConfig) -> Result<StructureReport> {
    Ok(analyze(sys, cfg)?.report)
}

/// Evaluate items (a)-(e) and collect the distributions involved.
pub fn analyze(sys: &AffineSystem, cfg: &ZeroTestConfig) -> Result<Analysis> {
    cfg.validate()?;
    let di = compute_di_sequence(sys, cfg)?;
    let dims = di.dims();
    let n3 = match di.outcome {
        DiOutcome::NonInvolutive { n3 } => n3,
        DiOutcome::Linearizable { chains } => {
            let report =
                StructureReport::empty(sys, cfg, StructureKind::Linearizable { chains }, dims);
            return Ok(Analysis {
                report,
                di,
                derived: Vec::new(),
                cauchy: Vec::new(),
                g: Vec::new(),
            });
        }
        DiOutcome::NotAccessible { dim } => {
            let report =
                StructureReport::empty(sys, cfg, StructureKind::NotAccessible { dim }, dims);
            return Ok(Analysis {
                report,
                di,
                derived: Vec::new(),
                cauchy: Vec::new(),
                g: Vec::new(),
            });
        }
    };
    let mut r = StructureReport::empty(sys, cfg, StructureKind::Triangular, dims);
    r.n3 = Some(n3);
    let mut an = Analysis {
        report: r.clone(),
        di,
        derived: Vec::new(),
        cauchy: Vec::new(),
        g: Vec::new(),
    };
    let top = an.di.dists[n3].clone();
    let below = an.d(n3);

    r.item_a = decide(
        cauchy_characteristics(&top).and_then(|c| c.equals(&below)),
        format!("C(D_{}) differs from D_{}", n3 + 1, n3),
    )?;

    // Derived flag of D_{n3+1} up to its involutive closure.
    let mut derived = alloc::vec![top.clone()];
    loop {
        let last = derived.last().unwrap();
        match derived_flag_step(last) {
            Ok(next) if next.dim() == last.dim() => break,
            Ok(next) => derived.push(next),
            Err(e) if super::undecidable(&e) => {
                r.item_b = Verdict::Undecided(e.to_string());
                an.report = r;
                return Ok(an);
            }
            Err(e) => return Err(e),
        }
    }
    r.derived_trace = derived.iter().map(Distribution::dim).collect();
    let n2 = derived.len() + 1;
    r.n2 = Some(n2);
    let steps_ok = r.derived_trace.windows(2).all(|w| w[1] == w[0] + 1);
    r.item_b = if steps_ok {
        Verdict::Pass
    } else {
        Verdict::Fail(format!(
            "derived flag dimensions {:?} do not grow by one per step",
            r.derived_trace
        ))
    };
    let closure = derived.last().unwrap().clone();
    r.degenerate = closure.is_full();
    r.extended_chained = r.degenerate && n3 == 0;

    // Item (c).
    let mut cauchy = Vec::new();
    for i in 1..n2.saturating_sub(2) {
        let di = &derived[i];
        let v = match cauchy_characteristics(di) {
            Ok(c) => {
                let st = di.states().clone();
                let mut ok = Ok(true);
                for g in c.generators() {
                    match di.contains(&crate::geom::lie_bracket(sys.drift(), g, &st)) {
                        Ok(true) => {}
                        other => {
                            ok = other;
                            break;
                        }
                    }
                }
                cauchy.push(c);
                decide(
                    ok,
                    format!(
                        "[a, C(D_{}^({}))] is not contained in D_{}^({})",
                        n3 + 1,
                        i,
                        n3 + 1,
                        i
                    ),
                )?
            }
            Err(e) => decide(Err(e), "")?,
        };
        r.compatibility.push((i, v));
    }
    if r.degenerate {
        r.coupling = Verdict::Omitted("the involutive closure is the whole tangent space".into());
    } else {
        let base = &derived[n2 - 3];
        let res = (|| -> Result<(usize, usize)> {
            let mut sum = closure.clone();
            let st = sum.states().clone();
            for g in base.generators() {
                if sum.is_full() {
                    break;
                }
                sum.extend([crate::geom::lie_bracket(sys.drift(), g, &st)])?;
            }
            Ok((sum.dim(), closure.dim()))
        })();
        r.coupling = match res {
            Ok((with, bare)) => {
                r.coupling_dims = Some((with, bare));
                if with == bare + 1 {
                    Verdict::Pass
                } else {
                    Verdict::Fail(format!(
                        "dim(closure + [a, D^({})]) = {}, expected {}",
                        n2 - 3,
                        with,
                        bare + 1
                    ))
                }
            }
            Err(e) => decide(Err(e), "")?,
        };
    }
    let mut parts: Vec<&Verdict> = r.compatibility.iter().map(|(_, v)| v).collect();
    parts.push(&r.coupling);
    r.item_c = if r.compatibility.is_empty() && matches!(r.coupling, Verdict::Omitted(_)) {
        Verdict::Omitted(
            "no compatibility condition applies and the coupling condition is omitted".into(),
        )
    } else {
        Verdict::all(parts)
    };

    // Items (d) and (e).
    let mut g = alloc::vec![closure.clone()];
    if r.degenerate {
        let why: String = "the involutive closure is the whole tangent space".into();
        r.item_d = Verdict::Omitted(why.clone());
        r.item_e = Verdict::Omitted(why);
        r.chains = Some([0, 0]);
    } else {
        let mut d_verdict = Verdict::Pass;
        let mut e_verdict = Verdict::NotReached;
        for _ in 0..sys.n() {
            let last = g.last().unwrap();
            let next = match bracket_step(sys.drift(), last) {
                Ok(x) => x,
                Err(e) => {
                    e_verdict = decide(Err(e), "")?;
                    break;
                }
            };
            if next.dim() == last.dim() {
                e_verdict = Verdict::Fail(format!(
                    "G stalls at dimension {} below {}",
                    next.dim(),
                    sys.n()
                ));
                break;
            }
            let inv = decide(
                is_involutive(&next),
                format!("G_{} is not involutive", g.len()),
            )?;
            if !inv.is_pass() && d_verdict.is_pass() {
                d_verdict = inv;
            }
            let full = next.is_full();
            g.push(next);
            if full {
                r.s = Some(g.len() - 1);
                e_verdict = Verdict::Pass;
                break;
            }
        }
        r.item_d = d_verdict;
        r.item_e = e_verdict;
        if r.item_d.is_pass() && r.item_e.is_pass() {
            let inc: Vec<usize> = g.windows(2).map(|w| w[1].dim() - w[0].dim()).collect();
            r.chains = Some(chain_lengths(&inc));
        }
    }
    r.g_trace = g.iter().map(Distribution::dim).collect();
    r.case = if r.item_d.is_ok() && r.item_e.is_ok() {
        classify_case(&r)
    } else {
        None
    };

    cross_checks(&mut r, &cauchy);
    an.report = r;
    an.derived = derived;
    an.cauchy = cauchy;
    an.g = g;
    Ok(an)
}

fn cross_checks(r: &mut StructureReport, cauchy: &[Distribution]) {
    let (Some(n3), Some(n2)) = (r.n3, r.n2) else {
        return;
    };
    let mut out = Vec::new();
    if r.item_a.is_pass() {
        let ok = r.di_dims.iter().enumerate().all(|(i, &d)| d == 2 * (i + 1));
        out.push(CrossCheck {
            name: format!("dim D_i = 2i for i = 1..{}", n3 + 1),
            ok,
        });
        if r.item_b.is_pass() {
            let ok = cauchy
                .iter()
                .enumerate()
                .all(|(k, c)| c.dim() == 2 * n3 + k + 1);
            if !cauchy.is_empty() {
                out.push(CrossCheck {
                    name: format!("dim C(D^(i)) = {} + i", 2 * n3),
                    ok,
                });
            }
            let closure = *r.derived_trace.last().unwrap();
            out.push(CrossCheck {
                name: format!("dim closure = 2*n3 + n2 = {}", 2 * n3 + n2),
                ok: closure == 2 * n3 + n2,
            });
        }
    }
    if let (Some(case), Some(chains)) = (r.case, r.chains) {
        let inc: Vec<usize> = r.g_trace.windows(2).map(|w| w[1] - w[0]).collect();
        match case {
            Case::BothChains => out.push(CrossCheck {
                name: "G increments lie in 1..=2 with dim G_1 = dim G_0 + 2".into(),
                ok: inc.first() == Some(&2) && inc.iter().all(|&k| (1..=2).contains(&k)),
            }),
            Case::OneChain => out.push(CrossCheck {
                name: "G increments are all 1".into(),
                ok: inc.iter().all(|&k| k == 1),
            }),
            Case::NoChains => {}
        }
        out.push(CrossCheck {
            name: format!(
                "n = n1 + n2 + 2*n3 = {}",
                chains[0] + chains[1] + n2 + 2 * n3
            ),
            ok: r.n == chains[0] + chains[1] + n2 + 2 * n3,
        });
    }
    r.cross_checks = out;
}

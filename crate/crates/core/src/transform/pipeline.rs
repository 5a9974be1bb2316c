use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::change::{invert, replay};
use super::{
    apply_feedback, fresh_inputs, pushforward, verify_triangular_form, CoordChange, ElementaryStep,
    Feedback,
};
use super::{TriangularCheck, TriangularPattern};
use crate::flatness::{
    analyze, check_extended_chained, derived_flags, suggest_flat_output, verify_flat_output,
    AffineSystem, Analysis, StructureReport, Verdict,
};
use crate::geom::{annihilator, cauchy_characteristics, Codistribution, Distribution, OneForm};
use crate::symx::{
    depends_on, differentiate, simplify, substitute, Bindings, Expr, Symbol, ZeroTestConfig,
};
use crate::{Error, Result};

/// One recorded stage of a transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptEntry {
    pub label: String,
    /// Substitutions and feedback definitions applied in this stage.
    pub actions: Vec<String>,
    pub system: AffineSystem,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// User-supplied change into adapted coordinates.
    pub step1: Option<CoordChange>,
    /// Flat output in the original coordinates; suggested when absent.
    pub flat_output: Option<[Expr; 2]>,
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    /// Final system, states in block order.
    pub system: AffineSystem,
    /// Composite change from the original coordinates (Step 1 included).
    pub change: CoordChange,
    /// Composite feedback in the original coordinates.
    pub feedback: Feedback,
    pub pattern: TriangularPattern,
    pub transcript: Vec<TranscriptEntry>,
    /// The flat output used, in the coordinates after Step 1.
    pub flat_output: [Expr; 2],
    /// Structure report in the coordinates after Step 1.
    pub report: Option<StructureReport>,
    pub check: TriangularCheck,
}

impl PipelineResult {
    /// Apply the composite feedback and change to `original` and reorder.
    pub fn reproduce(&self, original: &AffineSystem, cfg: &ZeroTestConfig) -> Result<AffineSystem> {
        let fed = apply_feedback(original, &self.feedback, cfg)?;
        pushforward(&fed, &self.change)?.reorder(&self.pattern.order())
    }
}

/// The nested sequence that adapted coordinates must straighten:
/// `D_1, ..., D_{n3}`, `C(D^(1)), ..., C(D^(n2-3))`, the closure, `G_1, ..., G_s`.
pub fn adapted_sequence(an: &Analysis) -> Vec<(String, Distribution)> {
    let mut out = Vec::new();
    let n3 = an.report.n3.unwrap_or(0);
    for i in 1..=n3 {
        out.push((format!("D_{}", i), an.d(i)));
    }
    for (i, c) in an.cauchy.iter().enumerate() {
        out.push((format!("C(D_{}^({}))", n3 + 1, i + 1), c.clone()));
    }
    if let Some(c) = an.closure() {
        out.push((format!("closure of D_{}", n3 + 1), c.clone()));
    }
    for (k, g) in an.g.iter().enumerate().skip(1) {
        out.push((format!("G_{}", k), g.clone()));
    }
    out
}

/// Every distribution of the sequence is spanned by coordinate vector fields.
pub fn verify_adapted_coordinates(seq: &[(String, Distribution)]) -> Result<Verdict> {
    for (name, d) in seq {
        let dirs = match d.coordinate_directions() {
            Ok(x) => x,
            Err(e) if e.is_undecided() => {
                return Ok(Verdict::Undecided(format!("{}: {}", name, e)))
            }
            Err(e) => return Err(e),
        };
        if dirs.len() != d.dim() {
            return Ok(Verdict::Fail(format!(
                "{} is not spanned by coordinate vector fields ({} of {} directions)",
                name,
                dirs.len(),
                d.dim()
            )));
        }
    }
    Ok(Verdict::Pass)
}

/// First position in `seq` at which each state direction appears.
fn layers(states: &[Symbol], seq: &[(String, Distribution)]) -> Result<BTreeMap<Symbol, usize>> {
    let mut out = BTreeMap::new();
    for (p, (_, d)) in seq.iter().enumerate() {
        for i in d.coordinate_directions()? {
            out.entry(states[i].clone()).or_insert(p);
        }
    }
    for s in states {
        out.entry(s.clone()).or_insert(seq.len());
    }
    Ok(out)
}

fn require(v: Verdict, step: &str, hint: &str) -> Result<()> {
    match v {
        Verdict::Pass | Verdict::Omitted(_) => Ok(()),
        Verdict::Undecided(m) => Err(Error::CannotDecide(m)),
        Verdict::Fail(m) => Err(Error::structure(step, format!("{}{}", m, hint))),
        Verdict::NotReached => Err(Error::structure(step, "not evaluated")),
    }
}

struct Work<'a> {
    cfg: &'a ZeroTestConfig,
    name: String,
    params: Vec<Symbol>,
    states: Vec<Symbol>,
    f: Vec<Expr>,
    u: [Symbol; 2],
    /// Current coordinates in the original ones.
    fwd: Vec<Expr>,
    /// Current inputs in the original coordinates and inputs.
    ins: [Expr; 2],
    normalized: [bool; 2],
    change: CoordChange,
    /// Coordinates not yet replaced, with their layer.
    old: BTreeMap<Symbol, usize>,
    transcript: Vec<TranscriptEntry>,
    pending: Vec<String>,
}

impl Work<'_> {
    fn taken(&self, s: &str) -> bool {
        self.states
            .iter()
            .chain(&self.params)
            .chain(&self.u)
            .any(|x| &**x == s)
    }

    fn system(&self) -> Result<AffineSystem> {
        AffineSystem::from_rhs(
            self.name.clone(),
            self.states.clone().into(),
            self.params.clone(),
            &self.f,
            &self.u,
        )
    }

    fn snapshot(&mut self, label: &str) -> Result<()> {
        let system = self.system()?;
        self.transcript.push(TranscriptEntry {
            label: label.into(),
            actions: core::mem::take(&mut self.pending),
            system,
        });
        Ok(())
    }

    fn dot(&self, s: &Symbol) -> Expr {
        let i = self.states.iter().position(|x| x == s).unwrap();
        self.f[i].clone()
    }

    fn to_original(&self, e: &Expr) -> Expr {
        let mut b: Bindings = self
            .states
            .iter()
            .cloned()
            .zip(self.fwd.iter().cloned())
            .collect();
        b.insert(self.u[0].clone(), self.ins[0].clone());
        b.insert(self.u[1].clone(), self.ins[1].clone());
        simplify(&substitute(e, &b))
    }

    fn apply(&mut self, step: ElementaryStep) -> Result<()> {
        let i = self
            .states
            .iter()
            .position(|x| *x == step.replaced)
            .unwrap();
        let fwd_new = self.to_original(&step.def);
        replay(&mut self.states, &mut self.f, &step)?;
        self.fwd[i] = fwd_new;
        self.pending.push(if step.is_rename() {
            format!("{} := {}", step.new, step.replaced)
        } else {
            format!("{} := {}  [replaces {}]", step.new, step.def, step.replaced)
        });
        self.change.push_step(step);
        Ok(())
    }

    /// Introduce `new := def`, replacing the deepest remaining coordinate
    /// the definition can be solved for.
    fn introduce(&mut self, new: &Symbol, def: Expr, step: &str) -> Result<()> {
        if def.as_var() == Some(new) && self.states.contains(new) {
            self.old.remove(new);
            self.pending.push(format!("{} kept", new));
            return Ok(());
        }
        if self.states.contains(new) {
            let mut alt = format!("{}_0", new);
            while self.taken(&alt) {
                alt.push_str("_0");
            }
            let alt: Symbol = alt.into();
            if let Some(l) = self.old.remove(new) {
                self.old.insert(alt.clone(), l);
            }
            self.apply(ElementaryStep {
                new: alt.clone(),
                def: Expr::var(new.clone()),
                replaced: new.clone(),
                inverse: Expr::var(alt.clone()),
            })?;
            let mut b = Bindings::new();
            b.insert(new.clone(), Expr::var(alt));
            return self.introduce(new, substitute(&def, &b), step);
        }
        let mut cands = Vec::new();
        for (pos, s) in self.states.iter().enumerate() {
            if let Some(&l) = self.old.get(s) {
                if def.contains_var(s) && depends_on(&def, s, self.cfg)? {
                    cands.push((l, pos, s.clone()));
                }
            }
        }
        cands.sort();
        for (_, _, s) in cands {
            match invert(new, &def, &s, self.cfg) {
                Ok(inverse) => {
                    self.old.remove(&s);
                    return self.apply(ElementaryStep {
                        new: new.clone(),
                        def,
                        replaced: s,
                        inverse,
                    });
                }
                Err(Error::NotInvertible { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::structure(
            step,
            format!(
                "cannot introduce {} := {}: no remaining coordinate can be solved for",
                new, def
            ),
        ))
    }

    /// Define the new input in slot `j` as `def`.
    fn feedback(&mut self, j: usize, def: Expr, step: &str) -> Result<()> {
        let order = [j, 1 - j];
        let mut pick = None;
        for k in order {
            if !self.normalized[k]
                && def.contains_var(&self.u[k])
                && depends_on(&def, &self.u[k], self.cfg)?
            {
                pick = Some(k);
                break;
            }
        }
        let Some(k) = pick else {
            return Err(Error::structure(
                step,
                format!(
                    "{} does not depend on a free input; feedback is not invertible",
                    def
                ),
            ));
        };
        let c = differentiate(&def, &self.u[k]);
        for s in &self.u {
            if c.contains_var(s) && depends_on(&c, s, self.cfg)? {
                return Err(Error::structure(
                    step,
                    format!("{} is not affine in the inputs", def),
                ));
            }
        }
        let mut t = String::from("t_");
        while self.taken(&t) {
            t.push('_');
        }
        let t: Symbol = t.into();
        let mut zero = Bindings::new();
        zero.insert(self.u[k].clone(), Expr::zero());
        let base = substitute(&def, &zero);
        let sol = (Expr::var(t.clone()) - base) / c;
        let ins_new = self.to_original(&def);
        let mut b = Bindings::new();
        b.insert(self.u[k].clone(), sol);
        for e in self.f.iter_mut() {
            *e = substitute(e, &b);
        }
        let mut b = Bindings::new();
        if k == j {
            b.insert(t, Expr::var(self.u[j].clone()));
        } else {
            b.insert(self.u[j].clone(), Expr::var(self.u[k].clone()));
            b.insert(t, Expr::var(self.u[j].clone()));
            self.ins[k] = self.ins[j].clone();
        }
        for e in self.f.iter_mut() {
            *e = simplify(&substitute(e, &b));
        }
        self.ins[j] = ins_new;
        self.normalized[j] = true;
        self.pending
            .push(format!("new input {} := {}", self.u[j], def));
        Ok(())
    }

    /// `d/dt x2^k` must be affine in `top`, free of the remaining
    /// coordinates with layer at most `bound` and of the other inputs.
    fn check_ladder(
        &self,
        s: &Symbol,
        e: &Expr,
        top: &Symbol,
        bound: Option<usize>,
        step: &str,
    ) -> Result<Expr> {
        let b = differentiate(e, top);
        if b.contains_var(top) && depends_on(&b, top, self.cfg)? {
            return Err(Error::structure(
                step,
                format!("d/dt {} is not affine in {}", s, top),
            ));
        }
        let mut banned: Vec<&Symbol> = self.u.iter().filter(|x| *x != top).collect();
        if let Some(bound) = bound {
            banned.extend(self.old.iter().filter(|(_, &l)| l <= bound).map(|(v, _)| v));
        }
        for v in banned {
            if e.contains_var(v) && depends_on(e, v, self.cfg)? {
                return Err(Error::structure(
                    step,
                    format!(
                        "triangular dependence violated: d/dt {} depends on {}",
                        s, v
                    ),
                ));
            }
        }
        Ok(b)
    }

    fn feedback_total(&self) -> Feedback {
        let mut zero = Bindings::new();
        zero.insert(self.u[0].clone(), Expr::zero());
        zero.insert(self.u[1].clone(), Expr::zero());
        Feedback {
            g: [0, 1].map(|j| substitute(&self.ins[j], &zero)),
            m: [0, 1].map(|j| {
                [0, 1].map(|k| substitute(&differentiate(&self.ins[j], &self.u[k]), &zero))
            }),
        }
    }
}

/// Steps 2 to 6 on a system in adapted coordinates.
fn core(w: &mut Work<'_>, pattern: &TriangularPattern, phi: [Expr; 2]) -> Result<()> {
    let (_, _, n2, n3) = pattern.lengths();
    let x2 = &pattern.x2;
    let x3 = &pattern.x3;

    if pattern.x1.iter().any(|c| !c.is_empty()) {
        for j in 0..2 {
            let chain = &pattern.x1[j];
            for k in 0..chain.len() {
                let def = if k == 0 {
                    phi[j].clone()
                } else {
                    w.dot(&chain[k - 1])
                };
                w.introduce(&chain[k], def, "step 2")?;
            }
        }
        w.snapshot("step 2: x1 chains in Brunovsky form")?;
    }

    for j in 0..2 {
        let def = match pattern.x1[j].last() {
            Some(last) => w.dot(last),
            None => phi[j].clone(),
        };
        w.introduce(&x2[j], def, "step 3")?;
    }
    w.snapshot("step 3: top variables of the x2 block")?;

    let e = w.dot(&x2[0]);
    if n3 >= 1 {
        w.introduce(&x3[1][0], e, "step 4")?;
    } else {
        w.feedback(1, e, "step 4")?;
    }
    w.snapshot("step 4: first x2 equation normalized")?;

    let top = if n3 >= 1 {
        x3[1][0].clone()
    } else {
        w.u[1].clone()
    };
    for k in 2..n2 {
        let s = &x2[k - 1];
        let e = w.dot(s);
        let bound = (n3 + n2).checked_sub(k + 2);
        let b = w.check_ladder(s, &e, &top, bound, "step 5")?;
        w.introduce(&x2[k], b, "step 5")?;
    }
    let e = w.dot(&x2[n2 - 1]);
    if n3 >= 1 {
        w.introduce(&x3[0][0], e, "step 5")?;
    } else {
        w.feedback(0, e, "step 5")?;
    }
    w.snapshot("step 5: x2 block in extended chained form")?;

    if n3 >= 1 {
        for k in 1..n3 {
            for j in 0..2 {
                let e = w.dot(&x3[j][k - 1]);
                w.introduce(&x3[j][k], e, "step 6")?;
            }
        }
        for j in 0..2 {
            let e = w.dot(&x3[j][n3 - 1]);
            w.feedback(j, e, "step 6")?;
        }
        w.snapshot("step 6: x3 chains in Brunovsky form")?;
    }
    Ok(())
}

fn start<'a>(
    original: &AffineSystem,
    adapted: &AffineSystem,
    step1: &CoordChange,
    pattern: &TriangularPattern,
    layer: BTreeMap<Symbol, usize>,
    cfg: &'a ZeroTestConfig,
) -> Result<Work<'a>> {
    let order = pattern.order();
    let u = fresh_inputs(
        original
            .states()
            .iter()
            .chain(adapted.states().iter())
            .chain(original.params())
            .chain(order.iter()),
    );
    let fwd = step1
        .forward(original.states())?
        .into_iter()
        .map(|(_, e)| e)
        .collect();
    let mut w = Work {
        cfg,
        name: String::from(original.name()),
        params: original.params().to_vec(),
        states: adapted.states().to_vec(),
        f: adapted.rhs(&u),
        ins: [Expr::var(u[0].clone()), Expr::var(u[1].clone())],
        u,
        fwd,
        normalized: [false, false],
        change: step1.clone(),
        old: layer,
        transcript: Vec::new(),
        pending: Vec::new(),
    };
    for s in step1.steps() {
        w.pending
            .push(format!("{} := {}  [replaces {}]", s.new, s.def, s.replaced));
    }
    w.pending.push("adapted coordinates verified".into());
    w.snapshot("step 1: adapted coordinates")?;
    Ok(w)
}

fn finish(
    mut w: Work<'_>,
    pattern: TriangularPattern,
    phi: [Expr; 2],
    report: Option<StructureReport>,
) -> Result<PipelineResult> {
    let system = w.system()?.reorder(&pattern.order())?;
    let check = verify_triangular_form(&system, &pattern, w.cfg);
    if let Some((eq, v)) = check.failures().next() {
        return Err(Error::structure(
            "result",
            format!("{}: {}", eq, v.detail().unwrap_or(v.label())),
        ));
    }
    let feedback = w.feedback_total();
    feedback.check(w.cfg)?;
    w.transcript.push(TranscriptEntry {
        label: "result".into(),
        actions: Vec::new(),
        system: system.clone(),
    });
    Ok(PipelineResult {
        system,
        change: w.change,
        feedback,
        pattern,
        transcript: w.transcript,
        flat_output: phi,
        report,
        check,
    })
}

/// Transform a system meeting the triangular-form conditions into the
/// triangular normal form. Step 1 only verifies that the coordinates
/// (after the optional user change) are adapted.
pub fn run_pipeline(
    sys: &AffineSystem,
    cfg: &ZeroTestConfig,
    opts: &PipelineOptions,
) -> Result<PipelineResult> {
    let step1 = opts.step1.clone().unwrap_or_default();
    let adapted = if step1.is_identity() {
        sys.clone()
    } else {
        pushforward(sys, &step1)?
    };
    let an = analyze(&adapted, cfg)?;
    if !an.report.passes() {
        return Err(Error::Precondition(format!(
            "the system does not meet the triangular-form conditions ({})",
            an.report.overall().label()
        )));
    }
    let seq = adapted_sequence(&an);
    require(
        verify_adapted_coordinates(&seq)?,
        "step 1",
        "; supply a step-1 coordinate change",
    )?;
    let cand = match &opts.flat_output {
        Some([p1, p2]) => {
            let inv: Bindings = step1.inverse_map(sys.states())?.into_iter().collect();
            let (p1, p2) = (substitute(p1, &inv), substitute(p2, &inv));
            verify_flat_output(&adapted, &an, cfg, &p1, Some(&p2))?
        }
        None => suggest_flat_output(&adapted, &an, cfg, &[])?,
    };
    if let Some((name, v)) = cand.failures().next() {
        return Err(Error::structure(
            "flat output",
            format!("{}: {}", name, v.detail().unwrap_or(v.label())),
        ));
    }
    let phi = [cand.phi1.clone(), cand.phi2.clone().unwrap()];
    let r = &an.report;
    let pattern = TriangularPattern::standard(cand.chains, r.n2.unwrap(), r.n3.unwrap());
    let layer = layers(adapted.states(), &seq)?;
    let mut w = start(sys, &adapted, &step1, &pattern, layer, cfg)?;
    core(&mut w, &pattern, phi.clone())?;
    finish(w, pattern, phi, Some(an.report))
}

/// Transform a system meeting the (extended) chained-form conditions into
/// (extended) chained form with the flat output `phi` as top variables.
pub fn chained_transform(
    sys: &AffineSystem,
    phi: &[Expr; 2],
    cfg: &ZeroTestConfig,
) -> Result<PipelineResult> {
    let n = sys.n();
    if n < 3 {
        return Err(Error::Precondition(
            "chained form needs at least 3 states".into(),
        ));
    }
    let ext = check_extended_chained(sys, cfg)?;
    if !ext.passes() {
        return Err(Error::Precondition(
            "the system does not meet the (extended) chained-form conditions".into(),
        ));
    }
    let st = sys.states().clone();
    let d = Distribution::span(st.clone(), sys.inputs().iter().cloned(), cfg)?;
    let flags = derived_flags(&d, n - 3)?;
    let mut seq = Vec::new();
    for (i, di) in flags.iter().enumerate().skip(1) {
        seq.push((format!("C(D^({}))", i), cauchy_characteristics(di)?));
    }
    seq.push(("T(X)".into(), Distribution::full(st.clone(), cfg)?));
    require(
        verify_adapted_coordinates(&seq)?,
        "cauchy sequence",
        "; straighten the characteristics first",
    )?;
    let pair = Codistribution::span(st.clone(), phi.iter().map(|p| OneForm::exact(p, &st)), cfg)?;
    if pair.dim() != 2 {
        return Err(Error::structure("flat output", "dphi1 ^ dphi2 = 0"));
    }
    let q = annihilator(&flags[n - 3])?;
    if !pair.contains_all(&q)? {
        return Err(Error::structure(
            "flat output",
            "L = span{dphi1, dphi2}^⊥ is not contained in D^(n-3)",
        ));
    }
    let pattern = TriangularPattern::chained(n);
    let layer = layers(&st, &seq)?;
    let mut w = start(sys, sys, &CoordChange::identity(), &pattern, layer, cfg)?;
    core(&mut w, &pattern, phi.clone())?;
    finish(w, pattern, phi.clone(), None)
}

//! Command dispatch and report documents.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use flatri_core::flatness::{
    analyze, check_chained, check_extended_chained, compute_di_sequence, flat_output, AffineSystem,
    DiOutcome, Overall, StructureKind, StructureReport, Verdict,
};
use flatri_core::geom::{
    cauchy_characteristics, derived_flag_step, display_field, involutive_closure, lie_bracket,
    lie_flag_step, Distribution, VectorField,
};
use flatri_core::symx::{parse, Confidence, Expr, Point, SamplePoint, ZeroTestConfig};
use flatri_core::transform::{
    chained_transform, run_pipeline, verify_triangular_form, PipelineOptions, PipelineResult,
};
use flatri_core::Error;

use crate::sysfile::{load, write_system, write_transcript, LoadError, SystemFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

/// Structure analysis of two-input affine control systems.
#[derive(Parser, Debug, Clone)]
#[command(name = "flatri", version, about)]
pub struct Cli {
    /// Seed of the random sample points.
    #[arg(long, global = true, env = "FLATRI_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of sample points every zero test must pass.
    #[arg(long, global = true, env = "FLATRI_SAMPLES", default_value_t = 5)]
    pub samples: usize,
    /// Numerators and denominators of sample coordinates are bounded by this.
    #[arg(long, global = true, env = "FLATRI_BOUND", default_value_t = 10_000)]
    pub bound: u64,
    #[arg(long, global = true, env = "FLATRI_FORMAT", value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Where `transform` writes its stage-by-stage transcript.
    #[arg(long, global = true, env = "FLATRI_TRANSCRIPT")]
    pub transcript: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// System file.
    pub file: PathBuf,
    /// Document of a multi-document file (0-based); the last by default.
    #[arg(long)]
    pub entry: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Triangular-form conditions, indices and case.
    Check(Input),
    /// Static feedback linearizability.
    LinearizeCheck(Input),
    /// Equivalence to the chained form (driftless systems).
    ChainedCheck(Input),
    /// Equivalence to the extended chained form.
    ExtchainedCheck(Input),
    /// Suggest a flat output, or verify the one given.
    FlatOutput {
        #[command(flatten)]
        input: Input,
        /// Flat-output component (repeat for the second); overrides the file.
        #[arg(long = "phi")]
        phi: Vec<String>,
    },
    /// Transform into the triangular normal form.
    Transform {
        #[command(flatten)]
        input: Input,
        #[arg(long = "phi")]
        phi: Vec<String>,
        /// Use the chained-form procedure (needs a flat output).
        #[arg(long)]
        chained: bool,
    },
    /// Evaluate a bracket term over `a`, `b1`, `b2`, e.g. `[b1,[a,b2]]`.
    Bracket {
        #[command(flatten)]
        input: Input,
        /// One term, or two terms to bracket.
        #[arg(required = true, num_args = 1..=2)]
        terms: Vec<String>,
    },
    /// Derived and Lie flags of `D_1 = span{b1, b2}` and of the last `D_i`.
    Flags(Input),
}

/// A finished run: the report and the process exit status.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub doc: Value,
    pub code: i32,
    /// Transcript text written to the requested path.
    pub transcript: Option<String>,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => crate::render::text(&self.doc),
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(&self.doc).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

enum Failure {
    Load(LoadError),
    Core(Error),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Load(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Body = Result<(Value, i32), Failure>;

fn verdict(v: &Verdict, conf: Confidence) -> Value {
    let mut m = Map::new();
    m.insert("status".into(), v.label().into());
    if let Some(d) = v.detail() {
        m.insert("detail".into(), d.into());
    }
    m.insert("confidence".into(), conf.tag().into());
    Value::Object(m)
}

fn status(v: &Verdict) -> i32 {
    match v {
        Verdict::Pass | Verdict::Omitted(_) => 0,
        Verdict::Undecided(_) => 2,
        _ => 1,
    }
}

fn from_bool(ok: bool, fail: &str) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail(fail.into())
    }
}

fn strings<T: ToString>(xs: &[T]) -> Value {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().into()
}

fn sample_log(sys: &AffineSystem, cfg: &ZeroTestConfig) -> Value {
    (0..cfg.samples as u64)
        .map(|i| {
            let p = SamplePoint::new(cfg, i);
            let values: Map<String, Value> = sys
                .states()
                .iter()
                .chain(sys.params())
                .map(|s| (s.to_string(), p.value(s).unwrap().to_string().into()))
                .collect();
            json!({"point": i, "values": values})
        })
        .collect::<Vec<_>>()
        .into()
}

fn structure(r: &StructureReport) -> Value {
    let kind = match &r.kind {
        StructureKind::Triangular => json!("triangular"),
        StructureKind::Linearizable { chains } => json!({"linearizable": {"chains": chains}}),
        StructureKind::NotAccessible { dim } => json!({"not_accessible": {"dim": dim}}),
    };
    let items: Map<String, Value> = r
        .items()
        .iter()
        .map(|(k, v)| (format!("item_{}", k), verdict(v, r.confidence)))
        .collect();
    json!({
        "overall": r.overall().label(),
        "kind": kind,
        "n": r.n,
        "di_dims": r.di_dims,
        "n3": r.n3,
        "derived_trace": r.derived_trace,
        "n2": r.n2,
        "g_trace": r.g_trace,
        "s": r.s,
        "chains": r.chains,
        "case": r.case.map(|c| c.number()),
        "degenerate": r.degenerate,
        "extended_chained": r.extended_chained,
        "coupling_dims": r.coupling_dims.map(|(a, b)| json!({"closure_plus_bracket": a, "closure": b})),
        "items": items,
        "compatibility": r.compatibility.iter()
            .map(|(i, v)| json!({"i": i, "verdict": verdict(v, r.confidence)}))
            .collect::<Vec<_>>(),
        "coupling": verdict(&r.coupling, r.confidence),
        "cross_checks": r.cross_checks.iter().map(|c| json!({"name": c.name, "ok": c.ok})).collect::<Vec<_>>(),
    })
}

fn overall_code(o: Overall) -> i32 {
    match o {
        Overall::Pass | Overall::Linearizable => 0,
        Overall::Undecided => 2,
        Overall::Fail | Overall::NotAccessible => 1,
    }
}

fn exprs(texts: &[String], file: &SystemFile) -> Result<Vec<Expr>, Failure> {
    if texts.is_empty() {
        return Ok(file.flat_output.clone());
    }
    if texts.len() > 2 {
        return Err(Failure::Core(Error::Precondition(
            "at most two --phi values".into(),
        )));
    }
    let v = file.system.vocabulary();
    Ok(texts
        .iter()
        .map(|t| parse(t, &v))
        .collect::<Result<_, _>>()?)
}

fn check(f: &SystemFile, cfg: &ZeroTestConfig) -> Body {
    let r = analyze(&f.system, cfg)?.report;
    let o = r.overall();
    let v = json!({"status": o.label(), "confidence": r.confidence.tag()});
    Ok((
        json!({"result": structure(&r), "verdict": v}),
        overall_code(o),
    ))
}

fn linearize(f: &SystemFile, cfg: &ZeroTestConfig) -> Body {
    let seq = compute_di_sequence(&f.system, cfg)?;
    let chains = match seq.outcome {
        DiOutcome::Linearizable { chains } => Some(chains),
        _ => None,
    };
    let v = from_bool(chains.is_some(), "not static feedback linearizable");
    let res = json!({"di_dims": seq.dims(), "linearizable": chains.is_some(), "chains": chains});
    Ok((
        json!({"result": res, "verdict": verdict(&v, f.system.confidence())}),
        status(&v),
    ))
}

fn chained(f: &SystemFile, cfg: &ZeroTestConfig, extended: bool) -> Body {
    let conf = f.system.confidence();
    let (res, v) = if extended {
        let r = check_extended_chained(&f.system, cfg)?;
        let compat: Vec<Value> = r
            .compatibility
            .iter()
            .map(|(i, v)| json!({"i": i, "verdict": verdict(v, conf)}))
            .collect();
        let v = Verdict::all(r.compatibility.iter().map(|(_, v)| v));
        let v = match (r.chained.passes(), v) {
            (false, _) => Verdict::Fail("flag dimensions differ from 2 + i".into()),
            (true, Verdict::NotReached) => Verdict::Pass,
            (true, v) => v,
        };
        let res = json!({
            "derived": r.chained.derived, "lie": r.chained.lie,
            "derived_ok": r.chained.derived_ok, "regular_ok": r.chained.regular_ok,
            "compatibility": compat,
        });
        (res, v)
    } else {
        match check_chained(&f.system, cfg) {
            Ok(r) => (
                json!({"derived": r.derived, "lie": r.lie, "derived_ok": r.derived_ok, "regular_ok": r.regular_ok}),
                from_bool(r.passes(), "flag dimensions differ from 2 + i"),
            ),
            Err(Error::Precondition(m)) => (json!({}), Verdict::Fail(m)),
            Err(e) => return Err(e.into()),
        }
    };
    Ok((
        json!({"result": res, "verdict": verdict(&v, conf)}),
        status(&v),
    ))
}

fn flat(f: &SystemFile, cfg: &ZeroTestConfig, phi: &[String]) -> Body {
    let user = exprs(phi, f)?;
    let an = analyze(&f.system, cfg)?;
    let r = &an.report;
    if !r.passes() {
        let v = match r.overall() {
            Overall::Undecided => Verdict::Undecided("structure check undecided".into()),
            o => Verdict::Fail(format!("structure check: {}", o.label())),
        };
        return Ok((
            json!({"structure": structure(r), "verdict": verdict(&v, r.confidence)}),
            status(&v),
        ));
    }
    let c = flat_output(&f.system, &an, cfg, &user)?;
    let checks: Map<String, Value> = c
        .checks
        .iter()
        .map(|(k, v)| (k.clone(), verdict(v, r.confidence)))
        .collect();
    let v = Verdict::all(c.checks.iter().map(|(_, v)| v));
    let v = if c.checks.is_empty() {
        Verdict::Fail("nothing verified".into())
    } else {
        v
    };
    let res = json!({
        "mode": if user.len() == 2 { "verify" } else { "suggest" },
        "phi1": c.phi1.to_string(),
        "phi2": c.phi2.as_ref().map(|p| p.to_string()),
        "case": c.case.number(),
        "chains": c.chains,
        "l_perp_dim": c.l_perp.dim(),
        "l_perp": c.l_perp.describe(),
        "checks": checks,
    });
    Ok((
        json!({"result": res, "verdict": verdict(&v, r.confidence)}),
        status(&v),
    ))
}

fn transform(
    f: &SystemFile,
    cfg: &ZeroTestConfig,
    phi: &[String],
    chained: bool,
    transcript: &mut Option<String>,
) -> Body {
    let user = exprs(phi, f)?;
    let pair =
        |u: &[Expr]| -> Option<[Expr; 2]> { (u.len() == 2).then(|| [u[0].clone(), u[1].clone()]) };
    let run = if chained {
        match pair(&user) {
            Some(p) => chained_transform(&f.system, &p, cfg),
            None => Err(Error::Precondition(
                "the chained procedure needs a flat output pair".into(),
            )),
        }
    } else {
        let opts = PipelineOptions {
            step1: f.step1(cfg)?,
            flat_output: pair(&user),
        };
        run_pipeline(&f.system, cfg, &opts)
    };
    let conf = f.system.confidence();
    let r: PipelineResult = match run {
        Ok(r) => r,
        Err(Error::Structure { step, detail }) => {
            let v = Verdict::Fail(format!("{}: {}", step, detail));
            return Ok((
                json!({"failed_step": step, "verdict": verdict(&v, conf)}),
                1,
            ));
        }
        Err(e) => return Err(e.into()),
    };
    *transcript = Some(write_transcript(&r.transcript));
    let conj = r
        .reproduce(&f.system, cfg)
        .map(|s| verify_triangular_form(&s, &r.pattern, cfg).passes())?;
    let equations: Map<String, Value> = r
        .check
        .equations
        .iter()
        .map(|(k, v)| (k.clone(), verdict(v, conf)))
        .collect();
    let v = Verdict::all([
        &from_bool(r.check.passes(), "result is not in triangular form"),
        &from_bool(
            conj,
            "composite change and feedback do not reproduce the result",
        ),
    ]);
    let (n11, n12, n2, n3) = r.pattern.lengths();
    let steps: Vec<String> = r
        .change
        .steps()
        .iter()
        .map(|s| format!("{} := {} @ {}", s.new, s.def, s.replaced))
        .collect();
    let res = json!({
        "pattern": {"n11": n11, "n12": n12, "n2": n2, "n3": n3, "order": strings(&r.pattern.order())},
        "flat_output": strings(&r.flat_output),
        "coord_change": steps,
        "feedback": {
            "g": strings(&r.feedback.g),
            "m": r.feedback.m.iter().map(|row| strings(row)).collect::<Vec<_>>(),
        },
        "stages": r.transcript.iter().map(|t| t.label.clone()).collect::<Vec<_>>(),
        "equations": equations,
        "conjugation_check": conj,
        "system": write_system(&r.system, &[]),
    });
    Ok((
        json!({"result": res, "verdict": verdict(&v, conf)}),
        status(&v),
    ))
}

/// `a`/`drift`, `b1`, `b2` or `[t, t]`.
fn field(sys: &AffineSystem, t: &str) -> Result<VectorField, Failure> {
    let t = t.trim();
    let bad = || {
        Failure::Core(Error::Syntax {
            pos: 0,
            msg: format!("bad bracket term `{}`", t),
        })
    };
    match t {
        "a" | "drift" => return Ok(sys.drift().clone()),
        "b1" => return Ok(sys.input(0).clone()),
        "b2" => return Ok(sys.input(1).clone()),
        _ => {}
    }
    let inner = t
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(bad)?;
    let mut depth = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                let v = field(sys, &inner[..i])?;
                let w = field(sys, &inner[i + 1..])?;
                return Ok(lie_bracket(&v, &w, sys.states()));
            }
            _ => {}
        }
    }
    Err(bad())
}

fn bracket(f: &SystemFile, terms: &[String]) -> Body {
    let term = match terms {
        [t] => t.clone(),
        [a, b] => format!("[{},{}]", a, b),
        _ => {
            return Err(Failure::Core(Error::Precondition(
                "give one or two terms".into(),
            )))
        }
    };
    let v = field(&f.system, &term)?;
    let res = json!({
        "term": term,
        "components": strings(v.components()),
        "field": display_field(&v, f.system.states()),
    });
    Ok((json!({"result": res}), 0))
}

fn flag_summary(d: &Distribution, n: usize) -> Result<Value, Failure> {
    let mut derived = vec![d.clone()];
    while derived.len() < n {
        let last = derived.last().unwrap();
        let next = derived_flag_step(last)?;
        if next.dim() == last.dim() {
            break;
        }
        derived.push(next);
    }
    let mut lie = vec![d.dim()];
    let mut cur = d.clone();
    while lie.len() < n {
        let next = lie_flag_step(d, &cur)?;
        if next.dim() == cur.dim() {
            break;
        }
        lie.push(next.dim());
        cur = next;
    }
    let cauchy: Vec<usize> = derived
        .iter()
        .map(|x| cauchy_characteristics(x).map(|c| c.dim()))
        .collect::<Result<_, _>>()?;
    let (closure, _) = involutive_closure(d)?;
    Ok(json!({
        "generators": d.describe(),
        "derived_dims": derived.iter().map(Distribution::dim).collect::<Vec<_>>(),
        "lie_dims": lie,
        "cauchy_dims": cauchy,
        "closure_dim": closure.dim(),
    }))
}

fn flags(f: &SystemFile, cfg: &ZeroTestConfig) -> Body {
    let sys = &f.system;
    let di = compute_di_sequence(sys, cfg)?;
    let mut res = Map::new();
    res.insert("di_dims".into(), di.dims().into());
    for (i, d) in di.dists.iter().enumerate() {
        if i == 0 || i + 1 == di.dists.len() {
            res.insert(format!("D_{}", i + 1), flag_summary(d, sys.n())?);
        }
    }
    Ok((json!({"result": res}), 0))
}

fn failure(e: Failure) -> Value {
    match e {
        Failure::Load(l) => json!({"error": {"kind": "input", "message": l.to_string()}}),
        Failure::Core(e) => {
            let kind = if e.is_undecided() {
                "cannot decide"
            } else {
                "error"
            };
            json!({"error": {"kind": kind, "message": e.to_string()}})
        }
    }
}

fn input(c: &Command) -> &Input {
    match c {
        Command::Check(i)
        | Command::LinearizeCheck(i)
        | Command::ChainedCheck(i)
        | Command::ExtchainedCheck(i)
        | Command::Flags(i) => i,
        Command::FlatOutput { input, .. }
        | Command::Transform { input, .. }
        | Command::Bracket { input, .. } => input,
    }
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Check(_) => "check",
        Command::LinearizeCheck(_) => "linearize-check",
        Command::ChainedCheck(_) => "chained-check",
        Command::ExtchainedCheck(_) => "extchained-check",
        Command::FlatOutput { .. } => "flat-output",
        Command::Transform { .. } => "transform",
        Command::Bracket { .. } => "bracket",
        Command::Flags(_) => "flags",
    }
}

/// Run one command. The document is deterministic in the inputs.
pub fn run(cli: &Cli) -> Outcome {
    let cfg = ZeroTestConfig {
        samples: cli.samples,
        bound: cli.bound,
        seed: cli.seed,
        ..ZeroTestConfig::default()
    };
    let inp = input(&cli.command);
    let mut doc = Map::new();
    doc.insert("tool".into(), "flatri".into());
    doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    doc.insert("command".into(), name(&cli.command).into());
    doc.insert("input".into(), inp.file.display().to_string().into());
    doc.insert(
        "config".into(),
        json!({"seed": cfg.seed, "samples": cfg.samples, "bound": cfg.bound}),
    );
    let mut transcript = None;
    let body = (|| -> Body {
        cfg.validate()?;
        let f = load(&inp.file, inp.entry)?;
        doc.insert("system".into(), f.system.name().into());
        doc.insert("confidence".into(), f.system.confidence().tag().into());
        doc.insert("sample_log".into(), sample_log(&f.system, &cfg));
        match &cli.command {
            Command::Check(_) => check(&f, &cfg),
            Command::LinearizeCheck(_) => linearize(&f, &cfg),
            Command::ChainedCheck(_) => chained(&f, &cfg, false),
            Command::ExtchainedCheck(_) => chained(&f, &cfg, true),
            Command::FlatOutput { phi, .. } => flat(&f, &cfg, phi),
            Command::Transform { phi, chained, .. } => {
                transform(&f, &cfg, phi, *chained, &mut transcript)
            }
            Command::Bracket { terms, .. } => bracket(&f, terms),
            Command::Flags(_) => flags(&f, &cfg),
        }
    })();
    let (extra, code) = match body {
        Ok(x) => x,
        Err(e) => (failure(e), 2),
    };
    if let Value::Object(m) = extra {
        doc.extend(m);
    }
    if let (Some(p), Some(_)) = (&cli.transcript, &transcript) {
        doc.insert("transcript".into(), p.display().to_string().into());
    }
    doc.insert("exit_code".into(), code.into());
    Outcome {
        doc: Value::Object(doc),
        code,
        transcript,
    }
}

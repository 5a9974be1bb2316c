use flatri_core::flatness::{check_structure, AffineSystem};
use flatri_core::geom::states;
use flatri_core::symx::{is_zero, parse, Expr, Symbol, Vocabulary, ZeroTestConfig};
use flatri_core::transform::{
    apply_feedback, chained_transform, pushforward, run_pipeline, verify_triangular_form,
    CoordChange, Feedback, PipelineOptions, TriangularPattern,
};
use flatri_core::Error;

fn system(name: &str, xs: &[&str], ps: &[&str], rhs: &[&str]) -> AffineSystem {
    let v = Vocabulary::new(xs.iter().chain(ps).chain(["u1", "u2"].iter()));
    let f: Vec<Expr> = rhs.iter().map(|e| parse(e, &v).unwrap()).collect();
    AffineSystem::from_rhs(
        name,
        states(xs.iter().copied()),
        ps.iter().map(|&p| p.into()).collect(),
        &f,
        &["u1".into(), "u2".into()],
    )
    .unwrap()
}

fn academic() -> AffineSystem {
    system(
        "academic",
        &["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"],
        &[],
        &[
            "x4 + 1",
            "x3*x4 - x5",
            "x7 - x8",
            "x6*(x7 - x8 + x1)",
            "x4*(x7 - x8)",
            "x7",
            "u1",
            "u2",
        ],
    )
}

fn motor() -> AffineSystem {
    system(
        "motor",
        &["theta", "omega", "psi", "rho", "id", "iq"],
        &["mu", "tauL", "J", "eta", "M", "np"],
        &[
            "omega",
            "mu*psi*iq - tauL/J",
            "-eta*psi + eta*M*id",
            "np*omega + eta*M*iq/psi",
            "u1",
            "u2",
        ],
    )
}

fn cfg() -> ZeroTestConfig {
    ZeroTestConfig::default()
}

fn ex(s: &AffineSystem, e: &str) -> Expr {
    let u = s.input_symbols();
    let v = Vocabulary::new(s.states().iter().chain(s.params()).chain(u.iter()));
    parse(e, &v).unwrap()
}

fn rhs_of(s: &AffineSystem, x: &str) -> Expr {
    let u = s.input_symbols();
    s.rhs(&u)[s.state_index(x).unwrap()].clone()
}

fn zero(e: Expr) -> bool {
    is_zero(&e, &cfg()).unwrap()
}

fn same(a: &AffineSystem, b: &AffineSystem) -> bool {
    let u = a.input_symbols();
    a.states() == b.states()
        && a.rhs(&u)
            .into_iter()
            .zip(b.rhs(&u))
            .all(|(p, q)| zero(p - q))
}

#[test]
fn academic_pipeline_x2_block() {
    let s = academic();
    let r = run_pipeline(&s, &cfg(), &PipelineOptions::default()).unwrap();
    let f = &r.system;
    assert_eq!(r.pattern.lengths(), (1, 1, 4, 1));
    assert!(zero(rhs_of(f, "x2^1") - ex(f, "x3_2^1")));
    assert!(zero(rhs_of(f, "x2^2") - ex(f, "x2^3*x3_2^1")));
    assert!(zero(rhs_of(f, "x2^3") - ex(f, "x2^4*x3_2^1 - x1_1^1")));
    assert!(zero(rhs_of(f, "x2^4") - ex(f, "x3_1^1")));
    assert!(zero(rhs_of(f, "x3_1^1") - ex(f, "u1")));
    assert!(zero(rhs_of(f, "x3_2^1") - ex(f, "u2")));
    assert!(r.check.passes());
    let again = r.reproduce(&s, &cfg()).unwrap();
    assert!(same(&again, f));
    assert!(r.change.check_round_trip(s.states(), &cfg()).unwrap());
}

#[test]
fn motor_pipeline_form() {
    let s = motor();
    let r = run_pipeline(&s, &cfg(), &PipelineOptions::default()).unwrap();
    let f = &r.system;
    assert_eq!(r.pattern.lengths(), (1, 0, 3, 1));
    assert!(zero(rhs_of(f, "x1_1^1") - ex(f, "x2^1")));
    assert!(zero(rhs_of(f, "x2^1") - ex(f, "x3_2^1")));
    assert!(zero(
        rhs_of(f, "x2^2") - ex(f, "x2^3*x3_2^1 + np*x2^1 + tauL/J*x2^3")
    ));
    assert!(zero(rhs_of(f, "x2^3") - ex(f, "x3_1^1")));
    assert_eq!(r.flat_output[0], ex(&s, "theta"));
    assert_eq!(r.flat_output[1], ex(&s, "rho"));
    let again = r.reproduce(&s, &cfg()).unwrap();
    assert!(same(&again, f));
}

#[test]
fn scrambled_inputs_fail_step_one() {
    let s = academic();
    let mut c = CoordChange::identity();
    c.push(s.states(), "y1", ex(&s, "x1 + x8"), &"x1".into(), &cfg())
        .unwrap();
    let mixed = pushforward(&s, &c).unwrap();
    match run_pipeline(&mixed, &cfg(), &PipelineOptions::default()) {
        Err(Error::Structure { step, detail }) => {
            assert_eq!(step, "step 1");
            assert!(detail.contains("D_1"), "{}", detail);
        }
        other => panic!("{:?}", other.map(|r| r.system)),
    }
    let opts = PipelineOptions {
        step1: Some(c.inverse()),
        flat_output: None,
    };
    let r = run_pipeline(&mixed, &cfg(), &opts).unwrap();
    assert!(r.check.passes());
    assert!(same(&r.reproduce(&mixed, &cfg()).unwrap(), &r.system));
}

#[test]
fn pushforward_renaming_and_identity() {
    let s = academic();
    assert_eq!(pushforward(&s, &CoordChange::identity()).unwrap(), s);
    let mut c = CoordChange::identity();
    let mut cur: Vec<Symbol> = s.states().to_vec();
    let names = [
        "x1_1", "x1_2", "x2_1", "x2_2", "x2_3", "x2_4", "x3_1", "x3_2",
    ];
    for (old, new) in s.states().to_vec().iter().zip(names) {
        c.push(&cur, new, Expr::var(old.clone()), old, &cfg())
            .unwrap();
        cur = c.final_states(s.states()).unwrap();
    }
    let p = pushforward(&s, &c).unwrap();
    assert!(zero(
        rhs_of(&p, "x2_2") - ex(&p, "x2_4*(x3_1 - x3_2 + x1_1)")
    ));
    assert!(zero(rhs_of(&p, "x1_2") - ex(&p, "x2_1*x2_2 - x2_3")));
}

#[test]
fn pushforward_normalized_tops() {
    let s = academic();
    let mut c = CoordChange::identity();
    c.push(s.states(), "xb1", ex(&s, "x4 + 1"), &"x4".into(), &cfg())
        .unwrap();
    let cur = c.final_states(s.states()).unwrap();
    let v = Vocabulary::new(cur.iter());
    c.push(
        &cur,
        "xb2",
        parse("x3*(xb1 - 1) - x5", &v).unwrap(),
        &"x3".into(),
        &cfg(),
    )
    .unwrap();
    let p = pushforward(&s, &c).unwrap();
    let want = ex(&p, "x6*(xb2 + x5)/(xb1 - 1)*(x7 - x8 + x1)");
    assert!(zero(rhs_of(&p, "xb2") - want));
    let back = pushforward(&p, &c.inverse()).unwrap();
    assert!(same(&back, &s));
}

#[test]
fn feedback_round_trip() {
    let s = motor();
    let f = Feedback {
        g: [ex(&s, "omega*psi"), ex(&s, "1 + theta")],
        m: [
            [ex(&s, "2"), ex(&s, "psi")],
            [ex(&s, "0"), ex(&s, "1 + omega**2")],
        ],
    };
    let t = apply_feedback(&s, &f, &cfg()).unwrap();
    let back = apply_feedback(&t, &f.inverse(), &cfg()).unwrap();
    assert!(same(&back, &s));
    assert!(same(
        &apply_feedback(&s, &Feedback::identity(), &cfg()).unwrap(),
        &s
    ));
    let singular = Feedback {
        g: f.g.clone(),
        m: [[ex(&s, "1"), ex(&s, "2")], [ex(&s, "2"), ex(&s, "4")]],
    };
    assert!(apply_feedback(&s, &singular, &cfg()).is_err());
}

#[test]
fn triangular_verifier_flags_dependence() {
    let p = TriangularPattern::standard([0, 0], 4, 0);
    let names = ["x2^1", "x2^2", "x2^3", "x2^4"];
    let good = system(
        "t",
        &names,
        &[],
        &["u2", "x2^3*u2 + x2^1*x2^2", "x2^4*u2 + x2^3", "u1"],
    );
    assert!(verify_triangular_form(&good, &p, &cfg()).passes());
    let bad = system("t", &names, &[], &["u2", "x2^3*u2 + x2^4", "x2^4*u2", "u1"]);
    let c = verify_triangular_form(&bad, &p, &cfg());
    assert!(!c.passes());
    let (eq, v) = c.failures().next().unwrap();
    assert_eq!(eq, "d/dt x2^2");
    assert!(v.detail().unwrap().contains("x2^4"));
}

#[test]
fn triangular_form_passes_structure_check() {
    let p = TriangularPattern {
        x1: [vec!["a".into()], vec!["b".into()]],
        x2: vec!["c".into(), "d".into(), "e".into()],
        x3: [vec!["f".into()], vec!["g".into()]],
    };
    let names = ["a", "b", "c", "d", "e", "f", "g"];
    let s = system(
        "tri",
        &names,
        &[],
        &["c", "d", "g", "e*g + a*c", "f", "u1", "u2"],
    );
    assert!(verify_triangular_form(&s, &p, &cfg()).passes());
    let r = check_structure(&s, &cfg()).unwrap();
    assert!(r.passes(), "{:?}", r);
    assert_eq!((r.chains, r.n2, r.n3), (Some([1, 1]), Some(3), Some(1)));
    let out = run_pipeline(&s, &cfg(), &PipelineOptions::default()).unwrap();
    assert!(out.check.passes());
}

#[test]
fn chained_recovered_after_scrambling() {
    let names = ["y1", "y2", "y3", "y4"];
    let s = system("chained", &names, &[], &["u2", "y3*u2", "y4*u2", "u1"]);
    let mut c = CoordChange::identity();
    c.push(s.states(), "z1", ex(&s, "y1 + y2**3"), &"y1".into(), &cfg())
        .unwrap();
    let scr = pushforward(&s, &c).unwrap();
    let phi = [ex(&scr, "z1 - y2**3"), ex(&scr, "y2")];
    let r = chained_transform(&scr, &phi, &cfg()).unwrap();
    let f = &r.system;
    assert!(zero(rhs_of(f, "x^1") - ex(f, "u2")));
    assert!(zero(rhs_of(f, "x^2") - ex(f, "x^3*u2")));
    assert!(zero(rhs_of(f, "x^3") - ex(f, "x^4*u2")));
    assert!(zero(rhs_of(f, "x^4") - ex(f, "u1")));
    assert!(same(&r.reproduce(&scr, &cfg()).unwrap(), f));
}

#[test]
fn extended_chained_keeps_drift() {
    let names = ["y1", "y2", "y3", "y4", "y5"];
    let s = system(
        "ext",
        &names,
        &[],
        &["u2", "y3*u2 + y1*y3", "y4*u2", "y5*u2", "u1"],
    );
    let phi = [ex(&s, "y1"), ex(&s, "y2")];
    let r = chained_transform(&s, &phi, &cfg()).unwrap();
    let f = &r.system;
    assert!(zero(rhs_of(f, "x^2") - ex(f, "x^3*u2 + x^1*x^3")));
    assert!(r.check.passes());
}

#[test]
fn chained_rejects_bad_flat_output() {
    let names = ["y1", "y2", "y3", "y4"];
    let s = system("chained", &names, &[], &["u2", "y3*u2", "y4*u2", "u1"]);
    let phi = [ex(&s, "y1"), ex(&s, "y4")];
    assert!(matches!(
        chained_transform(&s, &phi, &cfg()),
        Err(Error::Structure { .. })
    ));
}

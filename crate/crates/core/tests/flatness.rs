use flatri_core::flatness::{
    analyze, check_chained, check_extended_chained, check_linearizable, check_structure,
    flat_output, AffineSystem, Case, DiOutcome, Overall, StructureKind,
};
use flatri_core::geom::states;
use flatri_core::symx::{parse, Expr, Vocabulary, ZeroTestConfig};

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

fn v(s: &AffineSystem, e: &str) -> Expr {
    parse(e, &s.vocabulary()).unwrap()
}

#[test]
fn academic_indices() {
    let r = check_structure(&academic(), &cfg()).unwrap();
    assert_eq!(r.overall(), Overall::Pass, "{:?}", r);
    assert_eq!(r.kind, StructureKind::Triangular);
    assert_eq!(r.n3, Some(1));
    assert_eq!(r.n2, Some(4));
    assert_eq!(r.derived_trace, vec![4, 5, 6]);
    assert_eq!(r.s, Some(1));
    assert_eq!(r.chains, Some([1, 1]));
    assert_eq!(r.case, Some(Case::BothChains));
    assert!(r.cross_checks.iter().all(|c| c.ok), "{:?}", r.cross_checks);
}

#[test]
fn motor_indices() {
    let r = check_structure(&motor(), &cfg()).unwrap();
    assert_eq!(r.overall(), Overall::Pass, "{:?}", r);
    assert_eq!(r.n3, Some(1));
    assert_eq!(r.n2, Some(3));
    assert_eq!(r.s, Some(1));
    assert_eq!(r.chains, Some([1, 0]));
    assert_eq!(r.case, Some(Case::OneChain));
    assert_eq!(r.n1(), Some(1));
    assert!(r.cross_checks.iter().all(|c| c.ok), "{:?}", r.cross_checks);
}

#[test]
fn motor_not_linearizable_nor_extended_chained() {
    let m = motor();
    assert!(!check_linearizable(&m, &cfg()).unwrap());
    assert!(!check_extended_chained(&m, &cfg()).unwrap().passes());
}

#[test]
fn academic_flat_output() {
    let s = academic();
    let an = analyze(&s, &cfg()).unwrap();
    let fo = flat_output(&s, &an, &cfg(), &[]).unwrap();
    assert!(fo.verified(), "{:?}", fo.checks);
    assert_eq!(fo.phi1, v(&s, "x1"));
    assert_eq!(fo.phi2, Some(v(&s, "x2")));
    let bad = flat_output(&s, &an, &cfg(), &[v(&s, "x1"), v(&s, "x3")]).unwrap();
    assert!(!bad.verified());
}

#[test]
fn motor_flat_output() {
    let s = motor();
    let an = analyze(&s, &cfg()).unwrap();
    let fo = flat_output(&s, &an, &cfg(), &[]).unwrap();
    assert!(fo.verified(), "{:?}", fo.checks);
    assert_eq!(fo.phi1, v(&s, "theta"));
    assert_eq!(fo.l_perp.dim(), 3);
    let ok = flat_output(&s, &an, &cfg(), &[v(&s, "theta"), v(&s, "rho")]).unwrap();
    assert!(ok.verified(), "{:?}", ok.checks);
    let bad = flat_output(&s, &an, &cfg(), &[v(&s, "theta"), v(&s, "omega")]).unwrap();
    assert!(!bad.verified());
    assert!(bad.failures().any(|(n, _)| n.contains("L^⊥")));
}

#[test]
fn brunovsky_is_linearizable() {
    let s = system(
        "brunovsky",
        &["z1", "z2", "z3", "w1", "w2"],
        &[],
        &["z2", "z3", "u1", "w2", "u2"],
    );
    assert!(check_linearizable(&s, &cfg()).unwrap());
    let r = check_structure(&s, &cfg()).unwrap();
    assert_eq!(r.kind, StructureKind::Linearizable { chains: [3, 2] });
    assert_eq!(r.overall(), Overall::Linearizable);
}

#[test]
fn chained_form_is_case_two() {
    let s = system(
        "chained",
        &["y1", "y2", "y3", "y4"],
        &[],
        &["u1", "u2", "y2*u1", "y3*u1"],
    );
    assert!(check_chained(&s, &cfg()).unwrap().passes());
    let r = check_structure(&s, &cfg()).unwrap();
    assert_eq!(r.case, Some(Case::NoChains));
    assert!(r.passes(), "{:?}", r);
    let an = analyze(&s, &cfg()).unwrap();
    let fo = flat_output(&s, &an, &cfg(), &[]).unwrap();
    assert!(fo.verified(), "{:?}", fo.checks);
}

#[test]
fn unreachable_system() {
    let s = system("stall", &["p", "q", "r"], &[], &["0", "u1", "u2"]);
    let an = analyze(&s, &cfg()).unwrap();
    assert!(matches!(an.di.outcome, DiOutcome::NotAccessible { dim: 2 }));
    assert_eq!(an.report.overall(), Overall::NotAccessible);
}

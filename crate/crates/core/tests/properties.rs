use flatri_core::geom::{
    cauchy_characteristics, derived_flag_step, is_involutive, lie_bracket, lie_derivative,
    lie_flag_step, states, Distribution, States, VectorField,
};
use flatri_core::symx::{is_zero, simplify, Expr, Symbol, ZeroTestConfig};
use proptest::prelude::*;

fn cfg() -> ZeroTestConfig {
    ZeroTestConfig::default()
}

fn zero(e: &Expr) -> bool {
    is_zero(e, &cfg()).unwrap()
}

fn vars(n: usize) -> States {
    states((1..=n).map(|i| format!("x{}", i)))
}

/// Terms as `(coefficient, variable indices)`; degree is the index count.
type Poly = Vec<(i64, Vec<usize>)>;

fn poly(n: usize, deg: usize, terms: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(
        (
            prop_oneof![-3i64..=-1, 1i64..=3],
            prop::collection::vec(0..n, 0..=deg),
        ),
        1..=terms,
    )
}

fn build(p: &Poly, xs: &[Symbol]) -> Expr {
    Expr::sum(
        p.iter()
            .map(|(c, ix)| {
                let mut f = vec![Expr::int(*c)];
                f.extend(ix.iter().map(|&i| Expr::var(xs[i].clone())));
                Expr::product(f)
            })
            .collect::<Vec<_>>(),
    )
}

fn field(ps: &[Poly], xs: &[Symbol]) -> VectorField {
    VectorField(ps.iter().map(|p| build(p, xs)).collect())
}

fn fields(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<Poly>>> {
    prop::collection::vec(prop::collection::vec(poly(n, 2, 2), n), k)
}

fn vanishes(v: &VectorField) -> bool {
    v.components().iter().all(zero)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(fs in fields(3, 3)) {
        let st = vars(3);
        let [a, b, c] = [field(&fs[0], &st), field(&fs[1], &st), field(&fs[2], &st)];
        let ab = lie_bracket(&a, &b, &st);
        prop_assert!(vanishes(&ab.add(&lie_bracket(&b, &a, &st))));
        let jac = lie_bracket(&a, &lie_bracket(&b, &c, &st), &st)
            .add(&lie_bracket(&b, &lie_bracket(&c, &a, &st), &st))
            .add(&lie_bracket(&c, &ab, &st));
        prop_assert!(vanishes(&jac));
    }

    #[test]
    fn lie_derivative_of_bracket(fs in fields(3, 2), h in poly(3, 3, 3)) {
        let st = vars(3);
        let (a, b) = (field(&fs[0], &st), field(&fs[1], &st));
        let h = build(&h, &st);
        let lhs = lie_derivative(&h, &lie_bracket(&a, &b, &st), 1, &st);
        let ab = lie_derivative(&lie_derivative(&h, &b, 1, &st), &a, 1, &st);
        let ba = lie_derivative(&lie_derivative(&h, &a, 1, &st), &b, 1, &st);
        prop_assert!(zero(&(lhs - (ab - ba))));
    }

    #[test]
    fn simplify_preserves_values(p in poly(3, 3, 4), q in poly(3, 2, 3), r in poly(3, 2, 3)) {
        let st = vars(3);
        let (p, q, r) = (build(&p, &st), build(&q, &st), build(&r, &st));
        prop_assume!(!zero(&q));
        let e = &(&(&p * &q) + &r) * &q.recip() - &r * &q.recip();
        let s = simplify(&e);
        prop_assert!(zero(&(&s - &e)));
        prop_assert!(zero(&(&s - &p)));
    }

    #[test]
    fn characteristics_are_characteristic(fs in fields(4, 2), dirs in 2usize..=4) {
        let st = vars(4);
        let gens: Vec<VectorField> = fs
            .iter()
            .map(|f| {
                let mut v = field(f, &st);
                for c in v.0.iter_mut().skip(dirs) {
                    *c = Expr::zero();
                }
                v
            })
            .collect();
        let d = Distribution::span(st.clone(), gens, &cfg()).unwrap();
        let c = cauchy_characteristics(&d).unwrap();
        prop_assert!(d.contains_all(&c).unwrap());
        prop_assert!(is_involutive(&c).unwrap());
        for v in c.generators() {
            for b in d.generators() {
                prop_assert!(d.contains(&lie_bracket(v, b, &st)).unwrap());
            }
        }
        let d1 = derived_flag_step(&d).unwrap();
        prop_assert!(d1.contains_all(&d).unwrap());
        prop_assert!(cauchy_characteristics(&d1).unwrap().contains_all(&c).unwrap());
        let l1 = lie_flag_step(&d, &d).unwrap();
        prop_assert!(l1.equals(&d1).unwrap());
    }
}

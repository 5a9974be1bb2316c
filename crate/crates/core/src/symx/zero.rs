use alloc::format;

use astro_float::BigFloat;
use num_bigint::BigInt;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::diff::differentiate;
use super::eval::{eval, Point, PREC};
use super::expr::{fnv, Expr};
use super::modp::{eval_mod_many_at, modular};
use super::Rational;
use crate::{Error, Result};

/// Extra attempts allowed when sample points hit poles or domain errors.
pub const MAX_RESAMPLE: usize = 100;

/// Parameters of the probabilistic zero test.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTestConfig {
    /// Number of independent points that must all evaluate to zero.
    pub samples: usize,
    /// Numerators are drawn from `[-bound, bound]`, denominators from `[1, bound]`.
    pub bound: u64,
    pub seed: u64,
    /// Relative tolerance for trees evaluated in floating point.
    pub float_tolerance: f64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 5,
            bound: 10_000,
            seed: 0,
            float_tolerance: 1e-24,
        }
    }
}

impl ZeroTestConfig {
    pub fn with_seed(seed: u64) -> Self {
        ZeroTestConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Precondition(
                "sample count must be at least 1".into(),
            ));
        }
        if self.bound < 2 {
            return Err(Error::Precondition(
                "sampling bound must be at least 2".into(),
            ));
        }
        if !(self.float_tolerance > 0.0 && self.float_tolerance < 1.0) {
            return Err(Error::Precondition(
                "float tolerance must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> BigFloat {
        BigFloat::from_f64(self.float_tolerance, PREC)
    }

    /// Total number of points tried before giving up.
    pub fn attempt_budget(&self) -> usize {
        self.samples + MAX_RESAMPLE
    }
}

/// How a verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Confidence {
    /// Every evaluation was exact: rational or modulo a large prime.
    Exact,
    /// Some evaluation used the floating-point path.
    ProbabilisticFloat,
}

impl Confidence {
    pub fn of<'a, I: IntoIterator<Item = &'a Expr>>(exprs: I) -> Confidence {
        if exprs.into_iter().any(Expr::is_approximate) {
            Confidence::ProbabilisticFloat
        } else {
            Confidence::Exact
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Confidence::Exact => "exact",
            Confidence::ProbabilisticFloat => "probabilistic (float)",
        }
    }
}

/// Lazily generated pseudo-random point.
///
/// The value of each name depends only on `(seed, index, name)`, so the
/// same point is reproducible across calls and any name gets a value.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    seed: u64,
    index: u64,
    bound: u64,
}

impl SamplePoint {
    pub fn new(cfg: &ZeroTestConfig, index: u64) -> Self {
        SamplePoint {
            seed: cfg.seed,
            index,
            bound: cfg.bound,
        }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    fn draw(&self, key: u64) -> Rational {
        let s = self
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(self.index.wrapping_mul(0xc2b2_ae3d_27d4_eb4f))
            ^ key;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let span = 2 * self.bound + 1;
        let num = (rng.next_u64() % span) as i64 - self.bound as i64;
        let den = (rng.next_u64() % self.bound) as i64 + 1;
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Point for SamplePoint {
    fn value(&self, name: &str) -> Option<Rational> {
        Some(self.draw(fnv(name.as_bytes())))
    }
}

/// The attempt sequence shared by all generic-point computations.
pub(crate) fn sample_points(cfg: &ZeroTestConfig) -> impl Iterator<Item = SamplePoint> + '_ {
    (0..cfg.attempt_budget() as u64).map(move |i| SamplePoint::new(cfg, i))
}

pub(crate) fn is_resample(e: &Error) -> bool {
    matches!(e, Error::DivisionByZero | Error::Domain)
}

/// Probabilistic identity test: true iff `e` vanishes at `cfg.samples`
/// independent random rational points.
///
/// Points where the expression has a pole (or leaves the domain of `ln` or
/// an even root) are skipped; after [`MAX_RESAMPLE`] extra attempts the test
/// reports [`Error::CannotDecide`].
pub fn is_zero(e: &Expr, cfg: &ZeroTestConfig) -> Result<bool> {
    if let Some(c) = e.as_const() {
        return Ok(num_traits::Zero::is_zero(c));
    }
    let tol = cfg.tolerance();
    let fast = modular(core::slice::from_ref(e));
    let mut good = 0;
    for p in sample_points(cfg) {
        if fast {
            // a modular pole may be an artifact of p; the exact path decides
            match eval_mod_many_at(core::slice::from_ref(e), &p) {
                Ok(v) if v[0] != 0 => return Ok(false),
                Ok(_) => {
                    good += 1;
                    if good == cfg.samples {
                        return Ok(true);
                    }
                    continue;
                }
                Err(Error::DivisionByZero) => {}
                Err(err) => return Err(err),
            }
        }
        match eval(e, &p) {
            Ok(v) => {
                if !v.is_zero_within(&tol) {
                    return Ok(false);
                }
                good += 1;
                if good == cfg.samples {
                    return Ok(true);
                }
            }
            Err(err) if is_resample(&err) => continue,
            Err(err) => return Err(err),
        }
    }
    Err(Error::CannotDecide(format!(
        "no admissible sample point for `{}` after {} attempts",
        e,
        cfg.attempt_budget()
    )))
}

/// True iff `∂e/∂var` is not identically zero.
pub fn depends_on(e: &Expr, var: &str, cfg: &ZeroTestConfig) -> Result<bool> {
    if !e.contains_var(var) {
        return Ok(false);
    }
    Ok(!is_zero(&differentiate(e, var), cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symx::{parse, Vocabulary};

    fn p(s: &str) -> Expr {
        parse(
            s,
            &Vocabulary::new(["x", "y", "x2^4", "x3^1", "x3^2", "x1_1^1"]),
        )
        .unwrap()
    }

    #[test]
    fn identities() {
        let cfg = ZeroTestConfig::default();
        assert!(is_zero(&p("(x+1)**2 - x**2 - 2*x - 1"), &cfg).unwrap());
        assert!(!is_zero(&p("x - y"), &cfg).unwrap());
        assert!(is_zero(&p("sin(x)**2 + cos(x)**2 - 1"), &cfg).unwrap());
        assert!(is_zero(&p("exp(ln(x)) - x"), &cfg).unwrap());
        assert!(!is_zero(&p("sin(x)"), &cfg).unwrap());
    }

    #[test]
    fn dependence() {
        let cfg = ZeroTestConfig::default();
        assert!(depends_on(&p("x*y"), "y", &cfg).unwrap());
        assert!(!depends_on(&p("x*y - y*x + x"), "y", &cfg).unwrap());
        assert!(depends_on(&p("x2^4*(x3^1 - x3^2 + x1_1^1)"), "x3^1", &cfg).unwrap());
    }

    #[test]
    fn undecidable_when_every_point_is_a_pole() {
        let cfg = ZeroTestConfig::default();
        let e = p("1/(x - x)");
        // `x - x` folds to 0 at construction, so the pole is syntactic.
        assert!(matches!(is_zero(&e, &cfg), Err(Error::CannotDecide(_))));
        let e = p("ln(-(x**2) - 1)");
        assert!(matches!(is_zero(&e, &cfg), Err(Error::CannotDecide(_))));
    }

    #[test]
    fn points_are_reproducible() {
        let cfg = ZeroTestConfig::with_seed(42);
        let a = SamplePoint::new(&cfg, 3);
        let b = SamplePoint::new(&cfg, 3);
        assert_eq!(a.value("x"), b.value("x"));
        assert_ne!(a.value("x"), a.value("y"));
        let bound = Rational::from_integer(BigInt::from(cfg.bound));
        let v = a.value("x").unwrap();
        assert!(v <= bound && v >= -bound);
    }
}

//! Nonlinearities, action-type functionals and threshold constants.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::spectral::{self, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// f = -|s|^{p-1}s + |s|^{q-1}s
    Sp1,
    /// f = |s|^{p-1}s + |s|^{q-1}s
    Sp2,
    /// f = |s|^{p-1}s - |s|^{q-1}s
    Sp3,
    /// f = -|s|^{p-1}s - |s|^{q-1}s
    Sp4,
    /// f = |s|^{p-1}s
    Single,
    /// f = -s^p + s^q with integer powers, sigma = 1
    IntegerSp,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Sp1 => "sp1",
            Variant::Sp2 => "sp2",
            Variant::Sp3 => "sp3",
            Variant::Sp4 => "sp4",
            Variant::Single => "single",
            Variant::IntegerSp => "integer_sp",
        };
        f.write_str(s)
    }
}

/// 2/(1 - sigma) for sigma < 1, infinite otherwise.
pub fn critical_exponent(sigma: f64) -> f64 {
    if sigma < 1.0 {
        2.0 / (1.0 - sigma)
    } else {
        f64::INFINITY
    }
}

/// One instance of the stationary problem D^sigma u + c u - f(u) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ProblemSpec {
    pub sigma: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
    pub variant: Variant,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    sigma: f64,
    c: f64,
    p: f64,
    q: f64,
    variant: Variant,
}

impl TryFrom<RawSpec> for ProblemSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        ProblemSpec::new(r.sigma, r.c, r.p, r.q, r.variant)
    }
}

impl From<ProblemSpec> for RawSpec {
    fn from(s: ProblemSpec) -> Self {
        RawSpec {
            sigma: s.sigma,
            c: s.c,
            p: s.p,
            q: s.q,
            variant: s.variant,
        }
    }
}

impl ProblemSpec {
    pub fn new(sigma: f64, c: f64, p: f64, q: f64, variant: Variant) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(sigma > 0.0 && sigma < 2.0) {
            return bad(format!("sigma must lie in (0, 2), got {sigma}"));
        }
        if !(c.is_finite() && c > 0.0) {
            return bad(format!("c must be positive, got {c}"));
        }
        if !(p.is_finite() && p > 1.0) {
            return bad(format!("p must exceed 1, got {p}"));
        }
        if !q.is_finite() {
            return bad(format!("q must be finite, got {q}"));
        }
        let top = critical_exponent(sigma) - 1.0;
        let largest = if variant == Variant::Single { p } else { q };
        if variant != Variant::Single && q <= p {
            return bad(format!("need p < q, got p = {p}, q = {q}"));
        }
        if largest >= top {
            return bad(format!(
                "power {largest} is not below the critical bound {top} for sigma = {sigma}"
            ));
        }
        if variant == Variant::Sp3 && sigma > 1.0 {
            return bad(format!("sp3 requires sigma <= 1, got {sigma}"));
        }
        if variant == Variant::IntegerSp {
            if sigma != 1.0 {
                return bad(format!("integer_sp requires sigma = 1, got {sigma}"));
            }
            if p.fract() != 0.0 || q.fract() != 0.0 || p < 2.0 {
                return bad(format!("integer_sp requires integer powers >= 2, got {p}, {q}"));
            }
        }
        Ok(ProblemSpec {
            sigma,
            c,
            p,
            q,
            variant,
        })
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        ProblemSpec::new(self.sigma, c, self.p, self.q, self.variant)
    }

    pub(crate) fn terms(&self) -> Vec<Term> {
        let (p, q) = (self.p, self.q);
        let t = |coef: f64, power: f64| Term {
            coef,
            power,
            integer: false,
        };
        match self.variant {
            Variant::Sp1 => vec![t(-1.0, p), t(1.0, q)],
            Variant::Sp2 => vec![t(1.0, p), t(1.0, q)],
            Variant::Sp3 => vec![t(1.0, p), t(-1.0, q)],
            Variant::Sp4 => vec![t(-1.0, p), t(-1.0, q)],
            Variant::Single => vec![t(1.0, p)],
            Variant::IntegerSp => vec![
                Term {
                    coef: -1.0,
                    power: p,
                    integer: true,
                },
                Term {
                    coef: 1.0,
                    power: q,
                    integer: true,
                },
            ],
        }
    }
}

/// coef * s^power, odd-extended unless `integer`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    pub coef: f64,
    pub power: f64,
    pub integer: bool,
}

impl Term {
    fn pow(&self, s: f64, e: f64) -> f64 {
        if self.integer {
            s.powi(e as i32)
        } else {
            s.abs().powf(e)
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        if self.integer {
            self.coef * s.powi(self.power as i32)
        } else {
            self.coef * s.signum() * s.abs().powf(self.power)
        }
    }

    /// s f(s)
    pub fn fs(&self, s: f64) -> f64 {
        self.coef * self.pow(s, self.power + 1.0)
    }

    pub fn antiderivative(&self, s: f64) -> f64 {
        self.coef * self.pow(s, self.power + 1.0) / (self.power + 1.0)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let e = self.power - 1.0;
        if self.integer {
            self.coef * self.power * s.powi(e as i32)
        } else {
            self.coef * self.power * s.abs().powf(e)
        }
    }
}

pub fn nonlinearity(spec: &ProblemSpec, s: f64) -> f64 {
    spec.terms().iter().map(|t| t.f(s)).sum()
}

pub fn antiderivative(spec: &ProblemSpec, s: f64) -> f64 {
    spec.terms().iter().map(|t| t.antiderivative(s)).sum()
}

pub fn nonlinearity_derivative(spec: &ProblemSpec, s: f64) -> f64 {
    spec.terms().iter().map(|t| t.derivative(s)).sum()
}

/// Integrals that every functional is assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct Parts {
    /// ||D^{sigma/2} u||^2
    pub kinetic: f64,
    /// ||u||_2^2
    pub mass: f64,
    /// integral of F(u)
    pub potential: f64,
    /// per-term integral of u * term(u), in the order of the variant's terms
    pub term_pairings: Vec<f64>,
    /// ||u||_{p+1}^{p+1}
    pub lp: f64,
    /// ||u||_{q+1}^{q+1}, zero for the single-power variant
    pub lq: f64,
}

/// A problem bound to a grid with its Fourier symbols cached.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    grid: GridSpec,
    terms: Vec<Term>,
    d_sigma: Symbol,
    precond: Symbol,
}

impl Problem {
    pub fn new(spec: ProblemSpec, grid: GridSpec) -> Problem {
        Problem {
            terms: spec.terms(),
            d_sigma: Symbol::power(grid, spec.sigma),
            precond: Symbol::inverse_affine(grid, spec.sigma, 1.0, spec.c),
            spec,
            grid,
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub(crate) fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub(crate) fn d_sigma(&self) -> &Symbol {
        &self.d_sigma
    }

    /// (D^sigma + c)^{-1}
    pub(crate) fn precond(&self) -> &Symbol {
        &self.precond
    }

    fn check(&self, u: &Field) -> Result<()> {
        self.grid.ensure_same(u.grid())
    }

    pub(crate) fn f_values(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&s| self.terms.iter().map(|t| t.f(s)).sum()).collect()
    }

    pub(crate) fn df_values(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .map(|&s| self.terms.iter().map(|t| t.derivative(s)).sum())
            .collect()
    }

    pub(crate) fn parts_slice(&self, u: &[f64]) -> Parts {
        let h = self.grid.spacing();
        let kinetic = self.d_sigma.quadratic_form(u);
        let mass = spectral::dot(h, u, u);
        let mut potential = 0.0;
        let mut term_pairings = vec![0.0; self.terms.len()];
        let mut abs_pairings = vec![0.0; self.terms.len()];
        for &s in u {
            for (i, t) in self.terms.iter().enumerate() {
                // s f_i(s), from which F_i and |s|^{e+1} follow without another power
                let w = t.fs(s);
                term_pairings[i] += w;
                abs_pairings[i] += w.abs();
                potential += w / (t.power + 1.0);
            }
        }
        term_pairings.iter_mut().for_each(|v| *v *= h);
        let lp = h * abs_pairings[0];
        let lq = abs_pairings.get(1).map_or(0.0, |v| h * v);
        Parts {
            kinetic,
            mass,
            potential: potential * h,
            term_pairings,
            lp,
            lq,
        }
    }

    pub fn parts(&self, u: &Field) -> Result<Parts> {
        self.check(u)?;
        Ok(self.parts_slice(u.values()))
    }

    pub(crate) fn action_of(&self, p: &Parts) -> f64 {
        0.5 * p.kinetic + 0.5 * self.spec.c * p.mass - p.potential
    }

    pub(crate) fn nehari_of(&self, p: &Parts) -> f64 {
        p.kinetic + self.spec.c * p.mass - p.term_pairings.iter().sum::<f64>()
    }

    pub(crate) fn pohozaev_residual_of(&self, p: &Parts) -> f64 {
        0.5 * (1.0 - self.spec.sigma) * p.kinetic + 0.5 * self.spec.c * p.mass - p.potential
    }

    /// -c/2 ||u||^2 + integral of F(u).
    pub(crate) fn pohozaev_p_of(&self, p: &Parts) -> f64 {
        -0.5 * self.spec.c * p.mass + p.potential
    }

    pub(crate) fn gradient_slice(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.d_sigma.apply_slice(u);
        let c = self.spec.c;
        for (gi, &s) in g.iter_mut().zip(u) {
            *gi += c * s - self.terms.iter().map(|t| t.f(s)).sum::<f64>();
        }
        g
    }

    pub fn action(&self, u: &Field) -> Result<f64> {
        Ok(self.action_of(&self.parts(u)?))
    }

    pub fn gradient(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        Ok(Field::from_parts(self.grid, self.gradient_slice(u.values())))
    }

    pub fn nehari(&self, u: &Field) -> Result<f64> {
        Ok(self.nehari_of(&self.parts(u)?))
    }

    /// ||u||^2 in H^{sigma/2}_c.
    pub fn hsc_norm_sq(&self, u: &Field) -> Result<f64> {
        let p = self.parts(u)?;
        Ok(p.kinetic + self.spec.c * p.mass)
    }

    /// ||S'(u)||_2 / ||u||_2.
    pub fn el_residual(&self, u: &Field) -> Result<f64> {
        self.check(u)?;
        Ok(self.el_residual_slice(u.values()))
    }

    pub(crate) fn el_residual_slice(&self, u: &[f64]) -> f64 {
        let g = self.gradient_slice(u);
        let num: f64 = g.iter().map(|v| v * v).sum();
        let den: f64 = u.iter().map(|v| v * v).sum();
        (num / den).sqrt()
    }
}

fn require(spec: &ProblemSpec, op: &'static str, allowed: &[Variant]) -> Result<()> {
    if allowed.contains(&spec.variant) {
        Ok(())
    } else {
        Err(Error::UnsupportedVariant {
            op,
            variant: spec.variant,
        })
    }
}

/// S(u) = 1/2 ||D^{sigma/2}u||^2 + c/2 ||u||^2 - integral of F(u).
pub fn action(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    Problem::new(*spec, *u.grid()).action(u)
}

/// S'(u) = D^sigma u + c u - f(u).
pub fn action_gradient(spec: &ProblemSpec, u: &Field) -> Result<Field> {
    Problem::new(*spec, *u.grid()).gradient(u)
}

/// K(u) = <S'(u), u>.
pub fn nehari(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    Problem::new(*spec, *u.grid()).nehari(u)
}

pub fn i_one(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    require(spec, "i_one", &[Variant::Sp1])?;
    let p = Problem::new(*spec, *u.grid()).parts(u)?;
    let (pp, qq) = (spec.p + 1.0, spec.q + 1.0);
    Ok((0.5 - 1.0 / qq) * (p.kinetic + spec.c * p.mass) + (1.0 / pp - 1.0 / qq) * p.lp)
}

pub fn pohozaev_p(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    require(spec, "pohozaev_p", &[Variant::Sp3])?;
    let prob = Problem::new(*spec, *u.grid());
    Ok(prob.pohozaev_p_of(&prob.parts(u)?))
}

pub fn j_three(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    require(spec, "j_three", &[Variant::Sp3])?;
    Ok(0.5 * spec.sigma * spectral::kinetic(u, spec.sigma)?)
}

/// (1-sigma)/2 ||D^{sigma/2}u||^2 + c/2 ||u||^2 - integral of F(u).
pub fn pohozaev_residual(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    let prob = Problem::new(*spec, *u.grid());
    Ok(prob.pohozaev_residual_of(&prob.parts(u)?))
}

/// G_c(s) = c/2 s^2 - |s|^{p+1}/(p+1) + |s|^{q+1}/(q+1).
pub fn g_c(spec: &ProblemSpec, s: f64) -> f64 {
    let a = s.abs();
    0.5 * spec.c * s * s - a.powf(spec.p + 1.0) / (spec.p + 1.0) + a.powf(spec.q + 1.0) / (spec.q + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConstants {
    pub alpha: f64,
    pub beta: f64,
    pub c0: f64,
}

pub fn c_zero(p: f64, q: f64) -> Result<ThresholdConstants> {
    if !(p > 1.0 && q > p && q.is_finite()) {
        return Err(Error::Domain(format!("c_zero needs 1 < p < q, got {p}, {q}")));
    }
    let alpha = (q - 1.0) / (q - p);
    let beta = (p - 1.0) / (q - p);
    let c0 =
        2.0 * (q - p) * (p - 1.0).powf(beta) * (q + 1.0).powf(beta) / ((p + 1.0).powf(alpha) * (q - 1.0).powf(alpha));
    debug_assert!(
        (c0 - c_zero_by_maximization(p, q)).abs() <= 1e-9 * c0,
        "closed-form c0 disagrees with direct maximization"
    );
    Ok(ThresholdConstants { alpha, beta, c0 })
}

/// 2 max_{s>0} (s^{p-1}/(p+1) - s^{q-1}/(q+1)) by golden-section search.
pub fn c_zero_by_maximization(p: f64, q: f64) -> f64 {
    let h = |s: f64| s.powf(p - 1.0) / (p + 1.0) - s.powf(q - 1.0) / (q + 1.0);
    // h > 0 exactly on (0, s_root), with s_root^{q-p} = (q+1)/(p+1)
    let (mut a, mut b) = (0.0, ((q + 1.0) / (p + 1.0)).powf(1.0 / (q - p)));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut h1, mut h2) = (h(x1), h(x2));
    for _ in 0..200 {
        if h1 < h2 {
            a = x1;
            x1 = x2;
            h1 = h2;
            x2 = a + g * (b - a);
            h2 = h(x2);
        } else {
            b = x2;
            x2 = x1;
            h2 = h1;
            x1 = b - g * (b - a);
            h1 = h(x1);
        }
    }
    2.0 * h(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: Variant) -> ProblemSpec {
        ProblemSpec::new(1.0, 1.0, 2.0, 3.0, v).unwrap()
    }

    #[test]
    fn critical_exponent_values() {
        assert_eq!(critical_exponent(0.5), 4.0);
        assert!((critical_exponent(0.9) - 20.0).abs() < 1e-12);
        assert!(critical_exponent(1.0).is_infinite());
        assert!(critical_exponent(1.7).is_infinite());
    }

    #[test]
    fn validation() {
        assert!(ProblemSpec::new(0.5, 1.0, 2.0, 3.0, Variant::Sp1).is_err());
        assert!(ProblemSpec::new(0.5, 1.0, 2.0, 2.5, Variant::Sp1).is_ok());
        assert!(ProblemSpec::new(1.5, 1.0, 2.0, 3.0, Variant::Sp3).is_err());
        assert!(ProblemSpec::new(1.0, 1.0, 3.0, 2.0, Variant::Sp2).is_err());
        assert!(ProblemSpec::new(1.0, 0.0, 2.0, 3.0, Variant::Sp2).is_err());
        assert!(ProblemSpec::new(1.0, 1.0, 2.5, 3.0, Variant::IntegerSp).is_err());
        assert!(ProblemSpec::new(0.9, 1.0, 2.0, 3.0, Variant::IntegerSp).is_err());
        assert!(ProblemSpec::new(1.0, 1.0, 2.0, 3.0, Variant::IntegerSp).is_ok());
        assert!(ProblemSpec::new(0.5, 1.0, 2.0, 0.0, Variant::Single).is_ok());
    }

    #[test]
    fn json_names() {
        let s: ProblemSpec =
            serde_json::from_str(r#"{"sigma":1.0,"c":0.1,"p":2.0,"q":3.0,"variant":"integer_sp"}"#).unwrap();
        assert_eq!(s.variant, Variant::IntegerSp);
        assert!(
            serde_json::from_str::<ProblemSpec>(r#"{"sigma":1.5,"c":0.1,"p":2.0,"q":3.0,"variant":"sp3"}"#).is_err()
        );
    }

    #[test]
    fn pointwise_values() {
        let s1 = spec(Variant::Sp1);
        assert_eq!(nonlinearity(&s1, 1.0), 0.0);
        assert!((antiderivative(&s1, 1.0) - (0.25 - 1.0 / 3.0)).abs() < 1e-15);
        let si = spec(Variant::IntegerSp);
        assert_eq!(nonlinearity(&si, -1.0), -2.0);
        assert!((antiderivative(&si, -1.0) - 7.0 / 12.0).abs() < 1e-15);
        for v in [Variant::Sp1, Variant::Sp2, Variant::Sp3, Variant::Sp4] {
            let sp = ProblemSpec::new(1.0, 1.0, 2.3, 3.7, v).unwrap();
            for s in [0.1, 0.7, 1.9] {
                assert_eq!(nonlinearity(&sp, -s), -nonlinearity(&sp, s));
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for v in [Variant::Sp1, Variant::Sp3, Variant::IntegerSp] {
            let sp = spec(v);
            for s in [-1.3, -0.4, 0.6, 1.7] {
                let e = 1e-6;
                let fd = (nonlinearity(&sp, s + e) - nonlinearity(&sp, s - e)) / (2.0 * e);
                assert!((fd - nonlinearity_derivative(&sp, s)).abs() < 1e-8);
                let fd = (antiderivative(&sp, s + e) - antiderivative(&sp, s - e)) / (2.0 * e);
                assert!((fd - nonlinearity(&sp, s)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn threshold_constants() {
        let t = c_zero(2.0, 3.0).unwrap();
        assert_eq!((t.alpha, t.beta), (2.0, 1.0));
        assert!((t.c0 - 2.0 / 9.0).abs() < 1e-15);
        let t = c_zero(3.0, 5.0).unwrap();
        assert!((t.c0 - 3.0 / 16.0).abs() < 1e-15);
        assert!(c_zero(3.0, 2.0).is_err());
    }

    #[test]
    fn g_c_hand_value() {
        let sp = ProblemSpec::new(1.0, 0.1, 2.0, 3.0, Variant::Sp3).unwrap();
        let v = g_c(&sp, 0.5);
        assert!((v - (0.0125 - 1.0 / 24.0 + 1.0 / 64.0)).abs() < 1e-15);
        assert!(v < 0.0);
    }

    #[test]
    fn unsupported_variants() {
        let g = GridSpec::new(5.0, 32).unwrap();
        let u = Field::zeros(g);
        assert!(i_one(&spec(Variant::Sp2), &u).is_err());
        assert!(pohozaev_p(&spec(Variant::Sp1), &u).is_err());
        assert_eq!(i_one(&spec(Variant::Sp1), &u).unwrap(), 0.0);
        assert_eq!(action(&spec(Variant::Sp1), &u).unwrap(), 0.0);
        assert_eq!(nehari(&spec(Variant::Sp4), &u).unwrap(), 0.0);
        assert_eq!(action_gradient(&spec(Variant::Sp1), &u).unwrap().max_abs(), 0.0);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(40.0, 1024).unwrap()
    }

    /// Two well-resolved bumps.
    fn profile() -> impl Strategy<Value = Field> {
        (0.2..2.0f64, 1.0..3.0f64, -1.0..1.0f64, -4.0..4.0f64).prop_map(|(a, w, b, x0)| {
            Field::from_fn(grid(), |x| {
                a * (-(x / w).powi(2)).exp() + b * (-((x - x0) / w).powi(2)).exp()
            })
            .unwrap()
        })
    }

    fn sp1() -> impl Strategy<Value = ProblemSpec> {
        (0.6..1.9f64, 0.1..3.0f64, 1.2..3.0f64, 0.3..2.0f64)
            .prop_map(|(s, c, p, dq)| {
                ProblemSpec::new(s, c, p, (p + dq).min(critical_exponent(s) - 1.05), Variant::Sp1)
            })
            .prop_filter_map("valid", |r| r.ok())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    proptest! {
        #[test]
        fn action_splits_into_nehari_and_i_one(spec in sp1(), u in profile()) {
            let s = action(&spec, &u).unwrap();
            let k = nehari(&spec, &u).unwrap();
            let i1 = i_one(&spec, &u).unwrap();
            prop_assert!((s - (k / (spec.q + 1.0) + i1)).abs() <= 1e-12 * s.abs().max(i1.abs()));
        }

        #[test]
        fn nehari_is_gradient_pairing(spec in sp1(), u in profile(), v in 0usize..5) {
            let spec = ProblemSpec { variant: [Variant::Sp1, Variant::Sp2, Variant::Sp3, Variant::Sp4, Variant::Single][v], ..spec };
            let g = action_gradient(&spec, &u).unwrap();
            let pairing = spectral::dot(u.grid().spacing(), g.values(), u.values());
            let k = nehari(&spec, &u).unwrap();
            let scale = Problem::new(spec, grid()).hsc_norm_sq(&u).unwrap();
            prop_assert!((pairing - k).abs() <= 1e-10 * scale);
        }

        #[test]
        fn nehari_along_rays_recovers_coefficients(spec in sp1(), u in profile()) {
            // K(lu) = l^2 H + l^{p+1} lp - l^{q+1} lq
            let e = [2.0, spec.p + 1.0, spec.q + 1.0];
            let ls = [0.6, 1.0, 1.5];
            let m: Vec<[f64; 3]> = ls.iter().map(|l: &f64| [l.powf(e[0]), l.powf(e[1]), l.powf(e[2])]).collect();
            let rhs: Vec<f64> = ls.iter().map(|&l| nehari(&spec, &u.scale(l)).unwrap()).collect();
            let det = |a: [[f64; 3]; 3]| {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            };
            let base = [m[0], m[1], m[2]];
            let d = det(base);
            let coef: Vec<f64> = (0..3)
                .map(|j| {
                    let mut a = base;
                    for i in 0..3 {
                        a[i][j] = rhs[i];
                    }
                    det(a) / d
                })
                .collect();
            let parts = Problem::new(spec, grid()).parts(&u).unwrap();
            let h = parts.kinetic + spec.c * parts.mass;
            let scale = h.max(parts.lp).max(parts.lq);
            prop_assert!((coef[0] - h).abs() <= 1e-8 * scale);
            prop_assert!((coef[1] - parts.lp).abs() <= 1e-8 * scale);
            prop_assert!((coef[2] + parts.lq).abs() <= 1e-8 * scale);
        }

        #[test]
        fn dilation_laws(a in 0.2..2.0f64, w in 1.0..3.0f64, b in -1.0..1.0f64, x0 in -4.0..4.0f64, sigma in 0.5..=1.0f64, c in 0.05..0.2f64) {
            let g = GridSpec::new(320.0, 8192).unwrap();
            let spec = ProblemSpec::new(sigma, c, 1.3, 1.6, Variant::Sp3).unwrap();
            // positive, so |u|^{p+1} stays smooth
            let u = Field::from_fn(g, |x| a * (-(x / w).powi(2)).exp() * (1.0 + 0.5 * b * ((x - x0) / w).tanh())).unwrap();
            let (p0, p1) = (pohozaev_p(&spec, &u).unwrap(), pohozaev_p(&spec, &spectral::dilate(&u, 0.5).unwrap()).unwrap());
            prop_assert!(rel(p1, 2.0 * p0) <= 1e-6, "{p1} vs {}", 2.0 * p0);
            // zero mean keeps the |xi|^sigma kink at the origin out of the torus sum
            let v = Field::from_fn(g, |x| {
                let t = (x - x0) / w;
                (a + b * t) * (1.0 - 2.0 * t * t) * (-t * t).exp()
            })
            .unwrap();
            let (j0, j1) = (j_three(&spec, &v).unwrap(), j_three(&spec, &spectral::dilate(&v, 0.5).unwrap()).unwrap());
            prop_assert!(rel(j1, j0 * 2f64.powf(1.0 - sigma)) <= 1e-6, "{j1} vs {}", j0 * 2f64.powf(1.0 - sigma));
        }
    }
}

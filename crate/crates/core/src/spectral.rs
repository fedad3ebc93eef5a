//! Periodic Fourier machinery on a [`GridSpec`].

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

thread_local! {
    static REAL_PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn r2c_plan(n: usize) -> Arc<dyn RealToComplex<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn c2r_plan(n: usize) -> Arc<dyn ComplexToReal<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized half spectrum (bins 0..=N/2).
pub(crate) fn rfft(values: &[f64]) -> Vec<Complex64> {
    let plan = r2c_plan(values.len());
    let mut input = values.to_vec();
    let mut out = plan.make_output_vec();
    plan.process(&mut input, &mut out)
        .expect("buffer sizes come from the plan");
    out
}

/// Inverse of [`rfft`], including the 1/N factor.
pub(crate) fn irfft(mut half: Vec<Complex64>, n: usize) -> Vec<f64> {
    let plan = c2r_plan(n);
    half[0].im = 0.0;
    half[n / 2].im = 0.0;
    let mut out = plan.make_output_vec();
    plan.process(&mut half, &mut out)
        .expect("buffer sizes come from the plan");
    let inv = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= inv);
    out
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 && sigma <= 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must lie in (0, 2], got {sigma}")))
    }
}

fn check_finite(u: &Field) -> Result<()> {
    match u.values().iter().position(|v| !v.is_finite()) {
        Some(m) => Err(Error::Domain(format!("non-finite value at node {m}"))),
        None => Ok(()),
    }
}

/// A real, even Fourier multiplier sampled on the half spectrum of a grid.
#[derive(Debug, Clone)]
pub struct Symbol {
    grid: GridSpec,
    weights: Vec<f64>,
}

impl Symbol {
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Symbol {
        let weights = (0..=grid.len() / 2).map(|k| f(grid.wavenumber(k))).collect();
        Symbol { grid, weights }
    }

    /// |xi|^sigma, with the zero mode mapped to 0.
    pub fn power(grid: GridSpec, sigma: f64) -> Symbol {
        Symbol::from_fn(grid, |xi| if xi == 0.0 { 0.0 } else { xi.powf(sigma) })
    }

    /// a |xi|^sigma + b.
    pub fn affine(grid: GridSpec, sigma: f64, a: f64, b: f64) -> Symbol {
        Symbol::from_fn(grid, |xi| {
            let s = if xi == 0.0 { 0.0 } else { xi.powf(sigma) };
            a * s + b
        })
    }

    /// 1 / (a |xi|^sigma + b).
    pub fn inverse_affine(grid: GridSpec, sigma: f64, a: f64, b: f64) -> Symbol {
        Symbol::from_fn(grid, |xi| {
            let s = if xi == 0.0 { 0.0 } else { xi.powf(sigma) };
            1.0 / (a * s + b)
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn apply_slice(&self, u: &[f64]) -> Vec<f64> {
        let mut half = rfft(u);
        for (c, w) in half.iter_mut().zip(&self.weights) {
            *c *= *w;
        }
        irfft(half, u.len())
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        self.grid.ensure_same(u.grid())?;
        Ok(Field::from_parts(self.grid, self.apply_slice(u.values())))
    }

    /// h * sum_k w_k |u_k|^2 / N, i.e. <u, W u> without an inverse transform.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let half = rfft(u);
        let n = u.len();
        let mut acc = 0.0;
        for (k, (c, w)) in half.iter().zip(&self.weights).enumerate() {
            let mult = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
            acc += mult * w * c.norm_sqr();
        }
        acc * self.grid.spacing() / n as f64
    }
}

/// Unitary DFT coefficients in standard layout; bin k holds wavenumber pi*k'/L
/// with k' the signed index.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(u: &Field) -> Spectrum {
        let n = u.grid().len();
        let mut buf: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_plan(n, false).process(&mut buf);
        let s = 1.0 / (n as f64).sqrt();
        buf.iter_mut().for_each(|c| *c *= s);
        Spectrum {
            grid: *u.grid(),
            coefficients: buf,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient of signed wavenumber index k in -N/2..N/2.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.coefficients.len() as i64;
        self.coefficients[k.rem_euclid(n) as usize]
    }

    /// max |c(-k) - conj c(k)|.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.coefficients.len();
        (0..n)
            .map(|k| (self.coefficients[(n - k) % n] - self.coefficients[k].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// sqrt(h * sum |c_k|^2); equals the grid L2 norm by unitarity.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coefficients.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.spacing() * s).sqrt()
    }

    /// Inverse transform; the imaginary residue is dropped.
    pub fn to_field(&self) -> Field {
        let n = self.coefficients.len();
        let mut buf = self.coefficients.clone();
        fft_plan(n, true).process(&mut buf);
        let s = 1.0 / (n as f64).sqrt();
        Field::from_parts(self.grid, buf.iter().map(|c| c.re * s).collect())
    }
}

/// D^sigma u.
pub fn apply_symbol(u: &Field, sigma: f64) -> Result<Field> {
    check_sigma(sigma)?;
    check_finite(u)?;
    Symbol::power(*u.grid(), sigma).apply(u)
}

/// (D^sigma + nu)^{-1} u.
pub fn resolvent(u: &Field, sigma: f64, nu: f64) -> Result<Field> {
    check_sigma(sigma)?;
    check_finite(u)?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::Domain(format!("resolvent needs nu > 0, got {nu}")));
    }
    Symbol::inverse_affine(*u.grid(), sigma, 1.0, nu).apply(u)
}

/// Discrete delta of mass one at x = 0.
pub fn delta(grid: GridSpec) -> Field {
    let mut v = vec![0.0; grid.len()];
    v[grid.center()] = 1.0 / grid.spacing();
    Field::from_parts(grid, v)
}

/// The kernel N_nu^sigma: the resolvent applied to the discrete delta.
pub fn kernel(sigma: f64, nu: f64, grid: GridSpec) -> Result<Field> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::Domain(format!("kernel needs sigma in (0, 2), got {sigma}")));
    }
    resolvent(&delta(grid), sigma, nu)
}

/// Rectangle rule h * sum u.
pub fn quadrature(u: &Field) -> f64 {
    u.grid().spacing() * u.values().iter().sum::<f64>()
}

pub(crate) fn dot(h: f64, a: &[f64], b: &[f64]) -> f64 {
    h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// h * sum |u|^r.
pub(crate) fn power_sum(h: f64, u: &[f64], r: f64) -> f64 {
    h * u.iter().map(|v| v.abs().powf(r)).sum::<f64>()
}

pub fn lp_norm(u: &Field, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("lp_norm needs r >= 1, got {r}")));
    }
    Ok(power_sum(u.grid().spacing(), u.values(), r).powf(1.0 / r))
}

/// ||D^{sigma/2} u||^2.
pub fn kinetic(u: &Field, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(Symbol::power(*u.grid(), sigma).quadratic_form(u.values()))
}

/// The H^{sigma/2}_c norm.
pub fn hsc_norm(u: &Field, sigma: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("hsc_norm needs c > 0, got {c}")));
    }
    let d = apply_symbol(u, sigma / 2.0)?;
    let h = u.grid().spacing();
    Ok((dot(h, d.values(), d.values()) + c * dot(h, u.values(), u.values())).sqrt())
}

/// Fraction of the L2 mass carried by nodes with |x| >= 0.9 L.
pub fn boundary_mass_fraction(u: &Field) -> f64 {
    let l = u.grid().half_length();
    let (mut edge, mut total) = (0.0, 0.0);
    for (m, v) in u.values().iter().enumerate() {
        let w = v * v;
        total += w;
        if u.grid().x(m).abs() >= 0.9 * l {
            edge += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

/// Fraction of spectral energy in the top 10% of wavenumbers.
pub fn spectral_tail_fraction(u: &Field) -> f64 {
    let half = rfft(u.values());
    let cut = (half.len() as f64 * 0.9) as usize;
    let total: f64 = half.iter().map(|c| c.norm_sqr()).sum();
    let tail: f64 = half[cut..].iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Samples of the trigonometric interpolant of `u` at beta * x_m, by chirp-z.
/// With beta = 1/alpha this is the dilation x -> u(x / alpha).
pub fn dilate(u: &Field, beta: f64) -> Result<Field> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!("dilation factor must be positive, got {beta}")));
    }
    let n = u.grid().len();
    let half = n / 2;
    let nf = n as f64;
    let full = {
        let mut buf: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_plan(n, false).process(&mut buf);
        buf
    };
    // a_k for k = -N/2..=N/2, Nyquist split evenly between both ends
    let chirp = |t: f64| Complex64::from_polar(1.0, PI * beta * t * t / nf);
    let mut a: Vec<Complex64> = (0..=n)
        .map(|i| {
            let k = i as i64 - half as i64;
            let mut c = full[k.rem_euclid(n as i64) as usize] / nf;
            if i == 0 || i == n {
                c *= 0.5;
            }
            let kf = k as f64;
            c * Complex64::from_polar(1.0, PI * kf * (1.0 - beta)) * chirp(kf)
        })
        .collect();
    // b(t) = conj chirp(t) for t = k - j in [-(N-1)-N/2, N/2], stored reversed
    let nb = 2 * n;
    let tmax = half as i64;
    let m = (a.len() + nb).next_power_of_two();
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    for (s, slot) in b.iter_mut().take(nb).enumerate() {
        *slot = chirp((tmax - s as i64) as f64).conj();
    }
    a.resize(m, Complex64::new(0.0, 0.0));
    fft_plan(m, false).process(&mut a);
    fft_plan(m, false).process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    fft_plan(m, true).process(&mut a);
    let inv = 1.0 / m as f64;
    let values = (0..n).map(|j| (chirp(j as f64) * a[n + j] * inv).re).collect();
    Field::new(*u.grid(), values)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn field() -> impl Strategy<Value = Field> {
        prop::collection::vec(-1.0..1.0f64, 64).prop_map(|v| Field::new(GridSpec::new(5.0, 64).unwrap(), v).unwrap())
    }

    fn gap(a: &Field, b: &Field) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn symbol_is_linear(u in field(), v in field(), a in -3.0..3.0f64, b in -3.0..3.0f64, s in 0.1..2.0f64) {
            let lhs = apply_symbol(&u.combine(a, &v, b).unwrap(), s).unwrap();
            let rhs = apply_symbol(&u, s).unwrap().combine(a, &apply_symbol(&v, s).unwrap(), b).unwrap();
            prop_assert!(gap(&lhs, &rhs) <= 1e-11 * (1.0 + rhs.max_abs()));
        }

        #[test]
        fn symbol_commutes_with_reflection(u in field(), s in 0.1..2.0f64) {
            let a = apply_symbol(&u.reflect(), s).unwrap();
            let b = apply_symbol(&u, s).unwrap().reflect();
            prop_assert!(gap(&a, &b) <= 1e-12 * (1.0 + b.max_abs()));
        }

        #[test]
        fn symbol_is_self_adjoint(u in field(), v in field(), s in 0.1..2.0f64) {
            let h = u.grid().spacing();
            let a = dot(h, apply_symbol(&u, s).unwrap().values(), v.values());
            let b = dot(h, u.values(), apply_symbol(&v, s).unwrap().values());
            prop_assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()));
        }

        #[test]
        fn symbols_compose(u in field(), s in 0.05..1.0f64, t in 0.05..1.0f64) {
            let two = apply_symbol(&apply_symbol(&u, s).unwrap(), t).unwrap();
            let one = apply_symbol(&u, s + t).unwrap();
            prop_assert!(gap(&two, &one) <= 1e-11 * (1.0 + one.max_abs()));
        }

        #[test]
        fn plancherel(u in field()) {
            let spec = Spectrum::of(&u);
            let direct = lp_norm(&u, 2.0).unwrap();
            prop_assert!((spec.l2_norm() - direct).abs() <= 1e-13 * (1.0 + direct));
            prop_assert!(spec.conjugate_symmetry_defect() <= 1e-13);
            prop_assert!(gap(&spec.to_field(), &u) <= 1e-14);
        }

        #[test]
        fn resolvent_inverts_affine_symbol(u in field(), s in 0.1..2.0f64, nu in 0.1..3.0f64) {
            let r = resolvent(&u, s, nu).unwrap();
            let back = apply_symbol(&r, s).unwrap().combine(1.0, &r, nu).unwrap();
            prop_assert!(gap(&back, &u) <= 1e-12);
        }
    }
}

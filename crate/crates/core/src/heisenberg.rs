//! The Heisenberg group `Hⁿ = ℂⁿ × ℝ`, its heat kernel in real and complex
//! time, and the kernel's `λ`-slices.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::adaptive_with_breaks;
use crate::real::{from_usize, lit, re, to_f64, Real};

/// Relative size of `|λ/sinh λε|ⁿ` at which the `λ`-integral is truncated.
pub const LAMBDA_CUTOFF: f64 = 1e-14;

/// A point `(z, t)` of `Hⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint<T: Real> {
    pub z: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> HeisenbergPoint<T> {
    pub fn new(z: Vec<Complex<T>>, t: T) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        if !t.is_finite() || z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("coordinates must be finite".into()));
        }
        Ok(Self { z, t })
    }

    /// The identity of `Hⁿ`.
    pub fn origin(n: usize) -> Self {
        Self {
            z: vec![Complex::new(T::zero(), T::zero()); n],
            t: T::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `|z|`.
    pub fn z_norm(&self) -> T {
        self.z.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    /// Group inverse `(-z, -t)`.
    pub fn inverse(&self) -> Self {
        Self {
            z: self.z.iter().map(|c| -c).collect(),
            t: -self.t,
        }
    }

    /// Non-isotropic dilation `(r z, r² t)`.
    pub fn dilate(&self, r: T) -> Self {
        Self {
            z: self.z.iter().map(|c| c * r).collect(),
            t: self.t * r * r,
        }
    }
}

/// `Im(z · w̄) = Σ_j Im(z_j conj(w_j))`.
pub fn symplectic<T: Real>(z: &[Complex<T>], w: &[Complex<T>]) -> T {
    z.iter().zip(w).map(|(a, b)| (a * b.conj()).im).sum()
}

/// `(z, t)(w, s) = (z + w, t + s + ½ Im(z · w̄))`.
pub fn group_law<T: Real>(p: &HeisenbergPoint<T>, q: &HeisenbergPoint<T>) -> Result<HeisenbergPoint<T>> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch(p.n(), q.n()));
    }
    Ok(HeisenbergPoint {
        z: p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect(),
        t: p.t + q.t + symplectic(&p.z, &q.z) / lit(2.0),
    })
}

/// Complex time `ζ = ε + i s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTime<T: Real> {
    pub eps: T,
    pub s: T,
}

impl<T: Real> ComplexTime<T> {
    pub fn new(eps: T, s: T) -> Result<Self> {
        if !(eps >= T::zero()) || !s.is_finite() || !eps.is_finite() {
            return Err(Error::InvalidArgument("need finite eps >= 0 and finite s".into()));
        }
        Ok(Self { eps, s })
    }

    /// Real heat time `s > 0`.
    pub fn heat(s: T) -> Self {
        Self { eps: s, s: T::zero() }
    }

    pub fn zeta(&self) -> Complex<T> {
        Complex::new(self.eps, self.s)
    }

    fn require_positive(&self) -> Result<()> {
        if self.eps > T::zero() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "kernel evaluation needs eps > 0".into(),
            ))
        }
    }
}

/// `(λ / sinh λζ, λ coth λζ)` for `λ ≥ 0`, `Re ζ ≥ 0`, stable for small and
/// large `|λζ|`.
pub(crate) fn sinh_coth_factors<T: Real>(lambda: T, zeta: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
    let w = zeta * lambda;
    let one = re(T::one());
    if w.norm() < lit(0.5) {
        // sinh(w)/w by its Taylor series
        let w2 = w * w;
        let mut term = one;
        let mut sum = one;
        for k in 1..12 {
            let kf: T = from_usize(2 * k * (2 * k + 1));
            term = term * w2 / kf;
            sum += term;
        }
        let ratio = one / (zeta * sum);
        return Ok((ratio, w.cosh() * ratio));
    }
    // Re w >= 0: sinh w = e^w (1 - e^{-2w}) / 2
    let e2 = (-w * lit::<T>(2.0)).exp();
    let d = one - e2;
    if d.norm() < lit(1e-14) {
        return Err(Error::Pole("sinh(λζ) = 0"));
    }
    let ratio = (-w).exp() * lit::<T>(2.0) * lambda / d;
    Ok((ratio, (one + e2) / d * lambda))
}

/// `λ`-slice `q_ζ^λ(z) = (4π)^{-n} (λ/sinh λζ)ⁿ exp(-¼ λ coth(λζ) |z|²)` at
/// `|z| = r`; even in `λ`, and equal to the Euclidean heat kernel
/// `(4πζ)^{-n} e^{-r²/(4ζ)}` at `λ = 0`.
pub fn heat_kernel_lambda<T: Real>(zeta: ComplexTime<T>, lambda: T, r: T, n: usize) -> Result<Complex<T>> {
    if n == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    if !(r >= T::zero()) {
        return Err(Error::InvalidArgument("r must be >= 0".into()));
    }
    let z = zeta.zeta();
    if z.norm() == T::zero() {
        return Err(Error::Pole("ζ = 0"));
    }
    let (ratio, coth) = sinh_coth_factors(lambda.abs(), z)?;
    let pref = T::one() / (lit::<T>(4.0) * T::PI()).powi(n as i32);
    Ok(crate::real::cpowi(ratio, n as i32) * (-coth * (r * r) / lit::<T>(4.0)).exp() * pref)
}

/// `r ↦ q_ζ^λ(r)` with the `r`-independent factors evaluated once.
pub fn heat_kernel_lambda_fn<T: Real>(
    zeta: ComplexTime<T>,
    lambda: T,
    n: usize,
) -> Result<impl Fn(T) -> Complex<T> + Sync + Send + Copy> {
    if n == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let z = zeta.zeta();
    if z.norm() == T::zero() {
        return Err(Error::Pole("ζ = 0"));
    }
    let (ratio, coth) = sinh_coth_factors(lambda.abs(), z)?;
    let pref = crate::real::cpowi(ratio, n as i32) / (lit::<T>(4.0) * T::PI()).powi(n as i32);
    let c = coth / lit::<T>(4.0);
    Ok(move |r: T| pref * (-c * (r * r)).exp())
}

/// `Λ` with `|Λε/sinh Λε|ⁿ = ` [`LAMBDA_CUTOFF`].
pub(crate) fn lambda_cutoff<T: Real>(eps: T, n: usize) -> T {
    let delta = LAMBDA_CUTOFF.powf(1.0 / n as f64);
    // x / sinh x = δ  ⇔  x = asinh(x / δ)
    let mut x = 1.0f64;
    for _ in 0..60 {
        x = (x / delta).asinh();
    }
    lit::<T>(x) / eps
}

/// Full kernel `q_ζ(z, t) = (2π)^{-1} ∫ e^{-iλt} q_ζ^λ(z) dλ` by adaptive
/// quadrature over `|λ| ≤ Λ`. For real `ζ` the result is real.
pub fn heat_kernel<T: Real>(zeta: ComplexTime<T>, p: &HeisenbergPoint<T>) -> Result<Complex<T>> {
    zeta.require_positive()?;
    let n = p.n();
    let r = p.z_norm();
    let t = p.t;
    let big = lambda_cutoff(zeta.eps, n);
    // breaks at the near-poles λ|s| = kπ and at the oscillation scale of e^{-iλt}
    let mut breaks = vec![T::zero()];
    let mut scale = big;
    if zeta.s != T::zero() {
        scale = scale.min(T::PI() / zeta.s.abs());
    }
    if t != T::zero() {
        scale = scale.min(lit::<T>(4.0) * T::PI() / t.abs());
    }
    let pieces = to_f64(big / scale).ceil().clamp(1.0, 400.0) as usize;
    for k in 1..=pieces {
        breaks.push(big * from_usize(k) / from_usize(pieces));
    }
    let peak = heat_kernel_lambda(zeta, T::zero(), T::zero(), n)?.norm();
    let mut err = None;
    // the integrand is even in λ: ∫_ℝ e^{-iλt} g(λ) dλ = 2 ∫_0^∞ cos(λt) g(λ) dλ
    let res = adaptive_with_breaks(
        &mut |lambda: T| match heat_kernel_lambda(zeta, lambda, r, n) {
            Ok(v) => v * (lambda * t).cos(),
            Err(e) => {
                err.get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        },
        &breaks,
        peak * lit(1e-15),
        lit(1e-11),
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let mut v = res.value / T::PI();
    if zeta.s == T::zero() {
        v.im = T::zero();
    }
    Ok(v)
}

/// Outcome of comparing `q_s` with `s^{-n-1} e^{-(π/2)|t|/s} e^{-|z|²/(4s)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatBound<T: Real> {
    /// Largest ratio over the grid.
    pub c_est: T,
    /// `c_est` is finite.
    pub holds: bool,
    pub ratios: Vec<T>,
}

/// Ratio of the heat kernel to its Gaussian majorant at every grid point.
pub fn heat_bound_check<T: Real>(s: T, points: &[HeisenbergPoint<T>]) -> Result<HeatBound<T>> {
    if !(s > T::zero()) {
        return Err(Error::InvalidArgument("s must be > 0".into()));
    }
    let ratios = points
        .par_iter()
        .map(|p| {
            let q = heat_kernel(ComplexTime::heat(s), p)?.re;
            let n = p.n() as i32;
            let r2 = p.z.iter().map(|c| c.norm_sqr()).sum::<T>();
            let majorant = s.powi(-n - 1)
                * (-T::FRAC_PI_2() * p.t.abs() / s).exp()
                * (-r2 / (lit::<T>(4.0) * s)).exp();
            Ok(q / majorant)
        })
        .collect::<Result<Vec<T>>>()?;
    let c_est = ratios.iter().copied().fold(T::zero(), T::max);
    Ok(HeatBound {
        c_est,
        holds: c_est.is_finite(),
        ratios,
    })
}

/// Relative gap between the bound constants at times `s1` and `s2`, the
/// second grid being the first dilated by `√(s2/s1)`.
pub fn heat_bound_scale_invariance<T: Real>(points: &[HeisenbergPoint<T>], s1: T, s2: T) -> Result<T> {
    let dil = (s2 / s1).sqrt();
    let scaled: Vec<_> = points.iter().map(|p| p.dilate(dil)).collect();
    let c1 = heat_bound_check(s1, points)?.c_est;
    let c2 = heat_bound_check(s2, &scaled)?.c_est;
    Ok((c1 - c2).abs() / c1.abs().max(c2.abs()))
}

/// `7 × 7` grid over `|z| ≤ 3` (along the first coordinate) and `|t| ≤ 3`.
pub fn default_bound_grid<T: Real>(n: usize) -> Vec<HeisenbergPoint<T>> {
    let mut out = Vec::with_capacity(49);
    for i in 0..7 {
        for j in 0..7 {
            let mut p = HeisenbergPoint::origin(n);
            p.z[0] = re(lit::<T>(0.5) * from_usize(i));
            p.t = lit::<T>(-3.0) + from_usize(j);
            out.push(p);
        }
    }
    out
}

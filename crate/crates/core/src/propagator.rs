//! Regularized Schrödinger flow on a λ-slice and the quantities built on it:
//! both sides of the sectoral Hankel identity, the kernel `K_λ(r,t;s₀)`,
//! the uniqueness gate and the extremal profile.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::grid::{sphere_area, PolarGrid, RadialProfile, SpectralSlice};
use crate::hankel::{fit_gaussian_decay, gaussian_transform, hankel_transform, DecayFit, HankelPlan};
use crate::heisenberg::{heat_kernel_lambda_fn, sinh_coth_factors, ComplexTime};
use crate::real::{from_usize, im, lit, re, to_f64, Real};
use crate::specfun::{bessel_j_tilde, BilinearLaguerre, ABEL_RHO};
use crate::spherical::BigradedBasis;
use crate::twisted::{twisted_convolution_kernel, twisted_convolution_kernel_at};

/// `|sin λs₀|` at or below this is treated as a zero of `sin`.
pub const EXCEPTIONAL_SIN: f64 = 1e-6;

/// Ratio samples with `|rhs|` below this fraction of the peak are ignored.
pub const RATIO_FLOOR: f64 = 1e-8;

/// Regularization used by [`equality_case_profile`].
pub const EQUALITY_EPS: f64 = 1e-3;

/// Radii over which the evolved extremal's decay is fitted.
pub const EQUALITY_FIT_WINDOW: (f64, f64) = (2.0, 5.0);

/// Decay rates, time and regularization entering the gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams<T: Real> {
    pub a: T,
    pub b: T,
    pub s0: T,
    pub eps: T,
    /// `0` stands for the `λ → 0` limit.
    pub lambda: T,
}

impl<T: Real> GateParams<T> {
    pub fn new(a: T, b: T, s0: T, eps: T, lambda: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero()) {
            return Err(Error::InvalidArgument("decay rates a, b must be > 0".into()));
        }
        if !(s0 != T::zero() && s0.is_finite()) {
            return Err(Error::InvalidArgument("s0 must be nonzero and finite".into()));
        }
        if !(eps >= T::zero()) || !(lambda >= T::zero()) {
            return Err(Error::InvalidArgument("need eps >= 0 and lambda >= 0".into()));
        }
        Ok(Self { a, b, s0, eps, lambda })
    }
}

fn check_exceptional<T: Real>(lambda: T, s0: T) -> Result<T> {
    let sin = (lambda * s0).sin();
    if !(sin.abs() > lit(EXCEPTIONAL_SIN)) {
        return Err(Error::ExceptionalLambda(to_f64(lambda)));
    }
    Ok(sin)
}

/// `u^λ = f^λ ∗_λ q_ζ^λ`, with the kernel taken in closed form.
pub fn schrodinger_evolve<T: Real>(f: &SpectralSlice<T>, zeta: ComplexTime<T>) -> Result<SpectralSlice<T>> {
    require_eps(zeta)?;
    let kernel = heat_kernel_lambda_fn(zeta, f.lambda, f.n())?;
    twisted_convolution_kernel(f, &kernel)
}

/// [`schrodinger_evolve`] at the points `(r, 0, …, 0)`; the whole field
/// when `f` is radial.
pub fn schrodinger_evolve_radial<T: Real>(
    f: &SpectralSlice<T>,
    zeta: ComplexTime<T>,
    radii: &[T],
) -> Result<RadialProfile<T>> {
    require_eps(zeta)?;
    let kernel = heat_kernel_lambda_fn(zeta, f.lambda, f.n())?;
    let mut z = vec![Complex::new(T::zero(), T::zero()); f.n()];
    let values = radii
        .iter()
        .map(|&r| {
            z[0] = re(r);
            twisted_convolution_kernel_at(f, &kernel, &z)
        })
        .collect::<Result<Vec<_>>>()?;
    RadialProfile::new(radii.to_vec(), values, from_usize::<T>(2 * f.n() - 1))
}

fn require_eps<T: Real>(zeta: ComplexTime<T>) -> Result<()> {
    if zeta.eps > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("evolution needs eps > 0".into()))
    }
}

/// Mean of `lhs/rhs` and its relative spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats<T: Real> {
    pub mean: Complex<T>,
    /// `sqrt(mean |ratio - mean|²) / |mean|`.
    pub relative_std: T,
    pub samples: usize,
}

/// Ratio statistics over the nodes where `|rhs| > 1e-8 · max |rhs|`.
pub fn ratio_stats<T: Real>(lhs: &RadialProfile<T>, rhs: &RadialProfile<T>) -> Result<RatioStats<T>> {
    if lhs.r != rhs.r {
        return Err(Error::GridMismatch("lhs and rhs radii differ"));
    }
    let floor = rhs.max_abs() * lit(RATIO_FLOOR);
    let ratios: Vec<Complex<T>> = lhs
        .values
        .iter()
        .zip(&rhs.values)
        .filter(|(_, b)| b.norm() > floor && floor > T::zero())
        .map(|(a, b)| a / b)
        .collect();
    if ratios.is_empty() {
        return Err(Error::DegenerateRatio);
    }
    let count: T = from_usize(ratios.len());
    let mean = ratios.iter().fold(re(T::zero()), |acc, v| acc + v) / count;
    if mean.norm() == T::zero() {
        return Err(Error::DegenerateRatio);
    }
    let var = ratios.iter().map(|v| (v - mean).norm_sqr()).fold(T::zero(), |a, b| a + b) / count;
    Ok(RatioStats {
        mean,
        relative_std: var.sqrt() / mean.norm(),
        samples: ratios.len(),
    })
}

/// Both sides of the sectoral identity on a common radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelIdentity<T: Real> {
    pub lhs: RadialProfile<T>,
    pub rhs: RadialProfile<T>,
    /// `None` when the right side vanishes on the grid.
    pub stats: Option<RatioStats<T>>,
    pub warning: Option<Warning>,
}

impl<T: Real> HankelIdentity<T> {
    fn assemble(lhs: RadialProfile<T>, rhs: RadialProfile<T>, warning: Option<Warning>) -> Result<Self> {
        let stats = match ratio_stats(&lhs, &rhs) {
            Ok(s) => Some(s),
            Err(Error::DegenerateRatio) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { lhs, rhs, stats, warning })
    }

    /// The ratio statistics, or `DegenerateRatio` when there are none.
    pub fn ratio(&self) -> Result<RatioStats<T>> {
        self.stats.ok_or(Error::DegenerateRatio)
    }
}

/// Both sides from sampled data.
///
/// `f_eps` is the regularized slice `f_ε^λ = f^λ ∗_λ q_ε^λ`. The left side is
/// the `(p,q,j)` coefficient of `f_ε^λ ∗_λ q_{is₀}^λ` (which equals
/// `f^λ ∗_λ q_{ε+is₀}^λ`) at each radius of `r_grid`; the right side is
/// `r^{p+q} e^{iλr²cot(λs₀)/4} 𝓗_{n+p+q-1}[e^{iλt²cot(λs₀)/4} t^{-(p+q)} (f_ε^λ)_{p,q,j}](λr / 2sin λs₀)`.
pub fn theorem34_pair<T: Real>(
    f_eps: &SpectralSlice<T>,
    basis: &BigradedBasis<T>,
    j: usize,
    s0: T,
    r_grid: &[T],
) -> Result<HankelIdentity<T>> {
    let lambda = f_eps.lambda;
    let n = f_eps.n();
    if basis.n != n {
        return Err(Error::DimensionMismatch(basis.n, n));
    }
    let sin = check_exceptional(lambda, s0)?;
    let y = basis.element(j)?;
    let d = (basis.p + basis.q) as i32;
    let measure = from_usize::<T>(2 * n - 1);
    let quarter: T = lit(0.25);
    let chirp = lambda * (lambda * s0).cos() / sin * quarter;

    // the Schrödinger kernel has no decay; only f_ε needs to be sampled
    let kernel = heat_kernel_lambda_fn(ComplexTime::new(T::zero(), s0)?, lambda, n)?;
    let sphere = &f_eps.grid.sphere;
    let conj_y: Vec<Complex<T>> = (0..sphere.len())
        .map(|k| y.evaluate(sphere.point(k)).conj() * sphere.weights()[k])
        .collect();
    let lhs_values = r_grid
        .iter()
        .map(|&r| {
            let mut acc = re(T::zero());
            let mut z = vec![re(T::zero()); n];
            for (k, cy) in conj_y.iter().enumerate() {
                for (zi, wi) in z.iter_mut().zip(sphere.point(k)) {
                    *zi = wi * r;
                }
                acc += twisted_convolution_kernel_at(f_eps, &kernel, &z)? * cy;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let lhs = RadialProfile::new(r_grid.to_vec(), lhs_values, measure)?;

    let coeff = crate::spherical::spherical_coefficients(f_eps, basis, j)?;
    let alpha: T = from_usize::<T>(n + basis.p as usize + basis.q as usize) - T::one();
    let plan = HankelPlan::from_rule(alpha, f_eps.grid.radial.clone(), f_eps.grid.r_max)?;
    let tilde = coeff.map(|t, v| v / t.powi(d) * im(chirp * t * t).exp());
    let two: T = lit(2.0);
    let s_grid: Vec<T> = r_grid.iter().map(|&r| (lambda * r / (two * sin)).abs()).collect();
    let transformed = hankel_transform(&plan, &tilde, &s_grid)?;
    let rhs_values = r_grid
        .iter()
        .zip(&transformed.profile.values)
        .map(|(&r, &h)| h * r.powi(d) * im(chirp * r * r).exp())
        .collect();
    let rhs = RadialProfile::new(r_grid.to_vec(), rhs_values, measure)?;
    HankelIdentity::assemble(lhs, rhs, transformed.warning)
}

/// Both sides in closed form for `f = q_a`, sector `(0,0)`: the left side is
/// the complex-time slice `q_{a+ε+is₀}^λ`, the right side the Hankel
/// transform of a complex Gaussian.
pub fn hankel_identity_gaussian<T: Real>(a: T, eps: T, lambda: T, s0: T, n: usize, r_grid: &[T]) -> Result<HankelIdentity<T>> {
    if !(a > T::zero()) || !(eps >= T::zero()) {
        return Err(Error::InvalidArgument("need a > 0 and eps >= 0".into()));
    }
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let sin = check_exceptional(lambda, s0)?;
    let root = sphere_area::<T>(n).sqrt();
    let quarter: T = lit(0.25);
    let chirp = lambda * (lambda * s0).cos() / sin * quarter;
    let measure = from_usize::<T>(2 * n - 1);

    let evolved = heat_kernel_lambda_fn(ComplexTime::new(a + eps, s0)?, lambda, n)?;
    let lhs = RadialProfile::from_fn(r_grid, measure, |r| evolved(r) * root);

    let (ratio, coth) = sinh_coth_factors(lambda.abs(), re(a + eps))?;
    let pref = crate::real::cpowi(ratio, n as i32) / (lit::<T>(4.0) * T::PI()).powi(n as i32) * root;
    let width = coth * quarter - Complex::new(T::zero(), chirp);
    let alpha: T = from_usize::<T>(n) - T::one();
    let two: T = lit(2.0);
    let rhs = RadialProfile::from_fn(r_grid, measure, |r| {
        let s = (lambda * r / (two * sin)).abs();
        pref * gaussian_transform(alpha, width, s) * im(chirp * r * r).exp()
    });
    HankelIdentity::assemble(lhs, rhs, None)
}

/// `K_λ(r,t;s₀)` from its Laguerre series and from its Bessel closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelK<T: Real> {
    pub series: Complex<T>,
    pub closed: Complex<T>,
}

impl<T: Real> KernelK<T> {
    pub fn relative_gap(&self) -> T {
        (self.series - self.closed).norm() / self.closed.norm()
    }
}

/// Sector indices `(n, p₀, q₀)` of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

/// The series runs on `|w| = 1`; it is Abel-damped to `ρ = 1 - 1e-6` and
/// its remainder after `terms` is Euler-summed.
pub fn kernel_k<T: Real>(lambda: T, r: T, t: T, s0: T, sector: Sector, terms: usize) -> Result<KernelK<T>> {
    let sin = check_exceptional(lambda, s0)?;
    let Sector { n, p, q } = sector;
    if n == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let m = n + p + q;
    let alpha: T = from_usize::<T>(m) - T::one();
    let l = lambda.abs();
    let theta = l * s0;
    let half: T = lit(0.5);
    let quarter: T = lit(0.25);

    let series = BilinearLaguerre::new(alpha, l * r * r * half, l * t * t * half)?;
    let w = Complex::from_polar(lit::<T>(ABEL_RHO), -(theta + theta));
    let sum = series.euler_sum(w, terms, 40);
    let pref = im(-from_usize::<T>(n + 2 * p) * theta).exp() * (-(l * (r * r + t * t) * quarter)).exp();

    let i2sin = Complex::new(T::zero(), theta.sin() + theta.sin());
    let closed = im(theta * (from_usize::<T>(q) - from_usize::<T>(p))).exp()
        * crate::real::cpowi(i2sin, -(m as i32))
        * im(lambda * (r * r + t * t) * (lambda * s0).cos() / sin * quarter).exp()
        * bessel_j_tilde(alpha, lambda * r * t * half / sin)?;
    Ok(KernelK { series: sum * pref, closed })
}

/// Gate outcome: positive margin forces the coefficient to vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateResult<T: Real> {
    pub margin: T,
    pub supercritical: bool,
}

/// `[1/(4(a+ε))][s₀²/(4(b+ε))][2 sin(λs₀)/(λs₀)]² - 1/4`.
pub fn uniqueness_gate<T: Real>(gp: GateParams<T>) -> GateResult<T> {
    let x = gp.lambda * gp.s0;
    let four: T = lit(4.0);
    let sinc2 = if x == T::zero() {
        four
    } else {
        let v = (x.sin() + x.sin()) / x;
        v * v
    };
    let margin = (four * (gp.a + gp.eps)).recip() * gp.s0 * gp.s0 / (four * (gp.b + gp.eps)) * sinc2 - lit(0.25);
    GateResult {
        margin,
        supercritical: margin > T::zero(),
    }
}

/// Gate margins at each `λ`, other parameters fixed.
pub fn gate_sweep<T: Real>(gp: GateParams<T>, lambdas: &[T]) -> Vec<GateResult<T>> {
    lambdas
        .par_iter()
        .map(|&lambda| uniqueness_gate(GateParams { lambda, ..gp }))
        .collect()
}

/// The largest `δ ≤ π/|s₀|` with positive margin on all of `(0, δ)`, or
/// `None` when the margin is not positive as `λ → 0`.
pub fn lambda_window<T: Real>(a: T, b: T, s0: T, eps: T) -> Result<Option<T>> {
    let gp = GateParams::new(a, b, s0, eps, T::zero())?;
    if !uniqueness_gate(gp).supercritical {
        return Ok(None);
    }
    // the margin decreases in λ and equals -1/4 at π/|s₀|
    let (mut lo, mut hi) = (T::zero(), T::PI() / s0.abs());
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if uniqueness_gate(GateParams { lambda: mid, ..gp }).supercritical {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// The extremal slice, its evolved decay and the tanh relation residual.
#[derive(Debug, Clone)]
pub struct EqualityCase<T: Real> {
    pub f_slice: SpectralSlice<T>,
    /// `+∞` when the evolved decay is at or below `|λ|/4`.
    pub fitted_b: T,
    pub tanh_residual: T,
    pub fit: DecayFit<T>,
}

/// Evolves `q_a^λ e^{-iλ|z|²cot(λs₀)/4}` (with `n = 1`, `c_λ = 1`) to
/// `ζ = 10⁻³ + is₀`, fits `|u^λ| ≈ C e^{-βr²}` and reads off `b` from
/// `β = |λ|/(4 tanh(b|λ|))`.
pub fn equality_case_profile<T: Real>(a: T, lambda: T, s0: T) -> Result<EqualityCase<T>> {
    if !(a > T::zero()) {
        return Err(Error::InvalidArgument("a must be > 0".into()));
    }
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let sin = check_exceptional(lambda, s0)?;
    let chirp = lambda * (lambda * s0).cos() / sin * lit(0.25);
    let grid = Arc::new(PolarGrid::standard(1, lit(12.0), 24, 16, 256)?);
    let heat = heat_kernel_lambda_fn(ComplexTime::new(a, T::zero())?, lambda, 1)?;
    let f_slice = SpectralSlice::from_radial(lambda, grid, |r| heat(r) * im(-chirp * r * r).exp());

    let eps: T = lit(EQUALITY_EPS);
    let (lo, hi) = (lit::<T>(EQUALITY_FIT_WINDOW.0), lit::<T>(EQUALITY_FIT_WINDOW.1));
    let radii: Vec<T> = (0..12).map(|k| lo + (hi - lo) * from_usize(k) / lit(11.0)).collect();
    let u = schrodinger_evolve_radial(&f_slice, ComplexTime::new(eps, s0)?, &radii)?;
    let fit = fit_gaussian_decay(&u, Some((lo, hi)))?;

    let l = lambda.abs();
    let ratio = l / (lit::<T>(4.0) * fit.a);
    let (fitted_b, tanh_b) = if ratio < T::one() {
        (ratio.atanh() / l, ratio)
    } else {
        (T::infinity(), T::one())
    };
    let tanh_residual = ((a + eps) * l).tanh() * tanh_b - sin * sin;
    Ok(EqualityCase {
        f_slice,
        fitted_b,
        tanh_residual: tanh_residual.abs(),
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherical::build_basis;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn plane() -> Arc<PolarGrid<f64>> {
        Arc::new(PolarGrid::default_plane())
    }

    fn small_plane() -> Arc<PolarGrid<f64>> {
        Arc::new(PolarGrid::standard(1, 6.0, 6, 12, 48).unwrap())
    }

    fn q(a: f64, s: f64, lambda: f64) -> impl Fn(f64) -> Complex<f64> {
        heat_kernel_lambda_fn(ComplexTime::new(a, s).unwrap(), lambda, 1).unwrap()
    }

    #[test]
    fn gate_params_validate() {
        assert!(GateParams::new(1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(GateParams::new(0.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(GateParams::new(1.0, 1.0, 1.0, -0.1, 0.0).is_err());
        assert!(GateParams::new(1.0, 1.0, 1.0, 0.0, -1.0).is_err());
        assert!(GateParams::new(1.0, 1.0, -1.0, 0.0, 2.0).is_ok());
    }

    #[test]
    fn evolve_requires_eps() {
        let f = SpectralSlice::from_radial(1.0, small_plane(), q(1.0, 0.0, 1.0));
        let err = schrodinger_evolve(&f, ComplexTime::new(0.0, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn evolve_gaussian_matches_semigroup() {
        let (a, eps, s0, lambda) = (1.0, 1e-3, 1.0, 1.0);
        let f = SpectralSlice::from_radial(lambda, plane(), q(a, 0.0, lambda));
        let radii: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
        let u = schrodinger_evolve_radial(&f, ComplexTime::new(eps, s0).unwrap(), &radii).unwrap();
        let exact = RadialProfile::from_fn(&radii, 1.0, q(a + eps, s0, lambda));
        let err = u.relative_linf_error(&exact).unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn zero_time_is_heat_smoothing() {
        let lambda = 0.8;
        let grid = small_plane();
        let f = SpectralSlice::from_radial(lambda, grid.clone(), q(0.7, 0.0, lambda));
        let u = schrodinger_evolve(&f, ComplexTime::new(0.3, 0.0).unwrap()).unwrap();
        let exact = SpectralSlice::from_radial(lambda, grid, q(1.0, 0.0, lambda));
        let err = u.relative_linf_error_within(&exact, 3.0).unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn evolution_is_nearly_unitary() {
        let lambda = 1.0;
        let f = SpectralSlice::from_radial(lambda, small_plane(), q(0.5, 0.0, lambda));
        let norm_f = f.l2_norm();
        let norms: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&eps| {
                schrodinger_evolve(&f, ComplexTime::new(eps, 1.0).unwrap())
                    .unwrap()
                    .l2_norm()
            })
            .collect();
        assert!(norms[0] < norms[1] && norms[1] < norms[2], "{norms:?}");
        assert!(norms[2] <= norm_f * (1.0 + 1e-6), "{norms:?} {norm_f}");
    }

    #[test]
    fn gaussian_ratio_is_constant() {
        let radii: Vec<f64> = (0..=40).map(|k| 0.2 + 2.8 * k as f64 / 40.0).collect();
        for &(lambda, s0) in &[(1.0, 1.0), (-1.0, 1.0), (0.7, -2.0), (2.0, 0.3)] {
            let pair = hankel_identity_gaussian(1.0, 1e-3, lambda, s0, 1, &radii).unwrap();
            let stats = pair.ratio().unwrap();
            assert!(stats.relative_std < 1e-12, "{lambda} {s0} {stats:?}");
        }
        let pair = hankel_identity_gaussian(0.5, 0.01, 1.0, 1.0, 2, &radii).unwrap();
        assert!(pair.ratio().unwrap().relative_std < 1e-12);
    }

    #[test]
    fn hankel_identity_grid_sector_zero_matches_closed_form() {
        let (a, eps, lambda, s0) = (1.0, 1e-3, 1.0, 1.0);
        let f = SpectralSlice::from_radial(lambda, plane(), q(a + eps, 0.0, lambda));
        let basis = build_basis::<f64>(1, 0, 0).unwrap();
        let radii: Vec<f64> = (0..=10).map(|k| 0.2 + 0.28 * k as f64).collect();
        let grid_pair = theorem34_pair(&f, &basis, 1, s0, &radii).unwrap();
        let exact = hankel_identity_gaussian(a, eps, lambda, s0, 1, &radii).unwrap();
        assert!(grid_pair.lhs.relative_linf_error(&exact.lhs).unwrap() < 1e-3);
        assert!(grid_pair.rhs.relative_linf_error(&exact.rhs).unwrap() < 1e-6);
    }

    #[test]
    fn hankel_identity_grid_sector_one_ratio_is_constant() {
        let lambda = 1.0;
        let f = SpectralSlice::from_fn(lambda, plane(), |z| z[0] * (-z[0].norm_sqr()).exp());
        let basis = build_basis::<f64>(1, 1, 0).unwrap();
        let radii: Vec<f64> = (0..=10).map(|k| 0.2 + 0.28 * k as f64).collect();
        let pair = theorem34_pair(&f, &basis, 1, 1.0, &radii).unwrap();
        let stats = pair.ratio().unwrap();
        assert!(stats.relative_std < 1e-2, "{stats:?}");
    }

    #[test]
    fn hankel_identity_zero_data() {
        let f = SpectralSlice::zeros(1.0, small_plane());
        let basis = build_basis::<f64>(1, 0, 0).unwrap();
        let pair = theorem34_pair(&f, &basis, 1, 1.0, &[0.5, 1.0]).unwrap();
        assert_eq!(pair.lhs.max_abs(), 0.0);
        assert_eq!(pair.rhs.max_abs(), 0.0);
        assert!(matches!(pair.ratio(), Err(Error::DegenerateRatio)));
    }

    #[test]
    fn pair_rejects_exceptional_lambda() {
        let f = SpectralSlice::zeros(PI, small_plane());
        let basis = build_basis::<f64>(1, 0, 0).unwrap();
        assert!(matches!(
            theorem34_pair(&f, &basis, 1, 1.0, &[1.0]),
            Err(Error::ExceptionalLambda(_))
        ));
        assert!(matches!(
            hankel_identity_gaussian(1.0, 0.0, 2.0, PI / 2.0, 1, &[1.0]),
            Err(Error::ExceptionalLambda(_))
        ));
    }

    #[test]
    fn kernel_series_matches_closed_form() {
        let sector = Sector { n: 1, p: 0, q: 0 };
        let k = kernel_k(1.0, 1.0, 1.0, 1.0, sector, 400).unwrap();
        assert!(k.relative_gap() < 1e-4, "{}", k.relative_gap());
        for &(lambda, r, t, s0, p, q) in &[(0.5, 0.3, 1.7, 2.0, 1, 0), (-1.2, 1.0, 0.5, 0.7, 0, 1), (1.0, 2.0, 2.0, 0.9, 1, 1)] {
            let k = kernel_k(lambda, r, t, s0, Sector { n: 1, p, q }, 400).unwrap();
            assert!(k.relative_gap() < 1e-4, "{lambda} {r} {t} {s0}: {}", k.relative_gap());
        }
    }

    #[test]
    fn kernel_at_zero_radius() {
        let (lambda, t, s0) = (0.9, 1.3, 0.6);
        let sector = Sector { n: 1, p: 1, q: 0 };
        let k = kernel_k(lambda, 0.0, t, s0, sector, 400).unwrap();
        let theta: f64 = lambda * s0;
        let expected = Complex::new(0.0, -theta).exp()
            * Complex::new(0.0, 2.0 * theta.sin()).powi(-2)
            * Complex::new(0.0, lambda * t * t / theta.tan() / 4.0).exp();
        assert_relative_eq!((k.closed - expected).norm(), 0.0, epsilon = 1e-14);
        assert!(k.relative_gap() < 1e-4);
    }

    #[test]
    fn kernel_conjugation_symmetry() {
        let sector = Sector { n: 1, p: 1, q: 1 };
        let plus = kernel_k(0.8, 0.7, 1.1, 1.3, sector, 200).unwrap();
        let minus = kernel_k(0.8, 0.7, 1.1, -1.3, sector, 200).unwrap();
        assert_relative_eq!((plus.closed - minus.closed.conj()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn kernel_rejects_exceptional_lambda() {
        let sector = Sector { n: 1, p: 0, q: 0 };
        assert!(matches!(kernel_k(PI, 1.0, 1.0, 1.0, sector, 10), Err(Error::ExceptionalLambda(_))));
    }

    #[test]
    fn gate_examples() {
        let g = uniqueness_gate(GateParams::new(1.0, 1.0, 2.0, 0.05, 0.1).unwrap());
        assert!(g.supercritical, "{g:?}");
        // λ → 0, ε = 0: margin = s₀²/(4ab) - 1/4
        let g = uniqueness_gate(GateParams::new(0.5, 2.0, 1.5, 0.0, 0.0).unwrap());
        assert_relative_eq!(g.margin, 1.5f64.powi(2) / 4.0 - 0.25, epsilon = 1e-15);
        for &lambda in &[1e-3, 0.1, 0.5, 1.0] {
            let g = uniqueness_gate(GateParams::new(2.0, 2.0, 2.0, 0.0, lambda).unwrap());
            assert!(g.margin < 0.0 && !g.supercritical, "{lambda}: {g:?}");
        }
    }

    #[test]
    fn window_exists_iff_subcritical_product() {
        let delta = lambda_window(1.0, 1.0, 2.0, 0.0).unwrap().unwrap();
        assert!(delta > 0.0 && delta < PI / 2.0);
        let inside = uniqueness_gate(GateParams::new(1.0, 1.0, 2.0, 0.0, 0.99 * delta).unwrap());
        let outside = uniqueness_gate(GateParams::new(1.0, 1.0, 2.0, 0.0, 1.01 * delta).unwrap());
        assert!(inside.supercritical && !outside.supercritical);
        assert_eq!(lambda_window(2.0, 2.0, 2.0, 0.0).unwrap(), None);
        assert_eq!(lambda_window(1.0, 1.0, 1.0, 0.1).unwrap(), None);
    }

    #[test]
    fn sweep_matches_pointwise() {
        let gp = GateParams::new(0.3, 0.8, 1.0, 0.01, 0.0).unwrap();
        let lambdas = [0.0, 0.5, 1.0, 2.0];
        for (g, &lambda) in gate_sweep(gp, &lambdas).iter().zip(&lambdas) {
            assert_eq!(*g, uniqueness_gate(GateParams { lambda, ..gp }));
        }
    }

    #[test]
    fn equality_case_residual() {
        let case = equality_case_profile(1.0, 1.0, 1.0).unwrap();
        assert!(case.tanh_residual < 5e-3, "{} {} {:?}", case.tanh_residual, case.fitted_b, case.fit);
        assert!(case.fitted_b < f64::INFINITY);
    }

    #[test]
    fn equality_case_b_decreases_in_a() {
        let bs: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&a| equality_case_profile(a, 1.0, 1.0).unwrap().fitted_b)
            .collect();
        assert!(bs[0] > bs[1] && bs[1] > bs[2], "{bs:?}");
    }

    #[test]
    fn equality_case_quarter_period_has_no_chirp() {
        let lambda = 1.0;
        let case = equality_case_profile(1.0, lambda, PI / 2.0).unwrap();
        let heat = q(1.0, 0.0, lambda);
        for (i, &r) in case.f_slice.grid.radii().iter().enumerate().step_by(37) {
            assert_relative_eq!((case.f_slice.value(i, 3) - heat(r)).norm(), 0.0, epsilon = 1e-15);
        }
        // sin² = 1 has no finite partner b
        assert_eq!(case.fitted_b, f64::INFINITY);
    }

    #[test]
    fn evolved_gaussian_width_matches_complex_time() {
        let (a, eps, s0, lambda) = (1.0, 1e-3, 1.0, 1.0);
        let f = SpectralSlice::from_radial(lambda, plane(), q(a, 0.0, lambda));
        let radii: Vec<f64> = (0..12).map(|k| 1.0 + 2.0 * k as f64 / 11.0).collect();
        let u = schrodinger_evolve_radial(&f, ComplexTime::new(eps, s0).unwrap(), &radii).unwrap();
        // a radial field's (0,0) coefficient is √(2π) times the field
        let coeff = u.map(|_, v| v * (2.0 * PI).sqrt());
        let fit = fit_gaussian_decay(&coeff, Some((1.0, 3.0))).unwrap();
        let (_, coth) = sinh_coth_factors(lambda, Complex::new(a + eps, s0)).unwrap();
        let width = coth.re / 4.0;
        assert_relative_eq!(fit.a, width, max_relative = 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gate_margin_monotone(
            a in 0.1f64..3.0, b in 0.1f64..3.0, s0 in 0.2f64..3.0,
            eps in 0.0f64..0.5, frac in 0.01f64..0.98, bump in 0.01f64..0.5,
        ) {
            let lambda = frac * PI / s0;
            let base = uniqueness_gate(GateParams::new(a, b, s0, eps, lambda).unwrap()).margin;
            let da = uniqueness_gate(GateParams::new(a + bump, b, s0, eps, lambda).unwrap()).margin;
            let db = uniqueness_gate(GateParams::new(a, b + bump, s0, eps, lambda).unwrap()).margin;
            let de = uniqueness_gate(GateParams::new(a, b, s0, eps + bump, lambda).unwrap()).margin;
            let dl = uniqueness_gate(GateParams::new(a, b, s0, eps, (frac + 0.01) * PI / s0).unwrap()).margin;
            prop_assert!(da < base && db < base && de < base && dl < base);
        }

        #[test]
        fn gaussian_pair_ratio_constant(a in 0.2f64..2.0, lambda in 0.2f64..2.0, s0 in 0.3f64..1.2) {
            let radii: Vec<f64> = (0..20).map(|k| 0.1 + 0.15 * k as f64).collect();
            let pair = hankel_identity_gaussian(a, 1e-3, lambda, s0, 1, &radii).unwrap();
            prop_assert!(pair.ratio().unwrap().relative_std < 1e-10);
        }
    }
}

//! Partial Fourier transform in the central variable, `λ`-twisted
//! convolution on `ℂⁿ`, Laguerre projections and the Hecke-Bochner identity.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::grid::{PolarGrid, PolarInterpolator, RadialProfile, SpectralSlice};
use crate::heisenberg::symplectic;
use crate::quad::Rule;
use crate::real::{from_usize, im, lit, re, to_f64, Real};
use crate::specfun::{laguerre_fn_order, ln_gamma};
use crate::spherical::BigradedBasis;

/// Tail ratio at which a `t`-integral or radial projection warns.
pub const TAIL_RATIO: f64 = 1e-10;

/// Fraction of lost mass at which an interpolated convolution warns.
pub const EXTRAPOLATION_RATIO: f64 = 1e-8;

/// A function on `ℂⁿ × ℝ` sampled on a polar grid times a `t` rule;
/// `values[node * t_len + k]` with nodes in slice order.
#[derive(Debug, Clone)]
pub struct SampledFunction<T: Real> {
    pub grid: Arc<PolarGrid<T>>,
    pub t_rule: Rule<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SampledFunction<T> {
    pub fn from_fn<F>(grid: Arc<PolarGrid<T>>, t_rule: Rule<T>, f: F) -> Self
    where
        F: Fn(&[Complex<T>], T) -> Complex<T> + Sync,
    {
        let m = grid.sphere.len();
        let values = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|idx| {
                let mut z = vec![Complex::new(T::zero(), T::zero()); grid.n()];
                grid.point_into(idx / m, idx % m, &mut z);
                t_rule.nodes.iter().map(|&t| f(&z, t)).collect::<Vec<_>>()
            })
            .collect();
        Self {
            grid,
            t_rule,
            values,
        }
    }
}

/// A result together with an optional non-fatal warning.
#[derive(Debug, Clone)]
pub struct Flagged<V> {
    pub value: V,
    pub warning: Option<Warning>,
}

/// `f^λ(z) = ∫ e^{iλt} f(z, t) dt` by the sample's `t` rule.
pub fn partial_fourier_t<T: Real>(f: &SampledFunction<T>, lambda: T) -> Result<Flagged<SpectralSlice<T>>> {
    let nt = f.t_rule.len();
    if nt == 0 || f.values.len() != f.grid.len() * nt {
        return Err(Error::DimensionMismatch(f.values.len(), f.grid.len() * nt));
    }
    let phase: Vec<Complex<T>> = f
        .t_rule
        .nodes
        .iter()
        .zip(&f.t_rule.weights)
        .map(|(&t, &w)| im(lambda * t).exp() * w)
        .collect();
    let mut peak = T::zero();
    let mut tail = T::zero();
    let values = f
        .values
        .chunks(nt)
        .map(|row| {
            for v in row {
                peak = peak.max(v.norm());
            }
            tail = tail.max(row[0].norm()).max(row[nt - 1].norm());
            row.iter()
                .zip(&phase)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (v, p)| acc + v * p)
        })
        .collect();
    let warning = (peak > T::zero() && tail > peak * lit(TAIL_RATIO))
        .then(|| Warning::Truncation(to_f64(tail / peak)));
    Ok(Flagged {
        value: SpectralSlice::new(lambda, f.grid.clone(), values)?,
        warning,
    })
}

fn check_pair<T: Real>(f: &SpectralSlice<T>, g: &SpectralSlice<T>) -> Result<()> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("twisted convolution needs a shared grid"));
    }
    if f.lambda != g.lambda {
        return Err(Error::InvalidArgument(format!(
            "slices carry different lambda: {} vs {}",
            f.lambda, g.lambda
        )));
    }
    Ok(())
}

/// `(f ∗_λ g)(z) = ∫ f(z-w) g(w) e^{iλ Im(z·w̄)/2} dw` on the shared `n = 1`
/// grid; `f(z-w)` is read through [`PolarInterpolator`].
pub fn twisted_convolution<T: Real>(
    f: &SpectralSlice<T>,
    g: &SpectralSlice<T>,
) -> Result<Flagged<SpectralSlice<T>>> {
    check_pair(f, g)?;
    let interp = PolarInterpolator::new(f)?;
    let grid = &f.grid;
    let m = grid.sphere.len();
    let lambda = f.lambda;
    let half: T = lit(0.5);
    // quadrature-weighted g, with its nodes
    let nodes: Vec<(Complex<T>, Complex<T>)> = (0..grid.len())
        .map(|idx| {
            let (i, j) = (idx / m, idx % m);
            let w = grid.sphere.point(j)[0] * grid.radii()[i];
            (w, g.values[idx] * grid.volume_weight(i, j))
        })
        .collect();
    let g_mass: T = nodes.iter().map(|(_, v)| v.norm()).sum();
    let boundary = f.shell(grid.radial.len() - 1).iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let f_peak = f.max_abs();
    let r_max = grid.r_max;
    // pairs below this size cannot move the sum at double precision
    let cut = f_peak * g_mass * lit(1e-18);
    let results: Vec<(Complex<T>, T)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / m, idx % m);
            let z = grid.sphere.point(j)[0] * grid.radii()[i];
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut lost = T::zero();
            for (w, gw) in &nodes {
                let u = z - w;
                let rho = u.norm();
                if rho >= r_max {
                    lost += gw.norm();
                    continue;
                }
                if interp.bound(rho) * gw.norm() < cut {
                    continue;
                }
                let phase = im(lambda * (z * w.conj()).im * half).exp();
                acc += interp.eval(u) * gw * phase;
            }
            (acc, lost)
        })
        .collect();
    let lost = results.iter().map(|r| r.1).fold(T::zero(), T::max);
    let ratio = if g_mass > T::zero() && f_peak > T::zero() {
        to_f64(boundary / f_peak * lost / g_mass)
    } else {
        0.0
    };
    let warning = (ratio > EXTRAPOLATION_RATIO).then_some(Warning::Extrapolation(ratio));
    Ok(Flagged {
        value: SpectralSlice::new(lambda, grid.clone(), results.into_iter().map(|r| r.0).collect())?,
        warning,
    })
}

/// `(f ∗_λ K)(z) = ∫ f(w) K(|z-w|) e^{-iλ Im(z·w̄)/2} dw` for a radial
/// kernel given in closed form, at a single point `z ∈ ℂⁿ`.
pub fn twisted_convolution_kernel_at<T, K>(f: &SpectralSlice<T>, kernel: &K, z: &[Complex<T>]) -> Result<Complex<T>>
where
    T: Real,
    K: Fn(T) -> Complex<T> + Sync,
{
    let grid = &f.grid;
    let n = grid.n();
    if z.len() != n {
        return Err(Error::DimensionMismatch(z.len(), n));
    }
    let m = grid.sphere.len();
    let half: T = lit(0.5);
    let lambda = f.lambda;
    let acc = (0..grid.radial.len())
        .into_par_iter()
        .map(|i| {
            let mut w = vec![Complex::new(T::zero(), T::zero()); n];
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..m {
                let fv = f.values[i * m + j];
                if fv.norm_sqr() == T::zero() {
                    continue;
                }
                grid.point_into(i, j, &mut w);
                let d2: T = z.iter().zip(&w).map(|(a, b)| (a - b).norm_sqr()).sum();
                let phase = im(-lambda * symplectic(z, &w) * half).exp();
                acc += fv * kernel(d2.sqrt()) * phase * grid.volume_weight(i, j);
            }
            acc
        })
        .reduce(|| Complex::new(T::zero(), T::zero()), |a, b| a + b);
    Ok(acc)
}

/// [`twisted_convolution_kernel_at`] at every node of `f`'s grid.
pub fn twisted_convolution_kernel<T, K>(f: &SpectralSlice<T>, kernel: &K) -> Result<SpectralSlice<T>>
where
    T: Real,
    K: Fn(T) -> Complex<T> + Sync,
{
    let grid = f.grid.clone();
    let m = grid.sphere.len();
    let mut values = Vec::with_capacity(grid.len());
    let mut z = vec![Complex::new(T::zero(), T::zero()); grid.n()];
    for idx in 0..grid.len() {
        grid.point_into(idx / m, idx % m, &mut z);
        values.push(twisted_convolution_kernel_at(f, kernel, &z)?);
    }
    SpectralSlice::new(f.lambda, grid, values)
}

/// The Laguerre function `φ_{k,λ}^{n-1}` sampled as a slice.
pub fn laguerre_slice<T: Real>(k: usize, lambda: T, grid: Arc<PolarGrid<T>>) -> Result<SpectralSlice<T>> {
    let n = grid.n();
    let alpha: T = from_usize(n - 1);
    let vals = grid
        .radii()
        .iter()
        .map(|&r| laguerre_fn_order(k, lambda, alpha, r))
        .collect::<Result<Vec<T>>>()?;
    let m = grid.sphere.len();
    let values = vals.iter().flat_map(|&v| std::iter::repeat(re(v)).take(m)).collect();
    SpectralSlice::new(lambda, grid, values)
}

/// `∫₀^∞ g(s) L_k^{m-1}(|λ|s²/2) e^{-|λ|s²/4} s^{2m-1} ds` using `rule`,
/// whose nodes must be `g`'s radii.
pub fn laguerre_projection<T: Real>(
    g: &RadialProfile<T>,
    rule: &Rule<T>,
    k: usize,
    lambda: T,
    m: usize,
) -> Result<Flagged<Complex<T>>> {
    if m == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    if g.r != rule.nodes {
        return Err(Error::GridMismatch("profile radii differ from the rule nodes"));
    }
    let alpha: T = from_usize(m - 1);
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut peak = T::zero();
    let mut last = T::zero();
    for ((&s, &w), v) in rule.nodes.iter().zip(&rule.weights).zip(&g.values) {
        let term = *v * (laguerre_fn_order(k, lambda, alpha, s)? * s.powi(2 * m as i32 - 1));
        peak = peak.max(term.norm());
        last = term.norm();
        acc += term * w;
    }
    let warning = (peak > T::zero() && last > peak * lit(TAIL_RATIO))
        .then(|| Warning::Truncation(to_f64(last / peak)));
    Ok(Flagged { value: acc, warning })
}

/// Both sides of the Hecke-Bochner identity at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeckeBochner<T: Real> {
    /// `(P g ∗_λ φ_{k,λ}^{n-1})(z)` by quadrature on the grid.
    pub lhs: Complex<T>,
    /// `(2π)ⁿ |λ|^{p+q} 2^{1-m} Γ(k'+1)/Γ(k'+m) I φ_{k',λ}^{m-1}(|z|) P(z)` with
    /// `m = n+p+q`, `k' = k-p` for `λ > 0` and `k-q` for `λ < 0`, and `I` the
    /// Laguerre projection of `g`; zero when `k' < 0`.
    pub rhs: Complex<T>,
    /// The same right-hand side with the constant
    /// `(2π)^{-n} |λ|^{p+q} (2π)^m |λ|^{m/2} 2^{1-m} Γ(k'+1)/Γ(k'+m)`.
    pub rhs_printed: Complex<T>,
    /// `rhs / rhs_printed = (2π)^{2n-m} |λ|^{-m/2}`.
    pub reconciliation: T,
}

/// Evaluates both sides of the Hecke-Bochner identity for `f = P_{p,q}^j g`
/// with `g` given on the grid radii.
pub fn hecke_bochner_check<T: Real>(
    g: &RadialProfile<T>,
    basis: &BigradedBasis<T>,
    j: usize,
    k: usize,
    lambda: T,
    grid: Arc<PolarGrid<T>>,
    z: &[Complex<T>],
) -> Result<HeckeBochner<T>> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let n = grid.n();
    if basis.n != n {
        return Err(Error::DimensionMismatch(basis.n, n));
    }
    if z.len() != n {
        return Err(Error::DimensionMismatch(z.len(), n));
    }
    if g.r != grid.radii() {
        return Err(Error::GridMismatch("g must be sampled on the grid radii"));
    }
    let harmonic = basis.element(j)?;
    let mq = grid.sphere.len();
    let f = SpectralSlice::from_fn(lambda, grid.clone(), |w| harmonic.evaluate(w));
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(idx, v)| *v * g.values[idx / mq])
        .collect();
    let f = SpectralSlice::new(lambda, grid.clone(), values)?;
    let alpha_n: T = from_usize(n - 1);
    let lhs = twisted_convolution_kernel_at(
        &f,
        &|r: T| re(laguerre_fn_order(k, lambda, alpha_n, r).unwrap_or(T::nan())),
        z,
    )?;
    let (p, q) = (basis.p as usize, basis.q as usize);
    let m = n + p + q;
    let shift = if lambda > T::zero() { p } else { q };
    let reconciliation = T::TAU().powi(2 * n as i32 - m as i32) * lambda.abs().powf(-from_usize::<T>(m) / lit(2.0));
    let zero = Complex::new(T::zero(), T::zero());
    if k < shift {
        return Ok(HeckeBochner {
            lhs,
            rhs: zero,
            rhs_printed: zero,
            reconciliation,
        });
    }
    let kk = k - shift;
    let integral = laguerre_projection(g, &grid.radial, kk, lambda, m)?.value;
    let gamma_ratio = (ln_gamma::<T>(from_usize(kk + 1)) - ln_gamma::<T>(from_usize(kk + m))).exp();
    let rz = z.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    let phi = laguerre_fn_order(kk, lambda, from_usize(m - 1), rz)?;
    let common = integral * harmonic.evaluate(z) * (phi * gamma_ratio * lit::<T>(2.0).powi(1 - m as i32));
    let lam_pq = lambda.abs().powi((p + q) as i32);
    let rhs = common * (T::TAU().powi(n as i32) * lam_pq);
    let printed = T::TAU().powi(m as i32 - n as i32) * lam_pq * lambda.abs().powf(from_usize::<T>(m) / lit(2.0));
    Ok(HeckeBochner {
        lhs,
        rhs,
        rhs_printed: common * printed,
        reconciliation,
    })
}

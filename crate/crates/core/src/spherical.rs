//! Bigraded solid harmonics on `ℂⁿ` and the orthonormal spherical basis
//! `Y_{p,q}^j` of `L²(S^{2n-1})`, with coefficient extraction and
//! reconstruction on polar grids.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::{PolarGrid, RadialProfile, SpectralSlice};
use crate::real::{from_usize, lit, Real};

/// `z^α z̄^β`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl Monomial {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn evaluate<T: Real>(&self, z: &[Complex<T>]) -> Complex<T> {
        let mut acc = Complex::new(T::one(), T::zero());
        for ((c, &a), &b) in z.iter().zip(&self.alpha).zip(&self.beta) {
            acc *= c.powu(a) * c.conj().powu(b);
        }
        acc
    }

    /// `∫_{S^{2n-1}} z^α z̄^β dσ`: zero unless `α = β`, then
    /// `2πⁿ α! / (n-1+|α|)!`.
    pub fn sphere_integral(&self) -> f64 {
        if self.alpha != self.beta {
            return 0.0;
        }
        let n = self.n();
        let total: u32 = self.alpha.iter().sum();
        let mut ln = std::f64::consts::PI.ln() * n as f64 + 2f64.ln();
        for &a in &self.alpha {
            ln += ln_factorial(a as usize);
        }
        ln -= ln_factorial(n - 1 + total as usize);
        ln.exp()
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Multi-indices of length `n` and total degree `d`, lexicographically ascending.
fn multi_indices(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in multi_indices(n - 1, d - first) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Monomials spanning `𝓟_{p,q}` in deterministic lexicographic order.
pub fn monomials(n: usize, p: u32, q: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for alpha in multi_indices(n, p) {
        for beta in multi_indices(n, q) {
            out.push(Monomial {
                alpha: alpha.clone(),
                beta,
            });
        }
    }
    out
}

/// `Δ(z^α z̄^β) = 4 Σ_j α_j β_j z^{α-e_j} z̄^{β-e_j}`.
fn laplacian_terms(m: &Monomial) -> Vec<(Monomial, u64)> {
    let mut out = Vec::new();
    for j in 0..m.n() {
        let (a, b) = (m.alpha[j], m.beta[j]);
        if a > 0 && b > 0 {
            let mut t = m.clone();
            t.alpha[j] -= 1;
            t.beta[j] -= 1;
            out.push((t, 4 * a as u64 * b as u64));
        }
    }
    out
}

/// A polynomial in `z, z̄` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidHarmonic<T: Real> {
    pub terms: Vec<(Monomial, T)>,
}

impl<T: Real> SolidHarmonic<T> {
    pub fn evaluate(&self, z: &[Complex<T>]) -> Complex<T> {
        self.terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (m, c)| acc + m.evaluate(z) * *c)
    }

    /// Coefficients of `Δ` applied to this polynomial.
    pub fn laplacian(&self) -> Vec<(Monomial, T)> {
        let mut out: Vec<(Monomial, T)> = Vec::new();
        for (m, c) in &self.terms {
            for (t, k) in laplacian_terms(m) {
                let v = *c * from_usize(k as usize);
                match out.iter_mut().find(|(u, _)| *u == t) {
                    Some(e) => e.1 += v,
                    None => out.push((t, v)),
                }
            }
        }
        out
    }
}

/// An exact harmonic polynomial with rational coefficients.
pub type ExactHarmonic = Vec<(Monomial, BigRational)>;

/// Orthonormal basis `Y_{p,q}^1, ..., Y_{p,q}^{d(p,q)}` of the restrictions
/// of `𝓗_{p,q}` to the sphere.
#[derive(Debug, Clone)]
pub struct BigradedBasis<T: Real> {
    pub n: usize,
    pub p: u32,
    pub q: u32,
    /// Orthonormal solid harmonics; `elements[j-1]` is `P_{p,q}^j`.
    pub elements: Vec<SolidHarmonic<T>>,
    /// Exact nullspace basis of `Δ` on `𝓟_{p,q}` the elements are built from.
    pub exact: Vec<ExactHarmonic>,
}

impl<T: Real> BigradedBasis<T> {
    /// `d(p, q)`.
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    /// `Y_{p,q}^j(ω)` for `1 ≤ j ≤ d(p,q)`; on arbitrary `z` this is the
    /// solid harmonic `P_{p,q}^j(z)`.
    pub fn eval(&self, j: usize, z: &[Complex<T>]) -> Result<Complex<T>> {
        self.element(j).map(|e| e.evaluate(z))
    }

    pub fn element(&self, j: usize) -> Result<&SolidHarmonic<T>> {
        if j == 0 || j > self.elements.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.elements.len(),
            });
        }
        Ok(&self.elements[j - 1])
    }

    /// Every exact nullspace vector has identically zero Laplacian.
    pub fn exactly_harmonic(&self) -> bool {
        self.exact.iter().all(|h| {
            let mut acc: Vec<(Monomial, BigRational)> = Vec::new();
            for (m, c) in h {
                for (t, k) in laplacian_terms(m) {
                    let v = c * BigRational::from_integer(BigInt::from(k));
                    match acc.iter_mut().find(|(u, _)| *u == t) {
                        Some(e) => e.1 += v,
                        None => acc.push((t, v)),
                    }
                }
            }
            acc.iter().all(|(_, c)| c.is_zero())
        })
    }
}

/// Builds `𝓗_{p,q}` as the exact rational kernel of `Δ: 𝓟_{p,q} → 𝓟_{p-1,q-1}`
/// and orthonormalizes it on the sphere with exact monomial moments.
pub fn build_basis<T: Real>(n: usize, p: u32, q: u32) -> Result<BigradedBasis<T>> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let cols = monomials(n, p, q);
    let rows = if p > 0 && q > 0 { monomials(n, p - 1, q - 1) } else { Vec::new() };
    let mut a = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
    for (c, m) in cols.iter().enumerate() {
        for (t, k) in laplacian_terms(m) {
            let r = rows.iter().position(|x| *x == t).expect("target monomial");
            a[r][c] = BigRational::from_integer(BigInt::from(k));
        }
    }
    let exact: Vec<ExactHarmonic> = nullspace(a, cols.len())
        .into_iter()
        .map(|v| {
            cols.iter()
                .cloned()
                .zip(v)
                .filter(|(_, c)| !c.is_zero())
                .collect()
        })
        .collect();
    // modified Gram-Schmidt with exact sphere moments, in f64
    let inner = |x: &[(Monomial, f64)], y: &[(Monomial, f64)]| -> f64 {
        let mut s = 0.0;
        for (mx, cx) in x {
            for (my, cy) in y {
                // ⟨z^α z̄^β, z^γ z̄^δ⟩ = ∫ z^{α+δ} z̄^{β+γ}
                let m = Monomial {
                    alpha: mx.alpha.iter().zip(&my.beta).map(|(a, b)| a + b).collect(),
                    beta: mx.beta.iter().zip(&my.alpha).map(|(a, b)| a + b).collect(),
                };
                s += cx * cy * m.sphere_integral();
            }
        }
        s
    };
    let mut ortho: Vec<Vec<(Monomial, f64)>> = Vec::new();
    for h in &exact {
        let mut v: Vec<(Monomial, f64)> = h
            .iter()
            .map(|(m, c)| (m.clone(), rational_to_f64(c)))
            .collect();
        for _ in 0..2 {
            for u in &ortho {
                let c = inner(&v, u);
                for (m, cu) in u {
                    match v.iter_mut().find(|(x, _)| x == m) {
                        Some(e) => e.1 -= c * cu,
                        None => v.push((m.clone(), -c * cu)),
                    }
                }
            }
        }
        let norm = inner(&v, &v).sqrt();
        for e in &mut v {
            e.1 /= norm;
        }
        v.retain(|(_, c)| *c != 0.0);
        v.sort_by(|x, y| x.0.cmp(&y.0));
        ortho.push(v);
    }
    let elements = ortho
        .into_iter()
        .map(|v| SolidHarmonic {
            terms: v.into_iter().map(|(m, c)| (m, lit(c))).collect(),
        })
        .collect();
    Ok(BigradedBasis {
        n,
        p,
        q,
        elements,
        exact,
    })
}

fn rational_to_f64(x: &BigRational) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // scale down huge numerators and denominators together
            let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
            let a = (x.numer() >> shift).to_f64().unwrap_or(0.0);
            let b = (x.denom() >> shift).to_f64().unwrap_or(1.0);
            a / b
        }
    }
}

/// Exact nullspace basis by reduced row echelon form; one vector per free
/// column, in column order.
fn nullspace(mut a: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        let Some(pr) = (row..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(row, pr);
        let inv = a[row][c].recip();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..a.len() {
            if r != row && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in 0..cols {
                    let delta = &f * &a[row][k];
                    a[r][k] -= delta;
                }
            }
        }
        pivots.push(c);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[r][free].clone();
        }
        // scale to coprime integers with a positive leading entry
        let lcm = v
            .iter()
            .fold(BigInt::one(), |acc, x| num_integer_lcm(&acc, x.denom()));
        let mut ints: Vec<BigRational> = v
            .iter()
            .map(|x| x * BigRational::from_integer(lcm.clone()))
            .collect();
        if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in &mut ints {
                    *x = -x.clone();
                }
            }
        }
        out.push(ints);
    }
    out
}

fn num_integer_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

/// Classical dimension `dim 𝓟_{p,q} - dim 𝓟_{p-1,q-1}`.
pub fn harmonic_dimension(n: usize, p: u32, q: u32) -> usize {
    let binom = |a: usize, b: usize| -> usize {
        (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
    };
    let dim = |d: u32| binom(d as usize + n - 1, n - 1);
    let full = dim(p) * dim(q);
    if p > 0 && q > 0 {
        full - dim(p - 1) * dim(q - 1)
    } else {
        full
    }
}

/// All bases with `p + q ≤ max_degree`, ordered by total degree then `p`.
pub fn bases_up_to<T: Real>(n: usize, max_degree: u32) -> Result<Vec<BigradedBasis<T>>> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for p in 0..=d {
            out.push(build_basis(n, p, d - p)?);
        }
    }
    Ok(out)
}

/// `f_{p,q,j}(r) = ∫ f(rω) conj(Y_{p,q}^j(ω)) dσ(ω)` on every radial node.
pub fn spherical_coefficients<T: Real>(
    f: &SpectralSlice<T>,
    basis: &BigradedBasis<T>,
    j: usize,
) -> Result<RadialProfile<T>> {
    if f.n() != basis.n {
        return Err(Error::DimensionMismatch(f.n(), basis.n));
    }
    let y = basis.element(j)?;
    let sphere = &f.grid.sphere;
    let conj_y: Vec<Complex<T>> = (0..sphere.len())
        .map(|k| y.evaluate(sphere.point(k)).conj() * sphere.weights()[k])
        .collect();
    let values = (0..f.grid.radial.len())
        .map(|i| {
            f.shell(i)
                .iter()
                .zip(&conj_y)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
        })
        .collect();
    RadialProfile::new(
        f.grid.radii().to_vec(),
        values,
        from_usize::<T>(2 * f.n() - 1),
    )
}

/// One term `f_{p,q,j}(r) Y_{p,q}^j(ω)` of a spherical expansion.
#[derive(Debug, Clone)]
pub struct Component<'a, T: Real> {
    pub basis: &'a BigradedBasis<T>,
    pub j: usize,
    pub profile: RadialProfile<T>,
}

/// `f(rω) = Σ f_{p,q,j}(r) Y_{p,q}^j(ω)` on `grid`.
pub fn reconstruct<T: Real>(
    components: &[Component<'_, T>],
    grid: Arc<PolarGrid<T>>,
    lambda: T,
) -> Result<SpectralSlice<T>> {
    let mut out = SpectralSlice::zeros(lambda, grid.clone());
    let m = grid.sphere.len();
    for c in components {
        if c.basis.n != grid.n() {
            return Err(Error::DimensionMismatch(c.basis.n, grid.n()));
        }
        if c.profile.r != grid.radii() {
            return Err(Error::GridMismatch("coefficient radii differ from the grid"));
        }
        let y = c.basis.element(c.j)?;
        let ys: Vec<Complex<T>> = (0..m).map(|k| y.evaluate(grid.sphere.point(k))).collect();
        for (i, v) in c.profile.values.iter().enumerate() {
            for (k, yk) in ys.iter().enumerate() {
                out.values[i * m + k] += *v * *yk;
            }
        }
    }
    Ok(out)
}

/// Every coefficient with `p + q ≤ max_degree` of `f`.
pub fn expand<'a, T: Real>(
    f: &SpectralSlice<T>,
    bases: &'a [BigradedBasis<T>],
) -> Result<Vec<Component<'a, T>>> {
    let mut out = Vec::new();
    for b in bases {
        for j in 1..=b.dimension() {
            out.push(Component {
                basis: b,
                j,
                profile: spherical_coefficients(f, b, j)?,
            });
        }
    }
    Ok(out)
}

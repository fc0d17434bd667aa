//! Sampled radial profiles, polar grids on `ℂⁿ` and spectral slices.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, Rule};
use crate::real::{from_usize, lit, to_f64, Real};

/// A complex function sampled on an increasing grid of radii `r ≥ 0`.
///
/// `measure_exponent` is the power `m` of the natural measure `r^m dr` the
/// profile lives against (`2α+1` for Hankel transforms of order `α`,
/// `2n-1` for radial functions on `ℂⁿ`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T: Real> {
    pub r: Vec<T>,
    pub values: Vec<Complex<T>>,
    pub measure_exponent: T,
}

impl<T: Real> RadialProfile<T> {
    pub fn new(r: Vec<T>, values: Vec<Complex<T>>, measure_exponent: T) -> Result<Self> {
        if r.len() != values.len() {
            return Err(Error::DimensionMismatch(r.len(), values.len()));
        }
        if r.iter().any(|&x| x < T::zero() || !x.is_finite()) {
            return Err(Error::InvalidArgument("radii must be finite and >= 0".into()));
        }
        if r.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
        }
        Ok(Self {
            r,
            values,
            measure_exponent,
        })
    }

    pub fn from_fn<F: FnMut(T) -> Complex<T>>(r: &[T], measure_exponent: T, mut f: F) -> Self {
        let values = r.iter().map(|&x| f(x)).collect();
        Self {
            r: r.to_vec(),
            values,
            measure_exponent,
        }
    }

    pub fn from_real_fn<F: FnMut(T) -> T>(r: &[T], measure_exponent: T, mut f: F) -> Self {
        Self::from_fn(r, measure_exponent, |x| Complex::new(f(x), T::zero()))
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), T::max)
    }

    /// Pointwise map keeping the grid.
    pub fn map<F: FnMut(T, Complex<T>) -> Complex<T>>(&self, mut f: F) -> Self {
        Self {
            r: self.r.clone(),
            values: self
                .r
                .iter()
                .zip(&self.values)
                .map(|(&r, &v)| f(r, v))
                .collect(),
            measure_exponent: self.measure_exponent,
        }
    }

    /// Largest pointwise difference relative to the largest value of `reference`.
    pub fn relative_linf_error(&self, reference: &Self) -> Result<T> {
        if self.r != reference.r {
            return Err(Error::GridMismatch("profiles on different radii"));
        }
        let scale = reference.max_abs();
        let err = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max);
        Ok(err / scale)
    }

    /// CSV with header `r,re,im`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,re,im\n");
        for (r, v) in self.r.iter().zip(&self.values) {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                to_f64(*r),
                to_f64(v.re),
                to_f64(v.im)
            );
        }
        out
    }

    /// Parses the [`to_csv`](Self::to_csv) format.
    pub fn from_csv(text: &str, measure_exponent: T) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("r,re,im") => {}
            other => {
                return Err(Error::InvalidArgument(format!(
                    "expected header r,re,im, found {other:?}"
                )))
            }
        }
        let mut r = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "line {}: expected 3 fields",
                    i + 2
                )));
            }
            let parse = |s: &str| -> Result<T> {
                s.parse::<f64>()
                    .map(lit)
                    .map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 2)))
            };
            r.push(parse(fields[0])?);
            values.push(Complex::new(parse(fields[1])?, parse(fields[2])?));
        }
        Self::new(r, values, measure_exponent)
    }
}

/// Quadrature on the unit sphere `S^{2n-1} ⊂ ℂⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid<T: Real> {
    n: usize,
    /// Flattened coordinates, `n` complex numbers per node.
    points: Vec<Complex<T>>,
    weights: Vec<T>,
    /// Number of equispaced angles per circle factor.
    angles: usize,
}

impl<T: Real> SphereGrid<T> {
    /// Trapezoid rule on the circle with `m` equispaced nodes starting at angle 0.
    pub fn circle(m: usize) -> Self {
        assert!(m >= 1);
        let h = T::TAU() / from_usize(m);
        let points = (0..m)
            .map(|j| Complex::from_polar(T::one(), h * from_usize(j)))
            .collect();
        Self {
            n: 1,
            points,
            weights: vec![h; m],
            angles: m,
        }
    }

    /// Product rule on `S³` exact for polynomials in `z, z̄` of total degree
    /// `≤ degree`, using `z = (√u e^{iφ₁}, √(1-u) e^{iφ₂})`,
    /// `dσ = ½ du dφ₁ dφ₂`.
    pub fn s3(degree: usize) -> Self {
        let nu = (degree / 2 + 2) / 2;
        let m = degree + 1;
        let (x, w) = gauss_legendre::<T>(nu.max(1));
        let h = T::TAU() / from_usize(m);
        let half: T = lit(0.5);
        let mut points = Vec::with_capacity(2 * nu * m * m);
        let mut weights = Vec::with_capacity(nu * m * m);
        for (xi, wi) in x.iter().zip(&w) {
            let u = (*xi + T::one()) * half;
            let wu = *wi * half;
            for a in 0..m {
                for b in 0..m {
                    points.push(Complex::from_polar(u.sqrt(), h * from_usize(a)));
                    points.push(Complex::from_polar((T::one() - u).sqrt(), h * from_usize(b)));
                    weights.push(half * wu * h * h);
                }
            }
        }
        Self {
            n: 2,
            points,
            weights,
            angles: m,
        }
    }

    /// Default rule for `ℂⁿ`, `n ∈ {1, 2}`, exact up to `degree`.
    pub fn for_dimension(n: usize, degree: usize) -> Result<Self> {
        match n {
            1 => Ok(Self::circle(degree + 1)),
            2 => Ok(Self::s3(degree)),
            _ => Err(Error::UnsupportedDimension(n)),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, j: usize) -> &[Complex<T>] {
        &self.points[j * self.n..(j + 1) * self.n]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Angles per circle factor.
    pub fn angles(&self) -> usize {
        self.angles
    }
}

/// Surface area of `S^{2n-1}`: `2π^n / Γ(n)`.
pub fn sphere_area<T: Real>(n: usize) -> T {
    let fact: T = (1..n).map(from_usize::<T>).fold(T::one(), |a, b| a * b);
    lit::<T>(2.0) * T::PI().powi(n as i32) / fact
}

/// Radial rule (weights for `dr`) times a sphere rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid<T: Real> {
    pub radial: Rule<T>,
    pub sphere: SphereGrid<T>,
    pub r_max: T,
}

impl<T: Real> PolarGrid<T> {
    pub fn new(radial: Rule<T>, sphere: SphereGrid<T>, r_max: T) -> Result<Self> {
        if radial.nodes.iter().any(|&r| r <= T::zero() || r >= r_max) {
            return Err(Error::InvalidArgument(
                "radial nodes must lie in (0, r_max)".into(),
            ));
        }
        if radial.nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidArgument("radial nodes must increase".into()));
        }
        Ok(Self {
            radial,
            sphere,
            r_max,
        })
    }

    /// Composite Gauss-Legendre radii on `[0, r_max]` (`panels × order`)
    /// with the default sphere rule.
    pub fn standard(n: usize, r_max: T, panels: usize, order: usize, angles: usize) -> Result<Self> {
        let sphere = match n {
            1 => SphereGrid::circle(angles),
            2 => SphereGrid::s3(angles.saturating_sub(1)),
            _ => return Err(Error::UnsupportedDimension(n)),
        };
        Self::new(Rule::composite(T::zero(), r_max, panels, order), sphere, r_max)
    }

    /// 128 radii on `[0, 8]` and 64 angles.
    pub fn default_plane() -> Self {
        Self::standard(1, lit(8.0), 8, 16, 64).expect("valid default grid")
    }

    pub fn n(&self) -> usize {
        self.sphere.dimension()
    }

    pub fn radii(&self) -> &[T] {
        &self.radial.nodes
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `r_i ω_j` written into `out`.
    pub fn point_into(&self, i: usize, j: usize, out: &mut [Complex<T>]) {
        let r = self.radial.nodes[i];
        for (o, c) in out.iter_mut().zip(self.sphere.point(j)) {
            *o = *c * r;
        }
    }

    /// Lebesgue measure weight of node `(i, j)`: `dr · r^{2n-1} · dσ`.
    pub fn volume_weight(&self, i: usize, j: usize) -> T {
        let r = self.radial.nodes[i];
        self.radial.weights[i] * r.powi(2 * self.n() as i32 - 1) * self.sphere.weights()[j]
    }
}

/// A fixed-`λ` function on `ℂⁿ` sampled on a polar grid; values are stored
/// radius-major (`values[i * sphere.len() + j]`).
#[derive(Debug, Clone)]
pub struct SpectralSlice<T: Real> {
    pub lambda: T,
    pub grid: Arc<PolarGrid<T>>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SpectralSlice<T> {
    pub fn new(lambda: T, grid: Arc<PolarGrid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(values.len(), grid.len()));
        }
        Ok(Self {
            lambda,
            grid,
            values,
        })
    }

    /// Samples `f(z)` at every grid node.
    pub fn from_fn<F: FnMut(&[Complex<T>]) -> Complex<T>>(
        lambda: T,
        grid: Arc<PolarGrid<T>>,
        mut f: F,
    ) -> Self {
        let n = grid.n();
        let mut z = vec![Complex::new(T::zero(), T::zero()); n];
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.radial.len() {
            for j in 0..grid.sphere.len() {
                grid.point_into(i, j, &mut z);
                values.push(f(&z));
            }
        }
        Self {
            lambda,
            grid,
            values,
        }
    }

    /// Samples a radial function `f(|z|)`.
    pub fn from_radial<F: FnMut(T) -> Complex<T>>(lambda: T, grid: Arc<PolarGrid<T>>, mut f: F) -> Self {
        let m = grid.sphere.len();
        let mut values = Vec::with_capacity(grid.len());
        for &r in grid.radii() {
            let v = f(r);
            values.extend(std::iter::repeat(v).take(m));
        }
        Self {
            lambda,
            grid,
            values,
        }
    }

    pub fn zeros(lambda: T, grid: Arc<PolarGrid<T>>) -> Self {
        let len = grid.len();
        Self {
            lambda,
            grid,
            values: vec![Complex::new(T::zero(), T::zero()); len],
        }
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn value(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.grid.sphere.len() + j]
    }

    /// Values on the `i`-th radial shell.
    pub fn shell(&self, i: usize) -> &[Complex<T>] {
        let m = self.grid.sphere.len();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// `L²(ℂⁿ)` norm by grid quadrature.
    pub fn l2_norm(&self) -> T {
        let m = self.grid.sphere.len();
        let mut acc = T::zero();
        for (idx, v) in self.values.iter().enumerate() {
            acc += self.grid.volume_weight(idx / m, idx % m) * v.norm_sqr();
        }
        acc.sqrt()
    }

    /// `a·self + b·other` on the shared grid.
    pub fn combine(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("combine needs a shared grid"));
        }
        Ok(Self {
            lambda: self.lambda,
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| *x * a + *y * b)
                .collect(),
        })
    }

    /// Largest pointwise difference over nodes with `|z| ≤ radius`, relative
    /// to the largest `|reference|` there.
    pub fn relative_linf_error_within(&self, reference: &Self, radius: T) -> Result<T> {
        if !self.same_grid(reference) {
            return Err(Error::GridMismatch("comparison needs a shared grid"));
        }
        let m = self.grid.sphere.len();
        let mut err = T::zero();
        let mut scale = T::zero();
        for (idx, (a, b)) in self.values.iter().zip(&reference.values).enumerate() {
            if self.grid.radii()[idx / m] <= radius {
                err = err.max((a - b).norm());
                scale = scale.max(b.norm());
            }
        }
        Ok(err / scale)
    }
}

/// Cubic interpolation of an `n = 1` slice in polar coordinates: Lagrange in
/// the radius (continued through the origin by `f(-ρ, θ) = f(ρ, θ+π)`) and
/// periodic cubic in the angle. Zero beyond `r_max`.
pub struct PolarInterpolator<'a, T: Real> {
    slice: &'a SpectralSlice<T>,
    /// Extended radial abscissae and the row they read from.
    abscissae: Vec<T>,
    rows: Vec<Row>,
    /// Largest `|f|` on each extended row.
    row_max: Vec<T>,
    m: usize,
    dtheta: T,
}

#[derive(Clone, Copy, Debug)]
enum Row {
    Direct(usize),
    Reflected(usize),
    Zero,
}

impl<'a, T: Real> PolarInterpolator<'a, T> {
    pub fn new(slice: &'a SpectralSlice<T>) -> Result<Self> {
        if slice.n() != 1 {
            return Err(Error::UnsupportedDimension(slice.n()));
        }
        let m = slice.grid.sphere.len();
        if m < 4 || m % 2 == 1 {
            return Err(Error::InvalidArgument(
                "polar interpolation needs an even number (>= 4) of angles".into(),
            ));
        }
        let radii = slice.grid.radii();
        let nr = radii.len();
        if nr < 2 {
            return Err(Error::InvalidArgument("need at least two radii".into()));
        }
        let r_max = slice.grid.r_max;
        let mut abscissae = vec![-radii[1], -radii[0]];
        let mut rows = vec![Row::Reflected(1), Row::Reflected(0)];
        for (i, &r) in radii.iter().enumerate() {
            abscissae.push(r);
            rows.push(Row::Direct(i));
        }
        abscissae.push(r_max);
        rows.push(Row::Zero);
        abscissae.push(r_max + (r_max - radii[nr - 1]).max(radii[nr - 1] - radii[nr - 2]));
        rows.push(Row::Zero);
        let row_max = rows
            .iter()
            .map(|r| match r {
                Row::Direct(i) | Row::Reflected(i) => {
                    slice.shell(*i).iter().map(|v| v.norm()).fold(T::zero(), T::max)
                }
                Row::Zero => T::zero(),
            })
            .collect();
        Ok(Self {
            slice,
            abscissae,
            rows,
            row_max,
            m,
            dtheta: T::TAU() / from_usize(m),
        })
    }

    /// Periodic cubic stencil `(indices, weights)` at angle `theta`.
    fn stencil(&self, theta: T) -> ([usize; 4], [T; 4]) {
        let m = self.m as i64;
        let t = theta / self.dtheta;
        let j0 = t.floor();
        let s = t - j0;
        let j0 = to_f64(j0) as i64;
        let one = T::one();
        let two: T = lit(2.0);
        let six: T = lit(6.0);
        // cubic Lagrange weights for nodes -1, 0, 1, 2
        let w = [
            -s * (s - one) * (s - two) / six,
            (s + one) * (s - one) * (s - two) / two,
            -(s + one) * s * (s - two) / two,
            (s + one) * s * (s - one) / six,
        ];
        let idx = [0, 1, 2, 3].map(|k: i64| (j0 - 1 + k).rem_euclid(m) as usize);
        (idx, w)
    }

    fn apply(&self, row: usize, st: &([usize; 4], [T; 4])) -> Complex<T> {
        let shell = self.slice.shell(row);
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..4 {
            acc += shell[st.0[k]] * st.1[k];
        }
        acc
    }

    /// Upper bound for `|eval(u)|` over `|u| = rho`.
    pub fn bound(&self, rho: T) -> T {
        if rho >= self.slice.grid.r_max {
            return T::zero();
        }
        let upper = self.abscissae.partition_point(|&a| a <= rho);
        let lo = upper.saturating_sub(2).min(self.abscissae.len() - 4);
        // Lebesgue constants of the two cubic stencils are below 2 each
        self.row_max[lo..lo + 4].iter().copied().fold(T::zero(), T::max) * lit(4.0)
    }

    /// Interpolated value at `u ∈ ℂ`.
    pub fn eval(&self, u: Complex<T>) -> Complex<T> {
        let rho = u.norm();
        if rho >= self.slice.grid.r_max {
            return Complex::new(T::zero(), T::zero());
        }
        let mut theta = u.im.atan2(u.re);
        if theta < T::zero() {
            theta += T::TAU();
        }
        let x = &self.abscissae;
        let upper = x.partition_point(|&a| a <= rho);
        let lo = upper.saturating_sub(2).min(x.len() - 4);
        let direct = self.stencil(theta);
        let mut reflected = None;
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in lo..lo + 4 {
            let mut w = T::one();
            for b in lo..lo + 4 {
                if a != b {
                    w = w * (rho - x[b]) / (x[a] - x[b]);
                }
            }
            let v = match self.rows[a] {
                Row::Direct(i) => self.apply(i, &direct),
                Row::Reflected(i) => {
                    let st = *reflected.get_or_insert_with(|| self.stencil(theta + T::PI()));
                    self.apply(i, &st)
                }
                Row::Zero => continue,
            };
            acc += v * w;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_weights_sum_to_area() {
        let c = SphereGrid::<f64>::circle(64);
        assert_relative_eq!(c.weights().iter().sum::<f64>(), sphere_area::<f64>(1), epsilon = 1e-12);
        let s = SphereGrid::<f64>::s3(24);
        assert_relative_eq!(s.weights().iter().sum::<f64>(), sphere_area::<f64>(2), max_relative = 1e-12);
        assert_relative_eq!(sphere_area::<f64>(2), 2.0 * std::f64::consts::PI.powi(2), epsilon = 1e-13);
    }

    #[test]
    fn s3_rule_is_exact_on_monomials() {
        // ∫_{S³} |z1|^4 |z2|^2 dσ = 2π² · 2! 1! / (1 + 3)! = π²/6
        let s = SphereGrid::<f64>::s3(24);
        let mut acc = 0.0;
        for j in 0..s.len() {
            let p = s.point(j);
            acc += s.weights()[j] * p[0].norm_sqr().powi(2) * p[1].norm_sqr();
        }
        assert_relative_eq!(acc, std::f64::consts::PI.powi(2) / 6.0, epsilon = 1e-13);
        // and a non-radial monomial integrates to zero
        let mut acc = Complex::new(0.0, 0.0);
        for j in 0..s.len() {
            let p = s.point(j);
            acc += p[0] * p[0] * p[1].conj() * s.weights()[j];
        }
        assert!(acc.norm() < 1e-14);
    }

    #[test]
    fn csv_round_trip() {
        let p = RadialProfile::from_fn(&[0.0, 0.5, 1.25], 1.0, |r: f64| Complex::new(r.exp(), -r));
        let back = RadialProfile::from_csv(&p.to_csv(), 1.0).unwrap();
        assert_eq!(p, back);
        assert!(RadialProfile::<f64>::from_csv("x,y\n", 1.0).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(RadialProfile::new(vec![1.0, 0.5], vec![Complex::new(0.0, 0.0); 2], 1.0).is_err());
        assert!(RadialProfile::new(vec![0.5], vec![], 1.0).is_err());
    }

    #[test]
    fn interpolator_reproduces_smooth_functions() {
        let grid = Arc::new(PolarGrid::<f64>::default_plane());
        let f = |z: Complex<f64>| z * (-z.norm_sqr()).exp() + Complex::new(0.3, 0.0);
        let slice = SpectralSlice::from_fn(1.0, grid, |z| f(z[0]));
        let it = PolarInterpolator::new(&slice).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..200 {
            let t = k as f64 * 0.731;
            let rho = (k as f64 * 0.017) % 3.0;
            let u = Complex::from_polar(rho, t);
            worst = worst.max((it.eval(u) - f(u)).norm());
        }
        assert!(worst < 5e-5, "{worst}");
        assert_eq!(it.eval(Complex::new(9.0, 0.0)), Complex::new(0.0, 0.0));
    }

    #[test]
    fn l2_norm_of_gaussian() {
        let grid = Arc::new(PolarGrid::<f64>::default_plane());
        let s = SpectralSlice::from_radial(1.0, grid, |r| Complex::new((-r * r).exp(), 0.0));
        // ∫ e^{-2|z|²} dz = π/2
        assert_relative_eq!(s.l2_norm(), (std::f64::consts::PI / 2.0).sqrt(), epsilon = 1e-12);
    }
}

//! The Hermite propagator `e^{-isH}`, `H = -Δ + |x|²`, through the Mehler
//! kernel, and the corresponding uniqueness gate.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::grid::RadialProfile;
use crate::hankel::{fit_gaussian_decay, DecayFit};
use crate::real::{from_usize, im, lit, re, to_f64, Real};
use crate::twisted::Flagged;

/// `|sin 2s|` at or below this is a caustic.
pub const CAUSTIC_SIN: f64 = 1e-6;

/// Boundary samples above this fraction of the peak raise a warning.
pub const BOUNDARY_RATIO: f64 = 1e-10;

/// Largest kernel phase change allowed between neighbouring quadrature nodes.
const PHASE_PER_NODE: f64 = 0.5;

/// Uniform nodes `-L + jh`, `h = 2L/(m-1)`, on each of `n ≤ 2` axes.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianGrid<T: Real> {
    pub n: usize,
    pub half_width: T,
    pub nodes_per_axis: usize,
}

impl<T: Real> CartesianGrid<T> {
    pub fn new(n: usize, half_width: T, nodes_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(half_width > T::zero()) || nodes_per_axis < 4 {
            return Err(Error::InvalidArgument("need L > 0 and at least 4 nodes per axis".into()));
        }
        Ok(Self { n, half_width, nodes_per_axis })
    }

    /// `n = 1`, `L = 8`, 512 nodes.
    pub fn default_line() -> Self {
        Self::new(1, lit(8.0), 512).expect("valid default")
    }

    pub fn spacing(&self) -> T {
        (self.half_width + self.half_width) / from_usize(self.nodes_per_axis - 1)
    }

    pub fn axis(&self) -> Vec<T> {
        let h = self.spacing();
        (0..self.nodes_per_axis)
            .map(|j| -self.half_width + h * from_usize(j))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: the last axis varies fastest.
    pub fn point(&self, idx: usize) -> Vec<T> {
        let axis = self.axis();
        let m = self.nodes_per_axis;
        match self.n {
            1 => vec![axis[idx]],
            _ => vec![axis[idx / m], axis[idx % m]],
        }
    }
}

/// Complex samples on a [`CartesianGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T: Real> {
    pub grid: CartesianGrid<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: CartesianGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(values.len(), grid.len()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(&[T]) -> Complex<T>>(grid: CartesianGrid<T>, mut f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Trapezoid-rule `L²` norm.
    pub fn l2_norm(&self) -> T {
        let m = self.grid.nodes_per_axis;
        let h = self.grid.spacing();
        let w = |j: usize| if j == 0 || j == m - 1 { h * lit(0.5) } else { h };
        let sum = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let weight = match self.grid.n {
                    1 => w(idx),
                    _ => w(idx / m) * w(idx % m),
                };
                v.norm_sqr() * weight
            })
            .fold(T::zero(), |a, b| a + b);
        sum.sqrt()
    }

    /// `max |u - v| / max |v|`.
    pub fn relative_linf_error(&self, reference: &Self) -> Result<T> {
        if self.grid != reference.grid {
            return Err(Error::GridMismatch("grids differ"));
        }
        let diff = self
            .values
            .iter()
            .zip(&reference.values)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()));
        Ok(diff / reference.max_abs())
    }

    fn boundary_ratio(&self) -> T {
        let m = self.grid.nodes_per_axis;
        let on_edge = |j: usize| j == 0 || j == m - 1;
        let edge = self
            .values
            .iter()
            .enumerate()
            .filter(|(idx, _)| match self.grid.n {
                1 => on_edge(*idx),
                _ => on_edge(idx / m) || on_edge(idx % m),
            })
            .fold(T::zero(), |acc, (_, v)| acc.max(v.norm()));
        let peak = self.max_abs();
        if peak > T::zero() {
            edge / peak
        } else {
            T::zero()
        }
    }
}

/// Time and grid of a Mehler evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct MehlerParams<T: Real> {
    pub n: usize,
    pub s: T,
    pub grid: CartesianGrid<T>,
}

impl<T: Real> MehlerParams<T> {
    pub fn new(s: T, grid: CartesianGrid<T>) -> Result<Self> {
        check_caustic(s)?;
        Ok(Self { n: grid.n, s, grid })
    }
}

fn check_caustic<T: Real>(s: T) -> Result<T> {
    let sin2 = (s + s).sin();
    if !(sin2.abs() > lit(CAUSTIC_SIN)) {
        return Err(Error::Caustic(to_f64(s)));
    }
    Ok(sin2)
}

/// One-dimensional factor `C e^{iα(x²+y²) - iβxy}` of the propagator kernel.
#[derive(Debug, Clone, Copy)]
struct Factor<T: Real> {
    pref: Complex<T>,
    alpha: T,
    beta: T,
}

impl<T: Real> Factor<T> {
    fn new(s: T) -> Result<Self> {
        let sin2 = check_caustic(s)?;
        // the phase steps by e^{-iπ/2} at each caustic crossed
        let j = to_f64((s + s) / T::PI()).floor();
        let phase = -T::FRAC_PI_4() * lit(2.0 * j + 1.0);
        let pref = im(phase).exp() / (lit::<T>(2.0) * T::PI() * sin2.abs()).sqrt();
        Ok(Self {
            pref,
            alpha: (s + s).cos() / sin2 * lit(0.5),
            beta: sin2.recip(),
        })
    }

    fn eval(&self, x: T, y: T) -> Complex<T> {
        self.pref * im(self.alpha * (x * x + y * y) - self.beta * (x * y)).exp()
    }
}

/// `K_r(x,y) = π^{-n/2}(1-r²)^{-n/2} exp(-½ (1+r²)/(1-r²) (|x|²+|y|²) + 2r/(1-r²) x·y)`
/// with the principal square root.
pub fn mehler_kernel_r<T: Real>(r: Complex<T>, x: &[T], y: &[T]) -> Result<Complex<T>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    let one = re(T::one());
    let d = one - r * r;
    if d.norm() < lit(CAUSTIC_SIN) {
        return Err(Error::Caustic(to_f64(r.arg() * lit(-0.5))));
    }
    let n = x.len();
    let sq: T = x.iter().chain(y).map(|v| *v * *v).fold(T::zero(), |a, b| a + b);
    let dot: T = x.iter().zip(y).map(|(a, b)| *a * *b).fold(T::zero(), |a, b| a + b);
    let half: T = lit(0.5);
    let exponent = -(one + r * r) / d * (half * sq) + r * lit::<T>(2.0) / d * dot;
    Ok(d.powf(-half * from_usize(n)) * exponent.exp() / T::PI().powf(half * from_usize(n)))
}

/// Kernel of `e^{-isH}`: `e^{-ins} K_r` with `r = e^{-2is}`, with the square
/// root continued from `s = 0⁺` and stepped by `e^{-iπn/2}` at each caustic.
pub fn mehler_kernel<T: Real>(params: &MehlerParams<T>, x: &[T], y: &[T]) -> Result<Complex<T>> {
    if x.len() != params.n || y.len() != params.n {
        return Err(Error::DimensionMismatch(x.len().max(y.len()), params.n));
    }
    let f = Factor::new(params.s)?;
    Ok(x.iter().zip(y).fold(re(T::one()), |acc, (&a, &b)| acc * f.eval(a, b)))
}

/// Applies the one-dimensional factor to a uniformly sampled line.
fn evolve_line<T: Real>(f: &Factor<T>, axis: &[T], h: T, values: &[Complex<T>]) -> Vec<Complex<T>> {
    let m = axis.len();
    let l = axis[m - 1];
    let freq = (f.alpha.abs() + f.alpha.abs() + f.beta.abs()) * l;
    let refine = to_f64(h * freq / lit(PHASE_PER_NODE)).ceil().max(1.0) as usize;
    let fine = fine_samples(values, refine);
    let hf = h / from_usize(refine);
    let total = fine.len();
    let chirped: Vec<Complex<T>> = fine
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let y = axis[0] + hf * from_usize(k);
            let w = if k == 0 || k == total - 1 { hf * lit(0.5) } else { hf };
            v * im(f.alpha * y * y).exp() * w
        })
        .collect();
    axis.par_iter()
        .map(|&x| {
            let mut acc = re(T::zero());
            for (k, g) in chirped.iter().enumerate() {
                let y = axis[0] + hf * from_usize(k);
                acc += g * im(-f.beta * x * y).exp();
            }
            f.pref * im(f.alpha * x * x).exp() * acc
        })
        .collect()
}

/// Eight-point Lagrange refinement by an integer factor, zero beyond the ends.
fn fine_samples<T: Real>(values: &[Complex<T>], refine: usize) -> Vec<Complex<T>> {
    if refine == 1 {
        return values.to_vec();
    }
    const OFFSETS: [isize; 8] = [-3, -2, -1, 0, 1, 2, 3, 4];
    let weights: Vec<[T; 8]> = (0..refine)
        .map(|k| {
            let t: T = from_usize::<T>(k) / from_usize(refine);
            let mut w = [T::one(); 8];
            for (i, &oi) in OFFSETS.iter().enumerate() {
                for &ok in OFFSETS.iter().filter(|&&ok| ok != oi) {
                    w[i] = w[i] * (t - lit(ok as f64)) / lit((oi - ok) as f64);
                }
            }
            w
        })
        .collect();
    let m = values.len() as isize;
    let at = |j: isize| if (0..m).contains(&j) { values[j as usize] } else { re(T::zero()) };
    let mut out = Vec::with_capacity((values.len() - 1) * refine + 1);
    for j in 0..m - 1 {
        for w in &weights {
            let v = OFFSETS
                .iter()
                .zip(w)
                .fold(re(T::zero()), |acc, (&o, &wi)| acc + at(j + o) * wi);
            out.push(v);
        }
    }
    out.push(values[values.len() - 1]);
    out
}

/// `u(·, s) = ∫ K(·, y) f(y) dy`, factor by factor along each axis.
/// The trapezoid rule is refined (with cubic interpolation of `f`) wherever
/// the kernel's chirp outruns the grid.
pub fn hermite_evolve<T: Real>(f: &GridFunction<T>, s: T) -> Result<Flagged<GridFunction<T>>> {
    let factor = Factor::new(s)?;
    let grid = f.grid.clone();
    let ratio = f.boundary_ratio();
    let warning = (ratio > lit(BOUNDARY_RATIO)).then(|| Warning::Truncation(to_f64(ratio)));
    let axis = grid.axis();
    let h = grid.spacing();
    let m = grid.nodes_per_axis;
    let values = match grid.n {
        1 => evolve_line(&factor, &axis, h, &f.values),
        _ => {
            let mut rows: Vec<Complex<T>> = f
                .values
                .chunks(m)
                .flat_map(|row| evolve_line(&factor, &axis, h, row))
                .collect();
            for col in 0..m {
                let line: Vec<Complex<T>> = (0..m).map(|i| rows[i * m + col]).collect();
                for (i, v) in evolve_line(&factor, &axis, h, &line).into_iter().enumerate() {
                    rows[i * m + col] = v;
                }
            }
            rows
        }
    };
    Ok(Flagged {
        value: GridFunction::new(grid, values)?,
        warning,
    })
}

/// Normalized Hermite function `h_k(x)` in one variable.
pub fn hermite_function<T: Real>(k: usize, x: T) -> T {
    let two: T = lit(2.0);
    let mut prev = T::zero();
    let mut cur = T::PI().powf(lit(-0.25)) * (-(x * x) * lit(0.5)).exp();
    for j in 0..k {
        let jf: T = from_usize(j);
        let next = (two / (jf + T::one())).sqrt() * x * cur - (jf / (jf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gate outcome: a positive margin forces `f = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteGate<T: Real> {
    pub margin: T,
    pub zero_forced: bool,
}

/// `margin = ab sin²(2s₀) - 1/4`.
pub fn hermite_gate<T: Real>(a: T, b: T, s0: T) -> HermiteGate<T> {
    let sin2 = (s0 + s0).sin();
    let margin = a * b * sin2 * sin2 - lit(0.25);
    HermiteGate {
        margin,
        zero_forced: margin > T::zero(),
    }
}

/// Decay fit of `|u(x)|` along the positive `x₁` axis (`n = 1`).
pub fn fit_line_decay<T: Real>(u: &GridFunction<T>, window: (T, T)) -> Result<DecayFit<T>> {
    if u.grid.n != 1 {
        return Err(Error::UnsupportedDimension(u.grid.n));
    }
    let pairs: Vec<(T, Complex<T>)> = u
        .grid
        .axis()
        .into_iter()
        .zip(u.values.iter().copied())
        .filter(|(x, _)| *x >= T::zero())
        .collect();
    let (r, values) = pairs.into_iter().unzip();
    fit_gaussian_decay(&RadialProfile::new(r, values, T::zero())?, Some(window))
}

/// Decay of `u(·, s₀)` and the product `ab sin²(2s₀)` it attains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteBoundary<T: Real> {
    pub b: T,
    pub product: T,
    pub fit: DecayFit<T>,
}

/// Evolves `e^{-ax²}`, chirped by `e^{-i cot(2s₀) x²/2}` when `chirped`, to
/// time `s₀` and fits the decay `b` of `|u|` on `x ∈ [1, 4]`. The chirped
/// Gaussian is the extremal: it lands on `ab sin²(2s₀) = 1/4`.
pub fn hermite_boundary_case<T: Real>(a: T, s0: T, chirped: bool) -> Result<HermiteBoundary<T>> {
    let sin2 = check_caustic(s0)?;
    let chirp = if chirped { (s0 + s0).cos() / sin2 * lit(0.5) } else { T::zero() };
    let f = GridFunction::from_fn(CartesianGrid::default_line(), |x: &[T]| {
        (Complex::new(-a, -chirp) * x[0] * x[0]).exp()
    });
    let u = hermite_evolve(&f, s0)?.value;
    let fit = fit_line_decay(&u, (T::one(), lit(4.0)))?;
    Ok(HermiteBoundary {
        b: fit.a,
        product: a * fit.a * sin2 * sin2,
        fit,
    })
}

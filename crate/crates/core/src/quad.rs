//! Quadrature rules: Gauss-Legendre nodes, composite panels and an adaptive
//! Gauss-Kronrod integrator for complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::{from_usize, lit, to_f64, Real};

/// Environment variable overriding the subinterval budget of [`adaptive`].
pub const BUDGET_ENV: &str = "HH_QUAD_BUDGET";

const DEFAULT_BUDGET: usize = 4000;

/// Maximum number of subintervals an adaptive integration may create.
pub fn budget() -> usize {
    static BUDGET: OnceLock<usize> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&b| b > 0)
            .unwrap_or(DEFAULT_BUDGET)
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    // Newton in f64, then convert; f64 is at least as accurate as any `Real`.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = lit(-x);
        nodes[n - 1 - i] = lit(x);
        weights[i] = lit(w);
        weights[n - 1 - i] = lit(w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Nodes and weights of a fixed rule on a finite interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    /// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes on `[a, b]`.
    pub fn composite(a: T, b: T, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(order);
        let h = (b - a) / from_usize(panels);
        let half = h / lit(2.0);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = a + h * from_usize(p) + half;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * *xi);
                weights.push(half * *wi);
            }
        }
        Self { nodes, weights }
    }

    /// Gauss-Legendre panels between consecutive ascending `breaks`.
    pub fn from_breaks(breaks: &[T], order: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(order);
        let mut nodes = Vec::with_capacity(breaks.len().saturating_sub(1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breaks.windows(2) {
            let half = (p[1] - p[0]) / lit(2.0);
            let mid = p[0] + half;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * *xi);
                weights.push(half * *wi);
            }
        }
        Self { nodes, weights }
    }

    /// Composite rule whose panels are no wider than `max_width`.
    pub fn composite_max_width(a: T, b: T, max_width: T, order: usize) -> Self {
        let panels = to_f64((b - a) / max_width).ceil().max(1.0) as usize;
        Self::composite(a, b, panels, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn integrate_complex<F: FnMut(T) -> Complex<T>>(&self, mut f: F) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(x) * w;
        }
        acc
    }
}

// Gauss-Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive<T: Real> {
    pub value: Complex<T>,
    pub error: T,
    pub intervals: usize,
}

struct Segment<T: Real> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn gk15<T: Real, F: FnMut(T) -> Complex<T>>(f: &mut F, a: T, b: T) -> (Complex<T>, T) {
    let center = (a + b) / lit(2.0);
    let half = (b - a) / lit(2.0);
    let fc = f(center);
    let mut kronrod = fc * lit::<T>(WGK[7]);
    let mut gauss = fc * lit::<T>(WG[3]);
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * lit(x);
        let s = f(center - dx) + f(center + dx);
        kronrod += s * lit::<T>(WGK[j]);
        if j % 2 == 1 {
            gauss += s * lit::<T>(WG[j / 2]);
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    (value, err)
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of a complex integrand
/// over `[a, b]`, subdividing the worst interval until the summed error
/// estimate is below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive<T: Real, F: FnMut(T) -> Complex<T>>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<Adaptive<T>> {
    adaptive_with_breaks(&mut f, &[a, b], abs_tol, rel_tol)
}

/// As [`adaptive`], starting from the given ascending breakpoints.
pub fn adaptive_with_breaks<T: Real, F: FnMut(T) -> Complex<T>>(
    f: &mut F,
    breaks: &[T],
    abs_tol: T,
    rel_tol: T,
) -> Result<Adaptive<T>> {
    let limit = budget();
    let mut heap = BinaryHeap::new();
    let mut total = Complex::new(T::zero(), T::zero());
    let mut total_err = T::zero();
    for w in breaks.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let floor = lit::<T>(50.0 * T::EPS);
    loop {
        let tol = abs_tol.max(rel_tol * total.norm());
        if total_err <= tol || total_err <= floor * total.norm() {
            break;
        }
        if heap.len() >= limit {
            return Err(Error::QuadratureBudget(limit, to_f64(total_err)));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = (worst.a + worst.b) / lit(2.0);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated cancellation from incremental updates.
    let mut value = Complex::new(T::zero(), T::zero());
    let mut error = T::zero();
    let intervals = heap.len();
    for s in heap {
        value += s.value;
        error += s.error;
    }
    Ok(Adaptive {
        value,
        error,
        intervals,
    })
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<T> {
    adaptive(|x| Complex::new(f(x), T::zero()), a, b, abs_tol, rel_tol).map(|r| r.value.re)
}

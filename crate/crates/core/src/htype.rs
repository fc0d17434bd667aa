//! Heat kernel of an H-type group with center of dimension `k ≤ 3`, and its
//! partial Radon transform onto the Heisenberg group.

use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::heisenberg::{sinh_coth_factors, HeisenbergPoint};
use crate::quad::{adaptive_with_breaks, Rule};
use crate::real::{from_usize, lit, re, to_f64, Real};
use crate::specfun::{bessel_j_tilde, gamma};
use crate::twisted::Flagged;

/// Relative size of the dropped `λ` tail of the heat-kernel integral.
pub const HTYPE_CUTOFF: f64 = 1e-16;

/// Fiber samples above this fraction of the peak at the truncation radius
/// raise a warning.
pub const RADON_TAIL_RATIO: f64 = 1e-10;

/// A point `(v, t)` with `v ∈ ℝ^{2n}` and center coordinate `t ∈ ℝ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTypePoint<T: Real> {
    pub v: Vec<T>,
    pub t: Vec<T>,
}

impl<T: Real> HTypePoint<T> {
    pub fn new(v: Vec<T>, t: Vec<T>) -> Result<Self> {
        if v.is_empty() || v.len() % 2 != 0 {
            return Err(Error::InvalidArgument("v must have even, nonzero length".into()));
        }
        if !(1..=3).contains(&t.len()) {
            return Err(Error::UnsupportedDimension(t.len()));
        }
        Ok(Self { v, t })
    }

    pub fn n(&self) -> usize {
        self.v.len() / 2
    }

    pub fn k(&self) -> usize {
        self.t.len()
    }

    pub fn v_norm(&self) -> T {
        norm(&self.v)
    }

    pub fn t_norm(&self) -> T {
        norm(&self.t)
    }
}

fn norm<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &b| a + b * b).sqrt()
}

/// `x` with `x^{k-1} (x / sinh x)ⁿ = ` [`HTYPE_CUTOFF`].
fn cutoff(n: usize, k: usize) -> f64 {
    let g = |x: f64| (k as f64 - 1.0) * x.ln() + n as f64 * (x / x.sinh()).ln();
    let target = HTYPE_CUTOFF.ln();
    let (mut lo, mut hi) = (1.0f64, 200.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `h_s(v,t) = (2ⁿ(2π)^{n+k/2})^{-1} ∫₀^∞ λ^{k/2}|t|^{1-k/2} J_{k/2-1}(λ|t|) (λ/sinh sλ)ⁿ e^{-¼λ coth(sλ)|v|²} dλ`,
/// written with `J̃` so that `t = 0` needs no limit.
pub fn htype_heat_kernel<T: Real>(s: T, p: &HTypePoint<T>) -> Result<T> {
    if !(s > T::zero()) {
        return Err(Error::InvalidArgument("s must be > 0".into()));
    }
    let (n, k) = (p.n(), p.k());
    let kf: T = from_usize(k);
    let half: T = lit(0.5);
    let order = kf * half - T::one();
    let t = p.t_norm();
    let v2 = p.v_norm().powi(2);
    let big = lit::<T>(cutoff(n, k)) / s;
    let mut scale = big;
    if t > T::zero() {
        scale = scale.min(T::PI() / t);
    }
    let pieces = to_f64(big / scale).ceil().clamp(4.0, 400.0) as usize;
    let breaks: Vec<T> = (0..=pieces).map(|j| big * from_usize(j) / from_usize(pieces)).collect();
    let quarter: T = lit(0.25);
    let envelope = |lambda: T| -> Result<T> {
        let (ratio, coth) = sinh_coth_factors(lambda, re(s))?;
        Ok(lambda.powi(k as i32 - 1) * ratio.re.powi(n as i32) * (-(coth.re * v2 * quarter)).exp())
    };
    // |J̃_α| ≤ 1/Γ(α+1) bounds the integrand by the envelope
    let bound = Rule::from_breaks(&breaks, 8).integrate(|l| envelope(l).unwrap_or(T::zero()));
    let peak = bound / gamma(order + T::one());
    let mut err = None;
    let res = adaptive_with_breaks(
        &mut |lambda: T| {
            let v = envelope(lambda).and_then(|e| Ok(e * bessel_j_tilde(order, lambda * t)?));
            match v {
                Ok(v) => re(v),
                Err(e) => {
                    err.get_or_insert(e);
                    re(T::zero())
                }
            }
        },
        &breaks,
        peak * lit(1e-14),
        lit(1e-11),
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let two: T = lit(2.0);
    let pref = two.powf(T::one() - kf * half)
        / (two.powi(n as i32) * (two * T::PI()).powf(from_usize::<T>(n) + kf * half));
    Ok(res.value.re * pref)
}

/// Quadrature on `η^⊥`: Gauss–Legendre panels on `|ν| ≤ cutoff`, with a
/// trapezoid in angle when `η^⊥` is a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonRule<T: Real> {
    pub cutoff: T,
    pub panels: usize,
    pub order: usize,
    pub angles: usize,
}

impl<T: Real> Default for RadonRule<T> {
    fn default() -> Self {
        Self {
            cutoff: lit(16.0),
            panels: 16,
            order: 8,
            angles: 16,
        }
    }
}

impl<T: Real> RadonRule<T> {
    /// Nodes and weights of `∫_{η^⊥} g(ν) dν` in coordinates of an
    /// orthonormal basis of `η^⊥` (dimension `d`).
    fn nodes(&self, d: usize) -> Vec<(Vec<T>, T)> {
        match d {
            0 => vec![(vec![], T::one())],
            1 => {
                let rule = Rule::composite(-self.cutoff, self.cutoff, 2 * self.panels, self.order);
                rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| (vec![x], w)).collect()
            }
            _ => {
                let rule = Rule::composite(T::zero(), self.cutoff, self.panels, self.order);
                let dphi = T::TAU() / from_usize(self.angles);
                let mut out = Vec::with_capacity(rule.len() * self.angles);
                for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
                    for a in 0..self.angles {
                        let phi = dphi * from_usize(a);
                        out.push((vec![r * phi.cos(), r * phi.sin()], w * r * dphi));
                    }
                }
                out
            }
        }
    }
}

/// Orthonormal basis of `η^⊥` by Gram–Schmidt on the coordinate axes.
fn complement<T: Real>(eta: &[T]) -> Vec<Vec<T>> {
    let k = eta.len();
    let mut basis: Vec<Vec<T>> = Vec::new();
    for axis in 0..k {
        let mut e = vec![T::zero(); k];
        e[axis] = T::one();
        let mut project = |u: &[T]| {
            let d = e.iter().zip(u).fold(T::zero(), |a, (x, y)| a + *x * *y);
            for (x, y) in e.iter_mut().zip(u) {
                *x = *x - d * *y;
            }
        };
        project(eta);
        for b in &basis {
            project(b);
        }
        let len = norm(&e);
        if len > lit(1e-6) {
            basis.push(e.into_iter().map(|x| x / len).collect());
        }
        if basis.len() == k - 1 {
            break;
        }
    }
    basis
}

/// `(R_η f)(v, t) = ∫_{η^⊥} f(v, tη + ν) dν` at each target, with
/// `v = (Re z₁, Im z₁, …)`.
pub fn partial_radon<T, F>(
    f: F,
    eta: &[T],
    targets: &[HeisenbergPoint<T>],
    rule: &RadonRule<T>,
) -> Result<Flagged<Vec<T>>>
where
    T: Real,
    F: Fn(&HTypePoint<T>) -> Result<T> + Sync,
{
    let k = eta.len();
    if !(1..=3).contains(&k) {
        return Err(Error::UnsupportedDimension(k));
    }
    if (norm(eta) - T::one()).abs() > lit(1e-12) {
        return Err(Error::InvalidArgument("eta must be a unit vector".into()));
    }
    let basis = complement(eta);
    let nodes = rule.nodes(k - 1);
    let point = |p: &HeisenbergPoint<T>, nu: &[T]| {
        let v = p.z.iter().flat_map(|c| [c.re, c.im]).collect();
        let t = (0..k)
            .map(|i| p.t * eta[i] + basis.iter().zip(nu).fold(T::zero(), |a, (b, &c)| a + b[i] * c))
            .collect();
        HTypePoint::new(v, t)
    };
    let results = targets
        .par_iter()
        .map(|p| {
            let mut acc = T::zero();
            let mut peak = T::zero();
            for (nu, w) in &nodes {
                let val = f(&point(p, nu)?)?;
                peak = peak.max(val.abs());
                acc = acc + val * *w;
            }
            let tail = if k == 1 {
                T::zero()
            } else {
                let mut edge = vec![T::zero(); k - 1];
                edge[0] = rule.cutoff;
                f(&point(p, &edge)?)?.abs()
            };
            Ok((acc, if peak > T::zero() { tail / peak } else { T::zero() }))
        })
        .collect::<Result<Vec<(T, T)>>>()?;
    let worst = results.iter().fold(T::zero(), |m, r| m.max(r.1));
    Ok(Flagged {
        value: results.into_iter().map(|r| r.0).collect(),
        warning: (worst > lit(RADON_TAIL_RATIO)).then(|| Warning::Truncation(to_f64(worst))),
    })
}

/// `ab < s₀²`: the solution is forced to vanish.
pub fn htype_gate<T: Real>(a: T, b: T, s0: T) -> bool {
    a * b < s0 * s0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{heat_kernel, ComplexTime};
    use crate::propagator::{uniqueness_gate, GateParams};
    use num_complex::Complex;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn hpoint(v: f64, t: f64) -> HeisenbergPoint<f64> {
        HeisenbergPoint::new(vec![Complex::new(v, 0.0)], t).unwrap()
    }

    fn q(s: f64, p: &HeisenbergPoint<f64>) -> f64 {
        heat_kernel(ComplexTime::new(s, 0.0).unwrap(), p).unwrap().re
    }

    #[test]
    fn point_validation() {
        assert!(HTypePoint::new(vec![1.0], vec![0.0]).is_err());
        assert!(HTypePoint::new(vec![1.0, 0.0], vec![]).is_err());
        assert!(HTypePoint::new(vec![1.0, 0.0], vec![0.0; 4]).is_err());
        assert!(htype_heat_kernel(0.0, &HTypePoint::new(vec![0.0, 0.0], vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn center_of_dimension_one_is_heisenberg() {
        let p = HTypePoint::new(vec![1.0, 0.0], vec![0.5]).unwrap();
        let h = htype_heat_kernel(1.0, &p).unwrap();
        assert_relative_eq!(h, q(1.0, &hpoint(1.0, 0.5)), max_relative = 1e-5);
        let p = HTypePoint::new(vec![0.3, -0.4, 0.1, 0.7], vec![-1.3]).unwrap();
        let hp = HeisenbergPoint::new(vec![Complex::new(0.3, -0.4), Complex::new(0.1, 0.7)], -1.3).unwrap();
        assert_relative_eq!(htype_heat_kernel(0.7, &p).unwrap(), q(0.7, &hp), max_relative = 1e-5);
    }

    #[test]
    fn value_at_zero_center_is_finite_and_positive() {
        let p = HTypePoint::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let h: f64 = htype_heat_kernel(1.0, &p).unwrap();
        assert!(h.is_finite() && h > 0.0);
        // near-zero |t| agrees with the J̃ limit
        let near = HTypePoint::new(vec![0.0, 0.0], vec![1e-7, 0.0]).unwrap();
        assert_relative_eq!(htype_heat_kernel(1.0, &near).unwrap(), h, max_relative = 1e-10);
    }

    #[test]
    fn positive_on_a_grid() {
        for i in 0..5 {
            for j in 0..5 {
                let p = HTypePoint::new(vec![0.7 * i as f64, 0.0], vec![0.0, 1.1 * j as f64]).unwrap();
                assert!(htype_heat_kernel(1.0, &p).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn rotation_invariance_in_center() {
        for k in 2..=3 {
            let mut t = vec![0.0; k];
            t[0] = 1.2;
            let a = htype_heat_kernel(0.8, &HTypePoint::new(vec![0.5, 0.2], t).unwrap()).unwrap();
            let mut t = vec![1.2 / 3f64.sqrt(); k];
            let len: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
            t.iter_mut().for_each(|x| *x *= 1.2 / len);
            let b = htype_heat_kernel(0.8, &HTypePoint::new(vec![0.2, 0.5], t).unwrap()).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn parabolic_scaling() {
        let (s, r) = (0.6, 1.7);
        for k in 1..=3 {
            let hom = 2 + 2 * k as i32;
            let t: Vec<f64> = (0..k).map(|i| 0.4 + 0.3 * i as f64).collect();
            let v = vec![0.8, -0.3];
            let big = HTypePoint::new(v.iter().map(|x| x * r).collect(), t.iter().map(|x| x * r * r).collect()).unwrap();
            let small = HTypePoint::new(v, t).unwrap();
            let lhs = htype_heat_kernel(r * r * s, &big).unwrap();
            let rhs = r.powi(-hom) * htype_heat_kernel(s, &small).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
        }
    }

    #[test]
    fn radon_with_trivial_fiber_is_identity() {
        let f = |p: &HTypePoint<f64>| htype_heat_kernel(1.0, p);
        let targets = vec![hpoint(0.5, 0.3), hpoint(1.5, -1.0)];
        let out = partial_radon(f, &[-1.0], &targets, &RadonRule::default()).unwrap();
        for (p, v) in targets.iter().zip(&out.value) {
            let direct = htype_heat_kernel(1.0, &HTypePoint::new(vec![p.z[0].re, 0.0], vec![-p.t]).unwrap()).unwrap();
            assert_eq!(*v, direct);
        }
    }

    #[test]
    fn radon_sign_flip_and_linearity() {
        let c = [0.7, -0.2];
        let f = move |p: &HTypePoint<f64>| -> Result<f64> {
            let v2: f64 = p.v.iter().map(|x| x * x).sum();
            let d1: f64 = p.t.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
            let d2: f64 = p.t.iter().zip(&c).map(|(a, b)| (a + b).powi(2)).sum();
            Ok((-v2 - d1).exp() + (-v2 - d2).exp())
        };
        let eta = [0.6, 0.8];
        let neg = [-0.6, -0.8];
        let rule = RadonRule::default();
        let targets = vec![hpoint(0.4, 0.9), hpoint(0.0, -0.3)];
        let flipped: Vec<HeisenbergPoint<f64>> = targets.iter().map(|p| hpoint(p.z[0].re, -p.t)).collect();
        let a = partial_radon(f, &neg, &targets, &rule).unwrap().value;
        let b = partial_radon(f, &eta, &flipped, &rule).unwrap().value;
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
        let g = move |p: &HTypePoint<f64>| -> Result<f64> { Ok(2.0 * f(p)? - 3.0 * (-p.t_norm().powi(2)).exp()) };
        let lin = partial_radon(g, &eta, &targets, &rule).unwrap().value;
        let gauss = partial_radon(|p: &HTypePoint<f64>| Ok((-p.t_norm().powi(2)).exp()), &eta, &targets, &rule)
            .unwrap()
            .value;
        let fa = partial_radon(f, &eta, &targets, &rule).unwrap().value;
        for i in 0..2 {
            assert_relative_eq!(lin[i], 2.0 * fa[i] - 3.0 * gauss[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn radon_of_heat_kernel_is_heisenberg_heat_kernel() {
        let targets: Vec<HeisenbergPoint<f64>> = (0..5)
            .flat_map(|i| (0..5).map(move |j| hpoint(0.5 * i as f64, 0.5 * j as f64)))
            .collect();
        let f = |p: &HTypePoint<f64>| htype_heat_kernel(1.0, p);
        let out = partial_radon(f, &[0.0, 1.0], &targets, &RadonRule::default()).unwrap();
        assert!(out.warning.is_none(), "{:?}", out.warning);
        for (p, v) in targets.iter().zip(&out.value) {
            assert_relative_eq!(*v, q(1.0, p), max_relative = 1e-6);
        }
    }

    #[test]
    fn radon_in_three_center_dimensions() {
        let eta = [1.0 / 3f64.sqrt(); 3];
        let targets = vec![hpoint(0.5, 0.5), hpoint(1.0, -1.5)];
        let f = |p: &HTypePoint<f64>| htype_heat_kernel(1.0, p);
        let rule = RadonRule { angles: 8, ..RadonRule::default() };
        let out = partial_radon(f, &eta, &targets, &rule).unwrap();
        for (p, v) in targets.iter().zip(&out.value) {
            assert_relative_eq!(*v, q(1.0, p), max_relative = 1e-5);
        }
    }

    #[test]
    fn radon_rejects_bad_eta() {
        let f = |_: &HTypePoint<f64>| Ok(1.0);
        assert!(partial_radon(f, &[0.5, 0.5], &[hpoint(0.0, 0.0)], &RadonRule::default()).is_err());
        assert!(partial_radon(f, &[0.5; 4], &[hpoint(0.0, 0.0)], &RadonRule::default()).is_err());
    }

    #[test]
    fn truncated_fiber_is_flagged() {
        let f = |p: &HTypePoint<f64>| Ok((-p.t_norm() / 10.0).exp());
        let out = partial_radon(f, &[1.0, 0.0], &[hpoint(0.0, 0.0)], &RadonRule::default()).unwrap();
        assert!(matches!(out.warning, Some(Warning::Truncation(_))));
    }

    #[test]
    fn gate_examples() {
        assert!(htype_gate(1.0, 1.0, 2.0));
        assert!(!htype_gate(4.0, 1.0, 2.0));
        let vals = [0.5, 1.0, 2.0];
        for &a in &vals {
            for &b in &vals {
                for &s0 in &vals {
                    let g = uniqueness_gate(GateParams::new(a, b, s0, 0.0, 0.0).unwrap());
                    assert_eq!(htype_gate(a, b, s0), g.supercritical, "{a} {b} {s0}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn gate_is_symmetric(a in 0.01f64..5.0, b in 0.01f64..5.0, s0 in 0.1f64..3.0) {
            prop_assert_eq!(htype_gate(a, b, s0), htype_gate(b, a, -s0));
        }
    }
}

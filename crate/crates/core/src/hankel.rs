//! Hankel transform of order `α`, Gaussian decay fits and the Hardy gate.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::grid::RadialProfile;
use crate::quad::Rule;
use crate::real::{lit, re, to_f64, Real};
use crate::specfun::bessel_j_tilde;

/// Tail ratio `|F(r_max)| / max|F|` above which a transform warns.
pub const TRUNCATION_RATIO: f64 = 1e-12;

/// Absolute tolerance on `ab` when classifying against `1/4`.
pub const HARDY_TOL: f64 = 1e-9;

const GRADING_LEVELS: usize = 12;
const GRADING_RATIO: f64 = 0.15;

/// Minimum number of samples a decay fit accepts.
pub const MIN_FIT_NODES: usize = 8;

/// Quadrature for `∫₀^{r_max} F(r) J_α(rs)/(rs)^α r^{2α+1} dr`; the weights
/// already contain the measure `r^{2α+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelPlan<T: Real> {
    alpha: T,
    r_nodes: Vec<T>,
    r_weights: Vec<T>,
    r_max: T,
}

impl<T: Real> HankelPlan<T> {
    /// Composite Gauss-Legendre on `[0, r_max]` (16 nodes per panel) with
    /// panels no wider than the half period `π / s_max` and no wider than 1.
    /// When `2α+1` is not an integer the first panel is graded geometrically
    /// towards the origin, where the measure is not smooth.
    pub fn new(alpha: T, r_max: T, s_max: T) -> Result<Self> {
        check_alpha(alpha)?;
        if !(r_max > T::zero()) || !(s_max >= T::zero()) {
            return Err(Error::InvalidArgument("need r_max > 0 and s_max >= 0".into()));
        }
        let mut width = T::one();
        if s_max > T::zero() {
            width = width.min(T::PI() / s_max);
        }
        let panels = to_f64(r_max / width).ceil().max(1.0) as usize;
        let h = r_max / crate::real::from_usize(panels);
        let mut breaks = vec![T::zero()];
        let p = to_f64(lit::<T>(2.0) * alpha + T::one());
        if (p - p.round()).abs() > 1e-12 {
            for k in (1..GRADING_LEVELS).rev() {
                breaks.push(h * lit::<T>(GRADING_RATIO).powi(k as i32));
            }
        }
        breaks.extend((1..=panels).map(|k| h * crate::real::from_usize(k)));
        Self::from_rule(alpha, Rule::from_breaks(&breaks, 16), r_max)
    }

    /// Uses a `dr` rule, multiplying in the measure.
    pub fn from_rule(alpha: T, rule: Rule<T>, r_max: T) -> Result<Self> {
        let p = lit::<T>(2.0) * alpha + T::one();
        let weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| w * r.powf(p))
            .collect();
        Self::from_parts(alpha, rule.nodes, weights, r_max)
    }

    /// Validated constructor from nodes and measure-weighted weights.
    pub fn from_parts(alpha: T, r_nodes: Vec<T>, r_weights: Vec<T>, r_max: T) -> Result<Self> {
        check_alpha(alpha)?;
        if r_nodes.len() != r_weights.len() {
            return Err(Error::DimensionMismatch(r_nodes.len(), r_weights.len()));
        }
        if r_nodes.is_empty()
            || r_nodes.iter().any(|&r| !(r > T::zero()) || r > r_max)
            || r_nodes.windows(2).any(|p| p[0] >= p[1])
        {
            return Err(Error::InvalidArgument(
                "nodes must be positive, increasing and within r_max".into(),
            ));
        }
        if r_weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        Ok(Self {
            alpha,
            r_nodes,
            r_weights,
            r_max,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn nodes(&self) -> &[T] {
        &self.r_nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.r_weights
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    /// Samples `f` on the plan's nodes with the matching measure exponent.
    pub fn sample<F: FnMut(T) -> Complex<T>>(&self, f: F) -> RadialProfile<T> {
        RadialProfile::from_fn(&self.r_nodes, self.measure_exponent(), f)
    }

    pub fn measure_exponent(&self) -> T {
        lit::<T>(2.0) * self.alpha + T::one()
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > lit(-0.5)) {
        return Err(Error::InvalidOrder(to_f64(alpha), -0.5));
    }
    Ok(())
}

/// A transformed profile together with any truncation warning.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelOutput<T: Real> {
    pub profile: RadialProfile<T>,
    pub warning: Option<Warning>,
}

/// `s ↦ Σ_j w_j F(r_j) J_α(r_j s)/(r_j s)^α`, evaluated as
/// `2^{-α} Σ_j w_j F(r_j) J̃_α(r_j s)` so that `s = 0` needs no limit.
pub fn hankel_transform<T: Real>(
    plan: &HankelPlan<T>,
    f: &RadialProfile<T>,
    s_grid: &[T],
) -> Result<HankelOutput<T>> {
    if f.r != plan.r_nodes {
        return Err(Error::GridMismatch("profile is not sampled on the plan nodes"));
    }
    if s_grid.iter().any(|&s| !(s >= T::zero())) {
        return Err(Error::InvalidArgument("s grid must be >= 0".into()));
    }
    let peak = f.max_abs();
    let tail = f.values.last().map_or(T::zero(), |v| v.norm());
    let warning = (peak > T::zero() && tail > peak * lit(TRUNCATION_RATIO))
        .then(|| Warning::Truncation(to_f64(tail / peak)));
    let scale = lit::<T>(2.0).powf(-plan.alpha);
    let values = s_grid
        .par_iter()
        .map(|&s| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for ((&r, &w), v) in plan.r_nodes.iter().zip(&plan.r_weights).zip(&f.values) {
                acc += *v * (w * bessel_j_tilde(plan.alpha, r * s)?);
            }
            Ok(acc * scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HankelOutput {
        profile: RadialProfile::new(s_grid.to_vec(), values, plan.measure_exponent())?,
        warning,
    })
}

/// Closed-form transform of `e^{-ζ r²}`, `Re ζ > 0`:
/// `(2ζ)^{-(α+1)} e^{-s²/(4ζ)}` with principal powers.
pub fn gaussian_transform<T: Real>(alpha: T, zeta: Complex<T>, s: T) -> Complex<T> {
    let two: T = lit(2.0);
    (zeta * two).powc(re(-(alpha + T::one()))) * (-(re(s * s)) / (zeta * lit::<T>(4.0))).exp()
}

/// Fitted Gaussian envelope `|F(r)| ≈ C e^{-a r²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T: Real> {
    pub c: T,
    pub a: T,
    /// RMS of `ln|F| - (ln C - a r²)` over the fitted nodes.
    pub residual: T,
    pub window: (T, T),
    pub nodes: usize,
}

/// Least-squares fit of `ln|F(r)|` against `(1, r²)` on the closed window;
/// the default window is the outer third of the profile's radii.
pub fn fit_gaussian_decay<T: Real>(f: &RadialProfile<T>, window: Option<(T, T)>) -> Result<DecayFit<T>> {
    let window = match window {
        Some(w) => w,
        None => {
            if f.is_empty() {
                return Err(Error::DegenerateFit("empty profile"));
            }
            let start = (2 * f.len()) / 3;
            (f.r[start.min(f.len() - 1)], f.r[f.len() - 1])
        }
    };
    if !(window.0 <= window.1) {
        return Err(Error::DegenerateFit("empty window"));
    }
    let pts: Vec<(f64, f64)> = f
        .r
        .iter()
        .zip(&f.values)
        .filter(|(&r, v)| r >= window.0 && r <= window.1 && v.norm() > T::zero() && v.norm().is_finite())
        .map(|(&r, v)| (to_f64(r * r), to_f64(v.norm().ln())))
        .collect();
    if pts.len() < MIN_FIT_NODES {
        return Err(Error::DegenerateFit("fewer than 8 usable nodes in window"));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("window holds a single radius"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if slope >= 0.0 {
        return Err(Error::DegenerateFit("no Gaussian decay (fitted rate <= 0)"));
    }
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(DecayFit {
        c: lit(intercept.exp()),
        a: lit(-slope),
        residual: lit((rss / m).sqrt()),
        window,
        nodes: pts.len(),
    })
}

/// Outcome of comparing a decay pair `(a, b)` with the threshold `ab = 1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HardyClass {
    /// `ab > 1/4`: only `F = 0` has both decays.
    Supercritical,
    /// `ab = 1/4`: `F` must be a multiple of `e^{-a r²}`.
    Critical,
    /// `ab < 1/4`: nonzero functions exist.
    Subcritical,
}

impl HardyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Supercritical => "supercritical",
            Self::Critical => "critical",
            Self::Subcritical => "subcritical",
        }
    }
}

impl std::fmt::Display for HardyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies `ab` against `1/4` with absolute tolerance [`HARDY_TOL`].
pub fn hardy_gate<T: Real>(a: T, b: T) -> HardyClass {
    let d = to_f64(a * b) - 0.25;
    if d.abs() <= HARDY_TOL {
        HardyClass::Critical
    } else if d > 0.0 {
        HardyClass::Supercritical
    } else {
        HardyClass::Subcritical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s_grid(max: f64, count: usize) -> Vec<f64> {
        (0..count).map(|k| max * k as f64 / (count - 1) as f64).collect()
    }

    /// Independent oracle: adaptive quadrature of the defining integral.
    fn oracle(alpha: f64, zeta: Complex<f64>, s: f64) -> Complex<f64> {
        adaptive(
            |r: f64| {
                (-zeta * r * r).exp()
                    * r.powf(2.0 * alpha + 1.0)
                    * 2f64.powf(-alpha)
                    * bessel_j_tilde(alpha, r * s).unwrap()
            },
            0.0,
            12.0,
            1e-14,
            1e-12,
        )
        .unwrap()
        .value
    }

    #[test]
    fn zero_maps_to_zero() {
        let plan = HankelPlan::new(0.5, 8.0, 5.0).unwrap();
        let f = plan.sample(|_| Complex::new(0.0, 0.0));
        let out = hankel_transform(&plan, &f, &s_grid(5.0, 11)).unwrap();
        assert!(out.profile.values.iter().all(|v| v.norm() == 0.0));
        assert!(out.warning.is_none());
    }

    #[test]
    fn gaussian_pair_matches_closed_form_and_oracle() {
        for &alpha in &[-0.25, 0.0, 0.5, 1.0, 2.5] {
            for &a in &[0.5, 1.0, 2.0] {
                let plan = HankelPlan::new(alpha, 10.0, 5.0).unwrap();
                let f = plan.sample(|r: f64| Complex::new((-a * r * r).exp(), 0.0));
                let grid = s_grid(5.0, 21);
                let out = hankel_transform(&plan, &f, &grid).unwrap();
                for (s, v) in grid.iter().zip(&out.profile.values) {
                    let exact = gaussian_transform(alpha, Complex::new(a, 0.0), *s);
                    let o = oracle(alpha, Complex::new(a, 0.0), *s);
                    assert!((o - exact).norm() <= 1e-6 * exact.norm(), "oracle {alpha} {a} {s}");
                    assert!((v - exact).norm() <= 1e-10 * exact.norm().max(1e-3), "{alpha} {a} {s}");
                }
            }
        }
    }

    #[test]
    fn complex_rate_uses_principal_powers() {
        let zeta = Complex::new(1.0, 1.0);
        let alpha = 0.5;
        let plan = HankelPlan::new(alpha, 8.0, 4.0).unwrap();
        let f = plan.sample(|r: f64| (-zeta * r * r).exp());
        let grid = s_grid(4.0, 9);
        let out = hankel_transform(&plan, &f, &grid).unwrap();
        for (s, v) in grid.iter().zip(&out.profile.values) {
            let exact = gaussian_transform(alpha, zeta, *s);
            let o = oracle(alpha, zeta, *s);
            assert!((o - exact).norm() <= 1e-6 * exact.norm());
            assert!((v - exact).norm() <= 1e-10);
        }
    }

    #[test]
    fn truncation_is_flagged() {
        let plan = HankelPlan::new(0.0, 2.0, 1.0).unwrap();
        let f = plan.sample(|r: f64| Complex::new((-r * r).exp(), 0.0));
        let out = hankel_transform(&plan, &f, &[0.0, 1.0]).unwrap();
        assert!(matches!(out.warning, Some(Warning::Truncation(x)) if x > 1e-3));
    }

    #[test]
    fn rejects_bad_order_and_grid() {
        assert!(matches!(HankelPlan::<f64>::new(-0.5, 8.0, 1.0), Err(Error::InvalidOrder(..))));
        let plan = HankelPlan::new(0.0, 8.0, 1.0).unwrap();
        let f = RadialProfile::from_real_fn(&[1.0, 2.0], 1.0, |r| r);
        assert!(matches!(hankel_transform(&plan, &f, &[1.0]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn self_reciprocal_gaussian() {
        for &alpha in &[0.0, 0.5, 1.5] {
            let plan = HankelPlan::new(alpha, 12.0, 12.0).unwrap();
            let f = plan.sample(|r: f64| Complex::new((-r * r / 2.0).exp(), 0.0));
            let once = hankel_transform(&plan, &f, plan.nodes()).unwrap().profile;
            let twice = hankel_transform(&plan, &once, plan.nodes()).unwrap().profile;
            assert!(twice.relative_linf_error(&f).unwrap() < 1e-5);
        }
    }

    #[test]
    fn fit_exact_log_quadratic() {
        let r: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
        let f = RadialProfile::from_real_fn(&r, 1.0, |r: f64| 3.0 * (-2.0 * r * r).exp());
        let fit = fit_gaussian_decay(&f, Some((0.0, 4.0))).unwrap();
        assert_relative_eq!(fit.c, 3.0, max_relative = 1e-12);
        assert_relative_eq!(fit.a, 2.0, max_relative = 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_with_polynomial_prefactor() {
        let r: Vec<f64> = (0..=60).map(|k| 0.1 * k as f64).collect();
        let f = RadialProfile::from_real_fn(&r, 1.0, |r: f64| r.powi(4) * (-2.0 * r * r).exp());
        let fit = fit_gaussian_decay(&f, Some((3.0, 6.0))).unwrap();
        // oracle: fit ln r⁴ - 2r² directly; slope is -2 + 4·cov(ln r, r²)/var(r²)
        let pts: Vec<(f64, f64)> = r.iter().filter(|&&x| (3.0..=6.0).contains(&x)).map(|&x| (x * x, 4.0 * x.ln())).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let b = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert_relative_eq!(fit.a, 2.0 - b, max_relative = 1e-10);
        assert!((1.9..=2.0).contains(&fit.a), "{}", fit.a);
    }

    #[test]
    fn fit_tolerates_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r: Vec<f64> = (0..=60).map(|k| 0.1 * k as f64).collect();
        let f = RadialProfile::from_real_fn(&r, 1.0, |r: f64| {
            (-1.5 * r * r).exp() * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))
        });
        let fit = fit_gaussian_decay(&f, None).unwrap();
        assert!((fit.a - 1.5).abs() < 0.03, "{}", fit.a);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let r: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let f = RadialProfile::from_real_fn(&r, 1.0, |r: f64| (-r * r).exp());
        assert!(matches!(fit_gaussian_decay(&f, None), Err(Error::DegenerateFit(_))));
        let r: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let f = RadialProfile::from_real_fn(&r, 1.0, |r: f64| (r * r).exp().min(1e300));
        assert!(fit_gaussian_decay(&f, Some((0.0, 10.0))).is_err());
    }

    #[test]
    fn gate_examples() {
        assert_eq!(hardy_gate(1.0, 1.0), HardyClass::Supercritical);
        assert_eq!(hardy_gate(1.0, 0.25), HardyClass::Critical);
        assert_eq!(hardy_gate(0.5, 0.25), HardyClass::Subcritical);
    }

    #[test]
    fn gaussian_self_consistency() {
        let a = 1.0;
        let plan = HankelPlan::new(0.0, 8.0, 6.0).unwrap();
        let f = plan.sample(|r: f64| Complex::new((-a * r * r).exp(), 0.0));
        let fa = fit_gaussian_decay(&f, Some((1.0, 4.0))).unwrap();
        let grid = s_grid(6.0, 61);
        let g = hankel_transform(&plan, &f, &grid).unwrap().profile;
        let fb = fit_gaussian_decay(&g, Some((2.0, 6.0))).unwrap();
        assert!((fa.a * fb.a - 0.25).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn linearity(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, alpha in 0.0f64..2.0) {
            let plan = HankelPlan::new(alpha, 8.0, 4.0).unwrap();
            let f1 = plan.sample(|r: f64| Complex::new((-r * r).exp(), 0.0));
            let f2 = plan.sample(|r: f64| Complex::new(0.0, r * (-2.0 * r * r).exp()));
            let sum = plan.sample(|r: f64| Complex::new(c1 * (-r * r).exp(), c2 * r * (-2.0 * r * r).exp()));
            let grid = s_grid(4.0, 9);
            let t1 = hankel_transform(&plan, &f1, &grid).unwrap().profile;
            let t2 = hankel_transform(&plan, &f2, &grid).unwrap().profile;
            let ts = hankel_transform(&plan, &sum, &grid).unwrap().profile;
            for k in 0..grid.len() {
                let expect = t1.values[k] * c1 + t2.values[k] * c2;
                let scale = t1.values[k].norm() * c1.abs() + t2.values[k].norm() * c2.abs();
                prop_assert!((ts.values[k] - expect).norm() <= 1e-12 * scale.max(1e-300));
            }
        }

        #[test]
        fn gaussian_pair_is_critical(a in 0.1f64..10.0) {
            prop_assert_eq!(hardy_gate(a, 1.0 / (4.0 * a)), HardyClass::Critical);
        }
    }
}

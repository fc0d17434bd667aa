//! Named verification suites. Each runs fixed cross-checks between
//! independent computations and records the error against its tolerance.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{PolarGrid, RadialProfile, SpectralSlice};
use crate::hankel::{fit_gaussian_decay, gaussian_transform, hankel_transform, hardy_gate, HankelPlan, HardyClass};
use crate::heisenberg::{heat_kernel, heat_kernel_lambda, ComplexTime, HeisenbergPoint};
use crate::hermite::{hermite_boundary_case, hermite_evolve, hermite_function, hermite_gate, CartesianGrid, GridFunction};
use crate::htype::{htype_heat_kernel, partial_radon, HTypePoint, RadonRule};
use crate::propagator::{
    equality_case_profile, kernel_k, lambda_window, hankel_identity_gaussian, theorem34_pair, uniqueness_gate,
    GateParams, Sector,
};
use crate::quad::Rule;
use crate::specfun::{hille_hardy, hille_hardy_abel};
use crate::spherical::build_basis;
use crate::twisted::{hecke_bochner_check, twisted_convolution};

/// One recorded comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub params: Vec<(String, f64)>,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
    pub ms: f64,
}

impl Check {
    fn new(id: impl Into<String>, params: &[(&str, f64)], error: f64, tol: f64, ms: f64) -> Self {
        Self {
            id: id.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            error,
            tol,
            pass: error <= tol,
            ms,
        }
    }
}

/// Runs `f` and records its error.
fn timed(id: &str, params: &[(&str, f64)], tol: f64, f: impl FnOnce() -> Result<f64>) -> Result<Check> {
    let start = Instant::now();
    let error = f()?;
    Ok(Check::new(id, params, error, tol, elapsed_ms(start)))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// `0` when the condition holds, `1` otherwise.
fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Hankel,
    Hardy,
    HilleHardy,
    Semigroup,
    Heat,
    HeckeBochner,
    HankelIdentity,
    Gate,
    Equality,
    Hermite,
    Radon,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Hankel,
        Suite::Hardy,
        Suite::HilleHardy,
        Suite::Semigroup,
        Suite::Heat,
        Suite::HeckeBochner,
        Suite::HankelIdentity,
        Suite::Gate,
        Suite::Equality,
        Suite::Hermite,
        Suite::Radon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hankel => "hankel",
            Suite::Hardy => "hardy",
            Suite::HilleHardy => "hille-hardy",
            Suite::Semigroup => "semigroup",
            Suite::Heat => "heat",
            Suite::HeckeBochner => "hecke-bochner",
            Suite::HankelIdentity => "theorem34",
            Suite::Gate => "gate",
            Suite::Equality => "equality",
            Suite::Hermite => "hermite",
            Suite::Radon => "radon",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Runs every check; `seed` drives the randomly sampled ones.
    pub fn run(self, seed: u64) -> Result<Vec<Check>> {
        match self {
            Suite::Hankel => hankel_suite(),
            Suite::Hardy => hardy_suite(),
            Suite::HilleHardy => hille_hardy_suite(seed),
            Suite::Semigroup => semigroup_suite(),
            Suite::Heat => heat_suite(),
            Suite::HeckeBochner => hecke_bochner_suite(),
            Suite::HankelIdentity => hankel_identity_suite(),
            Suite::Gate => gate_suite(seed),
            Suite::Equality => equality_suite(),
            Suite::Hermite => hermite_suite(),
            Suite::Radon => radon_suite(),
        }
    }
}

fn hankel_suite() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut out = Vec::new();
    let s_grid: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
    for &alpha in &[0.0, 0.5, 1.0, 2.0] {
        for &a in &[0.5, 1.0, 2.0] {
            out.push(timed("hankel/gaussian", &[("alpha", alpha), ("a", a)], 1e-6, || {
                let plan = HankelPlan::new(alpha, (40.0 / a).sqrt(), 5.0)?;
                let f = plan.sample(|r| Complex::new((-a * r * r).exp(), 0.0));
                let g = hankel_transform(&plan, &f, &s_grid)?.profile;
                let exact = RadialProfile::from_fn(&s_grid, 2.0 * alpha + 1.0, |s| {
                    gaussian_transform(alpha, Complex::new(a, 0.0), s)
                });
                pointwise_relative(&g, &exact)
            })?);
        }
    }
    out.push(Check::new("hankel/runtime", &[], elapsed_ms(start), 2000.0, elapsed_ms(start)));
    Ok(out)
}

/// `max_j |g_j - e_j| / |e_j|`.
fn pointwise_relative(g: &RadialProfile<f64>, exact: &RadialProfile<f64>) -> Result<f64> {
    Ok(g.values
        .iter()
        .zip(&exact.values)
        .map(|(x, e)| (x - e).norm() / e.norm())
        .fold(0.0, f64::max))
}

fn hardy_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &a in &[0.1, 0.1f64.sqrt(), 1.0, 10f64.sqrt(), 10.0] {
        out.push(timed("hardy/critical-product", &[("a", a)], 1e-6, || {
            let r_max = (36.0 / a).sqrt();
            let s_max = (120.0 * a).sqrt();
            let plan = HankelPlan::new(0.0, r_max, s_max)?;
            let f = plan.sample(|r| Complex::new((-a * r * r).exp(), 0.0));
            let fa = fit_gaussian_decay(&f, Some((0.2 * r_max, 0.6 * r_max)))?;
            let s_grid: Vec<f64> = (0..=60).map(|k| s_max * k as f64 / 60.0).collect();
            let g = hankel_transform(&plan, &f, &s_grid)?.profile;
            let fb = fit_gaussian_decay(&g, Some((0.2 * s_max, 0.6 * s_max)))?;
            Ok((fa.a * fb.a - 0.25).abs())
        })?);
    }
    out.push(timed("hardy/lattice", &[], 0.0, || {
        // dyadic rates make ab exact, so the expected class is unambiguous
        let mut wrong = 0;
        for i in 0..7 {
            for j in 0..7 {
                let (a, b) = (0.5 * 2f64.powi(i - 3), 0.5 * 2f64.powi(j - 3));
                let expected = match (i + j).cmp(&6) {
                    std::cmp::Ordering::Greater => HardyClass::Supercritical,
                    std::cmp::Ordering::Equal => HardyClass::Critical,
                    std::cmp::Ordering::Less => HardyClass::Subcritical,
                };
                wrong += usize::from(hardy_gate(a, b) != expected);
            }
        }
        Ok(wrong as f64)
    })?);
    Ok(out)
}

/// Near w = 1 the damped series converges like a slowly oscillating tail.
const ABEL_TERMS: usize = 2000;

fn hille_hardy_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
    let ws = [
        Complex::new(0.7, 0.0),
        Complex::new(-0.7, 0.0),
        Complex::from_polar(0.7, 1.0),
        Complex::from_polar(0.7, -2.5),
        Complex::new(0.3, 0.2),
    ];
    for &alpha in &[0.0, 1.0, 2.0] {
        out.push(timed("hille-hardy/disk", &[("alpha", alpha), ("radius", 0.7)], 1e-6, || {
            let mut worst = 0.0f64;
            for &x in &xs {
                for &y in &xs {
                    for &w in &ws {
                        worst = worst.max(hille_hardy(alpha, x, y, w, 400)?.relative_gap());
                    }
                }
            }
            Ok(worst)
        })?);
        out.push(timed("hille-hardy/abel", &[("alpha", alpha), ("rho", 1.0 - 1e-6), ("terms", ABEL_TERMS as f64)], 1e-3, || {
            let mut worst = 0.0f64;
            for &(x, y) in &[(0.5, 0.5), (1.0, 2.0), (3.0, 0.5)] {
                for &theta in &[0.5, 1.0, -2.0] {
                    worst = worst.max(hille_hardy_abel(alpha, x, y, theta, ABEL_TERMS)?.relative_gap());
                }
            }
            Ok(worst)
        })?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.push(timed("hille-hardy/random", &[("seed", seed as f64), ("samples", 20.0)], 1e-6, || {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let alpha = rng.gen_range(0..3) as f64;
            let (x, y) = (rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0));
            let w = Complex::from_polar(rng.gen_range(0.0..0.7), rng.gen_range(-PI..PI));
            worst = worst.max(hille_hardy(alpha, x, y, w, 400)?.relative_gap());
        }
        Ok(worst)
    })?);
    out.push(timed("hille-hardy/kernel-k", &[("lambda", 1.0), ("s0", 1.0), ("r", 1.0), ("t", 1.0)], 1e-4, || {
        Ok(kernel_k(1.0, 1.0, 1.0, 1.0, Sector { n: 1, p: 0, q: 0 }, 400)?.relative_gap())
    })?);
    Ok(out)
}

fn heat_slice(grid: &Arc<PolarGrid<f64>>, s: f64, lambda: f64) -> SpectralSlice<f64> {
    SpectralSlice::from_radial(lambda, grid.clone(), |r| {
        heat_kernel_lambda(ComplexTime::heat(s), lambda, r, 1).unwrap_or(Complex::new(f64::NAN, 0.0))
    })
}

fn semigroup_suite() -> Result<Vec<Check>> {
    let grid = Arc::new(PolarGrid::default_plane());
    let start = Instant::now();
    let half = heat_slice(&grid, 0.5, 1.0);
    let out = twisted_convolution(&half, &half)?;
    let err = out.value.relative_linf_error_within(&heat_slice(&grid, 1.0, 1.0), 3.0)?;
    let ms = elapsed_ms(start);
    let params = [("n", 1.0), ("lambda", 1.0), ("radius", 3.0)];
    Ok(vec![
        Check::new("semigroup/q-half-squared", &params, err, 1e-3, ms),
        Check::new("semigroup/runtime", &[("radial", 128.0), ("angles", 64.0)], ms, 30_000.0, ms),
    ])
}

fn heat_suite() -> Result<Vec<Check>> {
    let point = |x: f64, t: f64| HeisenbergPoint::new(vec![Complex::new(x, 0.0)], t);
    let mut out = Vec::new();
    for &(x, lambda) in &[(1.0, 1.0), (0.5, 2.0)] {
        out.push(timed("heat/t-fourier", &[("s", 1.0), ("r", x), ("lambda", lambda)], 1e-6, || {
            let zeta = ComplexTime::heat(1.0);
            // q_s is even in t
            let rule = Rule::composite(0.0, 40.0, 80, 12);
            let mut failure = None;
            let ft = 2.0
                * rule.integrate(|t| match point(x, t).and_then(|p| heat_kernel(zeta, &p)) {
                    Ok(v) => (lambda * t).cos() * v.re,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                });
            if let Some(e) = failure {
                return Err(e);
            }
            let slice = heat_kernel_lambda(zeta, lambda, x, 1)?.re;
            Ok((ft - slice).abs() / slice.abs())
        })?);
    }
    out.push(timed("heat/scaling", &[("r", 2.0)], 1e-8, || {
        let r = 2.0;
        let mut worst = 0.0f64;
        for &(x, t) in &[(0.0, 0.0), (1.0, 0.5), (2.0, -3.0)] {
            let lhs = heat_kernel(ComplexTime::heat(r * r), &point(x, t)?)?.re;
            let rhs = r.powi(-4) * heat_kernel(ComplexTime::heat(1.0), &point(x / r, t / (r * r))?)?.re;
            worst = worst.max((lhs - rhs).abs() / rhs.abs());
        }
        Ok(worst)
    })?);
    Ok(out)
}

fn hecke_bochner_suite() -> Result<Vec<Check>> {
    let grid = Arc::new(PolarGrid::default_plane());
    let g = RadialProfile::from_real_fn(grid.radii(), 1.0, |r: f64| (-r * r).exp());
    let z = [Complex::new(0.6, 0.3)];
    let mut out = Vec::new();
    for &(p, q) in &[(0u32, 0u32), (1, 0), (0, 1)] {
        let basis = build_basis(1, p, q)?;
        for k in [p as usize, p as usize + 1] {
            let params = [("p", p as f64), ("q", q as f64), ("k", k as f64), ("lambda", 1.0)];
            out.push(timed("hecke-bochner/identity", &params, 1e-3, || {
                let hb = hecke_bochner_check(&g, &basis, 1, k, 1.0, grid.clone(), &z)?;
                Ok((hb.lhs - hb.rhs).norm() / hb.rhs.norm())
            })?);
        }
    }
    let basis = build_basis(1, 1, 0)?;
    out.push(timed("hecke-bochner/below-shift", &[("p", 1.0), ("q", 0.0), ("k", 0.0)], 1e-6, || {
        Ok(hecke_bochner_check(&g, &basis, 1, 0, 1.0, grid.clone(), &z)?.lhs.norm())
    })?);
    Ok(out)
}

fn hankel_identity_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let radii: Vec<f64> = (0..=40).map(|k| 0.2 + 2.8 * k as f64 / 40.0).collect();
    for &(lambda, s0) in &[(1.0, 1.0), (-1.0, 1.0), (0.7, -2.0), (2.0, 0.3)] {
        let params = [("a", 1.0), ("eps", 1e-3), ("lambda", lambda), ("s0", s0)];
        out.push(timed("theorem34/gaussian-ratio", &params, 1e-3, || {
            Ok(hankel_identity_gaussian(1.0, 1e-3, lambda, s0, 1, &radii)?.ratio()?.relative_std)
        })?);
    }
    let grid = Arc::new(PolarGrid::default_plane());
    let coarse: Vec<f64> = (0..=10).map(|k| 0.2 + 0.28 * k as f64).collect();
    out.push(timed("theorem34/grid-ratio", &[("p", 1.0), ("q", 0.0), ("lambda", 1.0), ("s0", 1.0)], 1e-2, || {
        let f = SpectralSlice::from_fn(1.0, grid.clone(), |z: &[Complex<f64>]| z[0] * (-z[0].norm_sqr()).exp());
        let basis = build_basis(1, 1, 0)?;
        Ok(theorem34_pair(&f, &basis, 1, 1.0, &coarse)?.ratio()?.relative_std)
    })?);
    out.push(timed("theorem34/grid-ratio", &[("p", 0.0), ("q", 0.0), ("lambda", 1.0), ("s0", 1.0)], 1e-2, || {
        let f = heat_slice(&grid, 1.0 + 1e-3, 1.0);
        let basis = build_basis(1, 0, 0)?;
        Ok(theorem34_pair(&f, &basis, 1, 1.0, &coarse)?.ratio()?.relative_std)
    })?);
    out.push(timed("theorem34/exceptional-lambda", &[("lambda", PI), ("s0", 1.0)], 0.0, || {
        let rejected = matches!(
            hankel_identity_gaussian(1.0, 1e-3, PI, 1.0, 1, &radii),
            Err(Error::ExceptionalLambda(_))
        );
        Ok(flag(rejected))
    })?);
    Ok(out)
}

fn gate_suite(seed: u64) -> Result<Vec<Check>> {
    let vals = [0.5, 1.0, 2.0];
    let mut out = Vec::new();
    out.push(timed("gate/worked-example", &[("a", 1.0), ("b", 1.0), ("s0", 2.0), ("eps", 0.05), ("lambda", 0.1)], 0.0, || {
        Ok(flag(uniqueness_gate(GateParams::new(1.0, 1.0, 2.0, 0.05, 0.1)?).supercritical))
    })?);
    out.push(timed("gate/window-iff-ab-below-s0-squared", &[("lattice", 27.0)], 0.0, || {
        let mut wrong = 0usize;
        for &a in &vals {
            for &b in &vals {
                for &s0 in &vals {
                    let ok = if a * b < s0 * s0 {
                        match lambda_window(a, b, s0, 0.0)? {
                            Some(delta) => {
                                delta > 0.0 && uniqueness_gate(GateParams::new(a, b, s0, 0.0, 0.5 * delta)?).supercritical
                            }
                            None => false,
                        }
                    } else {
                        // no λ > 0 may give a positive margin
                        lambda_window(a, b, s0, 0.0)?.is_none()
                            && (1..=400).all(|j| {
                                let lambda = 10.0 * PI / s0 * j as f64 / 400.0;
                                GateParams::new(a, b, s0, 0.0, lambda)
                                    .map(|gp| uniqueness_gate(gp).margin <= 0.0)
                                    .unwrap_or(false)
                            })
                    };
                    wrong += usize::from(!ok);
                }
            }
        }
        Ok(wrong as f64)
    })?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.push(timed("gate/monotone-random", &[("seed", seed as f64), ("samples", 200.0)], 0.0, || {
        let mut wrong = 0usize;
        for _ in 0..200 {
            let (a, b, s0) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.2..3.0));
            let eps = rng.gen_range(0.0..0.5);
            let lambda = rng.gen_range(0.01..0.97) * PI / s0;
            let base = uniqueness_gate(GateParams::new(a, b, s0, eps, lambda)?).margin;
            let bumped = [
                GateParams::new(a + 0.1, b, s0, eps, lambda)?,
                GateParams::new(a, b + 0.1, s0, eps, lambda)?,
                GateParams::new(a, b, s0, eps + 0.1, lambda)?,
                GateParams::new(a, b, s0, eps, lambda + 0.01 * PI / s0)?,
            ];
            wrong += bumped.iter().filter(|gp| uniqueness_gate(**gp).margin >= base).count();
        }
        Ok(wrong as f64)
    })?);
    Ok(out)
}

fn equality_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    out.push(timed("equality/tanh-relation", &[("a", 1.0), ("lambda", 1.0), ("s0", 1.0), ("eps", 1e-3)], 5e-3, || {
        Ok(equality_case_profile(1.0, 1.0, 1.0)?.tanh_residual)
    })?);
    out.push(timed("equality/b-decreasing-in-a", &[("lambda", 1.0), ("s0", 1.0)], 0.0, || {
        let bs = [0.5, 1.0, 2.0]
            .iter()
            .map(|&a| Ok(equality_case_profile(a, 1.0, 1.0)?.fitted_b))
            .collect::<Result<Vec<f64>>>()?;
        Ok(flag(bs[0] > bs[1] && bs[1] > bs[2]))
    })?);
    Ok(out)
}

fn hermite_suite() -> Result<Vec<Check>> {
    let grid = CartesianGrid::default_line();
    let line = |f: &dyn Fn(f64) -> f64| GridFunction::from_fn(grid.clone(), |x| Complex::new(f(x[0]), 0.0));
    let mut out = Vec::new();
    let s = 0.7;
    for k in 0..3 {
        out.push(timed("hermite/eigenphase", &[("k", k as f64), ("s", s)], 1e-6, || {
            let h = line(&|x| hermite_function(k, x));
            let u = hermite_evolve(&h, s)?.value;
            let phase = Complex::new(0.0, -((2 * k + 1) as f64) * s).exp();
            Ok(u.values
                .iter()
                .zip(&h.values)
                .filter(|(_, e)| e.norm() > 1e-3)
                .map(|(a, e)| (a / (e * phase) - 1.0).norm())
                .fold(0.0, f64::max))
        })?);
    }
    out.push(timed("hermite/fourier", &[("s", PI / 4.0)], 1e-6, || {
        let f = line(&|x| (-x * x / 2.0).exp());
        let u = hermite_evolve(&f, PI / 4.0)?.value;
        let rot = Complex::new(0.0, PI / 4.0).exp();
        let ft = GridFunction::new(grid.clone(), u.values.iter().map(|v| v * rot).collect())?;
        ft.relative_linf_error(&f)
    })?);
    out.push(timed("hermite/unitarity", &[("s", s)], 1e-6, || {
        let f = line(&|x| (x + 0.5) * (-(x - 0.3).powi(2)).exp());
        let u = hermite_evolve(&f, s)?.value;
        Ok((u.l2_norm() / f.l2_norm() - 1.0).abs())
    })?);
    out.push(timed("hermite/boundary", &[("a", 1.0), ("s0", PI / 8.0)], 1e-3, || {
        Ok((hermite_boundary_case(1.0, PI / 8.0, true)?.product - 0.25).abs())
    })?);
    out.push(timed("hermite/gate-example", &[("a", 1.0), ("b", 1.0), ("s0", PI / 4.0)], 1e-14, || {
        Ok((hermite_gate(1.0, 1.0, PI / 4.0).margin - 0.75).abs())
    })?);
    Ok(out)
}

fn radon_suite() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut out = Vec::new();
    let point = |x: f64, t: f64| HeisenbergPoint::new(vec![Complex::new(x, 0.0)], t);
    out.push(timed("radon/heat-kernel", &[("n", 1.0), ("k", 2.0), ("s", 1.0), ("grid", 25.0)], 1e-2, || {
        let targets = (0..5)
            .flat_map(|i| (0..5).map(move |j| point(0.5 * i as f64, 0.5 * j as f64)))
            .collect::<Result<Vec<_>>>()?;
        let f = |p: &HTypePoint<f64>| htype_heat_kernel(1.0, p);
        let radon = partial_radon(f, &[0.0, 1.0], &targets, &RadonRule::default())?.value;
        let mut worst = 0.0f64;
        for (p, v) in targets.iter().zip(&radon) {
            let q = heat_kernel(ComplexTime::heat(1.0), p)?.re;
            worst = worst.max((v - q).abs() / q.abs());
        }
        Ok(worst)
    })?);
    out.push(timed("radon/center-dimension-one", &[("n", 1.0), ("k", 1.0), ("s", 1.0)], 1e-5, || {
        let mut worst = 0.0f64;
        for &(x, t) in &[(1.0, 0.5), (0.0, 0.0), (2.0, -1.5)] {
            let h = htype_heat_kernel(1.0, &HTypePoint::new(vec![x, 0.0], vec![t])?)?;
            let q = heat_kernel(ComplexTime::heat(1.0), &point(x, t)?)?.re;
            worst = worst.max((h - q).abs() / q.abs());
        }
        Ok(worst)
    })?);
    let ms = elapsed_ms(start);
    out.push(Check::new("radon/runtime", &[], ms, 60_000.0, ms));
    Ok(out)
}

//! Finite-volume spectral data against Schur-function and DOS routes.

use cmv_core::boundary::{cauchy_transform, herglotz_eval, RadialLadder};
use cmv_core::cmv::FiniteCmv;
use cmv_core::cocycle::{zero_set, ZeroSetParams};
use cmv_core::dos::{
    density_of_states, dos_average_check, pooled_counting_measure, rho_infinity, ThoulessPotential,
};
use cmv_core::ergodic::{ErgodicFamily, OmegaState, SamplingPlan};
use cmv_core::exec::Sequential;
use cmv_core::schur::{caratheodory_f, green_from_schur, Depth};
use cmv_core::Complex64;
use std::f64::consts::{PI, TAU};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn minus_one() -> Complex64 {
    c(-1.0, 0.0)
}

fn periodic() -> ErgodicFamily {
    ErgodicFamily::periodic(vec![c(0.3, 0.0), c(0.0, -0.4)]).unwrap()
}

fn constant_half() -> ErgodicFamily {
    ErgodicFamily::constant(c(0.5, 0.0)).unwrap()
}

/// Taylor coefficients `a_1..a_k` of `f` at 0 by the trapezoid rule on a
/// circle of radius `radius`.
fn taylor(f: impl Fn(Complex64) -> Complex64, radius: f64, k: usize) -> Vec<Complex64> {
    let m = 256;
    let samples: Vec<(f64, Complex64)> = (0..m)
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            (t, f(Complex64::from_polar(radius, t)))
        })
        .collect();
    (1..=k)
        .map(|n| {
            let sum = samples
                .iter()
                .fold(c(0.0, 0.0), |acc, (t, v)| acc + v * Complex64::from_polar(1.0, -(n as f64) * t));
            sum / (m as f64 * radius.powi(n as i32))
        })
        .collect()
}

#[test]
fn site_moments_match_schur_taylor_coefficients() {
    // F(z) = 1 + 2 Σ_k z^k ∫ τ̄^k dμ_0.
    let fam = periodic();
    let state = OmegaState::Offset(0);
    let spec = FiniteCmv::new(&fam, &state, 200, minus_one(), minus_one())
        .unwrap()
        .eigen()
        .unwrap();
    let mu = spec.site_spectral_measure(0).unwrap();
    let coeffs = taylor(|z| caratheodory_f(&fam, &state, z, Depth::default()).unwrap(), 0.3, 5);
    for (k, a) in coeffs.iter().enumerate() {
        let moment = mu.moment(-(k as i32 + 1));
        assert!((a / 2.0 - moment).norm() < 1e-4, "moment {}: {} vs {}", k + 1, a / 2.0, moment);
    }
}

#[test]
fn half_line_moments_are_schur_parameters() {
    // ∫ τ̄ dμ = α_0 and ∫ τ̄² dμ = α_0² + α_1 ρ_0² for the half-line measure.
    let fam = periodic();
    let state = OmegaState::Offset(1);
    let (a0, a1) = (fam.alpha_at(&state, 0), fam.alpha_at(&state, 1));
    let spec = FiniteCmv::half_line(&fam, &state, 12, minus_one())
        .unwrap()
        .eigen()
        .unwrap();
    let mu = spec.site_spectral_measure(0).unwrap();
    assert!((mu.moment(-1) - a0).norm() < 1e-12);
    assert!((mu.moment(-2) - (a0 * a0 + a1 * (1.0 - a0.norm_sqr()))).norm() < 1e-12);
}

#[test]
fn green_routes_agree() {
    let z = c(0.4, 0.0);
    for fam in [constant_half(), periodic()] {
        let state = fam.base_state();
        let spec = FiniteCmv::new(&fam, &state, 200, minus_one(), minus_one())
            .unwrap()
            .eigen()
            .unwrap();
        let schur = green_from_schur(&fam, &state, z, Depth::default()).unwrap();
        let finite = spec.truncated_green(z).unwrap();
        assert!((schur - finite).norm() <= 1e-6, "{schur} vs {finite}");
    }
}

#[test]
fn green_converges_in_volume() {
    let fam = constant_half();
    let z = c(0.4, 0.0);
    let g = |n| {
        FiniteCmv::new(&fam, &fam.base_state(), n, minus_one(), minus_one())
            .unwrap()
            .eigen()
            .unwrap()
            .truncated_green(z)
            .unwrap()
    };
    assert!((g(100) - g(200)).norm() <= 1e-6);
}

#[test]
fn finite_caratheodory_is_one_plus_two_z_green() {
    let fam = periodic();
    let spec = FiniteCmv::new(&fam, &fam.base_state(), 30, minus_one(), minus_one())
        .unwrap()
        .eigen()
        .unwrap();
    let mu = spec.site_spectral_measure(0).unwrap();
    for z in [c(0.4, 0.0), c(-0.2, 0.5), c(0.0, -0.7)] {
        let from_green = 1.0 + 2.0 * z * spec.green(0, z).unwrap();
        assert!((from_green - herglotz_eval(&mu, z).unwrap()).norm() <= 1e-10);
        assert!((from_green - spec.caratheodory(0, z).unwrap()).norm() <= 1e-10);
    }
}

#[test]
fn periodic_dos_has_no_large_atoms_and_converges() {
    let fam = periodic();
    let plan = SamplingPlan::ExactPeriodic;
    let n = 200;
    let dos = density_of_states(&fam, &plan, &Sequential, n, minus_one()).unwrap();
    assert!((dos.measure.total_mass() - 1.0).abs() <= 1e-12);
    assert!(dos.measure.max_atom() <= 2.0 / (2 * n + 1) as f64);

    let distances: Vec<f64> = [50usize, 100, 200]
        .iter()
        .map(|&n| {
            let a = pooled_counting_measure(&fam, &plan, &Sequential, n, minus_one()).unwrap();
            let b = pooled_counting_measure(&fam, &plan, &Sequential, 2 * n, minus_one()).unwrap();
            a.kolmogorov_distance(&b)
        })
        .collect();
    assert!(distances.windows(2).all(|w| w[1] < w[0]), "{distances:?}");
}

#[test]
fn dos_is_robust_to_boundary_values() {
    let fam = periodic();
    let plan = SamplingPlan::ExactPeriodic;
    let n = 200;
    let minus = pooled_counting_measure(&fam, &plan, &Sequential, n, minus_one()).unwrap();
    for beta in [c(0.0, 1.0), c(1.0, 0.0)] {
        let other = pooled_counting_measure(&fam, &plan, &Sequential, n, beta).unwrap();
        assert!(minus.kolmogorov_distance(&other) <= 5.0 / n as f64);
    }
}

#[test]
fn periodic_dos_lives_on_the_zero_set() {
    let fam = periodic();
    let plan = SamplingPlan::ExactPeriodic;
    let params = ZeroSetParams {
        grid: 256,
        margin: 0,
        ..ZeroSetParams::default()
    };
    let arcs = zero_set(&fam, &plan, &Sequential, &params).unwrap();
    assert_eq!(arcs.raw_arcs.len(), 2);
    let dos = pooled_counting_measure(&fam, &plan, &Sequential, 200, c(1.0, 0.0)).unwrap();
    let cell = arcs.cell();
    let outside: Vec<f64> = dos
        .atoms()
        .iter()
        .filter(|a| {
            !arcs
                .raw_arcs
                .iter()
                .any(|arc| arc.contains(a.angle) || cmv_core::angle::circle_distance(a.angle, arc.lo) < cell || cmv_core::angle::circle_distance(a.angle, arc.hi) < cell)
        })
        .map(|a| a.angle)
        .collect();
    // β = +1 still leaves at most one boundary state per cut and sample.
    assert!(outside.len() <= 4, "{outside:?}");
    assert!(dos.mass_in_arcs(&arcs.raw_arcs) >= 1.0 - 4.0 / 401.0 - 1e-12);
}

#[test]
fn constant_band_matches_eigenvalue_support() {
    let fam = constant_half();
    let plan = SamplingPlan::ExactPeriodic;
    let params = ZeroSetParams {
        grid: 256,
        margin: 0,
        ..ZeroSetParams::default()
    };
    let arcs = zero_set(&fam, &plan, &Sequential, &params).unwrap();
    let band = arcs.raw_arcs[0];
    let phases: Vec<f64> = FiniteCmv::new(&fam, &fam.base_state(), 400, c(1.0, 0.0), c(1.0, 0.0))
        .unwrap()
        .counting_measure()
        .unwrap()
        .atoms()
        .iter()
        .map(|a| a.angle)
        .collect();
    let lo = phases.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = phases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((band.lo - lo).abs() <= arcs.cell(), "{} vs {lo}", band.lo);
    assert!((band.hi - hi).abs() <= arcs.cell(), "{} vs {hi}", band.hi);
    assert!(((band.lo + band.hi) / 2.0 - PI).abs() < 1e-6);
}

#[test]
fn averaged_green_on_a_quiet_point() {
    let fam = periodic();
    let pairs = dos_average_check(&fam, &SamplingPlan::ExactPeriodic, &Sequential, 200, minus_one(), &[c(0.0, 0.3)])
        .unwrap();
    assert!(pairs[0].discrepancy() <= 1e-3, "{}", pairs[0].discrepancy());
}

#[test]
fn averaged_green_gap_shrinks_like_inverse_volume() {
    // The site-0 average and the counting-measure transform differ by the
    // window-edge contribution, which is O(1/n).
    let fam = constant_half();
    let z = c(0.4, 0.0);
    let gap = |n| {
        dos_average_check(&fam, &SamplingPlan::ExactPeriodic, &Sequential, n, minus_one(), &[z]).unwrap()[0]
            .discrepancy()
    };
    let (small, large) = (gap(100), gap(200));
    assert!(large < small);
    assert!((small * 100.0 / (large * 200.0) - 1.0).abs() < 0.1, "{small} {large}");
}

#[test]
fn trace_average_of_green_is_the_counting_transform() {
    let fam = constant_half();
    let n = 100;
    let spec = FiniteCmv::new(&fam, &fam.base_state(), n, minus_one(), minus_one())
        .unwrap()
        .eigen()
        .unwrap();
    let z = c(0.4, 0.0);
    let mean = (-(n as i64)..=n as i64)
        .map(|j| spec.green(j, z).unwrap())
        .fold(c(0.0, 0.0), |acc, g| acc + g)
        / (2 * n + 1) as f64;
    let transform = cauchy_transform(&spec.counting_measure(), z);
    assert!((mean - transform).norm() <= 1e-12);
}

#[test]
fn k_ac_vanishes_in_a_periodic_gap() {
    let fam = periodic();
    let plan = SamplingPlan::ExactPeriodic;
    let dos = pooled_counting_measure(&fam, &plan, &Sequential, 820, minus_one()).unwrap();
    let pot = ThoulessPotential::new(dos, rho_infinity(&fam, &plan, &Sequential, 1000).unwrap()).unwrap();
    let ladder = RadialLadder::default();
    let value = pot.k_ac(PI, &ladder).unwrap();
    assert!(value.value.abs() <= 1e-2, "{value:?}");
    let band = pot.k_ac(1.5, &ladder).unwrap();
    assert!(band.value > 0.1);
}

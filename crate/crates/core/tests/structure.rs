//! Truncated CMV matrices against entry formulas built directly from the
//! Verblunsky coefficients.

use cmv_core::angle::wrap_angle;
use cmv_core::cmv::FiniteCmv;
use cmv_core::ergodic::{ErgodicFamily, OmegaState};
use cmv_core::Complex64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn families() -> Vec<(&'static str, ErgodicFamily)> {
    vec![
        ("constant", ErgodicFamily::constant(c(0.5, 0.0)).unwrap()),
        ("periodic", ErgodicFamily::periodic(vec![c(0.3, 0.0), c(0.0, -0.4)]).unwrap()),
        ("quasiperiodic", ErgodicFamily::quasiperiodic(0.2, 0.6180339887, 0.0).unwrap()),
        ("random", ErgodicFamily::random_iid(0.5, 7).unwrap()),
    ]
}

struct Window<'a> {
    family: &'a ErgodicFamily,
    state: OmegaState,
    lo: i64,
    hi: i64,
    left: Complex64,
    right: Complex64,
}

impl Window<'_> {
    fn alpha(&self, j: i64) -> Complex64 {
        if j == self.lo - 1 {
            self.left
        } else if j == self.hi {
            self.right
        } else {
            self.family.alpha_at(&self.state, j)
        }
    }

    fn rho(&self, j: i64) -> f64 {
        if j == self.lo - 1 || j == self.hi {
            0.0
        } else {
            (1.0 - self.alpha(j).norm_sqr()).sqrt()
        }
    }

    /// The five nonzero entries of row `r` of `LM`.
    fn expected(&self, r: i64, col: i64) -> Complex64 {
        let a = |j| self.alpha(j);
        let p = |j| Complex64::new(self.rho(j), 0.0);
        if r.rem_euclid(2) == 0 {
            match col - r {
                -1 => a(r).conj() * p(r - 1),
                0 => -a(r).conj() * a(r - 1),
                1 => p(r) * a(r + 1).conj(),
                2 => p(r) * p(r + 1),
                _ => c(0.0, 0.0),
            }
        } else {
            match col - r {
                -2 => p(r - 1) * p(r - 2),
                -1 => -p(r - 1) * a(r - 2),
                0 => -a(r - 1) * a(r).conj(),
                1 => -a(r - 1) * p(r),
                _ => c(0.0, 0.0),
            }
        }
    }
}

#[test]
fn entries_match_row_formulas_for_all_families() {
    let beta = c(-1.0, 0.0);
    for (name, fam) in families() {
        for n in [10usize, 50, 200] {
            let state = fam.base_state();
            let u = FiniteCmv::new(&fam, &state, n, beta, beta).unwrap();
            let w = Window {
                family: &fam,
                state,
                lo: -(n as i64),
                hi: n as i64,
                left: beta,
                right: beta,
            };
            let mut worst: f64 = 0.0;
            for r in w.lo..=w.hi {
                for col in w.lo..=w.hi {
                    let got = u.entry(r, col).unwrap();
                    worst = worst.max((got - w.expected(r, col)).norm());
                }
            }
            assert!(worst <= 1e-14, "{name} n={n}: entry mismatch {worst:e}");
            assert!(u.unitarity_defect() <= 1e-12, "{name} n={n}");
        }
    }
}

#[test]
fn general_boundary_values_enter_at_the_cuts() {
    let fam = ErgodicFamily::periodic(vec![c(0.3, 0.0), c(0.0, -0.4)]).unwrap();
    let (left, right) = (c(0.0, 1.0), Complex64::from_polar(1.0, 0.7));
    let state = OmegaState::Offset(1);
    let u = FiniteCmv::new(&fam, &state, 7, left, right).unwrap();
    let w = Window {
        family: &fam,
        state,
        lo: -7,
        hi: 7,
        left,
        right,
    };
    for r in -7..=7 {
        for col in -7..=7 {
            assert!((u.entry(r, col).unwrap() - w.expected(r, col)).norm() <= 1e-14);
        }
    }
    assert!(u.unitarity_defect() <= 1e-12);
}

#[test]
fn decoupled_window_is_invariant() {
    // The full lattice restricted to a window whose cut coefficient is −1
    // has no coupling across the cut: ρ at the cut vanishes.
    let fam = ErgodicFamily::constant(c(0.5, 0.0)).unwrap();
    let u = FiniteCmv::new(&fam, &fam.base_state(), 6, c(-1.0, 0.0), c(-1.0, 0.0)).unwrap();
    assert!(u.entry(6, 7).is_err());
    let col_sums: f64 = (-6..=6)
        .map(|r| u.entry(r, 6).unwrap().norm_sqr())
        .sum();
    assert!((col_sums - 1.0).abs() < 1e-14);
}

#[test]
fn eigenpairs_are_unimodular_with_small_residuals() {
    for (name, fam) in families() {
        let u = FiniteCmv::new(&fam, &fam.base_state(), 50, c(-1.0, 0.0), c(-1.0, 0.0)).unwrap();
        let spec = u.eigen().unwrap();
        for z in spec.eigenvalues() {
            assert!((z.norm() - 1.0).abs() <= 1e-10, "{name}");
        }
        assert!(spec.max_residual(&u) <= 1e-10, "{name}");
        assert!(spec.orthonormality_defect() <= 1e-10, "{name}");
        let m = spec.counting_measure();
        assert!((m.total_mass() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn eigenvalue_product_is_determinant() {
    // Every interior block has determinant −|α|² − ρ² = −1; the left cut
    // leaves the entry −β_left and the right cut the entry conj(β_right).
    for (name, fam) in families() {
        let n = 20usize;
        let (left, right) = (c(0.0, 1.0), c(-1.0, 0.0));
        let u = FiniteCmv::new(&fam, &fam.base_state(), n, left, right).unwrap();
        let product = u
            .eigenvalues()
            .unwrap()
            .iter()
            .fold(c(1.0, 0.0), |acc, z| acc * z);
        let interior_blocks = (2 * n) as i32;
        let expected = (-left) * right.conj() * c(-1.0, 0.0).powi(interior_blocks);
        assert!((product - expected).norm() <= 1e-8, "{name}: {product} vs {expected}");
    }
}

#[test]
fn constant_half_gap_holds_no_bulk_eigenvalues() {
    let fam = ErgodicFamily::constant(c(0.5, 0.0)).unwrap();
    let edge = PI / 3.0;
    let in_gap = |z: &Complex64| {
        let t = wrap_angle(z.arg());
        t < edge - 1e-9 || t > 2.0 * PI - edge + 1e-9
    };

    let plus = FiniteCmv::new(&fam, &fam.base_state(), 20, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
    let eig = plus.eigenvalues().unwrap();
    assert_eq!(eig.len(), 41);
    assert!(eig.iter().all(|z| !in_gap(z)));

    // With β = −1 each cut carries one state in the gap, pinned at z = 1 and
    // concentrated at its end of the window.
    let minus = FiniteCmv::new(&fam, &fam.base_state(), 20, c(-1.0, 0.0), c(-1.0, 0.0)).unwrap();
    let spec = minus.eigen().unwrap();
    let gap: Vec<usize> = (0..spec.len()).filter(|&k| in_gap(&spec.eigenvalues()[k])).collect();
    assert_eq!(gap.len(), 2);
    for &k in &gap {
        assert!((spec.eigenvalues()[k] - c(1.0, 0.0)).norm() < 1e-8);
    }
    let edge_mass: f64 = gap
        .iter()
        .map(|&k| {
            let v = spec.vectors();
            (0..5).chain(36..41).map(|i| v[(i, k)].norm_sqr()).sum::<f64>()
        })
        .sum();
    assert!(edge_mass > 1.9, "boundary states not localized: {edge_mass}");
}

//! Unitary truncations of extended CMV matrices.
//!
//! The extended CMV matrix factors as `ℰ = L·M` where `L` is the direct sum
//! of the blocks `Θ_j = [[ᾱ_j, ρ_j], [ρ_j, −α_j]]` acting on sites
//! `(j, j+1)` for even `j`, and `M` the direct sum over odd `j`. Putting a
//! unimodular value at `α_{lo−1}` and `α_{hi}` makes `ρ = 0` there, so both
//! factors leave the window `lo..=hi` invariant and the restriction stays
//! unitary. The whole-line window is `−n..=n` (dimension `2n + 1`); the
//! half-line matrix is the window starting at site 0 with `α_{−1} = −1`.

use alloc::vec::Vec;

use faer::Mat;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::ergodic::{ErgodicFamily, OmegaState};
use crate::measure::AtomicCircleMeasure;
use crate::{Error, Result};

/// Eigenvalues this close to the circle are projected onto it.
const CIRCLE_SNAP: f64 = 1e-10;
/// Minimal distance from `z` to the spectrum for resolvent entries.
const RESOLVENT_GUARD: f64 = 1e-8;
const BOUNDARY_TOLERANCE: f64 = 1e-12;
/// Eigenvalues closer than this in phase are treated as one cluster whose
/// eigenvectors are re-orthonormalized.
const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FiniteCmv {
    lo: i64,
    hi: i64,
    /// `α_{lo−1}, …, α_{hi}`; the two ends are the unimodular boundary values.
    coefficients: Vec<Complex64>,
    matrix: Mat<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn rho(alpha: Complex64) -> f64 {
    (1.0 - alpha.norm_sqr()).max(0.0).sqrt()
}

fn unit_boundary(beta: Complex64) -> Result<Complex64> {
    let modulus = beta.norm();
    if (modulus - 1.0).abs() > BOUNDARY_TOLERANCE {
        return Err(Error::NonUnimodularBoundary { modulus });
    }
    Ok(beta / modulus)
}

impl FiniteCmv {
    /// The `(2n+1)`-dimensional window `−n..=n` of `ℰ_ω` with
    /// `α_{−n−1} = β_left` and `α_n = β_right`.
    pub fn new(
        family: &ErgodicFamily,
        state: &OmegaState,
        n: usize,
        beta_left: Complex64,
        beta_right: Complex64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("window half-width must be positive".into()));
        }
        let n = n as i64;
        let interior = family.coefficients(state, -n, 2 * n as usize);
        Self::from_window(-n, n, &interior, beta_left, beta_right)
    }

    /// The half-line matrix on sites `0..len` (`α_{−1} = −1`), cut at
    /// `α_{len−1} = β_right`.
    pub fn half_line(
        family: &ErgodicFamily,
        state: &OmegaState,
        len: usize,
        beta_right: Complex64,
    ) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("half-line length must be positive".into()));
        }
        let interior = family.coefficients(state, 0, len - 1);
        Self::from_window(0, len as i64 - 1, &interior, Complex64::new(-1.0, 0.0), beta_right)
    }

    /// General window `lo..=hi` with interior coefficients `α_lo, …, α_{hi−1}`.
    pub fn from_window(
        lo: i64,
        hi: i64,
        interior: &[Complex64],
        beta_left: Complex64,
        beta_right: Complex64,
    ) -> Result<Self> {
        if hi < lo || interior.len() as i64 != hi - lo {
            return Err(Error::InvalidParameter("window and coefficient count disagree".into()));
        }
        for a in interior {
            if a.norm() >= 1.0 {
                return Err(Error::CoefficientOutsideDisk { modulus: a.norm() });
            }
        }
        let beta_left = unit_boundary(beta_left)?;
        let beta_right = unit_boundary(beta_right)?;

        let mut coefficients = Vec::with_capacity(interior.len() + 2);
        coefficients.push(beta_left);
        coefficients.extend_from_slice(interior);
        coefficients.push(beta_right);

        let dim = (hi - lo + 1) as usize;
        let last = coefficients.len() - 1;
        // Rows of L (even blocks) and M (odd blocks) as sparse (column, value) lists.
        let mut l_rows: Vec<Vec<(usize, Complex64)>> = alloc::vec![Vec::new(); dim];
        let mut m_rows: Vec<Vec<(usize, Complex64)>> = alloc::vec![Vec::new(); dim];
        for (idx, &alpha) in coefficients.iter().enumerate() {
            let j = lo - 1 + idx as i64;
            let r = if idx == 0 || idx == last { 0.0 } else { rho(alpha) };
            let rows = if j.rem_euclid(2) == 0 {
                &mut l_rows
            } else {
                &mut m_rows
            };
            let local = |site: i64| -> Option<usize> {
                (lo..=hi).contains(&site).then(|| (site - lo) as usize)
            };
            let block = [
                [alpha.conj(), Complex64::new(r, 0.0)],
                [Complex64::new(r, 0.0), -alpha],
            ];
            for (a, sa) in [j, j + 1].into_iter().enumerate() {
                let Some(ia) = local(sa) else { continue };
                for (b, sb) in [j, j + 1].into_iter().enumerate() {
                    let Some(ib) = local(sb) else { continue };
                    if block[a][b] != zero() || a == b {
                        rows[ia].push((ib, block[a][b]));
                    }
                }
            }
        }

        let mut matrix = Mat::<Complex64>::zeros(dim, dim);
        for (i, l_row) in l_rows.iter().enumerate() {
            for &(j, lv) in l_row {
                for &(k, mv) in &m_rows[j] {
                    matrix[(i, k)] += lv * mv;
                }
            }
        }
        Ok(Self {
            lo,
            hi,
            coefficients,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// `α_j` for `lo − 1 ≤ j ≤ hi`, boundary values included.
    pub fn coefficient(&self, j: i64) -> Option<Complex64> {
        let idx = j - (self.lo - 1);
        (0..self.coefficients.len() as i64)
            .contains(&idx)
            .then(|| self.coefficients[idx as usize])
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    fn index(&self, site: i64) -> Result<usize> {
        if site < self.lo || site > self.hi {
            return Err(Error::SiteOutsideWindow {
                site,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok((site - self.lo) as usize)
    }

    /// `⟨δ_row, U δ_col⟩` in lattice coordinates.
    pub fn entry(&self, row: i64, col: i64) -> Result<Complex64> {
        Ok(self.matrix[(self.index(row)?, self.index(col)?)])
    }

    /// `max |U*U − I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Full eigendecomposition, eigenpairs sorted by phase.
    ///
    /// The general eigensolver returns non-orthogonal vectors for nearly
    /// coincident eigenvalues; within each such cluster the vectors are
    /// replaced by an orthonormal eigenbasis of the compressed matrix.
    pub fn eigen(&self) -> Result<Spectrum> {
        let evd = self.matrix.eigen().map_err(|_| Error::EigenNoConvergence)?;
        let s = evd.S();
        let u = evd.U();
        let d = self.dim();
        let mut values: Vec<Complex64> = (0..d).map(|k| snap_to_circle(s[k])).collect();
        let mut raw = Mat::<Complex64>::zeros(d, d);
        for k in 0..d {
            let norm = (0..d).map(|i| u[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::EigenNoConvergence);
            }
            for i in 0..d {
                raw[(i, k)] = u[(i, k)] / norm;
            }
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| phase(values[a]).total_cmp(&phase(values[b])));
        for cluster in clusters(&order, &values) {
            self.orthonormalize_cluster(&cluster, &mut values, &mut raw)?;
        }
        order.sort_by(|&a, &b| phase(values[a]).total_cmp(&phase(values[b])));
        let mut vectors = Mat::<Complex64>::zeros(d, d);
        let mut eigenvalues = Vec::with_capacity(d);
        for (col, &k) in order.iter().enumerate() {
            for i in 0..d {
                vectors[(i, col)] = raw[(i, k)];
            }
            eigenvalues.push(values[k]);
        }
        Ok(Spectrum {
            lo: self.lo,
            eigenvalues,
            vectors,
        })
    }

    fn orthonormalize_cluster(
        &self,
        cluster: &[usize],
        values: &mut [Complex64],
        vectors: &mut Mat<Complex64>,
    ) -> Result<()> {
        let d = self.dim();
        let k = cluster.len();
        let block = Mat::<Complex64>::from_fn(d, k, |i, j| vectors[(i, cluster[j])]);
        let q = block.qr().compute_thin_Q();
        let compressed = q.adjoint() * (&self.matrix * &q);
        let center = cluster
            .iter()
            .fold(zero(), |acc, &c| acc + values[c])
            .unscale(k as f64);
        let center = if center.norm() > 0.0 {
            center.unscale(center.norm())
        } else {
            Complex64::new(1.0, 0.0)
        };
        // Im(z̄₀ B) is Hermitian and, on a short arc around z₀, separates the
        // eigenvalues of the normal matrix B.
        let rotated = Mat::<Complex64>::from_fn(k, k, |i, j| center.conj() * compressed[(i, j)]);
        let tangent = Mat::<Complex64>::from_fn(k, k, |i, j| {
            (rotated[(i, j)] - rotated[(j, i)].conj()) / Complex64::new(0.0, 2.0)
        });
        let evd = tangent
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|_| Error::EigenNoConvergence)?;
        let w = evd.U();
        let basis = &q * w;
        let diagonal = w.adjoint() * (&compressed * w);
        for (j, &c) in cluster.iter().enumerate() {
            for i in 0..d {
                vectors[(i, c)] = basis[(i, j)];
            }
            values[c] = snap_to_circle(diagonal[(j, j)]);
        }
        Ok(())
    }

    /// Eigenvalues only, sorted by phase.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let mut values: Vec<Complex64> = self
            .matrix
            .eigenvalues()
            .map_err(|_| Error::EigenNoConvergence)?
            .into_iter()
            .map(snap_to_circle)
            .collect();
        values.sort_by(|a, b| phase(*a).total_cmp(&phase(*b)));
        Ok(values)
    }

    /// Normalized eigenvalue counting measure `dk_n`.
    pub fn counting_measure(&self) -> Result<AtomicCircleMeasure> {
        Ok(AtomicCircleMeasure::counting(&self.eigenvalues()?))
    }
}

/// Groups of at least two eigenvalues, consecutive in phase order (across
/// the wrap point), whose neighbours lie within [`CLUSTER_GAP`].
fn clusters(order: &[usize], values: &[Complex64]) -> Vec<Vec<usize>> {
    let d = order.len();
    if d < 2 {
        return Vec::new();
    }
    let close = |a: usize, b: usize| {
        let gap = crate::angle::wrap_angle(phase(values[order[b]]) - phase(values[order[a]]));
        gap < CLUSTER_GAP
    };
    // Start at a position preceded by a real gap so no group straddles it.
    let Some(start) = (0..d).find(|&i| !close((i + d - 1) % d, i)) else {
        return alloc::vec![order.to_vec()];
    };
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current = alloc::vec![order[start]];
    for step in 1..d {
        let i = (start + step) % d;
        if close((i + d - 1) % d, i) {
            current.push(order[i]);
        } else {
            groups.push(core::mem::take(&mut current));
            current.push(order[i]);
        }
    }
    groups.push(current);
    groups.retain(|g| g.len() > 1);
    groups
}

fn snap_to_circle(z: Complex64) -> Complex64 {
    let r = z.norm();
    if (r - 1.0).abs() <= CIRCLE_SNAP && r > 0.0 {
        z / r
    } else {
        z
    }
}

fn phase(z: Complex64) -> f64 {
    crate::angle::wrap_angle(z.arg())
}

/// Eigenpairs of a [`FiniteCmv`]; column `k` of the eigenvector matrix
/// belongs to the `k`-th eigenvalue in phase order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    lo: i64,
    eigenvalues: Vec<Complex64>,
    vectors: Mat<Complex64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vectors(&self) -> &Mat<Complex64> {
        &self.vectors
    }

    fn index(&self, site: i64) -> Result<usize> {
        let hi = self.lo + self.len() as i64 - 1;
        if site < self.lo || site > hi {
            return Err(Error::SiteOutsideWindow {
                site,
                lo: self.lo,
                hi,
            });
        }
        Ok((site - self.lo) as usize)
    }

    /// `|v_k(site)|²` for every eigenvector.
    pub fn site_weights(&self, site: i64) -> Result<Vec<f64>> {
        let i = self.index(site)?;
        Ok((0..self.len()).map(|k| self.vectors[(i, k)].norm_sqr()).collect())
    }

    pub fn counting_measure(&self) -> AtomicCircleMeasure {
        AtomicCircleMeasure::counting(&self.eigenvalues)
    }

    /// Finite-volume spectral measure of `δ_site`: atoms `(ζ_k, |v_k(site)|²)`.
    pub fn site_spectral_measure(&self, site: i64) -> Result<AtomicCircleMeasure> {
        let weights = self.site_weights(site)?;
        Ok(AtomicCircleMeasure::from_atoms(
            self.eigenvalues
                .iter()
                .zip(weights)
                .map(|(z, w)| (z.arg(), w)),
        ))
    }

    fn check_resolvent(&self, z: Complex64) -> Result<()> {
        let distance = self
            .eigenvalues
            .iter()
            .map(|zeta| (zeta - z).norm())
            .fold(f64::INFINITY, f64::min);
        if distance < RESOLVENT_GUARD {
            return Err(Error::ResolventSingular { distance });
        }
        Ok(())
    }

    /// `⟨δ_site, (U − z)⁻¹ δ_site⟩ = Σ_k |v_k(site)|² / (ζ_k − z)`.
    pub fn green(&self, site: i64, z: Complex64) -> Result<Complex64> {
        self.check_resolvent(z)?;
        let weights = self.site_weights(site)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(weights)
            .map(|(zeta, w)| w / (zeta - z))
            .fold(zero(), |acc, v| acc + v))
    }

    /// Site-0 Green function `G(z)` of the truncation.
    pub fn truncated_green(&self, z: Complex64) -> Result<Complex64> {
        self.green(0, z)
    }

    /// `⟨δ_site, (U + z)(U − z)⁻¹ δ_site⟩` from the eigendata.
    pub fn caratheodory(&self, site: i64, z: Complex64) -> Result<Complex64> {
        self.check_resolvent(z)?;
        let weights = self.site_weights(site)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(weights)
            .map(|(zeta, w)| w * (zeta + z) / (zeta - z))
            .fold(zero(), |acc, v| acc + v))
    }

    /// Largest `|U v_k − ζ_k v_k|` over all eigenpairs.
    pub fn max_residual(&self, cmv: &FiniteCmv) -> f64 {
        let uv = cmv.matrix() * &self.vectors;
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            let r = (0..self.len())
                .map(|i| (uv[(i, k)] - self.eigenvalues[k] * self.vectors[(i, k)]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }

    /// Largest entry of `|V*V − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

//! Szegő transfer matrices, renormalized products and Lyapunov exponents.
//!
//! The raw step `[[z, −ᾱ], [−αz, 1]]` has determinant `z(1 − |α|²)`; the
//! normalized step divides by `ρ = √(1 − |α|²)` and has determinant `z`.
//! The Thouless identity `γ = Re Γ` holds for the normalized products, which
//! are therefore the default.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::ergodic::{expectation, ErgodicFamily, Estimate, OmegaState, SamplingPlan};
use crate::exec::Executor;
use crate::linalg::Mat2;
use crate::measure::Arc;
use crate::{Error, Result};

/// Coefficients are generated in blocks of this size along a product.
const COEFFICIENT_BLOCK: usize = 1024;

/// One factor of the cocycle.
pub fn szego_step(alpha: Complex64, z: Complex64, normalized: bool) -> Result<Mat2> {
    let modulus = alpha.norm();
    if modulus >= 1.0 {
        return Err(Error::CoefficientOutsideDisk { modulus });
    }
    let raw = Mat2::new(z, -alpha.conj(), -alpha * z, Complex64::new(1.0, 0.0));
    Ok(if normalized {
        raw.scale(1.0 / (1.0 - alpha.norm_sqr()).sqrt())
    } else {
        raw
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CocycleParams {
    /// Divide each step by `ρ`.
    pub normalized: bool,
    /// Steps between rescalings of the running product.
    pub rescale_period: usize,
    /// Steps discarded before measuring growth; the estimate becomes
    /// `(log‖T^{B+N}‖ − log‖T^B‖) / N`.
    pub burn_in: usize,
}

impl Default for CocycleParams {
    fn default() -> Self {
        Self {
            normalized: true,
            rescale_period: 32,
            burn_in: 0,
        }
    }
}

/// A left-accumulated product `A_{n−1}⋯A_0` stored as `e^{log_scale}·matrix`.
#[derive(Debug, Clone)]
pub struct RenormalizedProduct {
    matrix: Mat2,
    log_scale: f64,
    log_det: Complex64,
    steps: usize,
    rescale_period: usize,
}

impl RenormalizedProduct {
    pub fn new(rescale_period: usize) -> Self {
        Self {
            matrix: Mat2::IDENTITY,
            log_scale: 0.0,
            log_det: Complex64::new(0.0, 0.0),
            steps: 0,
            rescale_period: rescale_period.max(1),
        }
    }

    pub fn push(&mut self, step: &Mat2) -> Result<()> {
        self.matrix = *step * self.matrix;
        self.log_det += step.det().ln();
        self.steps += 1;
        if self.steps.is_multiple_of(self.rescale_period) {
            self.rescale()?;
        }
        Ok(())
    }

    fn rescale(&mut self) -> Result<()> {
        let norm = self.matrix.norm2();
        if !norm.is_finite() || !self.matrix.is_finite() {
            return Err(Error::Overflow);
        }
        if norm > 0.0 {
            self.matrix = self.matrix.scale(1.0 / norm);
            self.log_scale += norm.ln();
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `log‖product‖₂`.
    pub fn log_norm(&self) -> Result<f64> {
        let norm = self.matrix.norm2();
        if !norm.is_finite() {
            return Err(Error::Overflow);
        }
        Ok(self.log_scale + norm.ln())
    }

    /// Logarithm of the determinant accumulated step by step (imaginary part
    /// not reduced mod `2π`). Off the circle the stored factor is nearly
    /// rank one, so its own determinant carries no relative precision.
    pub fn log_det(&self) -> Complex64 {
        self.log_det
    }

    /// Logarithm of the determinant recomputed from the stored entries.
    pub fn log_det_from_entries(&self) -> Complex64 {
        self.matrix.det().ln() + Complex64::new(2.0 * self.log_scale, 0.0)
    }

    /// The stored unit-scale factor.
    pub fn scaled_matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }
}

/// `T_z^len(ω)` as a renormalized product.
pub fn cocycle_product(
    family: &ErgodicFamily,
    state: &OmegaState,
    z: Complex64,
    len: usize,
    params: &CocycleParams,
) -> Result<RenormalizedProduct> {
    let mut product = RenormalizedProduct::new(params.rescale_period);
    advance(&mut product, family, state, z, 0, len, params.normalized)?;
    Ok(product)
}

fn advance(
    product: &mut RenormalizedProduct,
    family: &ErgodicFamily,
    state: &OmegaState,
    z: Complex64,
    start: usize,
    len: usize,
    normalized: bool,
) -> Result<()> {
    let mut done = 0;
    while done < len {
        let block = COEFFICIENT_BLOCK.min(len - done);
        let alphas = family.coefficients(state, (start + done) as i64, block);
        for alpha in alphas {
            product.push(&szego_step(alpha, z, normalized)?)?;
        }
        done += block;
    }
    Ok(())
}

/// `(1/N) log‖T_z^N(ω)‖` for a single `ω`, after the configured burn-in.
pub fn log_growth(
    family: &ErgodicFamily,
    state: &OmegaState,
    z: Complex64,
    len: usize,
    params: &CocycleParams,
) -> Result<f64> {
    if len == 0 {
        return Err(Error::InvalidParameter("cocycle length must be at least 1".into()));
    }
    let mut product = RenormalizedProduct::new(params.rescale_period);
    advance(&mut product, family, state, z, 0, params.burn_in, params.normalized)?;
    let base = if params.burn_in > 0 {
        product.log_norm()?
    } else {
        0.0
    };
    advance(
        &mut product,
        family,
        state,
        z,
        params.burn_in,
        len,
        params.normalized,
    )?;
    Ok((product.log_norm()? - base) / len as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LyapunovEstimate {
    pub z: Complex64,
    /// Nats per step.
    pub value: f64,
    pub length: usize,
    pub samples: usize,
    pub std_error: f64,
}

/// Plan average of [`log_growth`].
pub fn lyapunov<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    z: Complex64,
    len: usize,
    params: &CocycleParams,
) -> Result<LyapunovEstimate> {
    if len == 0 {
        return Err(Error::InvalidParameter("cocycle length must be at least 1".into()));
    }
    let estimate = crate::ergodic::try_expectation(family, plan, exec, |s| {
        log_growth(family, s, z, len, params).map(|g| Complex64::new(g, 0.0))
    })?;
    Ok(LyapunovEstimate {
        z,
        value: estimate.mean.re,
        length: len,
        samples: estimate.samples,
        std_error: estimate.std_error,
    })
}

/// `Σ_j log ρ_j` averaged: helper for `ρ_∞` in the same sampling scheme.
pub fn mean_log_rho(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &impl Executor,
    len: usize,
) -> Result<Estimate> {
    if len == 0 {
        return Err(Error::InvalidParameter("averaging length must be at least 1".into()));
    }
    expectation(family, plan, exec, |s| {
        let total: f64 = family
            .coefficients(s, 0, len)
            .iter()
            .map(|a| 0.5 * (1.0 - a.norm_sqr()).ln())
            .sum();
        Complex64::new(total / len as f64, 0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ZeroSetParams {
    /// Number of equispaced angles `2πj/grid`.
    pub grid: usize,
    /// Cocycle length `N`.
    pub length: usize,
    /// Detection threshold `ε_γ`.
    pub threshold: f64,
    /// Grid cells removed from each end of every detected arc.
    pub margin: usize,
    /// Bisection steps locating each arc end between its last marked and
    /// first unmarked grid angle.
    pub refine: u32,
    pub cocycle: CocycleParams,
}

impl Default for ZeroSetParams {
    fn default() -> Self {
        Self {
            grid: 256,
            length: 10_000,
            threshold: 5e-3,
            margin: 2,
            refine: 30,
            cocycle: CocycleParams::default(),
        }
    }
}

impl ZeroSetParams {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 16 {
            return Err(Error::InvalidParameter("zero-set grid needs at least 16 points".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidParameter("zero-set threshold must be positive".into()));
        }
        if self.length == 0 {
            return Err(Error::InvalidParameter("cocycle length must be at least 1".into()));
        }
        Ok(())
    }
}

/// Detected arcs of `{θ : γ(e^{iθ}) < ε_γ}` with the per-angle evidence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroSetArcs {
    /// Margin-shrunk arcs, disjoint and sorted by starting angle.
    pub arcs: Vec<Arc>,
    /// Arcs before the margin was removed.
    pub raw_arcs: Vec<Arc>,
    pub threshold: f64,
    pub grid: usize,
    pub margin: usize,
    /// `γ(e^{2πij/grid})` estimates.
    pub gamma: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl ZeroSetArcs {
    /// Builds arcs from a γ grid (index `j` ↔ angle `2πj/grid`) with arc
    /// ends at the outermost marked grid angles.
    pub fn from_grid(gamma: Vec<f64>, std_error: Vec<f64>, threshold: f64, margin: usize) -> Self {
        let grid = gamma.len();
        let marked: Vec<bool> = gamma.iter().map(|g| *g < threshold).collect();
        let step = TAU / grid as f64;
        let raw_arcs = marked_runs(&marked)
            .into_iter()
            .map(|(start, len)| {
                if len == grid {
                    Arc::FULL
                } else {
                    Arc {
                        lo: start as f64 * step,
                        hi: (start + len - 1) as f64 * step,
                    }
                }
            })
            .collect();
        Self::from_raw_arcs(raw_arcs, gamma, std_error, threshold, margin)
    }

    pub fn from_raw_arcs(
        raw_arcs: Vec<Arc>,
        gamma: Vec<f64>,
        std_error: Vec<f64>,
        threshold: f64,
        margin: usize,
    ) -> Self {
        let grid = gamma.len();
        let mut out = Self {
            arcs: Vec::new(),
            raw_arcs,
            threshold,
            grid,
            margin,
            gamma,
            std_error,
        };
        out.arcs = out.shrunk(margin);
        out
    }

    /// The raw arcs with `margin` grid cells removed at both ends; arcs
    /// that vanish are dropped and the full circle is kept whole.
    pub fn shrunk(&self, margin: usize) -> Vec<Arc> {
        let cut = margin as f64 * TAU / self.grid as f64;
        self.raw_arcs
            .iter()
            .filter_map(|a| {
                if a.is_full() {
                    Some(*a)
                } else if a.length() > 2.0 * cut {
                    Some(Arc {
                        lo: a.lo + cut,
                        hi: a.hi - cut,
                    })
                } else {
                    None
                }
            })
            .collect()
    }

    /// Grid spacing `2π/grid`.
    pub fn cell(&self) -> f64 {
        TAU / self.grid as f64
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(theta))
    }

    /// Total angular length of the margin-shrunk arcs.
    pub fn length(&self) -> f64 {
        self.arcs.iter().map(Arc::length).fold(0.0, |acc, l| acc + l)
    }

    /// Grid angles `2πj/grid` lying in the margin-shrunk arcs.
    pub fn interior_angles(&self) -> Vec<f64> {
        (0..self.grid)
            .map(|j| TAU * j as f64 / self.grid as f64)
            .filter(|t| self.contains(*t))
            .collect()
    }

    /// Smallest γ estimate on the grid.
    pub fn min_gamma(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Maximal runs of `true` as `(start, len)`, joined across the wrap point.
fn marked_runs(marked: &[bool]) -> Vec<(usize, usize)> {
    let n = marked.len();
    if marked.iter().all(|m| *m) {
        return alloc::vec![(0, n)];
    }
    let Some(first_gap) = marked.iter().position(|m| !*m) else {
        return Vec::new();
    };
    // Scan starting just after a gap so wrapped runs stay contiguous.
    let mut runs = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for k in 1..=n {
        let idx = (first_gap + k) % n;
        if marked[idx] {
            current = Some(match current {
                Some((s, l)) => (s, l + 1),
                None => (idx, 1),
            });
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    if let Some(run) = current {
        runs.push(run);
    }
    runs.sort_by_key(|r| r.0);
    runs
}

fn plan_gamma<E: Executor>(
    family: &ErgodicFamily,
    states: &[OmegaState],
    exec: &E,
    theta: f64,
    params: &ZeroSetParams,
) -> Result<f64> {
    let z = Complex64::from_polar(1.0, theta);
    let values = exec
        .map(states.len(), |s| log_growth(family, &states[s], z, params.length, &params.cocycle))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Bisects between an angle inside the zero set and one outside it and
/// returns the inside end of the final bracket.
fn locate_edge<E: Executor>(
    family: &ErgodicFamily,
    states: &[OmegaState],
    exec: &E,
    mut inside: f64,
    mut outside: f64,
    params: &ZeroSetParams,
) -> Result<f64> {
    for _ in 0..params.refine {
        let mid = 0.5 * (inside + outside);
        if plan_gamma(family, states, exec, mid, params)? < params.threshold {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(inside)
}

/// Estimates `γ` on the circle grid and extracts the zero set, with arc
/// ends located by bisection.
pub fn zero_set<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    params: &ZeroSetParams,
) -> Result<ZeroSetArcs> {
    params.validate()?;
    plan.validate(family)?;
    let states = plan.states(family)?;
    let cells = params.grid * states.len();
    let growth = exec
        .map(cells, |idx| {
            let (j, s) = (idx / states.len(), idx % states.len());
            let z = Complex64::from_polar(1.0, TAU * j as f64 / params.grid as f64);
            log_growth(family, &states[s], z, params.length, &params.cocycle)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let mut gamma = Vec::with_capacity(params.grid);
    let mut std_error = Vec::with_capacity(params.grid);
    for row in growth.chunks(states.len()) {
        let values: Vec<Complex64> = row.iter().map(|g| Complex64::new(*g, 0.0)).collect();
        let e = Estimate::from_samples(&values, plan.is_exact());
        gamma.push(e.mean.re);
        std_error.push(e.std_error);
    }
    let coarse = ZeroSetArcs::from_grid(gamma, std_error, params.threshold, params.margin);
    if params.refine == 0 {
        return Ok(coarse);
    }
    let step = coarse.cell();
    let raw_arcs = coarse
        .raw_arcs
        .iter()
        .map(|a| {
            if a.is_full() {
                return Ok(*a);
            }
            Ok(Arc {
                lo: locate_edge(family, &states, exec, a.lo, a.lo - step, params)?,
                hi: locate_edge(family, &states, exec, a.hi, a.hi + step, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroSetArcs::from_raw_arcs(
        raw_arcs,
        coarse.gamma,
        coarse.std_error,
        params.threshold,
        params.margin,
    ))
}

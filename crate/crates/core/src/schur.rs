//! Half-line Schur functions and the whole-line functions built from them.
//!
//! The Schur parameters of the half-line spectral measure are its Verblunsky
//! coefficients, so `f` is the continued fraction
//! `f_j = (γ_j + z f_{j+1}) / (1 + γ̄_j z f_{j+1})` run backwards from the
//! tail `f_N = 0`. The plus function uses `γ_j = α_j(ω)`, the minus function
//! `γ_j = −ᾱ_{−1−j}(ω)`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::boundary::{ac_density, BoundaryValue, CaratheodoryEvaluator, RadialLadder};
use crate::ergodic::{ErgodicFamily, OmegaState};
use crate::{Error, Result, INV_TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "policy", rename_all = "snake_case"))]
pub enum Depth {
    Fixed { depth: usize },
    /// Doubles the depth from `start` until two successive values differ by
    /// less than `tolerance` or `|z|^N < tail`.
    Adaptive {
        start: usize,
        tolerance: f64,
        tail: f64,
        max_depth: usize,
    },
}

impl Default for Depth {
    fn default() -> Self {
        Depth::Adaptive {
            start: 16,
            tolerance: 1e-10,
            tail: 1e-14,
            max_depth: 1 << 24,
        }
    }
}

/// `f_±(·, ω)` with a depth policy.
#[derive(Debug, Clone)]
pub struct SchurEvaluator<'a> {
    family: &'a ErgodicFamily,
    state: OmegaState,
    direction: Direction,
    depth: Depth,
}

impl<'a> SchurEvaluator<'a> {
    pub fn new(family: &'a ErgodicFamily, state: OmegaState, direction: Direction, depth: Depth) -> Self {
        Self {
            family,
            state,
            direction,
            depth,
        }
    }

    /// The first `len` Schur parameters.
    pub fn parameters(&self, len: usize) -> Vec<Complex64> {
        match self.direction {
            Direction::Plus => self.family.coefficients(&self.state, 0, len),
            Direction::Minus => {
                let mut back = self.family.coefficients(&self.state, -(len as i64), len);
                back.reverse();
                back.into_iter().map(|a| -a.conj()).collect()
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let modulus = z.norm();
        if !(modulus < 1.0) {
            return Err(Error::OutsideDisk { modulus });
        }
        match self.depth {
            Depth::Fixed { depth } => {
                if depth == 0 {
                    return Err(Error::InvalidParameter("Schur depth must be at least 1".into()));
                }
                Ok(continued_fraction(&self.parameters(depth), z))
            }
            Depth::Adaptive {
                start,
                tolerance,
                tail,
                max_depth,
            } => {
                let mut depth = start.max(1);
                let mut params = self.parameters(depth);
                let mut previous = continued_fraction(&params, z);
                loop {
                    if modulus.powi(depth.min(i32::MAX as usize) as i32) < tail {
                        return Ok(previous);
                    }
                    let next_depth = depth * 2;
                    if next_depth > max_depth {
                        return Err(Error::DepthExceeded { depth: max_depth });
                    }
                    params = self.extend(params, next_depth);
                    let value = continued_fraction(&params, z);
                    if (value - previous).norm() < tolerance {
                        return Ok(value);
                    }
                    depth = next_depth;
                    previous = value;
                }
            }
        }
    }

    fn extend(&self, mut params: Vec<Complex64>, len: usize) -> Vec<Complex64> {
        let have = params.len();
        match self.direction {
            Direction::Plus => {
                params.extend(self.family.coefficients(&self.state, have as i64, len - have))
            }
            Direction::Minus => {
                let mut more = self.family.coefficients(&self.state, -(len as i64), len - have);
                more.reverse();
                params.extend(more.into_iter().map(|a| -a.conj()));
            }
        }
        params
    }
}

/// `f_0(z)` from parameters `γ_0..γ_{N−1}` with `f_N = 0`.
pub fn continued_fraction(params: &[Complex64], z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    params.iter().rev().fold(Complex64::new(0.0, 0.0), |f, g| {
        let zf = z * f;
        (g + zf) / (one + g.conj() * zf)
    })
}

/// `(f_+(z), f_−(z))` at `ω`.
pub fn schur_pair(
    family: &ErgodicFamily,
    state: &OmegaState,
    z: Complex64,
    depth: Depth,
) -> Result<(Complex64, Complex64)> {
    let plus = SchurEvaluator::new(family, *state, Direction::Plus, depth).eval(z)?;
    let minus = SchurEvaluator::new(family, *state, Direction::Minus, depth).eval(z)?;
    Ok((plus, minus))
}

/// `F_ω(z) = (1 + z f_+ f_−)/(1 − z f_+ f_−)`.
pub fn caratheodory_f(
    family: &ErgodicFamily,
    state: &OmegaState,
    z: Complex64,
    depth: Depth,
) -> Result<Complex64> {
    let (p, m) = schur_pair(family, state, z, depth)?;
    let w = z * p * m;
    let one = Complex64::new(1.0, 0.0);
    Ok((one + w) / (one - w))
}

/// `G_ω(z) = f_+ f_− / (1 − z f_+ f_−)`.
pub fn green_from_schur(
    family: &ErgodicFamily,
    state: &OmegaState,
    z: Complex64,
    depth: Depth,
) -> Result<Complex64> {
    let (p, m) = schur_pair(family, state, z, depth)?;
    Ok(p * m / (Complex64::new(1.0, 0.0) - z * p * m))
}

/// `ν_ω^(ac)(e^{iθ})` along the full ladder of the Schur-backed `F_ω`.
pub fn nu_ac(
    family: &ErgodicFamily,
    state: &OmegaState,
    theta: f64,
    ladder: &RadialLadder,
    depth: Depth,
) -> Result<BoundaryValue> {
    let f = |z: Complex64| caratheodory_f(family, state, z, depth);
    ac_density(&CaratheodoryEvaluator::Analytic(&f), theta, ladder)
}

/// `(1/2π)(1 + |f_+|²)/(1 − |f_+|²)` at `z`, the density on the zero set
/// when `f_+ = conj(z f_−)`.
pub fn reflectionless_density(
    family: &ErgodicFamily,
    state: &OmegaState,
    z: Complex64,
    depth: Depth,
) -> Result<f64> {
    let p = SchurEvaluator::new(family, *state, Direction::Plus, depth)
        .eval(z)?
        .norm_sqr();
    Ok(INV_TWO_PI * (1.0 + p) / (1.0 - p))
}

/// `|f_+(re^{iθ}) − conj(re^{iθ} f_−(re^{iθ}))|`.
pub fn reflectionless_defect(
    family: &ErgodicFamily,
    state: &OmegaState,
    theta: f64,
    radius: f64,
    depth: Depth,
) -> Result<f64> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParameter("radius must lie in (0, 1)".into()));
    }
    let z = Complex64::from_polar(radius, theta);
    let (p, m) = schur_pair(family, state, z, depth)?;
    Ok((p - (z * m).conj()).norm())
}

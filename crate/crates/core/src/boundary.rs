//! Poisson kernel, Herglotz integrals and radial boundary values.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::measure::AtomicCircleMeasure;
use crate::{Error, Result, INV_TWO_PI};

/// `P_R(τ) = Re((1 + Rτ)/(1 − Rτ))`.
pub fn poisson_kernel(radius: f64, tau: Complex64) -> Result<f64> {
    if !(0.0..1.0).contains(&radius) {
        return Err(Error::InvalidParameter("Poisson kernel radius must lie in [0, 1)".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(((one + tau * radius) / (one - tau * radius)).re)
}

fn check_disk(z: Complex64) -> Result<()> {
    let modulus = z.norm();
    if !(modulus < 1.0) {
        return Err(Error::OutsideDisk { modulus });
    }
    Ok(())
}

/// `∫ dμ(τ)/(τ − z)` for an atomic measure.
pub fn cauchy_transform(measure: &AtomicCircleMeasure, z: Complex64) -> Complex64 {
    measure
        .atoms()
        .iter()
        .map(|a| a.weight / (a.point() - z))
        .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
}

/// `∫ (τ + z)/(τ − z) dμ(τ)`, written as `μ(𝕊¹) + 2z ∫ dμ/(τ − z)` so the
/// value at `z = 0` is the stored total mass.
pub fn herglotz_eval(measure: &AtomicCircleMeasure, z: Complex64) -> Result<Complex64> {
    check_disk(z)?;
    Ok(Complex64::new(measure.total_mass(), 0.0) + z * 2.0 * cauchy_transform(measure, z))
}

/// A Carathéodory function on the disk.
#[derive(Clone, Copy)]
pub enum CaratheodoryEvaluator<'a> {
    /// Herglotz integral of a finite atomic measure.
    Atomic(&'a AtomicCircleMeasure),
    /// Any analytic map to the right half-plane, such as one composed from
    /// Schur functions.
    Analytic(&'a (dyn Fn(Complex64) -> Result<Complex64> + Sync)),
}

impl core::fmt::Debug for CaratheodoryEvaluator<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CaratheodoryEvaluator::Atomic(m) => f.debug_tuple("Atomic").field(&m.len()).finish(),
            CaratheodoryEvaluator::Analytic(_) => f.write_str("Analytic"),
        }
    }
}

impl CaratheodoryEvaluator<'_> {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            CaratheodoryEvaluator::Atomic(m) => herglotz_eval(m, z),
            CaratheodoryEvaluator::Analytic(f) => {
                check_disk(z)?;
                f(z)
            }
        }
    }

    /// Mean atom spacing for atomic backends.
    pub fn resolution(&self) -> Option<f64> {
        match self {
            CaratheodoryEvaluator::Atomic(m) => Some(m.mean_spacing()),
            CaratheodoryEvaluator::Analytic(_) => None,
        }
    }
}

/// Radii `r_m = 1 − 2^{−m}` for `m = m_lo..=m_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RadialLadder {
    pub m_lo: u32,
    pub m_hi: u32,
    /// Relative tolerance between the last two rungs.
    pub tolerance: f64,
    /// For atomic backends, `1 − r` must stay at least this many mean atom
    /// spacings.
    pub spacing_factor: f64,
}

impl Default for RadialLadder {
    fn default() -> Self {
        Self {
            m_lo: 4,
            m_hi: 14,
            tolerance: 1e-3,
            spacing_factor: 8.0,
        }
    }
}

pub fn ladder_radius(m: u32) -> f64 {
    1.0 - (-(m as f64)).exp2()
}

impl RadialLadder {
    pub fn validate(&self) -> Result<()> {
        if self.m_lo < 1 || self.m_hi <= self.m_lo || self.m_hi > 40 {
            return Err(Error::InvalidParameter(
                "ladder needs 1 ≤ m_lo < m_hi ≤ 40".into(),
            ));
        }
        if !(self.tolerance > 0.0) || !(self.spacing_factor > 0.0) {
            return Err(Error::InvalidParameter(
                "ladder tolerance and spacing factor must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The rungs actually used for a backend of the given resolution.
    ///
    /// Atomic backends stop at the largest `m` with
    /// `2^{−m} ≥ spacing_factor · spacing`; when that cuts below `m_lo` the
    /// start is lowered so two rungs remain.
    pub fn rungs(&self, resolution: Option<f64>) -> (u32, u32) {
        let Some(spacing) = resolution else {
            return (self.m_lo, self.m_hi);
        };
        let cap = (-(self.spacing_factor * spacing).log2()).floor();
        let cap = if cap.is_finite() { cap.max(2.0) as u32 } else { self.m_hi };
        let hi = self.m_hi.min(cap);
        let lo = self.m_lo.min(hi - 1).max(1);
        (lo, hi)
    }

    pub fn radii(&self, resolution: Option<f64>) -> Vec<f64> {
        let (lo, hi) = self.rungs(resolution);
        (lo..=hi).map(ladder_radius).collect()
    }
}

/// A radial boundary value with its convergence record.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryValue {
    pub value: f64,
    pub converged: bool,
    /// `(r, value at r)` along the ladder.
    pub trace: Vec<(f64, f64)>,
}

impl BoundaryValue {
    fn from_trace(trace: Vec<(f64, f64)>, tolerance: f64) -> Self {
        let n = trace.len();
        let value = trace[n - 1].1;
        let converged = n >= 2 && {
            let delta = (trace[n - 1].1 - trace[n - 2].1).abs();
            value.is_finite() && delta <= tolerance * value.abs().max(INV_TWO_PI)
        };
        Self {
            value,
            converged,
            trace,
        }
    }

    pub fn last_radius(&self) -> f64 {
        self.trace.last().map_or(0.0, |t| t.0)
    }
}

/// `lim_{r↑1} (1/2π) Re F(re^{iθ})` along the ladder.
///
/// Converged when the last two rungs differ by at most
/// `tolerance · max(|value|, 1/2π)`; the floor keeps the test meaningful
/// where the density vanishes.
pub fn ac_density(
    evaluator: &CaratheodoryEvaluator<'_>,
    theta: f64,
    ladder: &RadialLadder,
) -> Result<BoundaryValue> {
    ladder.validate()?;
    let trace = ladder
        .radii(evaluator.resolution())
        .into_iter()
        .map(|r| {
            let v = evaluator.eval(Complex64::from_polar(r, theta))?;
            Ok((r, INV_TWO_PI * v.re))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryValue::from_trace(trace, ladder.tolerance))
}

/// Mass of the measure at `e^{iθ}`.
///
/// With `q = (1 − r)/(1 + r)`, an atom of weight `w` contributes exactly `w`
/// to `q·Re F(re^{iθ})` while the rest contributes `O(q)`; the last two
/// rungs are extrapolated linearly to `q = 0`.
pub fn atom_mass(
    evaluator: &CaratheodoryEvaluator<'_>,
    theta: f64,
    ladder: &RadialLadder,
) -> Result<f64> {
    ladder.validate()?;
    let radii = ladder.radii(evaluator.resolution());
    let n = radii.len();
    let mut points = [(0.0, 0.0); 2];
    for (slot, &r) in points.iter_mut().zip(&radii[n - 2..]) {
        let q = (1.0 - r) / (1.0 + r);
        *slot = (q, q * evaluator.eval(Complex64::from_polar(r, theta))?.re);
    }
    let [(q1, a1), (q2, a2)] = points;
    Ok((q1 * a2 - q2 * a1) / (q1 - q2))
}

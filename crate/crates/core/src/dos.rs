//! Density of states, `ρ_∞`, the potential `Γ` and the DOS Carathéodory
//! function `K`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::boundary::{
    ac_density, cauchy_transform, herglotz_eval, BoundaryValue, CaratheodoryEvaluator, RadialLadder,
};
use crate::cmv::FiniteCmv;
use crate::cocycle::mean_log_rho;
use crate::ergodic::{ErgodicFamily, Estimate, SamplingPlan};
use crate::exec::Executor;
use crate::measure::AtomicCircleMeasure;
use crate::{Error, Result};

/// Atoms with `|1 − z·τ̄|` below this are left out of the potential.
const LOG_SINGULARITY: f64 = 1e-14;
/// Largest tolerated gap between the two `K` routes.
pub const ROUTE_AGREEMENT: f64 = 1e-10;

/// Pooled eigenvalue counting measure of the plan's truncations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DosApproximation {
    pub measure: AtomicCircleMeasure,
    /// Half-width `n` of the windows `−n..=n`.
    pub volume: usize,
    pub samples: usize,
    /// Kolmogorov distance to the pooled measure at half the volume.
    pub self_distance: Option<f64>,
}

/// Pools `counting_measure` over the plan's states, both cuts at `β`.
pub fn pooled_counting_measure<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    n: usize,
    beta: Complex64,
) -> Result<AtomicCircleMeasure> {
    let states = plan.states(family)?;
    let measures = exec
        .map(states.len(), |j| {
            FiniteCmv::new(family, &states[j], n, beta, beta)?.counting_measure()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(AtomicCircleMeasure::pooled(&measures))
}

/// `dk_n` pooled over the plan, with the `n` vs `n/2` diagnostic.
pub fn density_of_states<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    n: usize,
    beta: Complex64,
) -> Result<DosApproximation> {
    if n == 0 {
        return Err(Error::InvalidParameter("window half-width must be positive".into()));
    }
    let measure = pooled_counting_measure(family, plan, exec, n, beta)?;
    let self_distance = if n >= 2 {
        let half = pooled_counting_measure(family, plan, exec, n / 2, beta)?;
        Some(measure.kolmogorov_distance(&half))
    } else {
        None
    };
    Ok(DosApproximation {
        measure,
        volume: n,
        samples: plan.states(family)?.len(),
        self_distance,
    })
}

/// `exp(𝔼((1/2N) Σ_{j<N} log(1 − |α_j|²)))`.
pub fn rho_infinity<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    len: usize,
) -> Result<f64> {
    Ok(mean_log_rho(family, plan, exec, len)?.mean.re.exp())
}

/// `𝔼(G_ω(z))` from the truncations against `∫ dk(τ)/(τ − z)` on their
/// pooled counting measure.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AveragedGreen {
    pub z: Complex64,
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl AveragedGreen {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub fn dos_average_check<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    n: usize,
    beta: Complex64,
    points: &[Complex64],
) -> Result<Vec<AveragedGreen>> {
    for z in points {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisk { modulus: z.norm() });
        }
    }
    let states = plan.states(family)?;
    let spectra = exec
        .map(states.len(), |j| FiniteCmv::new(family, &states[j], n, beta, beta)?.eigen())
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let pooled = AtomicCircleMeasure::pooled(
        &spectra.iter().map(|s| s.counting_measure()).collect::<Vec<_>>(),
    );
    points
        .iter()
        .map(|&z| {
            let greens = spectra
                .iter()
                .map(|s| s.truncated_green(z))
                .collect::<Result<Vec<_>>>()?;
            let lhs = Estimate::from_samples(&greens, plan.is_exact()).mean;
            Ok(AveragedGreen {
                z,
                lhs,
                rhs: cauchy_transform(&pooled, z),
            })
        })
        .collect()
}

/// `Γ(z) = ∫ log((1 − z τ̄)/ρ_∞) dk(τ)` over a finite-volume DOS.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThoulessPotential {
    pub dos: AtomicCircleMeasure,
    pub rho_infinity: f64,
}

/// `Re Γ(z)` with the number of atoms dropped at the log singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThoulessValue {
    pub value: f64,
    pub excluded: usize,
}

/// Both evaluations of `K(z)`: the Herglotz sum and `1 − 2zΓ′(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DosCaratheodory {
    pub value: Complex64,
    pub from_potential: Complex64,
    /// The routes differ by more than [`ROUTE_AGREEMENT`].
    pub mismatch: bool,
}

impl ThoulessPotential {
    pub fn new(dos: AtomicCircleMeasure, rho_infinity: f64) -> Result<Self> {
        if !(rho_infinity > 0.0 && rho_infinity <= 1.0) {
            return Err(Error::InvalidParameter("ρ_∞ must lie in (0, 1]".into()));
        }
        Ok(Self { dos, rho_infinity })
    }

    /// `Σ w_k log|1 − z τ̄_k| − log ρ_∞`.
    pub fn gamma(&self, z: Complex64) -> ThoulessValue {
        let mut excluded = 0;
        let mut sum = 0.0;
        for a in self.dos.atoms() {
            let d = (Complex64::new(1.0, 0.0) - z * a.point().conj()).norm();
            if d < LOG_SINGULARITY {
                excluded += 1;
            } else {
                sum += a.weight * d.ln();
            }
        }
        ThoulessValue {
            value: sum - self.rho_infinity.ln(),
            excluded,
        }
    }

    /// `Γ(z)` with the principal logarithm, for `|z| < 1`.
    pub fn potential(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisk { modulus: z.norm() });
        }
        let sum = self
            .dos
            .atoms()
            .iter()
            .map(|a| (Complex64::new(1.0, 0.0) - z * a.point().conj()).ln() * a.weight)
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v);
        Ok(sum - self.rho_infinity.ln())
    }

    /// `K(z)` by both routes.
    pub fn caratheodory(&self, z: Complex64) -> Result<DosCaratheodory> {
        let value = herglotz_eval(&self.dos, z)?;
        // −2zΓ′(z) = Σ w 2z τ̄/(1 − z τ̄)
        let derivative_term = self
            .dos
            .atoms()
            .iter()
            .map(|a| {
                let tc = a.point().conj();
                z * tc * 2.0 * a.weight / (Complex64::new(1.0, 0.0) - z * tc)
            })
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v);
        let from_potential = Complex64::new(self.dos.total_mass(), 0.0) + derivative_term;
        Ok(DosCaratheodory {
            value,
            from_potential,
            mismatch: (value - from_potential).norm() > ROUTE_AGREEMENT,
        })
    }

    /// `k^(ac)(e^{iθ})` along the spacing-capped ladder.
    pub fn k_ac(&self, theta: f64, ladder: &RadialLadder) -> Result<BoundaryValue> {
        ac_density(&CaratheodoryEvaluator::Atomic(&self.dos), theta, ladder)
    }
}

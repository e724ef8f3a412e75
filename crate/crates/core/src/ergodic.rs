//! Ergodic families of Verblunsky coefficients `α_n(ω) = f(Sⁿω)`.
//!
//! The ergodic measure is never represented abstractly. Each family carries
//! its own standard invariant measure and a [`SamplingPlan`] turns it into a
//! finite list of [`OmegaState`]s:
//!
//! * constant and periodic families average exactly over the `p` shifts;
//! * the quasiperiodic family `α_n = λ e^{2πi(φ + nθ)}` samples the phase `φ`
//!   from Lebesgue measure on the circle;
//! * the i.i.d. family draws each coefficient uniformly from a disk of radius
//!   `R`, with a counter-based generator keyed by `(seed, stream, n)` so any
//!   single coefficient is reproducible without generating its prefix.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::angle::wrap_unit;
use crate::exec::Executor;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum FamilyKind {
    Constant { alpha: Complex64 },
    Periodic { alphas: Vec<Complex64> },
    Quasiperiodic { coupling: f64, frequency: f64, phase: f64 },
    RandomIid { radius: f64, seed: u64 },
}

/// A validated family together with its uniform bound `C` on `|α|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicFamily {
    kind: FamilyKind,
    cap: f64,
}

/// A point `ω` of the underlying probability space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OmegaState {
    Constant,
    /// Shift offset in `0..p`.
    Offset(usize),
    /// Phase in `[0, 1)`.
    Phase(f64),
    Stream { stream: u64, position: i64 },
}

impl ErgodicFamily {
    pub fn new(kind: FamilyKind, cap: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&cap) {
            return Err(Error::InvalidFamily(format!("cap {cap} must lie in [0, 1)")));
        }
        let check = |modulus: f64, what: &str| {
            if !modulus.is_finite() || modulus > cap {
                Err(Error::InvalidFamily(format!(
                    "{what} has modulus {modulus}, above the cap {cap}"
                )))
            } else {
                Ok(())
            }
        };
        match &kind {
            FamilyKind::Constant { alpha } => check(alpha.norm(), "constant coefficient")?,
            FamilyKind::Periodic { alphas } => {
                if alphas.is_empty() {
                    return Err(Error::InvalidFamily("empty period".into()));
                }
                for a in alphas {
                    check(a.norm(), "periodic coefficient")?;
                }
            }
            FamilyKind::Quasiperiodic {
                coupling,
                frequency,
                phase,
            } => {
                check(coupling.abs(), "coupling")?;
                if !(*frequency > 0.0 && *frequency < 1.0) {
                    return Err(Error::InvalidFamily(format!(
                        "frequency {frequency} must lie in (0, 1)"
                    )));
                }
                if !phase.is_finite() {
                    return Err(Error::InvalidFamily("phase must be finite".into()));
                }
            }
            FamilyKind::RandomIid { radius, .. } => {
                if *radius < 0.0 {
                    return Err(Error::InvalidFamily("negative radius".into()));
                }
                check(*radius, "radius")?;
            }
        }
        Ok(Self { kind, cap })
    }

    /// Constant family with the tightest admissible cap.
    pub fn constant(alpha: Complex64) -> Result<Self> {
        Self::new(FamilyKind::Constant { alpha }, alpha.norm())
    }

    pub fn periodic(alphas: Vec<Complex64>) -> Result<Self> {
        let cap = alphas.iter().map(|a| a.norm()).fold(0.0, f64::max);
        Self::new(FamilyKind::Periodic { alphas }, cap)
    }

    pub fn quasiperiodic(coupling: f64, frequency: f64, phase: f64) -> Result<Self> {
        Self::new(
            FamilyKind::Quasiperiodic {
                coupling,
                frequency,
                phase,
            },
            coupling.abs(),
        )
    }

    pub fn random_iid(radius: f64, seed: u64) -> Result<Self> {
        Self::new(FamilyKind::RandomIid { radius, seed }, radius)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Length of the shift orbit for families with a finite one.
    pub fn period(&self) -> Option<usize> {
        match &self.kind {
            FamilyKind::Constant { .. } => Some(1),
            FamilyKind::Periodic { alphas } => Some(alphas.len()),
            _ => None,
        }
    }

    /// The reference point `ω₀` of the family.
    pub fn base_state(&self) -> OmegaState {
        match &self.kind {
            FamilyKind::Constant { .. } => OmegaState::Constant,
            FamilyKind::Periodic { .. } => OmegaState::Offset(0),
            FamilyKind::Quasiperiodic { phase, .. } => OmegaState::Phase(wrap_unit(*phase)),
            FamilyKind::RandomIid { .. } => OmegaState::Stream {
                stream: 0,
                position: 0,
            },
        }
    }

    /// The shift `S`.
    pub fn shift(&self, state: &OmegaState) -> OmegaState {
        match (&self.kind, *state) {
            (FamilyKind::Periodic { alphas }, OmegaState::Offset(k)) => {
                OmegaState::Offset((k + 1) % alphas.len())
            }
            (FamilyKind::Quasiperiodic { frequency, .. }, OmegaState::Phase(phi)) => {
                OmegaState::Phase(wrap_unit(phi + frequency))
            }
            (_, OmegaState::Stream { stream, position }) => OmegaState::Stream {
                stream,
                position: position + 1,
            },
            (_, s) => s,
        }
    }

    /// `α_n(ω)` for any integer `n`.
    pub fn alpha_at(&self, state: &OmegaState, n: i64) -> Complex64 {
        match (&self.kind, *state) {
            (FamilyKind::Constant { alpha }, _) => *alpha,
            (FamilyKind::Periodic { alphas }, s) => {
                let p = alphas.len() as i64;
                let offset = match s {
                    OmegaState::Offset(k) => k as i64,
                    _ => 0,
                };
                alphas[(n + offset).rem_euclid(p) as usize]
            }
            (
                FamilyKind::Quasiperiodic {
                    coupling,
                    frequency,
                    phase,
                },
                s,
            ) => {
                let phi = match s {
                    OmegaState::Phase(phi) => phi,
                    _ => *phase,
                };
                quasiperiodic_alpha(*coupling, *frequency, phi, n)
            }
            (FamilyKind::RandomIid { radius, seed }, s) => {
                let (stream, position) = match s {
                    OmegaState::Stream { stream, position } => (stream, position),
                    _ => (0, 0),
                };
                let mut rng = coefficient_rng(*seed, stream, position + n);
                disk_draw(&mut rng, *radius)
            }
        }
    }

    /// `α_start(ω), …, α_{start+len-1}(ω)`; identical to repeated [`alpha_at`]
    /// but generates random streams sequentially.
    ///
    /// [`alpha_at`]: ErgodicFamily::alpha_at
    pub fn coefficients(&self, state: &OmegaState, start: i64, len: usize) -> Vec<Complex64> {
        match (&self.kind, *state) {
            (FamilyKind::RandomIid { radius, seed }, s) => {
                let (stream, position) = match s {
                    OmegaState::Stream { stream, position } => (stream, position),
                    _ => (0, 0),
                };
                let mut rng = coefficient_rng(*seed, stream, position + start);
                (0..len).map(|_| disk_draw(&mut rng, *radius)).collect()
            }
            _ => (0..len as i64)
                .map(|j| self.alpha_at(state, start + j))
                .collect(),
        }
    }
}

fn quasiperiodic_alpha(coupling: f64, frequency: f64, phase: f64, n: i64) -> Complex64 {
    let turns = wrap_unit(phase + (n as f64) * frequency);
    Complex64::from_polar(coupling, TAU * turns)
}

/// Each coefficient consumes four 32-bit words of the ChaCha keystream at a
/// position determined by its index alone.
fn coefficient_rng(seed: u64, stream: u64, index: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let offset_index = (index as i128 + (1i128 << 63)) as u64;
    rng.set_word_pos(4 * offset_index as u128);
    rng
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform area measure on the closed disk of the given radius.
fn disk_draw(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let u = unit_f64(rng);
    let v = unit_f64(rng);
    Complex64::from_polar(radius * u.sqrt(), TAU * v)
}

/// How `𝔼(·) = ∫_Ω · dμ` is realized.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case"))]
pub enum SamplingPlan {
    /// Uniform average over the shift orbit of a constant or periodic family.
    ExactPeriodic,
    MonteCarlo { samples: usize, seed: u64 },
}

impl SamplingPlan {
    pub fn validate(&self, family: &ErgodicFamily) -> Result<()> {
        match self {
            SamplingPlan::ExactPeriodic if family.period().is_none() => {
                Err(Error::ExactPlanUnsupported)
            }
            SamplingPlan::MonteCarlo { samples: 0, .. } => {
                Err(Error::InvalidPlan("Monte Carlo sample count must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SamplingPlan::ExactPeriodic)
    }

    /// The sample points `ω_j` of the plan, in a fixed order.
    pub fn states(&self, family: &ErgodicFamily) -> Result<Vec<OmegaState>> {
        self.validate(family)?;
        match *self {
            SamplingPlan::ExactPeriodic => {
                let p = family.period().ok_or(Error::ExactPlanUnsupported)?;
                Ok(match family.kind() {
                    FamilyKind::Constant { .. } => alloc::vec![OmegaState::Constant],
                    _ => (0..p).map(OmegaState::Offset).collect(),
                })
            }
            SamplingPlan::MonteCarlo { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..samples)
                    .map(|_| match family.kind() {
                        FamilyKind::Constant { .. } => OmegaState::Constant,
                        FamilyKind::Periodic { alphas } => {
                            OmegaState::Offset((unit_f64(&mut rng) * alphas.len() as f64) as usize)
                        }
                        FamilyKind::Quasiperiodic { .. } => OmegaState::Phase(unit_f64(&mut rng)),
                        FamilyKind::RandomIid { .. } => OmegaState::Stream {
                            stream: rng.next_u64(),
                            position: 0,
                        },
                    })
                    .collect())
            }
        }
    }
}

/// A plan average with its standard error (zero for exact plans).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    /// Sample mean of `values`, summed in index order.
    pub fn from_samples(values: &[Complex64], exact: bool) -> Self {
        let m = values.len();
        if m == 0 {
            return Self {
                mean: Complex64::new(f64::NAN, f64::NAN),
                std_error: f64::NAN,
                samples: 0,
            };
        }
        let mean = values.iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v) / m as f64;
        let std_error = if exact || m < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean).norm_sqr()).sum();
            (ss / ((m - 1) as f64 * m as f64)).sqrt()
        };
        Self {
            mean,
            std_error,
            samples: m,
        }
    }
}

/// `𝔼(observable)` under the plan.
pub fn expectation<E, F>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    observable: F,
) -> Result<Estimate>
where
    E: Executor,
    F: Fn(&OmegaState) -> Complex64 + Sync + Send,
{
    try_expectation(family, plan, exec, |s| Ok(observable(s)))
}

/// As [`expectation`], for observables that can fail; the first failure in
/// sample order is returned.
pub fn try_expectation<E, F>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    observable: F,
) -> Result<Estimate>
where
    E: Executor,
    F: Fn(&OmegaState) -> Result<Complex64> + Sync + Send,
{
    let states = plan.states(family)?;
    let values = exec
        .map(states.len(), |j| observable(&states[j]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_samples(&values, plan.is_exact()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const GOLDEN: f64 = 0.6180339887;

    #[test]
    fn constant_zero_is_free() {
        let fam = ErgodicFamily::constant(c(0.0, 0.0)).unwrap();
        assert_eq!(fam.alpha_at(&fam.base_state(), 7), c(0.0, 0.0));
    }

    #[test]
    fn periodic_index_wraps() {
        let fam = ErgodicFamily::periodic(vec![c(0.3, 0.0), c(0.0, -0.4)]).unwrap();
        assert_eq!(fam.alpha_at(&OmegaState::Offset(0), 3), c(0.0, -0.4));
        assert_eq!(fam.alpha_at(&OmegaState::Offset(0), -1), c(0.0, -0.4));
        assert_eq!(fam.alpha_at(&OmegaState::Offset(1), 0), c(0.0, -0.4));
    }

    #[test]
    fn quasiperiodic_direct_vs_shift() {
        let fam = ErgodicFamily::quasiperiodic(0.2, GOLDEN, 0.0).unwrap();
        let direct = fam.alpha_at(&fam.base_state(), 1);
        let expected = Complex64::from_polar(0.2, TAU * GOLDEN);
        assert!((direct - expected).norm() < 1e-15);
        let shifted = fam.shift(&fam.base_state());
        assert!((fam.alpha_at(&shifted, 0) - direct).norm() < 1e-15);
    }

    #[test]
    fn rejects_cap_violations() {
        assert!(ErgodicFamily::new(FamilyKind::Constant { alpha: c(0.6, 0.0) }, 0.5).is_err());
        assert!(ErgodicFamily::constant(c(1.0, 0.0)).is_err());
        assert!(ErgodicFamily::periodic(vec![]).is_err());
        assert!(ErgodicFamily::quasiperiodic(0.2, 1.5, 0.0).is_err());
        assert!(ErgodicFamily::random_iid(1.0, 3).is_err());
    }

    #[test]
    fn random_coefficients_respect_cap_and_bulk_matches_pointwise() {
        let fam = ErgodicFamily::random_iid(0.5, 42).unwrap();
        let state = OmegaState::Stream {
            stream: 9,
            position: -3,
        };
        let bulk = fam.coefficients(&state, -20, 64);
        for (j, a) in bulk.iter().enumerate() {
            assert!(a.norm() <= 0.5);
            assert_eq!(*a, fam.alpha_at(&state, -20 + j as i64));
        }
    }

    #[test]
    fn exact_plan_rejected_for_aperiodic() {
        let fam = ErgodicFamily::quasiperiodic(0.2, GOLDEN, 0.0).unwrap();
        assert_eq!(
            SamplingPlan::ExactPeriodic.states(&fam),
            Err(Error::ExactPlanUnsupported)
        );
        let fam = ErgodicFamily::constant(c(0.1, 0.0)).unwrap();
        assert!(SamplingPlan::MonteCarlo { samples: 0, seed: 1 }
            .states(&fam)
            .is_err());
    }

    #[test]
    fn exact_expectations() {
        let fam = ErgodicFamily::constant(c(0.5, 0.0)).unwrap();
        let e = expectation(&fam, &SamplingPlan::ExactPeriodic, &Sequential, |s| {
            c(fam.alpha_at(s, 0).norm_sqr(), 0.0)
        })
        .unwrap();
        assert_eq!(e.mean, c(0.25, 0.0));
        assert_eq!(e.std_error, 0.0);

        let fam = ErgodicFamily::periodic(vec![c(0.3, 0.0), c(0.0, -0.4)]).unwrap();
        let e = expectation(&fam, &SamplingPlan::ExactPeriodic, &Sequential, |s| {
            fam.alpha_at(s, 0)
        })
        .unwrap();
        assert!((e.mean - c(0.15, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn monte_carlo_second_moment_of_uniform_disk() {
        // E|α|² = R²/2 for the uniform law on the disk of radius R.
        let fam = ErgodicFamily::random_iid(0.5, 42).unwrap();
        let plan = SamplingPlan::MonteCarlo {
            samples: 10_000,
            seed: 42,
        };
        let e = expectation(&fam, &plan, &Sequential, |s| {
            c(fam.alpha_at(s, 0).norm_sqr(), 0.0)
        })
        .unwrap();
        assert!(e.std_error > 0.0);
        assert!((e.mean.re - 0.125).abs() < 3.0 * e.std_error, "{e:?}");
    }
}

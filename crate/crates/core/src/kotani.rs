//! Cross-checks between independent numerical routes.
//!
//! Each check evaluates two routes on a grid and reports their pointwise
//! discrepancies: eigenvalue counting against Schur boundary values, cocycle
//! growth against Schur functions, and cocycle growth against the
//! logarithmic potential of the density of states.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::boundary::{atom_mass, ladder_radius, CaratheodoryEvaluator, RadialLadder};
use crate::cocycle::{lyapunov, zero_set, CocycleParams, ZeroSetArcs, ZeroSetParams};
use crate::dos::{dos_average_check, pooled_counting_measure, rho_infinity, ThoulessPotential};
use crate::ergodic::{ErgodicFamily, Estimate, OmegaState, SamplingPlan};
use crate::exec::Executor;
use crate::measure::Arc;
use crate::schur::{nu_ac, Depth, Direction, SchurEvaluator};
use crate::{Error, Result, INV_TWO_PI};

/// One grid point of a check: `z = radius·e^{iθ}` with both routes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckPoint {
    pub theta: f64,
    pub radius: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// Both routes met their convergence criteria.
    pub converged: bool,
    /// Within one grid cell of an arc end.
    pub edge: bool,
}

impl CheckPoint {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }

    pub fn signed_discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).re
    }
}

/// Outcome of one cross-check.
///
/// Discrepancy statistics use converged points only and are `None` when
/// there are none. `l1_discrepancy` is the mean absolute discrepancy over
/// the grid; the `_interior` variants drop points flagged `edge`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckReport {
    pub identity: String,
    pub grid: String,
    pub parameters: BTreeMap<String, f64>,
    pub points: Vec<CheckPoint>,
    pub sup_discrepancy: Option<f64>,
    pub l1_discrepancy: Option<f64>,
    pub sup_discrepancy_interior: Option<f64>,
    pub l1_discrepancy_interior: Option<f64>,
    pub mean_signed_discrepancy: Option<f64>,
    pub converged_fraction: f64,
    pub tolerance: f64,
    /// The hypothesis set of the check is empty.
    pub vacuous: bool,
    pub passed: bool,
    /// Named scalar results beyond the per-point data.
    pub evidence: BTreeMap<String, f64>,
    /// Named sequences, such as ladders or margin trends.
    pub series: BTreeMap<String, Vec<f64>>,
    pub components: Vec<CheckReport>,
}

impl CheckReport {
    fn new(identity: &str, grid: String, points: Vec<CheckPoint>, tolerance: f64) -> Self {
        let converged: Vec<&CheckPoint> = points.iter().filter(|p| p.converged).collect();
        let interior: Vec<&CheckPoint> = converged.iter().copied().filter(|p| !p.edge).collect();
        let sup = |ps: &[&CheckPoint]| {
            ps.iter().map(|p| p.discrepancy()).reduce(f64::max)
        };
        let mean = |ps: &[&CheckPoint], f: fn(&CheckPoint) -> f64| {
            (!ps.is_empty()).then(|| ps.iter().map(|p| f(p)).sum::<f64>() / ps.len() as f64)
        };
        let converged_fraction = if points.is_empty() {
            0.0
        } else {
            converged.len() as f64 / points.len() as f64
        };
        let sup_discrepancy = sup(&converged);
        Self {
            identity: identity.into(),
            grid,
            parameters: BTreeMap::new(),
            sup_discrepancy,
            l1_discrepancy: mean(&converged, CheckPoint::discrepancy),
            sup_discrepancy_interior: sup(&interior),
            l1_discrepancy_interior: mean(&interior, CheckPoint::discrepancy),
            mean_signed_discrepancy: mean(&converged, CheckPoint::signed_discrepancy),
            converged_fraction,
            tolerance,
            vacuous: false,
            passed: sup_discrepancy.is_some_and(|s| s <= tolerance),
            evidence: BTreeMap::new(),
            series: BTreeMap::new(),
            components: Vec::new(),
            points,
        }
    }

    fn vacuous(identity: &str, arcs: &ZeroSetArcs, tolerance: f64) -> Self {
        let mut report = Self::new(identity, zero_set_grid(arcs), Vec::new(), tolerance);
        report.vacuous = true;
        report.passed = true;
        report.record_zero_set(arcs);
        report
    }

    fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.into(), value);
        self
    }

    fn record_ladder(&mut self, prefix: &str, ladder: &RadialLadder) {
        self.parameters.insert(format!("{prefix}_m_lo"), ladder.m_lo as f64);
        self.parameters.insert(format!("{prefix}_m_hi"), ladder.m_hi as f64);
        self.parameters.insert(format!("{prefix}_tolerance"), ladder.tolerance);
        self.parameters.insert(format!("{prefix}_spacing_factor"), ladder.spacing_factor);
    }

    fn record_zero_set(&mut self, arcs: &ZeroSetArcs) {
        self.parameters.insert("gamma_threshold".into(), arcs.threshold);
        self.parameters.insert("zero_set_grid".into(), arcs.grid as f64);
        self.parameters.insert("margin_cells".into(), arcs.margin as f64);
        self.evidence.insert("min_gamma".into(), arcs.min_gamma());
        self.evidence.insert("zero_set_length".into(), arcs.length());
        self.series.insert("gamma_grid".into(), arcs.gamma.clone());
        self.series.insert(
            "zero_set_arcs".into(),
            arcs.raw_arcs.iter().flat_map(|a| [a.lo, a.hi]).collect(),
        );
    }
}

fn zero_set_grid(arcs: &ZeroSetArcs) -> String {
    format!(
        "angles 2πj/{} inside {} arc(s) of γ < {:e}, shrunk by {} cell(s)",
        arcs.grid,
        arcs.arcs.len(),
        arcs.threshold,
        arcs.margin
    )
}

/// Whether `theta` lies within one grid cell of an end of `arcs`.
fn near_arc_end(arcs: &[Arc], theta: f64, cell: f64) -> bool {
    arcs.iter().filter(|a| !a.is_full()).any(|a| {
        crate::angle::circle_distance(theta, a.lo) < cell - 1e-12
            || crate::angle::circle_distance(theta, a.hi) < cell - 1e-12
    })
}

fn plan_mean<E, F>(states: &[OmegaState], exact: bool, exec: &E, f: F) -> Result<Estimate>
where
    E: Executor,
    F: Fn(&OmegaState) -> Result<Complex64> + Sync + Send,
{
    let values = exec
        .map(states.len(), |j| f(&states[j]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_samples(&values, exact))
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn minus_one() -> Complex64 {
    real(-1.0)
}

/// A grid of points `r·e^{2πik/angles}` for each radius (a single point
/// for `r = 0`) followed by explicit extra points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DiskGrid {
    pub radii: Vec<f64>,
    pub angles: usize,
    pub extra: Vec<Complex64>,
}

impl Default for DiskGrid {
    fn default() -> Self {
        Self {
            radii: alloc::vec![0.9],
            angles: 16,
            extra: alloc::vec![real(0.0)],
        }
    }
}

impl DiskGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for &r in &self.radii {
            if r == 0.0 {
                out.push(real(0.0));
            } else {
                out.extend(
                    (0..self.angles).map(|k| Complex64::from_polar(r, TAU * k as f64 / self.angles as f64)),
                );
            }
        }
        out.extend(self.extra.iter().copied());
        out
    }

    fn validate(&self, max_radius: f64) -> Result<()> {
        let points = self.points();
        if points.is_empty() {
            return Err(Error::InvalidParameter("point grid is empty".into()));
        }
        for z in points {
            if !z.norm().is_finite() || z.norm() > max_radius {
                return Err(Error::InvalidParameter(format!(
                    "grid point of modulus {} exceeds {max_radius}",
                    z.norm()
                )));
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!(
            "{} angle(s) on radii {:?} plus {} extra point(s)",
            self.angles,
            self.radii,
            self.extra.len()
        )
    }
}

fn point_at(z: Complex64, lhs: Complex64, rhs: Complex64) -> CheckPoint {
    CheckPoint {
        theta: crate::angle::wrap_angle(z.arg()),
        radius: z.norm(),
        lhs,
        rhs,
        converged: lhs.re.is_finite() && rhs.re.is_finite(),
        edge: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Theorem1Params {
    /// Half-width of the truncation windows.
    pub n: usize,
    pub beta: Complex64,
    pub zero_set: ZeroSetParams,
    /// Ladder for the DOS side; atomic, so capped by the atom spacing.
    pub dos_ladder: RadialLadder,
    pub schur_ladder: RadialLadder,
    pub depth: Depth,
    pub rho_length: usize,
    pub tolerance: f64,
}

impl Default for Theorem1Params {
    fn default() -> Self {
        Self {
            n: 400,
            beta: minus_one(),
            zero_set: ZeroSetParams::default(),
            dos_ladder: RadialLadder {
                tolerance: 1e-2,
                ..RadialLadder::default()
            },
            schur_ladder: RadialLadder::default(),
            depth: Depth::default(),
            rho_length: 10_000,
            tolerance: 5e-2,
        }
    }
}

fn validate_common(n: usize, tolerance: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("window half-width must be positive".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    Ok(())
}

fn thouless_potential<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    n: usize,
    beta: Complex64,
    rho_length: usize,
) -> Result<ThoulessPotential> {
    let dos = pooled_counting_measure(family, plan, exec, n, beta)?;
    ThoulessPotential::new(dos, rho_infinity(family, plan, exec, rho_length)?)
}

/// `k_ac(θ)` from the DOS against `𝔼(ν_ac(θ))` from Schur functions on the
/// margin-shrunk zero set of `γ`.
pub fn theorem1_check<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    params: &Theorem1Params,
) -> Result<CheckReport> {
    validate_common(params.n, params.tolerance)?;
    params.dos_ladder.validate()?;
    params.schur_ladder.validate()?;
    let arcs = zero_set(family, plan, exec, &params.zero_set)?;
    let mut report = if arcs.is_empty() {
        CheckReport::vacuous("theorem1", &arcs, params.tolerance)
    } else {
        let potential = thouless_potential(family, plan, exec, params.n, params.beta, params.rho_length)?;
        let states = plan.states(family)?;
        let angles = arcs.interior_angles();
        let evaluated = exec
            .map(angles.len(), |j| -> Result<CheckPoint> {
                let theta = angles[j];
                let k = potential.k_ac(theta, &params.dos_ladder)?;
                let mut all_converged = k.converged;
                let mut values = Vec::with_capacity(states.len());
                for s in &states {
                    let nu = nu_ac(family, s, theta, &params.schur_ladder, params.depth)?;
                    all_converged &= nu.converged;
                    values.push(real(nu.value));
                }
                Ok(CheckPoint {
                    theta,
                    radius: 1.0,
                    lhs: real(k.value),
                    rhs: Estimate::from_samples(&values, plan.is_exact()).mean,
                    converged: all_converged,
                    edge: near_arc_end(&arcs.arcs, theta, arcs.cell()),
                })
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mut report = CheckReport::new("theorem1", zero_set_grid(&arcs), evaluated, params.tolerance);
        report.record_zero_set(&arcs);
        let centered = report
            .mean_signed_discrepancy
            .is_some_and(|m| m.abs() <= params.tolerance);
        report.passed &= centered;
        let positive = report
            .points
            .iter()
            .filter(|p| p.converged && p.signed_discrepancy() > 0.0)
            .count();
        let converged = report.points.iter().filter(|p| p.converged).count();
        if converged > 0 {
            report
                .evidence
                .insert("positive_fraction".into(), positive as f64 / converged as f64);
        }
        report
            .evidence
            .insert("dos_resolution".into(), potential.dos.mean_spacing());
        report
    };
    report.record_ladder("dos_ladder", &params.dos_ladder);
    report.record_ladder("schur_ladder", &params.schur_ladder);
    Ok(report
        .with_parameter("n", params.n as f64)
        .with_parameter("cocycle_length", params.zero_set.length as f64)
        .with_parameter("samples", plan.states(family)?.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BigcalcParams {
    pub n: usize,
    pub beta: Complex64,
    pub zero_set: ZeroSetParams,
    pub dos_ladder: RadialLadder,
    /// Rungs `m` of `r = 1 − 2^{−m}` for the off-circle exponent.
    pub ladder: RadialLadder,
    /// Angles to test; empty selects `points` evenly spread interior angles.
    pub thetas: Vec<f64>,
    pub points: usize,
    /// Minimum cocycle length per rung.
    pub base_length: usize,
    /// The length at radius `r` is at least `length_factor/(1 − r)`, and the
    /// same number of burn-in steps is discarded.
    pub length_factor: f64,
    pub plateau_tolerance: f64,
    pub plateau_rungs: usize,
    pub rho_length: usize,
    pub tolerance: f64,
}

impl Default for BigcalcParams {
    fn default() -> Self {
        Self {
            n: 400,
            beta: minus_one(),
            zero_set: ZeroSetParams::default(),
            dos_ladder: RadialLadder {
                tolerance: 1e-2,
                ..RadialLadder::default()
            },
            ladder: RadialLadder::default(),
            thetas: Vec::new(),
            points: 8,
            base_length: 10_000,
            length_factor: 64.0,
            plateau_tolerance: 1e-2,
            plateau_rungs: 3,
            rho_length: 10_000,
            tolerance: 1e-1,
        }
    }
}

/// The highest window of `rungs` consecutive values spanning at most
/// `tolerance`, as `(first index, mean)`.
pub fn find_plateau(values: &[f64], rungs: usize, tolerance: f64) -> Option<(usize, f64)> {
    if rungs == 0 || values.len() < rungs {
        return None;
    }
    (0..=values.len() - rungs).rev().find_map(|start| {
        let window = &values[start..start + rungs];
        let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo <= tolerance).then(|| (start, window.iter().sum::<f64>() / rungs as f64))
    })
}

/// `1/(2π) + γ(re^{iθ})/(π(1 − r))` along the ladder, with `γ` from
/// burned-in cocycle products.
pub fn bigcalc_ladder<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    theta: f64,
    params: &BigcalcParams,
) -> Result<Vec<(f64, f64)>> {
    params.ladder.validate()?;
    (params.ladder.m_lo..=params.ladder.m_hi)
        .map(|m| {
            let r = ladder_radius(m);
            let length = params
                .base_length
                .max((params.length_factor / (1.0 - r)).ceil() as usize);
            let cocycle = CocycleParams {
                burn_in: length,
                ..CocycleParams::default()
            };
            let z = Complex64::from_polar(r, theta);
            let gamma = lyapunov(family, plan, exec, z, length, &cocycle)?.value;
            Ok((r, INV_TWO_PI + gamma / (PI * (1.0 - r))))
        })
        .collect()
}

fn spread(angles: &[f64], count: usize) -> Vec<f64> {
    if angles.len() <= count {
        return angles.to_vec();
    }
    (0..count)
        .map(|k| angles[(2 * k + 1) * angles.len() / (2 * count)])
        .collect()
}

/// `k_ac(θ)` against the plateau of the off-circle Lyapunov ladder.
pub fn bigcalc_check<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    params: &BigcalcParams,
) -> Result<CheckReport> {
    validate_common(params.n, params.tolerance)?;
    params.ladder.validate()?;
    params.dos_ladder.validate()?;
    if params.plateau_rungs < 2 || !(params.plateau_tolerance > 0.0) || !(params.length_factor > 0.0) {
        return Err(Error::InvalidParameter(
            "plateau needs at least two rungs and positive tolerance and length factor".into(),
        ));
    }
    let arcs = zero_set(family, plan, exec, &params.zero_set)?;
    let thetas = if params.thetas.is_empty() {
        spread(&arcs.interior_angles(), params.points)
    } else {
        params.thetas.clone()
    };
    let mut report = if arcs.is_empty() && params.thetas.is_empty() {
        CheckReport::vacuous("bigcalc", &arcs, params.tolerance)
    } else {
        let potential = thouless_potential(family, plan, exec, params.n, params.beta, params.rho_length)?;
        let mut ladders = Vec::with_capacity(thetas.len());
        let mut points = Vec::with_capacity(thetas.len());
        let mut plateau_found = true;
        for &theta in &thetas {
            let ladder = bigcalc_ladder(family, plan, exec, theta, params)?;
            let values: Vec<f64> = ladder.iter().map(|(_, v)| *v).collect();
            let plateau = find_plateau(&values, params.plateau_rungs, params.plateau_tolerance);
            plateau_found &= plateau.is_some();
            let k = potential.k_ac(theta, &params.dos_ladder)?;
            points.push(CheckPoint {
                theta,
                radius: 1.0,
                lhs: real(k.value),
                rhs: real(plateau.map_or(values[values.len() - 1], |p| p.1)),
                converged: plateau.is_some(),
                edge: near_arc_end(&arcs.arcs, theta, arcs.cell()),
            });
            ladders.push(values);
        }
        let description = format!("{} angle(s) in the zero set; {}", thetas.len(), zero_set_grid(&arcs));
        let mut report = CheckReport::new("bigcalc", description, points, params.tolerance);
        report.passed &= plateau_found;
        report.record_zero_set(&arcs);
        for (theta, values) in thetas.iter().zip(ladders) {
            report.series.insert(format!("ladder_theta_{theta:.6}"), values);
        }
        report
    };
    report.record_ladder("ladder", &params.ladder);
    report.record_ladder("dos_ladder", &params.dos_ladder);
    Ok(report
        .with_parameter("n", params.n as f64)
        .with_parameter("base_length", params.base_length as f64)
        .with_parameter("length_factor", params.length_factor)
        .with_parameter("plateau_tolerance", params.plateau_tolerance)
        .with_parameter("plateau_rungs", params.plateau_rungs as f64)
        .with_parameter("samples", plan.states(family)?.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GammaSchurParams {
    pub grid: DiskGrid,
    pub length: usize,
    pub cocycle: CocycleParams,
    pub depth: Depth,
    pub tolerance: f64,
}

impl Default for GammaSchurParams {
    fn default() -> Self {
        Self {
            grid: DiskGrid {
                radii: alloc::vec![0.0, 0.3, 0.6, 0.9],
                angles: 8,
                extra: Vec::new(),
            },
            length: 10_000,
            cocycle: CocycleParams::default(),
            depth: Depth::default(),
            tolerance: 1e-2,
        }
    }
}

/// `γ(z)` from cocycle products against `½𝔼 log((1 − |z f_+|²)/(1 − |f_+|²))`.
pub fn gamma_schur_check<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    params: &GammaSchurParams,
) -> Result<CheckReport> {
    params.grid.validate(0.95)?;
    validate_common(params.length, params.tolerance)?;
    let states = plan.states(family)?;
    let zs = params.grid.points();
    let mut points = Vec::with_capacity(zs.len());
    for &z in &zs {
        let lhs = lyapunov(family, plan, exec, z, params.length, &params.cocycle)?.value;
        let rhs = plan_mean(&states, plan.is_exact(), exec, |s| {
            let f = SchurEvaluator::new(family, *s, Direction::Plus, params.depth).eval(z)?;
            let num = 1.0 - (z * f).norm_sqr();
            let den = 1.0 - f.norm_sqr();
            Ok(real(0.5 * (num / den).ln()))
        })?
        .mean;
        points.push(point_at(z, real(lhs), rhs));
    }
    Ok(CheckReport::new("gamma_schur", params.grid.describe(), points, params.tolerance)
        .with_parameter("cocycle_length", params.length as f64)
        .with_parameter("samples", states.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ThoulessParams {
    pub n: usize,
    pub beta: Complex64,
    pub grid: DiskGrid,
    pub length: usize,
    pub cocycle: CocycleParams,
    pub rho_length: usize,
    /// Extra points for the averaged Green comparison, beside the grid
    /// points inside the disk.
    pub green_points: Vec<Complex64>,
    pub tolerance: f64,
    pub green_tolerance: f64,
}

impl Default for ThoulessParams {
    fn default() -> Self {
        Self {
            n: 200,
            beta: minus_one(),
            grid: DiskGrid::default(),
            length: 10_000,
            cocycle: CocycleParams::default(),
            rho_length: 10_000,
            green_points: alloc::vec![real(0.4), Complex64::new(0.0, 0.3), Complex64::new(-0.2, -0.5)],
            tolerance: 5e-2,
            green_tolerance: 1e-3,
        }
    }
}

/// `γ(z)` from cocycle products against `Re Γ(z)` from the DOS, with the
/// averaged Green comparison as a component.
pub fn thouless_check<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    params: &ThoulessParams,
) -> Result<CheckReport> {
    validate_common(params.n, params.tolerance)?;
    params.grid.validate(f64::MAX)?;
    if !(params.green_tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let potential = thouless_potential(family, plan, exec, params.n, params.beta, params.rho_length)?;
    let zs = params.grid.points();
    let mut points = Vec::with_capacity(zs.len());
    let mut excluded = 0;
    for &z in &zs {
        let lhs = lyapunov(family, plan, exec, z, params.length, &params.cocycle)?.value;
        let rhs = potential.gamma(z);
        excluded += rhs.excluded;
        points.push(point_at(z, real(lhs), real(rhs.value)));
    }
    let mut report = CheckReport::new("thouless", params.grid.describe(), points, params.tolerance)
        .with_parameter("n", params.n as f64)
        .with_parameter("cocycle_length", params.length as f64)
        .with_parameter("rho_length", params.rho_length as f64)
        .with_parameter("samples", plan.states(family)?.len() as f64);
    report.evidence.insert("rho_infinity".into(), potential.rho_infinity);
    report.evidence.insert("excluded_atoms".into(), excluded as f64);

    let green_zs: Vec<Complex64> = zs
        .iter()
        .copied()
        .filter(|z| z.norm() < 1.0)
        .chain(params.green_points.iter().copied())
        .collect();
    let pairs = dos_average_check(family, plan, exec, params.n, params.beta, &green_zs)?;
    let green_points = pairs.iter().map(|g| point_at(g.z, g.lhs, g.rhs)).collect();
    let green = CheckReport::new(
        "averaged_green",
        format!("{} point(s) in the disk", green_zs.len()),
        green_points,
        params.green_tolerance,
    )
    .with_parameter("n", params.n as f64);
    report.components.push(green);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CorollaryParams {
    pub n: usize,
    pub beta: Complex64,
    /// Arc ends are taken from here; its `margin` is ignored in favour of
    /// `margins`.
    pub zero_set: ZeroSetParams,
    /// Margins in grid cells, reported as a trend; the verdict uses the last.
    pub margins: Vec<usize>,
    /// Number of angles `2πj/probe_grid` for the atom probe.
    pub probe_grid: usize,
    /// Runs down to about one atom spacing, where a finite-volume atom
    /// reads as its own weight `O(1/n)`.
    pub probe_ladder: RadialLadder,
    pub schur_ladder: RadialLadder,
    pub depth: Depth,
    /// Gauss–Chebyshev nodes per arc.
    pub quadrature_nodes: usize,
    pub atom_tolerance: f64,
    pub zero_set_mass_min: f64,
    pub chain_min: f64,
    pub chain_max: f64,
}

impl Default for CorollaryParams {
    fn default() -> Self {
        Self {
            n: 400,
            beta: minus_one(),
            zero_set: ZeroSetParams::default(),
            margins: alloc::vec![4, 2, 1, 0],
            probe_grid: 256,
            probe_ladder: RadialLadder {
                spacing_factor: 1.0,
                ..RadialLadder::default()
            },
            schur_ladder: RadialLadder {
                m_hi: 12,
                ..RadialLadder::default()
            },
            depth: Depth::default(),
            quadrature_nodes: 32,
            atom_tolerance: 1e-2,
            zero_set_mass_min: 0.98,
            chain_min: 0.95,
            chain_max: 1.05,
        }
    }
}

/// Gauss–Chebyshev nodes and weights for `∫ f dθ` over an arc; the weight
/// absorbs the inverse square root singularities at band edges. A full
/// circle uses the periodic trapezoid rule.
pub fn arc_quadrature(arc: &Arc, nodes: usize) -> Vec<(f64, f64)> {
    if arc.is_full() {
        let h = TAU / nodes as f64;
        return (0..nodes).map(|k| (k as f64 * h, h)).collect();
    }
    let mid = 0.5 * (arc.lo + arc.hi);
    let half = 0.5 * (arc.hi - arc.lo);
    (1..=nodes)
        .map(|k| {
            let angle = (2 * k - 1) as f64 * PI / (2 * nodes) as f64;
            let x = angle.cos();
            (mid + half * x, half * PI / nodes as f64 * angle.sin())
        })
        .collect()
}

/// The mass chain: the DOS atom probe, the DOS mass of the zero set and
/// `∫_𝒵 𝔼(ν_ac) dθ`, the last two over a trend of margins.
pub fn corollary_check<E: Executor>(
    family: &ErgodicFamily,
    plan: &SamplingPlan,
    exec: &E,
    params: &CorollaryParams,
) -> Result<CheckReport> {
    validate_common(params.n, params.atom_tolerance)?;
    params.probe_ladder.validate()?;
    params.schur_ladder.validate()?;
    if params.margins.is_empty() || params.probe_grid == 0 || params.quadrature_nodes == 0 {
        return Err(Error::InvalidParameter(
            "corollary needs margins, probe angles and quadrature nodes".into(),
        ));
    }
    let arcs = zero_set(family, plan, exec, &params.zero_set)?;
    let states = plan.states(family)?;
    let dos = pooled_counting_measure(family, plan, exec, params.n, params.beta)?;
    let evaluator = CaratheodoryEvaluator::Atomic(&dos);

    let probe_cell = TAU / params.probe_grid as f64;
    let probes = exec
        .map(params.probe_grid, |j| {
            let theta = j as f64 * probe_cell;
            let mass = atom_mass(&evaluator, theta, &params.probe_ladder)?;
            Ok(CheckPoint {
                theta,
                radius: 1.0,
                lhs: real(mass),
                rhs: real(0.0),
                converged: mass.is_finite(),
                edge: near_arc_end(&arcs.raw_arcs, theta, probe_cell),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut zone_mass = Vec::with_capacity(params.margins.len());
    let mut chain = Vec::with_capacity(params.margins.len());
    for &margin in &params.margins {
        let shrunk = arcs.shrunk(margin);
        zone_mass.push(dos.mass_in_arcs(&shrunk));
        let nodes: Vec<(f64, f64)> = shrunk
            .iter()
            .flat_map(|a| arc_quadrature(a, params.quadrature_nodes))
            .collect();
        let values = exec
            .map(nodes.len(), |k| -> Result<f64> {
                let mut sum = 0.0;
                for s in &states {
                    sum += nu_ac(family, s, nodes[k].0, &params.schur_ladder, params.depth)?.value;
                }
                Ok(sum / states.len() as f64)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        chain.push(nodes.iter().zip(&values).map(|((_, w), v)| w * v).fold(0.0, |acc, x| acc + x));
    }

    let mut report = CheckReport::new(
        "corollary",
        format!(
            "atom probe at 2πj/{}; {} margin setting(s) on {}",
            params.probe_grid,
            params.margins.len(),
            zero_set_grid(&arcs)
        ),
        probes,
        params.atom_tolerance,
    );
    let probe = report.sup_discrepancy.unwrap_or(f64::INFINITY);
    let mass = zone_mass[zone_mass.len() - 1];
    let integral = chain[chain.len() - 1];
    let hypotheses = probe <= params.atom_tolerance && mass >= params.zero_set_mass_min;
    let chain_holds = integral >= params.chain_min && integral <= params.chain_max;
    report.vacuous = !hypotheses;
    report.passed = !hypotheses || chain_holds;
    report.record_zero_set(&arcs);
    report.evidence.insert("atom_probe".into(), probe);
    if let Some(p) = report.sup_discrepancy_interior {
        report.evidence.insert("atom_probe_interior".into(), p);
    }
    report.evidence.insert("zero_set_mass".into(), mass);
    report.evidence.insert("chain_integral".into(), integral);
    report
        .evidence
        .insert("hypotheses_hold".into(), if hypotheses { 1.0 } else { 0.0 });
    report
        .evidence
        .insert("chain_holds".into(), if chain_holds { 1.0 } else { 0.0 });
    report
        .series
        .insert("margins".into(), params.margins.iter().map(|m| *m as f64).collect());
    report.series.insert("zero_set_mass".into(), zone_mass);
    report.series.insert("chain_integral".into(), chain);
    report.record_ladder("probe_ladder", &params.probe_ladder);
    report.record_ladder("schur_ladder", &params.schur_ladder);
    Ok(report
        .with_parameter("n", params.n as f64)
        .with_parameter("cocycle_length", params.zero_set.length as f64)
        .with_parameter("quadrature_nodes", params.quadrature_nodes as f64)
        .with_parameter("zero_set_mass_min", params.zero_set_mass_min)
        .with_parameter("chain_min", params.chain_min)
        .with_parameter("chain_max", params.chain_max)
        .with_parameter("samples", states.len() as f64))
}

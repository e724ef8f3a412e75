//! Executes a resolved run and renders its artifacts.
//!
//! Every artifact is rendered in memory first; files are written only once
//! the whole computation has succeeded.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use cmv_core::boundary::ladder_radius;
use cmv_core::cocycle::{lyapunov, zero_set};
use cmv_core::dos::{density_of_states, rho_infinity, ThoulessPotential};
use cmv_core::ergodic::Estimate;
use cmv_core::exec::Executor;
use cmv_core::kotani::{
    bigcalc_check, corollary_check, gamma_schur_check, theorem1_check, thouless_check, CheckReport,
};
use cmv_core::schur::{nu_ac, reflectionless_defect};
use cmv_core::Complex64;
use serde::Serialize;

use crate::config::{ResolvedRun, TaskParams};
use crate::error::CliError;

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }
}

/// Rendered output of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub report: Option<CheckReport>,
}

/// Seventeen significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize to JSON");
    text.push('\n');
    text
}

struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self(header.join(",") + "\n")
    }

    fn row(&mut self, cells: &[String]) {
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

/// Runs the task and renders the manifest, its CSV files and, for checks,
/// the report.
pub fn execute<E: Executor>(run: &ResolvedRun, exec: &E) -> Result<RunOutput, CliError> {
    let family = &run.family;
    let plan = &run.plan;
    let mut artifacts = vec![Artifact::new("manifest.json", json(&run.manifest))];
    let mut report = None;
    match &run.params {
        TaskParams::Dos(p) => {
            let dos = density_of_states(family, plan, exec, p.n, p.beta)?;
            let mut csv = Csv::new(&["theta", "weight"]);
            for a in dos.measure.atoms() {
                csv.row(&[fmt_f64(a.angle), fmt_f64(a.weight)]);
            }
            artifacts.push(Artifact::new("dos.csv", csv.0));
            let rho = rho_infinity(family, plan, exec, p.rho_length)?;
            let summary = serde_json::json!({
                "volume": dos.volume,
                "samples": dos.samples,
                "atoms": dos.measure.len(),
                "total_mass": dos.measure.total_mass(),
                "max_atom": dos.measure.max_atom(),
                "self_distance": dos.self_distance,
                "kolmogorov_to_uniform": dos.measure.kolmogorov_to_uniform(),
                "rho_infinity": rho,
            });
            let pot = ThoulessPotential::new(dos.measure, rho)?;
            let thetas: Vec<f64> = (0..p.k_ac_angles).map(|k| TAU * k as f64 / p.k_ac_angles as f64).collect();
            let values = exec
                .map(thetas.len(), |j| pot.k_ac(thetas[j], &p.ladder))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            let mut csv = Csv::new(&["theta", "k_ac", "converged"]);
            for (theta, v) in thetas.iter().zip(&values) {
                csv.row(&[fmt_f64(*theta), fmt_f64(v.value), flag(v.converged)]);
            }
            artifacts.push(Artifact::new("k_ac.csv", csv.0));
            let mut csv = Csv::new(&["re_z", "im_z", "gamma_thouless", "excluded_atoms"]);
            for z in p.potential_grid.points() {
                let g = pot.gamma(z);
                csv.row(&[fmt_f64(z.re), fmt_f64(z.im), fmt_f64(g.value), g.excluded.to_string()]);
            }
            artifacts.push(Artifact::new("gamma_thouless.csv", csv.0));
            artifacts.push(Artifact::new("summary.json", json(&summary)));
        }
        TaskParams::Lyapunov(p) => {
            let mut csv = Csv::new(&["re_z", "im_z", "gamma", "std_error", "samples"]);
            for z in p.grid.points() {
                let est = lyapunov(family, plan, exec, z, p.length, &p.cocycle)?;
                csv.row(&[
                    fmt_f64(z.re),
                    fmt_f64(z.im),
                    fmt_f64(est.value),
                    fmt_f64(est.std_error),
                    est.samples.to_string(),
                ]);
            }
            artifacts.push(Artifact::new("lyapunov.csv", csv.0));
        }
        TaskParams::Schur(p) => {
            let thetas: Vec<f64> = if p.thetas.is_empty() {
                (0..p.angles).map(|k| TAU * k as f64 / p.angles as f64).collect()
            } else {
                p.thetas.clone()
            };
            let states = plan.states(family)?;
            let mut csv = Csv::new(&["theta", "nu_ac", "std_error", "converged"]);
            for &theta in &thetas {
                let values = exec
                    .map(states.len(), |j| nu_ac(family, &states[j], theta, &p.ladder, p.depth))
                    .into_iter()
                    .collect::<Result<Vec<_>, _>>()?;
                let samples: Vec<Complex64> = values.iter().map(|v| Complex64::new(v.value, 0.0)).collect();
                let est = Estimate::from_samples(&samples, plan.is_exact());
                let converged = values.iter().all(|v| v.converged);
                csv.row(&[fmt_f64(theta), fmt_f64(est.mean.re), fmt_f64(est.std_error), flag(converged)]);
            }
            artifacts.push(Artifact::new("nu_ac.csv", csv.0));

            let state = family.base_state();
            let mut csv = Csv::new(&["theta", "radius", "defect"]);
            for &theta in &p.defect_thetas {
                for &m in &p.defect_rungs {
                    let r = ladder_radius(m);
                    let d = reflectionless_defect(family, &state, theta, r, p.depth)?;
                    csv.row(&[fmt_f64(theta), fmt_f64(r), fmt_f64(d)]);
                }
            }
            artifacts.push(Artifact::new("defect.csv", csv.0));
        }
        TaskParams::Zeroset(p) => {
            let arcs = zero_set(family, plan, exec, p)?;
            let mut csv = Csv::new(&["theta", "gamma", "std_error", "marked"]);
            for (j, (g, se)) in arcs.gamma.iter().zip(&arcs.std_error).enumerate() {
                let theta = TAU * j as f64 / arcs.grid as f64;
                csv.row(&[fmt_f64(theta), fmt_f64(*g), fmt_f64(*se), flag(*g < arcs.threshold)]);
            }
            artifacts.push(Artifact::new("gamma.csv", csv.0));
            let mut csv = Csv::new(&["kind", "lo", "hi"]);
            for (kind, list) in [("raw", &arcs.raw_arcs), ("shrunk", &arcs.arcs)] {
                for a in list {
                    csv.row(&[kind.into(), fmt_f64(a.lo), fmt_f64(a.hi)]);
                }
            }
            artifacts.push(Artifact::new("arcs.csv", csv.0));
        }
        TaskParams::Theorem1(p) => report = Some(theorem1_check(family, plan, exec, p)?),
        TaskParams::Identities(p) => {
            let components = vec![
                thouless_check(family, plan, exec, &p.thouless)?,
                gamma_schur_check(family, plan, exec, &p.gamma_schur)?,
                bigcalc_check(family, plan, exec, &p.bigcalc)?,
            ];
            report = Some(combine("identities", components));
        }
        TaskParams::Corollary(p) => report = Some(corollary_check(family, plan, exec, p)?),
    }
    if let Some(r) = &report {
        artifacts.push(Artifact::new("report.json", json(r)));
        artifacts.push(Artifact::new("points.csv", points_csv(r)));
    }
    Ok(RunOutput { artifacts, report })
}

/// A report that passes when every component passes and is vacuous when
/// every component is.
fn combine(identity: &str, components: Vec<CheckReport>) -> CheckReport {
    CheckReport {
        identity: identity.into(),
        grid: "see components".into(),
        parameters: Default::default(),
        points: Vec::new(),
        sup_discrepancy: None,
        l1_discrepancy: None,
        sup_discrepancy_interior: None,
        l1_discrepancy_interior: None,
        mean_signed_discrepancy: None,
        converged_fraction: 0.0,
        tolerance: 0.0,
        vacuous: components.iter().all(|c| c.vacuous),
        passed: components.iter().all(|c| c.passed),
        evidence: Default::default(),
        series: Default::default(),
        components,
    }
}

/// Per-point rows of a report and its components; `component` is the
/// `/`-joined identity path.
pub fn points_csv(report: &CheckReport) -> String {
    fn walk(report: &CheckReport, prefix: &str, csv: &mut Csv) {
        let path = if prefix.is_empty() {
            report.identity.clone()
        } else {
            format!("{prefix}/{}", report.identity)
        };
        for p in &report.points {
            csv.row(&[
                path.clone(),
                fmt_f64(p.theta),
                fmt_f64(p.radius),
                fmt_f64(p.lhs.re),
                fmt_f64(p.lhs.im),
                fmt_f64(p.rhs.re),
                fmt_f64(p.rhs.im),
                fmt_f64(p.discrepancy()),
                flag(p.converged),
                flag(p.edge),
            ]);
        }
        for c in &report.components {
            walk(c, &path, csv);
        }
    }
    let mut csv = Csv::new(&[
        "component",
        "theta",
        "radius",
        "lhs_re",
        "lhs_im",
        "rhs_re",
        "rhs_im",
        "discrepancy",
        "converged",
        "edge",
    ]);
    walk(report, "", &mut csv);
    csv.0
}

/// Writes each artifact through a temporary file and a rename.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut staged = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let tmp = dir.join(format!(".{}.tmp", a.name));
        if let Err(e) = fs::write(&tmp, &a.contents) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(io(&tmp)(e));
        }
        staged.push((tmp, dir.join(&a.name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, path) in staged {
        fs::rename(&tmp, &path).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

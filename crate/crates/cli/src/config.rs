//! Run configuration: parsing, validation, overrides and the resolved form
//! echoed into the manifest.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use cmv_core::boundary::RadialLadder;
use cmv_core::cocycle::{CocycleParams, ZeroSetParams};
use cmv_core::ergodic::{ErgodicFamily, FamilyKind, SamplingPlan};
use cmv_core::kotani::{
    BigcalcParams, CorollaryParams, DiskGrid, GammaSchurParams, Theorem1Params, ThoulessParams,
};
use cmv_core::schur::Depth;
use cmv_core::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const CODE_VERSION: &str = concat!("cmv-cli ", env!("CARGO_PKG_VERSION"));
pub const DEFAULT_OUT_DIR: &str = "cmv-out";
pub const OUT_DIR_ENV: &str = "CMV_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Dos,
    Lyapunov,
    Schur,
    Zeroset,
    Theorem1,
    Identities,
    Corollary,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Dos => "dos",
            Task::Lyapunov => "lyapunov",
            Task::Schur => "schur",
            Task::Zeroset => "zeroset",
            Task::Theorem1 => "theorem1",
            Task::Identities => "identities",
            Task::Corollary => "corollary",
        }
    }
}

/// A family with an optional bound `C` on `|α|`; the bound defaults to the
/// sup of the family's coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Constant {
        alpha: Complex64,
        #[serde(default)]
        cap: Option<f64>,
    },
    Periodic {
        alphas: Vec<Complex64>,
        #[serde(default)]
        cap: Option<f64>,
    },
    Quasiperiodic {
        coupling: f64,
        frequency: f64,
        phase: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
    RandomIid {
        radius: f64,
        seed: u64,
        #[serde(default)]
        cap: Option<f64>,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<ErgodicFamily, CliError> {
        let base = match self {
            FamilySpec::Constant { alpha, .. } => ErgodicFamily::constant(*alpha),
            FamilySpec::Periodic { alphas, .. } => ErgodicFamily::periodic(alphas.clone()),
            FamilySpec::Quasiperiodic {
                coupling,
                frequency,
                phase,
                ..
            } => ErgodicFamily::quasiperiodic(*coupling, *frequency, *phase),
            FamilySpec::RandomIid { radius, seed, .. } => ErgodicFamily::random_iid(*radius, *seed),
        }?;
        match self.cap() {
            Some(cap) => Ok(ErgodicFamily::new(base.kind().clone(), cap)?),
            None => Ok(base),
        }
    }

    fn cap(&self) -> Option<f64> {
        match self {
            FamilySpec::Constant { cap, .. }
            | FamilySpec::Periodic { cap, .. }
            | FamilySpec::Quasiperiodic { cap, .. }
            | FamilySpec::RandomIid { cap, .. } => *cap,
        }
    }

    fn set_cap(&mut self, value: f64) {
        match self {
            FamilySpec::Constant { cap, .. }
            | FamilySpec::Periodic { cap, .. }
            | FamilySpec::Quasiperiodic { cap, .. }
            | FamilySpec::RandomIid { cap, .. } => *cap = Some(value),
        }
    }
}

impl From<&ErgodicFamily> for FamilySpec {
    fn from(family: &ErgodicFamily) -> Self {
        let cap = Some(family.cap());
        match family.kind().clone() {
            FamilyKind::Constant { alpha } => FamilySpec::Constant { alpha, cap },
            FamilyKind::Periodic { alphas } => FamilySpec::Periodic { alphas, cap },
            FamilyKind::Quasiperiodic {
                coupling,
                frequency,
                phase,
            } => FamilySpec::Quasiperiodic {
                coupling,
                frequency,
                phase,
                cap,
            },
            FamilyKind::RandomIid { radius, seed } => FamilySpec::RandomIid { radius, seed, cap },
        }
    }
}

/// The input file. A written manifest is itself a valid `RunConfig`;
/// `code_version` and `overrides` are informational on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    #[serde(default = "exact_plan")]
    pub plan: SamplingPlan,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub code_version: Option<String>,
    #[serde(default)]
    pub overrides: BTreeMap<String, Value>,
}

fn exact_plan() -> SamplingPlan {
    SamplingPlan::ExactPeriodic
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DosParams {
    pub n: usize,
    pub beta: Complex64,
    pub rho_length: usize,
    /// Equispaced angles for `k_ac`.
    pub k_ac_angles: usize,
    pub ladder: RadialLadder,
    /// Points for `Re Γ`; points on the circle report excluded atoms.
    pub potential_grid: DiskGrid,
}

impl Default for DosParams {
    fn default() -> Self {
        Self {
            n: 200,
            beta: Complex64::new(-1.0, 0.0),
            rho_length: 10_000,
            k_ac_angles: 64,
            ladder: RadialLadder::default(),
            potential_grid: DiskGrid {
                radii: vec![0.5, 0.9, 1.0],
                angles: 16,
                extra: vec![Complex64::new(0.0, 0.0)],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovParams {
    pub grid: DiskGrid,
    pub length: usize,
    pub cocycle: CocycleParams,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self {
            grid: DiskGrid {
                radii: vec![0.5, 0.9, 1.5],
                angles: 16,
                extra: vec![Complex64::new(0.0, 0.0)],
            },
            length: 10_000,
            cocycle: CocycleParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchurParams {
    /// Angles for `𝔼(ν_ac)`; empty selects `angles` equispaced ones.
    pub thetas: Vec<f64>,
    pub angles: usize,
    pub ladder: RadialLadder,
    pub depth: Depth,
    /// Angles for the reflectionless defect at the base state.
    pub defect_thetas: Vec<f64>,
    /// Rungs `m` of `r = 1 − 2^{−m}` for the defect.
    pub defect_rungs: Vec<u32>,
}

impl Default for SchurParams {
    fn default() -> Self {
        Self {
            thetas: Vec::new(),
            angles: 64,
            ladder: RadialLadder::default(),
            depth: Depth::default(),
            defect_thetas: vec![PI],
            defect_rungs: (6..=12).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesParams {
    pub thouless: ThoulessParams,
    pub gamma_schur: GammaSchurParams,
    pub bigcalc: BigcalcParams,
}

/// Task parameters with every default filled in.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum TaskParams {
    Dos(DosParams),
    Lyapunov(LyapunovParams),
    Schur(SchurParams),
    Zeroset(ZeroSetParams),
    Theorem1(Theorem1Params),
    Identities(IdentitiesParams),
    Corollary(CorollaryParams),
}

impl TaskParams {
    fn parse(task: Task, value: &Value) -> Result<Self, CliError> {
        fn typed<T: DeserializeOwned>(value: &Value) -> Result<T, CliError> {
            T::deserialize(value).map_err(|e| CliError::Config(format!("params: {e}")))
        }
        Ok(match task {
            Task::Dos => TaskParams::Dos(typed(value)?),
            Task::Lyapunov => TaskParams::Lyapunov(typed(value)?),
            Task::Schur => TaskParams::Schur(typed(value)?),
            Task::Zeroset => TaskParams::Zeroset(typed(value)?),
            Task::Theorem1 => TaskParams::Theorem1(typed(value)?),
            Task::Identities => TaskParams::Identities(typed(value)?),
            Task::Corollary => TaskParams::Corollary(typed(value)?),
        })
    }

    fn to_value(&self) -> Value {
        let value = match self {
            TaskParams::Dos(p) => serde_json::to_value(p),
            TaskParams::Lyapunov(p) => serde_json::to_value(p),
            TaskParams::Schur(p) => serde_json::to_value(p),
            TaskParams::Zeroset(p) => serde_json::to_value(p),
            TaskParams::Theorem1(p) => serde_json::to_value(p),
            TaskParams::Identities(p) => serde_json::to_value(p),
            TaskParams::Corollary(p) => serde_json::to_value(p),
        };
        value.expect("parameter structs serialize to JSON")
    }

    /// Checks that need no computation.
    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(CliError::Config(format!("params.{name} must be positive")))
            } else {
                Ok(())
            }
        };
        match self {
            TaskParams::Dos(p) => {
                positive("n", p.n)?;
                positive("rho_length", p.rho_length)?;
                positive("k_ac_angles", p.k_ac_angles)?;
                Ok(p.ladder.validate()?)
            }
            TaskParams::Lyapunov(p) => {
                positive("length", p.length)?;
                positive("cocycle.rescale_period", p.cocycle.rescale_period)?;
                if p.grid.points().is_empty() {
                    return Err(CliError::Config("params.grid has no points".into()));
                }
                Ok(())
            }
            TaskParams::Schur(p) => {
                p.ladder.validate()?;
                if p.thetas.is_empty() {
                    positive("angles", p.angles)?;
                }
                if p.defect_rungs.iter().any(|&m| m == 0 || m > 40) {
                    return Err(CliError::Config("params.defect_rungs must lie in 1..=40".into()));
                }
                Ok(())
            }
            TaskParams::Zeroset(p) => Ok(p.validate()?),
            TaskParams::Theorem1(p) => {
                p.zero_set.validate()?;
                p.dos_ladder.validate()?;
                Ok(p.schur_ladder.validate()?)
            }
            TaskParams::Identities(p) => {
                p.bigcalc.zero_set.validate()?;
                p.bigcalc.ladder.validate()?;
                Ok(p.bigcalc.dos_ladder.validate()?)
            }
            TaskParams::Corollary(p) => {
                p.zero_set.validate()?;
                p.probe_ladder.validate()?;
                p.schur_ladder.validate()?;
                positive("quadrature_nodes", p.quadrature_nodes)?;
                positive("probe_grid", p.probe_grid)?;
                if p.margins.is_empty() {
                    return Err(CliError::Config("params.margins is empty".into()));
                }
                Ok(())
            }
        }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub env_out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// A validated run: the family and plan are built, the parameters typed.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub task: Task,
    pub family: ErgodicFamily,
    pub plan: SamplingPlan,
    pub params: TaskParams,
    pub output_dir: PathBuf,
    /// What the manifest echoes.
    pub manifest: RunConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Applies overrides, fills defaults and validates everything that can
    /// be checked without computing.
    pub fn resolve(mut self, task: Task, overrides: &Overrides) -> Result<ResolvedRun, CliError> {
        if let Some(t) = self.task {
            if t != task {
                return Err(CliError::Config(format!(
                    "config task {} does not match subcommand {}",
                    t.name(),
                    task.name()
                )));
            }
        }
        let mut echoed = BTreeMap::new();
        if let Some(seed) = overrides.seed {
            if let FamilySpec::RandomIid { seed: s, .. } = &mut self.family {
                *s = seed;
            }
            if let SamplingPlan::MonteCarlo { seed: s, .. } = &mut self.plan {
                *s = seed;
            }
            echoed.insert("seed".into(), Value::from(seed));
        }
        let output_dir = if let Some(out) = &overrides.out {
            echoed.insert("out".into(), Value::from(out.display().to_string()));
            out.clone()
        } else if let Some(out) = &overrides.env_out {
            echoed.insert(OUT_DIR_ENV.into(), Value::from(out.display().to_string()));
            out.clone()
        } else {
            self.output_dir.clone().unwrap_or_else(|| DEFAULT_OUT_DIR.into())
        };

        let family = self.family.build()?;
        self.plan.validate(&family)?;
        if !self.params.is_object() {
            return Err(CliError::Config("params must be a JSON object".into()));
        }
        let params = TaskParams::parse(task, &self.params)?;
        params.validate()?;

        let mut spec = self.family.clone();
        spec.set_cap(family.cap());
        let manifest = RunConfig {
            family: spec,
            plan: self.plan,
            task: Some(task),
            params: params.to_value(),
            output_dir: Some(output_dir.clone()),
            code_version: Some(CODE_VERSION.into()),
            overrides: echoed,
        };
        Ok(ResolvedRun {
            task,
            family,
            plan: self.plan,
            params,
            output_dir,
            manifest,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn defaults_are_filled_and_echoed() {
        let cfg = parse(r#"{"family": {"kind": "constant", "alpha": [0.5, 0.0]}}"#);
        let run = cfg.resolve(Task::Dos, &Overrides::default()).unwrap();
        assert_eq!(run.params, TaskParams::Dos(DosParams::default()));
        assert_eq!(run.manifest.params["n"], 200);
        assert_eq!(run.manifest.family, FamilySpec::Constant { alpha: Complex64::new(0.5, 0.0), cap: Some(0.5) });
        assert_eq!(run.output_dir, PathBuf::from(DEFAULT_OUT_DIR));
        assert_eq!(run.manifest.task, Some(Task::Dos));
    }

    #[test]
    fn manifest_parses_back_to_the_same_run() {
        let cfg = parse(
            r#"{"family": {"kind": "random_iid", "radius": 0.5, "seed": 7},
                "plan": {"mode": "monte_carlo", "samples": 4, "seed": 1},
                "params": {"zero_set": {"grid": 32}}}"#,
        );
        let run = cfg.resolve(Task::Theorem1, &Overrides::default()).unwrap();
        let text = serde_json::to_string(&run.manifest).unwrap();
        let again = RunConfig::from_json(&text).unwrap().resolve(Task::Theorem1, &Overrides::default()).unwrap();
        assert_eq!(again.manifest, run.manifest);
        assert_eq!(again.params, run.params);
    }

    #[test]
    fn seed_override_reaches_family_and_plan() {
        let cfg = parse(
            r#"{"family": {"kind": "random_iid", "radius": 0.5, "seed": 7},
                "plan": {"mode": "monte_carlo", "samples": 4, "seed": 1}}"#,
        );
        let overrides = Overrides {
            seed: Some(99),
            ..Overrides::default()
        };
        let run = cfg.resolve(Task::Dos, &overrides).unwrap();
        assert_eq!(run.family.kind(), &FamilyKind::RandomIid { radius: 0.5, seed: 99 });
        assert_eq!(run.plan, SamplingPlan::MonteCarlo { samples: 4, seed: 99 });
        assert_eq!(run.manifest.overrides["seed"], 99);
    }

    #[test]
    fn output_dir_precedence() {
        let cfg = parse(r#"{"family": {"kind": "constant", "alpha": [0, 0]}, "output_dir": "from-config"}"#);
        let env = Overrides {
            env_out: Some("from-env".into()),
            ..Overrides::default()
        };
        assert_eq!(cfg.clone().resolve(Task::Dos, &env).unwrap().output_dir, PathBuf::from("from-env"));
        let flag = Overrides {
            out: Some("from-flag".into()),
            ..env
        };
        let run = cfg.clone().resolve(Task::Dos, &flag).unwrap();
        assert_eq!(run.output_dir, PathBuf::from("from-flag"));
        assert_eq!(run.manifest.overrides["out"], "from-flag");
        let plain = cfg.resolve(Task::Dos, &Overrides::default()).unwrap();
        assert_eq!(plain.output_dir, PathBuf::from("from-config"));
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let bad = [
            r#"{"family": {"kind": "constant", "alpha": [1.0, 0.0]}}"#,
            r#"{"family": {"kind": "constant", "alpha": [0.5, 0.0], "colour": 1}}"#,
            r#"{"family": {"kind": "random_iid", "radius": 0.5, "seed": 1}}"#,
            r#"{"family": {"kind": "constant", "alpha": [0.5, 0.0]}, "params": {"n": 0}}"#,
            r#"{"family": {"kind": "constant", "alpha": [0.5, 0.0]}, "params": {"m": 3}}"#,
            r#"{"family": {"kind": "constant", "alpha": [0.5, 0.0]}, "task": "schur"}"#,
            r#"{"family": {"kind": "constant", "alpha": [0.5, 0.0], "cap": 0.4}}"#,
            r#"{"family": {"kind": "constant", "alpha": [0.5, 0.0]}, "extra": true}"#,
        ];
        for text in bad {
            let err = RunConfig::from_json(text).and_then(|c| c.resolve(Task::Dos, &Overrides::default()));
            assert!(matches!(err, Err(CliError::Config(_))), "{text}");
        }
    }
}

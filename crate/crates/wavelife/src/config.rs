//! JSON run configuration: nonlinearity terms, initial data, grid, and
//! optional sweep settings, with conversion into the domain types.
//!
//! Schema (all sections in one document; `data`, `grid`, `eps`, `solver`,
//! `sweep` are optional depending on the subcommand):
//!
//! ```json
//! {
//!   "force":   [{"coeff": 1.0, "a": 0, "b": 3, "d": 0, "abs": ["ut"]}],
//!   "b_coef":  [],
//!   "a0_coef": [],
//!   "data": {"f": {"kind": "bump", "amplitude": 1.0},
//!            "g": "bump_derivative", "R": 1.0},
//!   "grid": {"dx": 0.05, "courant": 0.5, "t_max": 10.0},
//!   "eps": 0.5,
//!   "solver": "leapfrog",
//!   "sweep": {"eps_max": 0.8, "eps_ratio": 0.8, "points": 8,
//!             "levels": 3, "dx0": 0.08, "t_budget": 40.0}
//! }
//! ```
//!
//! A term {coeff, a, b, d, abs} is coeff * u^a * u_t^b * u_x^d with the
//! factors named in `abs` taken in absolute value.

use crate::lifespan::LifespanBudget;
use crate::model::Grid;
use crate::model::{classify, InitialData, ModelError, Monomial, NonlinearitySpec, Profile};
use crate::sweep::SweepConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown profile kind {0:?} (expected zero, bump, bump_derivative)")]
    UnknownProfile(String),
    #[error("unknown abs factor {0:?} (expected u, ut, ux)")]
    UnknownAbs(String),
    #[error("missing config section {0:?} required by this subcommand")]
    MissingSection(&'static str),
    #[error("unknown solver {0:?}")]
    UnknownSolver(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: f64,
    #[serde(default)]
    pub a: u32,
    #[serde(default)]
    pub b: u32,
    #[serde(default)]
    pub d: u32,
    #[serde(default)]
    pub abs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileDoc {
    Name(String),
    Full { kind: String, amplitude: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataDoc {
    pub f: ProfileDoc,
    pub g: ProfileDoc,
    #[serde(rename = "R")]
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDoc {
    pub dx: f64,
    #[serde(default = "default_courant")]
    pub courant: f64,
    pub t_max: f64,
}

fn default_courant() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepDoc {
    pub eps_max: f64,
    #[serde(default = "default_eps_ratio")]
    pub eps_ratio: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    pub dx0: f64,
    pub t_budget: f64,
    #[serde(default = "default_trust_tol")]
    pub trust_tol: f64,
    #[serde(default = "default_verdict_tol")]
    pub verdict_tol: f64,
    /// plants T = eps^{-s} instead of running the solver
    #[serde(default)]
    pub synthetic_exponent: Option<f64>,
}

fn default_eps_ratio() -> f64 {
    0.8
}
fn default_points() -> usize {
    8
}
fn default_levels() -> usize {
    3
}
fn default_trust_tol() -> f64 {
    0.05
}
fn default_verdict_tol() -> f64 {
    0.20
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    #[serde(default)]
    pub force: Vec<TermDoc>,
    #[serde(default)]
    pub b_coef: Vec<TermDoc>,
    #[serde(default)]
    pub a0_coef: Vec<TermDoc>,
    #[serde(default)]
    pub data: Option<DataDoc>,
    #[serde(default)]
    pub grid: Option<GridDoc>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub solver: Option<String>,
    #[serde(default)]
    pub sweep: Option<SweepDoc>,
}

fn to_monomial(doc: &TermDoc) -> Result<Monomial, ConfigError> {
    let mut m = Monomial {
        coeff: doc.coeff,
        a: doc.a,
        b: doc.b,
        d: doc.d,
        abs_u: false,
        abs_ut: false,
        abs_ux: false,
    };
    for name in &doc.abs {
        match name.as_str() {
            "u" => m.abs_u = true,
            "ut" => m.abs_ut = true,
            "ux" => m.abs_ux = true,
            other => return Err(ConfigError::UnknownAbs(other.to_string())),
        }
    }
    Ok(m)
}

fn to_profile(doc: &ProfileDoc) -> Result<Profile, ConfigError> {
    let (kind, amplitude) = match doc {
        ProfileDoc::Name(name) => (name.as_str(), 1.0),
        ProfileDoc::Full { kind, amplitude } => (kind.as_str(), *amplitude),
    };
    match kind {
        "zero" => Ok(Profile::Zero),
        "bump" => Ok(Profile::Bump { amplitude }),
        "bump_derivative" => Ok(Profile::BumpDerivative { amplitude }),
        other => Err(ConfigError::UnknownProfile(other.to_string())),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn to_spec(&self) -> Result<NonlinearitySpec, ConfigError> {
        let conv = |docs: &[TermDoc]| -> Result<Vec<Monomial>, ConfigError> {
            docs.iter().map(to_monomial).collect()
        };
        Ok(classify(
            &conv(&self.force)?,
            &conv(&self.b_coef)?,
            &conv(&self.a0_coef)?,
        )?)
    }

    pub fn to_data(&self) -> Result<InitialData, ConfigError> {
        let doc = self
            .data
            .as_ref()
            .ok_or(ConfigError::MissingSection("data"))?;
        Ok(InitialData::new(
            to_profile(&doc.f)?,
            to_profile(&doc.g)?,
            doc.radius,
        ))
    }

    pub fn to_grid(&self) -> Result<Grid, ConfigError> {
        let doc = self
            .grid
            .as_ref()
            .ok_or(ConfigError::MissingSection("grid"))?;
        let data = self.to_data()?;
        Ok(Grid::cover(
            doc.dx,
            doc.courant,
            doc.t_max,
            data.support_radius,
        ))
    }

    pub fn to_sweep_config(&self) -> Result<SweepConfig, ConfigError> {
        let doc = self
            .sweep
            .as_ref()
            .ok_or(ConfigError::MissingSection("sweep"))?;
        let mut budget = LifespanBudget::new(doc.dx0, doc.t_budget);
        budget.levels = doc.levels;
        budget.trust_tol = doc.trust_tol;
        let mut config = SweepConfig::new(doc.eps_max, budget);
        config.eps_ratio = doc.eps_ratio;
        config.n_points = doc.points;
        config.verdict_tol = doc.verdict_tol;
        config.synthetic_exponent = doc.synthetic_exponent;
        Ok(config)
    }

    /// One-line summary of the nonlinearity, used in result files.
    pub fn summary(&self) -> String {
        let term = |t: &TermDoc| {
            let mut s = format!("{}", t.coeff);
            for (power, var) in [(t.a, "u"), (t.b, "ut"), (t.d, "ux")] {
                if power > 0 {
                    let name = if t.abs.contains(&var.to_string()) {
                        format!("|{var}|")
                    } else {
                        var.to_string()
                    };
                    s.push_str(&format!(" {name}^{power}"));
                }
            }
            s
        };
        let join = |docs: &[TermDoc]| docs.iter().map(term).collect::<Vec<_>>().join(" + ");
        let mut out = format!("F = {}", join(&self.force));
        if !self.b_coef.is_empty() {
            out.push_str(&format!("; b = {}", join(&self.b_coef)));
        }
        if !self.a0_coef.is_empty() {
            out.push_str(&format!("; a0 = {}", join(&self.a0_coef)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMBINED: &str = r#"{
        "force": [
            {"coeff": 1.0, "b": 3, "abs": ["ut"]},
            {"coeff": 1.0, "a": 4, "abs": ["u"]}
        ],
        "data": {"f": "zero", "g": {"kind": "bump_derivative", "amplitude": 2.0}, "R": 1.0},
        "grid": {"dx": 0.1, "t_max": 5.0},
        "eps": 0.5,
        "solver": "leapfrog"
    }"#;

    #[test]
    fn parses_and_classifies() {
        let config: Config = serde_json::from_str(COMBINED).unwrap();
        let spec = config.to_spec().unwrap();
        assert_eq!(spec.alpha, 2);
        assert_eq!(spec.beta0, Some(3));
        let data = config.to_data().unwrap();
        assert!(data.g_zero_mean());
        let grid = config.to_grid().unwrap();
        assert_eq!(grid.dx, 0.1);
        assert_eq!(grid.dt, 0.05);
        assert_eq!(config.solver.as_deref(), Some("leapfrog"));
    }

    #[test]
    fn summary_reads_naturally() {
        let config: Config = serde_json::from_str(COMBINED).unwrap();
        assert_eq!(config.summary(), "F = 1 |ut|^3 + 1 |u|^4");
    }

    #[test]
    fn parse_error_carries_position() {
        let err = serde_json::from_str::<Config>("{\"force\": [{\"coeff\": }]}").unwrap_err();
        assert!(err.to_string().contains("column"));
    }

    #[test]
    fn unknown_profile_rejected() {
        let config: Config = serde_json::from_str(
            r#"{"force": [{"coeff": 1.0, "a": 3}],
                "data": {"f": "gaussian", "g": "zero", "R": 1.0}}"#,
        )
        .unwrap();
        assert!(matches!(
            config.to_data(),
            Err(ConfigError::UnknownProfile(_))
        ));
    }

    #[test]
    fn missing_sections_reported() {
        let config: Config =
            serde_json::from_str(r#"{"force": [{"coeff": 1.0, "a": 3}]}"#).unwrap();
        assert!(matches!(
            config.to_grid(),
            Err(ConfigError::MissingSection(_))
        ));
        assert!(matches!(
            config.to_sweep_config(),
            Err(ConfigError::MissingSection("sweep"))
        ));
    }

    #[test]
    fn sweep_defaults_fill_in() {
        let config: Config = serde_json::from_str(
            r#"{"force": [{"coeff": 1.0, "a": 3}],
                "sweep": {"eps_max": 0.8, "dx0": 0.1, "t_budget": 20.0}}"#,
        )
        .unwrap();
        let sweep = config.to_sweep_config().unwrap();
        assert_eq!(sweep.n_points, 8);
        assert_eq!(sweep.eps_ratio, 0.8);
        assert_eq!(sweep.budget.levels, 3);
        assert_eq!(sweep.budget.trust_tol, 0.05);
        assert_eq!(sweep.verdict_tol, 0.20);
    }
}

//! Run configuration: strict JSON with a versioned schema.
//!
//! The file is UTF-8 JSON with four top-level keys: `schema` (must be
//! `"cefoliator/1"`), `data` (exactly one data source), `task` (exactly
//! one task object whose key must match the command-line task name) and
//! the optional `numerics` and `output` sections. Unknown keys are
//! rejected everywhere.

use std::path::{Path, PathBuf};

use cefoliator_core::initialdata::{BowenYork, Flat, GridDataSet, InitialData, Perturbed, Schwarzschild};
use cefoliator_core::solver::SolveConfig;
use serde::Deserialize;

use crate::RunError;

pub const SCHEMA: &str = "cefoliator/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: String,
    pub data: DataConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Exactly one data source: an analytic family or a gridded data file.
/// (The JSON object form — one variant key — makes "exactly one"
/// structural.)
#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataConfig {
    Flat {},
    Schwarzschild {
        mass: f64,
    },
    BowenYork {
        mass: f64,
        momentum: [f64; 3],
    },
    Perturbed {
        mass: f64,
        amplitude: f64,
        eps: f64,
    },
    GridFile {
        path: PathBuf,
    },
}

impl DataConfig {
    /// Instantiates the provider. Relative grid-file paths resolve
    /// against the config file's directory.
    pub fn build(&self, config_dir: &Path) -> Result<Box<dyn InitialData>, RunError> {
        match self {
            DataConfig::Flat {} => Ok(Box::new(Flat::new())),
            DataConfig::Schwarzschild { mass } => Ok(Box::new(Schwarzschild::new(*mass))),
            DataConfig::BowenYork { mass, momentum } => {
                Ok(Box::new(BowenYork::new(*mass, *momentum)))
            }
            DataConfig::Perturbed {
                mass,
                amplitude,
                eps,
            } => Ok(Box::new(Perturbed::new(*mass, *amplitude, *eps))),
            DataConfig::GridFile { path } => {
                let resolved = if path.is_absolute() {
                    path.clone()
                } else {
                    config_dir.join(path)
                };
                Ok(Box::new(GridDataSet::load(&resolved)?))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DataConfig::Flat {} => "flat".into(),
            DataConfig::Schwarzschild { mass } => format!("schwarzschild(mass={mass})"),
            DataConfig::BowenYork { mass, momentum } => {
                format!(
                    "bowen-york(mass={mass}, momentum=[{}, {}, {}])",
                    momentum[0], momentum[1], momentum[2]
                )
            }
            DataConfig::Perturbed {
                mass,
                amplitude,
                eps,
            } => format!("perturbed(mass={mass}, amplitude={amplitude}, eps={eps})"),
            DataConfig::GridFile { path } => format!("grid-file({})", path.display()),
        }
    }
}

/// A round-sphere initial guess.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuessConfig {
    #[serde(default)]
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    /// Single surface at one curvature index.
    Solve {
        sigma: f64,
        #[serde(default)]
        weight: f64,
        /// Reach the weight by continuation from the mean-curvature
        /// problem instead of a direct Newton solve. Defaults to true
        /// exactly when `|weight| = 1`.
        #[serde(default)]
        continuation: Option<bool>,
        #[serde(default)]
        guess: Option<GuessConfig>,
    },
    /// Constant-expansion leaves over an ascending index list.
    Foliate { sign: f64, sigmas: Vec<f64> },
    /// Spectrum of the weighted operator on a solved surface.
    Spectrum {
        sigma: f64,
        #[serde(default)]
        weight: f64,
        #[serde(default)]
        continuation: Option<bool>,
        /// Number of smallest-magnitude eigenpairs to report.
        #[serde(default = "default_pairs")]
        pairs: usize,
    },
    /// Decay audit of the raw data fields on coordinate spheres.
    Audit { radii: Vec<f64> },
    /// Asymptotic mass/momentum series and smallness integrals.
    Adm {
        radii: Vec<f64>,
        /// Overrides the provider's decay exponent in the Richardson
        /// extrapolation.
        #[serde(default)]
        eps: Option<f64>,
    },
    /// Temporal lapse response on solved leaves.
    Evolve {
        sigmas: Vec<f64>,
        #[serde(default)]
        weight: f64,
        #[serde(default)]
        continuation: Option<bool>,
        lapse: LapseModel,
    },
    /// Uniqueness probe: several guesses, one curvature index.
    Unique {
        sigma: f64,
        sign: f64,
        guesses: Vec<GuessConfig>,
    },
}

fn default_pairs() -> usize {
    6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LapseModel {
    /// Lapse `α ≡ 1`, vanishing spacetime Einstein term.
    Unit,
    /// Static vacuum lapse of the conformally flat slice; requires a
    /// data source with a mass parameter.
    StaticSchwarzschild,
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Solve { .. } => "solve",
            TaskConfig::Foliate { .. } => "foliate",
            TaskConfig::Spectrum { .. } => "spectrum",
            TaskConfig::Audit { .. } => "audit",
            TaskConfig::Adm { .. } => "adm",
            TaskConfig::Evolve { .. } => "evolve",
            TaskConfig::Unique { .. } => "unique",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default = "default_lmax")]
    pub lmax: usize,
    #[serde(default)]
    pub newton_tol: Option<f64>,
    #[serde(default)]
    pub max_newton: Option<usize>,
    #[serde(default)]
    pub damping: Option<f64>,
    #[serde(default)]
    pub b_step_init: Option<f64>,
    #[serde(default)]
    pub b_step_min: Option<f64>,
}

fn default_lmax() -> usize {
    16
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            lmax: default_lmax(),
            newton_tol: None,
            max_newton: None,
            damping: None,
            b_step_init: None,
            b_step_min: None,
        }
    }
}

impl NumericsConfig {
    pub fn solve_config(&self) -> SolveConfig {
        let mut cfg = SolveConfig::default();
        if let Some(v) = self.newton_tol {
            cfg.newton_tol = v;
        }
        if let Some(v) = self.max_newton {
            cfg.max_newton = v;
        }
        if let Some(v) = self.damping {
            cfg.damping = v;
        }
        if let Some(v) = self.b_step_init {
            cfg.b_step_init = v;
        }
        if let Some(v) = self.b_step_min {
            cfg.b_step_min = v;
        }
        cfg
    }
}

/// Parses and validates a config file's contents.
pub fn parse_config(text: &str) -> Result<ConfigFile, RunError> {
    let cfg: ConfigFile = serde_json::from_str(text)
        .map_err(|e| RunError::Config(format!("config parse error: {e}")))?;
    if cfg.schema != SCHEMA {
        return Err(RunError::Config(format!(
            "unsupported schema {:?}, expected {SCHEMA:?}",
            cfg.schema
        )));
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn require_positive(name: &str, v: f64) -> Result<(), RunError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(RunError::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn require_ascending(name: &str, list: &[f64]) -> Result<(), RunError> {
    if list.is_empty() {
        return Err(RunError::Config(format!("{name} must be non-empty")));
    }
    for v in list {
        require_positive(name, *v)?;
    }
    for w in list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(RunError::Config(format!(
                "{name} must be strictly ascending, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

fn require_sign(name: &str, v: f64) -> Result<(), RunError> {
    if v.abs() != 1.0 {
        return Err(RunError::Config(format!("{name} must be -1 or +1, got {v}")));
    }
    Ok(())
}

fn validate(cfg: &ConfigFile) -> Result<(), RunError> {
    if let DataConfig::Perturbed { eps, .. } = &cfg.data {
        require_positive("data eps", *eps)?;
    }
    let n = &cfg.numerics;
    if n.lmax < 2 || n.lmax > 64 {
        return Err(RunError::Config(format!(
            "lmax must be in [2, 64], got {}",
            n.lmax
        )));
    }
    if let Some(v) = n.newton_tol {
        require_positive("newton_tol", v)?;
    }
    if let Some(v) = n.damping {
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(RunError::Config(format!(
                "damping must be in (0, 1), got {v}"
            )));
        }
    }
    if let Some(v) = n.b_step_init {
        require_positive("b_step_init", v)?;
    }
    if let Some(v) = n.b_step_min {
        require_positive("b_step_min", v)?;
    }
    match &cfg.task {
        TaskConfig::Solve {
            sigma,
            weight,
            continuation,
            guess,
        } => {
            require_positive("sigma", *sigma)?;
            if !(weight.is_finite() && weight.abs() <= 1.0) {
                return Err(RunError::Config(format!(
                    "weight must lie in [-1, 1], got {weight}"
                )));
            }
            if continuation.unwrap_or(weight.abs() == 1.0) {
                require_sign("weight (with continuation)", *weight)?;
                if guess.is_some() {
                    return Err(RunError::Config(
                        "guess is only used by direct solves (continuation: false)".into(),
                    ));
                }
            }
            if let Some(g) = guess {
                require_positive("guess radius", g.radius)?;
            }
        }
        TaskConfig::Foliate { sign, sigmas } => {
            require_sign("sign", *sign)?;
            require_ascending("sigmas", sigmas)?;
        }
        TaskConfig::Spectrum {
            sigma,
            weight,
            pairs,
            ..
        } => {
            require_positive("sigma", *sigma)?;
            if !(weight.is_finite() && weight.abs() <= 1.0) {
                return Err(RunError::Config(format!(
                    "weight must lie in [-1, 1], got {weight}"
                )));
            }
            if *pairs == 0 {
                return Err(RunError::Config("pairs must be at least 1".into()));
            }
        }
        TaskConfig::Audit { radii } => require_ascending("radii", radii)?,
        TaskConfig::Adm { radii, eps } => {
            require_ascending("radii", radii)?;
            if radii.len() < 3 {
                return Err(RunError::Config(format!(
                    "adm extrapolation needs at least 3 radii, got {}",
                    radii.len()
                )));
            }
            if let Some(e) = eps {
                require_positive("eps", *e)?;
            }
        }
        TaskConfig::Evolve {
            sigmas,
            weight,
            lapse,
            ..
        } => {
            require_ascending("sigmas", sigmas)?;
            if !(weight.is_finite() && weight.abs() <= 1.0) {
                return Err(RunError::Config(format!(
                    "weight must lie in [-1, 1], got {weight}"
                )));
            }
            if *lapse == LapseModel::StaticSchwarzschild {
                let has_mass = !matches!(cfg.data, DataConfig::Flat {});
                if !has_mass {
                    return Err(RunError::Config(
                        "static-schwarzschild lapse needs a data source with a mass parameter"
                            .into(),
                    ));
                }
            }
        }
        TaskConfig::Unique {
            sigma,
            sign,
            guesses,
        } => {
            require_positive("sigma", *sigma)?;
            require_sign("sign", *sign)?;
            if guesses.len() < 2 {
                return Err(RunError::Config(format!(
                    "unique needs at least 2 guesses, got {}",
                    guesses.len()
                )));
            }
            for g in guesses {
                require_positive("guess radius", g.radius)?;
            }
        }
    }
    Ok(())
}

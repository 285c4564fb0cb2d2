//! Run configuration: TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use sctherm::spinboson::ModelConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig1,
    FigS1,
    FigS2,
    FigS3,
    Custom,
    Witness,
}

impl Scenario {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "figS1" => Ok(Self::FigS1),
            "figS2" => Ok(Self::FigS2),
            "figS3" => Ok(Self::FigS3),
            "custom" => Ok(Self::Custom),
            "witness" => Ok(Self::Witness),
            other => Err(CliError::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Raw TOML schema; every field optional so files can be partial.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub out: Option<PathBuf>,
    pub svg: Option<bool>,
    pub betas: Option<Vec<f64>>,
    pub c_list: Option<Vec<f64>>,
    pub model: Option<FileModel>,
    pub time_grid: Option<FileGrid>,
    pub initial_state: Option<FileInitialState>,
    pub drive: Option<FileDrive>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileModel {
    pub omega0: Option<f64>,
    pub omega1: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma_minus: Option<f64>,
    pub allow_off_resonance: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGrid {
    /// In units of 1/γ(ω₀+κ).
    pub t_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileInitialState {
    /// ground | excited | gibbs | measured | custom
    pub kind: Option<String>,
    /// Measurement basis for `measured`: z | x | equilibrium.
    pub basis: Option<String>,
    /// 2x2 density matrix for `custom`, rows of [re, im] pairs.
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDrive {
    /// Currently: "ramp" (smoothstep frequency ramp).
    pub kind: Option<String>,
    /// Final/initial frequency ratio.
    pub factor: Option<f64>,
    /// Ramp duration in units of 1/γ(ω₀+κ).
    pub ramp_time: Option<f64>,
}

/// Initial-state selection after validation.
#[derive(Debug, Clone)]
pub enum InitialState {
    Ground,
    Excited,
    Gibbs,
    Measured(MeasuredBasis),
    Custom(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasuredBasis {
    Z,
    X,
    Equilibrium,
}

/// Driving protocol selection.
#[derive(Debug, Clone)]
pub enum Drive {
    Ramp { factor: f64, ramp_time: f64 },
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub out: PathBuf,
    pub svg: bool,
    pub betas: Vec<f64>,
    pub c_list: Vec<f64>,
    pub model: ModelConfig<f64>,
    /// In units of 1/γ(ω₀+κ).
    pub t_max: f64,
    pub points: usize,
    pub initial_state: InitialState,
    pub drive: Option<Drive>,
}

/// Command-line overrides (all optional; they win over the file).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub grid_points: Option<usize>,
    pub t_max: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub c_list: Option<Vec<f64>>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
}

impl RunConfig {
    /// Merge scenario defaults, a config file, and command-line overrides.
    pub fn resolve(
        scenario: Scenario,
        file: Option<FileConfig>,
        over: &Overrides,
    ) -> Result<Self, CliError> {
        let file = file.unwrap_or_default();
        if let Some(s) = &file.scenario {
            let file_scenario = Scenario::parse(s)?;
            if file_scenario != scenario && scenario != Scenario::Custom {
                // Subcommand wins, but a conflicting file is usually a mistake.
                return Err(CliError::Config(format!(
                    "config file names scenario '{s}' but the subcommand selects a different one"
                )));
            }
        }

        let fm = file.model.unwrap_or_default();
        let mut model = ModelConfig::<f64>::default_model();
        if scenario == Scenario::FigS3 {
            model = ModelConfig::strong_variant();
        }
        if let Some(v) = fm.omega0 {
            model.omega0 = v;
        }
        if let Some(v) = fm.omega1 {
            model.omega1 = v;
        }
        if let Some(v) = fm.kappa {
            model.kappa = v;
        }
        if let Some(v) = fm.gamma_plus {
            model.gamma_plus = v;
        }
        if let Some(v) = fm.gamma_minus {
            model.gamma_minus = v;
        }
        if let Some(v) = fm.allow_off_resonance {
            model.allow_off_resonance = v;
        }

        let grid = file.time_grid.unwrap_or_default();
        let t_max = over.t_max.or(grid.t_max).unwrap_or(3.0);
        let points = over.grid_points.or(grid.points).unwrap_or(2001);

        let default_betas: Vec<f64> = match scenario {
            Scenario::Fig1 | Scenario::Witness => vec![0.1, 1.0, 10.0],
            Scenario::FigS1 | Scenario::Custom => vec![1.0],
            Scenario::FigS2 | Scenario::FigS3 => vec![0.1, 1.0],
        };
        let betas = over.betas.clone().or(file.betas).unwrap_or(default_betas);
        let c_list = over
            .c_list
            .clone()
            .or(file.c_list)
            .unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0, 16.0]);

        let initial_state = match file.initial_state {
            None => InitialState::Ground,
            Some(is) => {
                let kind = is.kind.as_deref().unwrap_or("ground");
                match kind {
                    "ground" => InitialState::Ground,
                    "excited" => InitialState::Excited,
                    "gibbs" => InitialState::Gibbs,
                    "measured" => {
                        let basis = match is.basis.as_deref().unwrap_or("equilibrium") {
                            "z" => MeasuredBasis::Z,
                            "x" => MeasuredBasis::X,
                            "equilibrium" => MeasuredBasis::Equilibrium,
                            other => {
                                return Err(CliError::Config(format!(
                                    "unknown measurement basis '{other}'"
                                )))
                            }
                        };
                        InitialState::Measured(basis)
                    }
                    "custom" => {
                        let matrix = is.matrix.ok_or_else(|| {
                            CliError::Config(
                                "initial_state.kind = \"custom\" requires initial_state.matrix"
                                    .into(),
                            )
                        })?;
                        InitialState::Custom(matrix)
                    }
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown initial state kind '{other}'"
                        )))
                    }
                }
            }
        };

        let drive = match file.drive {
            None => None,
            Some(d) => match d.kind.as_deref().unwrap_or("ramp") {
                "ramp" => Some(Drive::Ramp {
                    factor: d.factor.unwrap_or(1.1),
                    ramp_time: d.ramp_time.unwrap_or(1.0),
                }),
                other => return Err(CliError::Config(format!("unknown drive kind '{other}'"))),
            },
        };

        let cfg = Self {
            scenario,
            out: over
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            svg: over.svg || file.svg.unwrap_or(false),
            betas,
            c_list,
            model,
            t_max,
            points,
            initial_state,
            drive,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.t_max > 0.0) {
            return Err(CliError::Config("t_max must be positive".into()));
        }
        if self.points < 16 {
            return Err(CliError::Config(
                "time grid needs at least 16 points".into(),
            ));
        }
        if self.betas.is_empty() {
            return Err(CliError::Config("betas must be nonempty".into()));
        }
        if self.betas.iter().any(|&b| !(b > 0.0)) {
            return Err(CliError::Config("betas must be positive".into()));
        }
        if self.c_list.is_empty() || self.c_list.iter().any(|&c| !(c >= 1.0)) {
            return Err(CliError::Config("c_list entries must be >= 1".into()));
        }
        self.model
            .validate()
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        Ok(())
    }

    /// Physical time grid: linear on [0, t_max/γ(ω₀+κ)].
    pub fn grid(&self) -> Vec<f64> {
        let t_phys = self.t_max / self.model.gamma_plus;
        (0..self.points)
            .map(|k| t_phys * k as f64 / (self.points - 1) as f64)
            .collect()
    }
}

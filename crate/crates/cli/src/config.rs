//! Experiment configuration. Every field has a default, so a config file only
//! needs the values it changes; command-line flags override the file.

use std::path::{Path, PathBuf};

use pfo_core::{Ar1Config, BasisFamily, DMatrix, DescentConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::formats::{matrix_from_rows, read_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Ar1Gaussian,
    CubicEmpirical,
    /// Snapshots supplied from a file.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ar1Settings {
    pub a0: Vec<Vec<f64>>,
    pub noise_cov: Vec<Vec<f64>>,
    pub c1: Vec<Vec<f64>>,
    pub steps: usize,
}

impl Default for Ar1Settings {
    fn default() -> Self {
        let r = Ar1Config::reference();
        Self {
            a0: rows_of(&r.a0),
            noise_cov: rows_of(&r.noise_cov),
            c1: rows_of(&r.c1),
            steps: r.steps,
        }
    }
}

impl Ar1Settings {
    pub fn to_core(&self) -> Result<Ar1Config, CliError> {
        Ok(Ar1Config {
            a0: matrix_from_rows(&self.a0, "ar1.a0")?,
            noise_cov: matrix_from_rows(&self.noise_cov, "ar1.noise_cov")?,
            c1: matrix_from_rows(&self.c1, "ar1.c1")?,
            steps: self.steps,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianInit {
    #[default]
    Identity,
    /// Mean of the pairwise Gaussian Monge maps.
    Average,
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    Grid,
    Random,
}

/// Built-in one-dimensional snapshot generator: points on `[0, 1]` pushed
/// repeatedly through the cubic map with the given coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CubicSettings {
    /// Coefficients of `(1-x)^3`, `(1-x)` and `1`.
    pub coefficients: [f64; 3],
    pub points: usize,
    pub sampling: Sampling,
    pub snapshots: usize,
}

impl Default for CubicSettings {
    fn default() -> Self {
        Self {
            coefficients: [-0.8, 0.6, 0.7],
            points: 100,
            sampling: Sampling::Grid,
            snapshots: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BasisSpec {
    Linear,
    Affine,
    /// Powers of `(1 - x)`, one-dimensional states only.
    Monomials { exponents: Vec<u32> },
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec::Monomials { exponents: vec![3, 1, 0] }
    }
}

impl BasisSpec {
    pub fn family(&self, dim: usize) -> Result<BasisFamily, CliError> {
        match self {
            BasisSpec::Linear => Ok(BasisFamily::Linear { dim }),
            BasisSpec::Affine => Ok(BasisFamily::Affine { dim }),
            BasisSpec::Monomials { exponents } => {
                if dim != 1 {
                    return Err(CliError::Usage(format!("monomial basis needs one-dimensional snapshots, got dimension {dim}")));
                }
                if exponents.is_empty() {
                    return Err(CliError::Usage("monomial basis needs at least one exponent".into()));
                }
                Ok(BasisFamily::ShiftedMonomials {
                    exponents: exponents.clone(),
                })
            }
        }
    }
}

/// A state map usable by the Ulam and EDMD commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    /// `x -> c0 (1-x)^3 + c1 (1-x) + c2`, applied componentwise.
    Cubic { coefficients: [f64; 3] },
    Linear { matrix: Vec<Vec<f64>> },
}

pub type MapFn = Box<dyn Fn(&pfo_core::DVector<f64>) -> pfo_core::DVector<f64> + Send + Sync>;

impl MapSpec {
    pub fn build(&self) -> Result<MapFn, CliError> {
        match self {
            MapSpec::Cubic { coefficients: c } => {
                let c = *c;
                Ok(Box::new(move |x| x.map(|v| c[0] * (1.0 - v).powi(3) + c[1] * (1.0 - v) + c[2])))
            }
            MapSpec::Linear { matrix } => {
                let a = matrix_from_rows(matrix, "map.matrix")?;
                if !a.is_square() {
                    return Err(CliError::Usage("map.matrix must be square".into()));
                }
                Ok(Box::new(move |x| &a * x))
            }
        }
    }

    /// State dimension, or `None` when the map acts componentwise.
    pub fn dim(&self) -> Option<usize> {
        match self {
            MapSpec::Cubic { .. } => None,
            MapSpec::Linear { matrix } => Some(matrix.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UlamSettings {
    pub map: MapSpec,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub boxes: Vec<usize>,
    pub samples_per_box: usize,
}

impl Default for UlamSettings {
    fn default() -> Self {
        Self {
            map: MapSpec::Cubic {
                coefficients: [-0.8, 0.6, 0.7],
            },
            lower: vec![0.0],
            upper: vec![1.0],
            boxes: vec![10],
            samples_per_box: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DictionarySpec {
    /// `x -> x_i` for each coordinate.
    #[default]
    Coordinates,
    /// All monomials of total degree at most `degree`, constant included.
    Polynomial { degree: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdmdSettings {
    pub map: MapSpec,
    pub x0: Vec<f64>,
    pub steps: usize,
    pub dictionary: DictionarySpec,
}

impl Default for EdmdSettings {
    fn default() -> Self {
        Self {
            map: MapSpec::Linear {
                matrix: rows_of(&Ar1Config::reference().a0),
            },
            x0: vec![1.0, 0.0],
            steps: 20,
            dictionary: DictionarySpec::Coordinates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub descent: DescentConfig,
    pub ar1: Ar1Settings,
    pub gaussian_init: GaussianInit,
    pub cubic: CubicSettings,
    pub basis: BasisSpec,
    /// Starting parameters for empirical fits; the family's default when absent.
    pub theta_init: Option<Vec<f64>>,
    /// Snapshot file for custom experiments.
    pub snapshots_file: Option<PathBuf>,
    /// Iterations whose map curves, densities or ellipses are written. The
    /// final iterate is always included.
    pub dump_iters: Vec<usize>,
    pub ulam: UlamSettings,
    pub edmd: EdmdSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::default(),
            seed: 0,
            output_dir: PathBuf::from("pfo-out"),
            descent: DescentConfig::default(),
            ar1: Ar1Settings::default(),
            gaussian_init: GaussianInit::default(),
            cubic: CubicSettings::default(),
            basis: BasisSpec::default(),
            theta_init: None,
            snapshots_file: None,
            dump_iters: vec![0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000],
            ulam: UlamSettings::default(),
            edmd: EdmdSettings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file. A run artifact (`run.json`) is accepted too, in
    /// which case its embedded config is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))?;
        let embedded = value.get("config").is_some() && value.get("kind").is_none();
        if embedded {
            #[derive(Deserialize)]
            struct Wrapper {
                config: ExperimentConfig,
            }
            let w: Wrapper = serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))?;
            Ok(w.config)
        } else {
            serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

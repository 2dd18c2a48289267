//! The JSON run specification. A run is fully determined by this document
//! (plus command-line overrides); nothing else feeds the RNG.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use descentlab::core::{Dataset, Prng};
use descentlab::error::{Error, Result};
use descentlab::gadam::GadamConfig;
use descentlab::models::synth::{gaussian_blobs, linear_data};
use descentlab::models::{Mlp, MlpSpec, Objective, QuadraticBowl, Rastrigin, Rosenbrock, SoftmaxRegression};
use descentlab::optimizers::{OptimizerConfig, StopRule};

// Stream addresses under the master seed used by the harness itself.
pub const STREAM_DATA: u64 = 101;
pub const STREAM_INIT: u64 = 102;
pub const STREAM_BASELINE_INIT: u64 = 103;
pub const STREAM_RUN_BASE: u64 = 1000;

/// Top-level spec document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub seed: u64,
    /// Output directory; `--out` and `DESCENTLAB_OUT` interact with this,
    /// see `resolve_out_dir`.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub dataset: DatasetSpec,
    /// Mini-batch size for the mini-batch optimizer family.
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// Standard deviation of the shared normal initialization.
    #[serde(default = "default_init_sigma")]
    pub init_sigma: f64,
    /// Loss threshold for the summary's iterations-to-target column.
    #[serde(default)]
    pub target_loss: Option<f64>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub optimizers: Vec<OptimizerConfig>,
    #[serde(default)]
    pub gadam: Option<GadamConfig>,
}

fn default_batch_size() -> usize {
    32
}

fn default_init_sigma() -> f64 {
    0.3
}

/// Which objective to optimize.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    QuadraticBowl {
        diag: Vec<f64>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
    },
    Rosenbrock {
        dim: usize,
    },
    Rastrigin {
        dim: usize,
    },
    /// Dimensions come from the dataset.
    SoftmaxRegression,
    /// Hidden width; input/output dimensions come from the dataset.
    Mlp {
        hidden: usize,
    },
}

impl ObjectiveSpec {
    pub fn needs_dataset(&self) -> bool {
        matches!(self, ObjectiveSpec::SoftmaxRegression | ObjectiveSpec::Mlp { .. })
    }
}

/// Where training data comes from, if anywhere.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    #[default]
    None,
    Csv {
        path: PathBuf,
    },
    Blobs {
        n: usize,
        d_x: usize,
        classes: usize,
        noise: f64,
    },
    Linear {
        n: usize,
        d_x: usize,
        d_y: usize,
        noise: f64,
    },
}

/// An objective bound to its data, ready to train.
pub struct Problem {
    pub objective: Box<dyn Objective>,
    pub data: Option<Dataset>,
}

/// Materializes the dataset (synthetic generation is seeded from the master
/// seed) and constructs the objective.
pub fn build_problem(spec: &RunSpec) -> Result<Problem> {
    let mut data_rng = Prng::new(spec.seed).derive(STREAM_DATA);
    let data = match &spec.dataset {
        DatasetSpec::None => None,
        DatasetSpec::Csv { path } => Some(Dataset::load_csv(path)?),
        DatasetSpec::Blobs { n, d_x, classes, noise } => {
            Some(gaussian_blobs(*n, *d_x, *classes, *noise, &mut data_rng)?)
        }
        DatasetSpec::Linear { n, d_x, d_y, noise } => {
            Some(linear_data(*n, *d_x, *d_y, *noise, &mut data_rng)?)
        }
    };

    let objective: Box<dyn Objective> = match &spec.objective {
        ObjectiveSpec::QuadraticBowl { diag, offset } => {
            let d = diag.len();
            let mut matrix = vec![vec![0.0; d]; d];
            for (i, &v) in diag.iter().enumerate() {
                matrix[i][i] = v;
            }
            let b = offset.clone().unwrap_or_else(|| vec![0.0; d]);
            Box::new(QuadraticBowl::new(matrix, b)?)
        }
        ObjectiveSpec::Rosenbrock { dim } => Box::new(Rosenbrock::new(*dim)?),
        ObjectiveSpec::Rastrigin { dim } => Box::new(Rastrigin::new(*dim)?),
        ObjectiveSpec::SoftmaxRegression => {
            let ds = data
                .as_ref()
                .ok_or_else(|| Error::invalid("softmax_regression needs a dataset"))?;
            Box::new(SoftmaxRegression::new(ds.feature_dim(), ds.label_dim())?)
        }
        ObjectiveSpec::Mlp { hidden } => {
            let ds = data.as_ref().ok_or_else(|| Error::invalid("mlp needs a dataset"))?;
            Box::new(Mlp::new(MlpSpec::new(ds.feature_dim(), *hidden, ds.label_dim())?))
        }
    };

    if !spec.objective.needs_dataset() && data.is_some() {
        return Err(Error::invalid(
            "analytic objectives take no dataset; remove the dataset section",
        ));
    }
    Ok(Problem { objective, data })
}

/// Output directory precedence: `--out` flag, then the spec's `out_dir`,
/// then `DESCENTLAB_OUT`, then the current directory.
pub fn resolve_out_dir(flag: Option<&Path>, spec: &RunSpec) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_owned();
    }
    if let Some(dir) = &spec.out_dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var("DESCENTLAB_OUT") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

/// Loads and parses a spec, reporting JSON problems with their line number.
pub fn load_spec(path: &Path) -> std::result::Result<RunSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read spec {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        format!(
            "invalid spec {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })
}

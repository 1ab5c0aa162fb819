//! Scaling experiments over generated point sets: rich profiles per size,
//! exponent fits, bound certificates and their CSV/SVG output.

mod certify;
mod emit;
mod fit;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::incidence::{spanned_line_sizes, spanned_plane_sizes, IncidenceError, SizeHistogram};
use crate::pointgen::{integer_grid, perturbed_lattice, ParsePointSetError, PointGenError, PointSet};
use crate::prooflab::DEFAULT_SUBSET_CAP;

pub use certify::{
    certify_bound, incidence_bound_check, BoundCertificate, IncidenceCheck, TheoremTag, Verdict,
};
pub use emit::{certificate_csv, emit_outputs, profile_csv, svg_plot};
pub use fit::{fit_exponent, k_series, n_series, Fit, FitMode};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum XplabError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("need at least 3 data points with positive counts, got {points}")]
    InsufficientData { points: usize },
    #[error(transparent)]
    Generation(#[from] PointGenError),
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error("{path}: {source}")]
    ParsePoints {
        path: PathBuf,
        source: ParsePointSetError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `integer_grid(m, 2)` with spanned lines; sizes are `m`.
    GridLines,
    /// `perturbed_lattice(n, N)` with spanned lines; sizes are `N`.
    LatticeLines,
    /// `perturbed_lattice(3, N)` with spanned planes; sizes are `N`.
    LatticePlanes,
    /// `integer_grid(m, 3)` with spanned planes; sizes are `m`.
    GridPlanes,
    /// Points read from `points_file`; `sizes` is ignored.
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::GridLines => "grid-lines",
            Scenario::LatticeLines => "lattice-lines",
            Scenario::LatticePlanes => "lattice-planes",
            Scenario::GridPlanes => "grid-planes",
            Scenario::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Lines,
    Planes,
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub profile_csv: String,
    pub certificate_csv: String,
    /// Write one log-log plot per certificate.
    pub svg: bool,
    /// Write each generated point set in the text format.
    pub points: bool,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            profile_csv: "profile.csv".into(),
            certificate_csv: "certificates.csv".into(),
            svg: false,
            points: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    pub theorem: TheoremTag,
    pub r: usize,
    /// Defaults to the experiment's `n`.
    #[serde(default)]
    pub n: Option<usize>,
    /// Fail the verdict when the fitted constant exceeds this value.
    #[serde(default)]
    pub c_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSpec {
    pub k: usize,
    /// Type of the family, or of the pairwise intersection curves for
    /// planes (the good-tuple count then uses (r+1)-tuples).
    pub r: usize,
    /// Also run the index machinery (spanned planes only).
    #[serde(default)]
    pub index: bool,
}

fn default_n() -> usize {
    2
}

fn default_c_vol() -> u64 {
    crate::pointgen::DEFAULT_C_VOL
}

fn default_c_thresh() -> f64 {
    2.0
}

fn default_subset_cap() -> u64 {
    DEFAULT_SUBSET_CAP as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub sizes: Vec<u64>,
    /// Thresholds written to the profile CSV; empty means `2..=max`.
    #[serde(default)]
    pub k_values: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to `2^n * 2`.
    #[serde(default)]
    pub c_hom: Option<u64>,
    #[serde(default = "default_c_vol")]
    pub c_vol: u64,
    #[serde(default = "default_c_thresh")]
    pub c_thresh: f64,
    /// Inclusive `[lo, hi]` range of k for fits and constants; defaults to
    /// `[3, max_rich / 2]` per run.
    #[serde(default)]
    pub fit_window: Option<[usize; 2]>,
    #[serde(default = "default_subset_cap")]
    pub subset_cap: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub outputs: OutputPaths,
    #[serde(default)]
    pub certify: Vec<CertifySpec>,
    #[serde(default)]
    pub diagnose: Option<DiagnoseSpec>,
    #[serde(default)]
    pub points_file: Option<PathBuf>,
    /// Family for the custom scenario.
    #[serde(default)]
    pub family: Option<FamilyKind>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, n: usize, sizes: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            n,
            sizes,
            k_values: Vec::new(),
            seed: 0,
            c_hom: None,
            c_vol: default_c_vol(),
            c_thresh: default_c_thresh(),
            fit_window: None,
            subset_cap: default_subset_cap(),
            threads: None,
            outputs: OutputPaths::default(),
            certify: Vec::new(),
            diagnose: None,
            points_file: None,
            family: None,
        }
    }

    pub fn validate(&self) -> Result<(), XplabError> {
        let bad = |m: String| Err(XplabError::InvalidConfig(m));
        if self.scenario != Scenario::Custom {
            if self.sizes.is_empty() {
                return bad("sizes must not be empty".into());
            }
            if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
                return bad("sizes must be strictly increasing".into());
            }
        } else if self.points_file.is_none() {
            return bad("custom scenario needs points_file".into());
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k < 2) {
            return bad(format!("k_values must be at least 2, got {k}"));
        }
        match self.scenario {
            Scenario::GridLines if self.n != 2 => return bad("grid-lines needs n = 2".into()),
            Scenario::LatticePlanes | Scenario::GridPlanes if self.n != 3 => {
                return bad(format!("{} needs n = 3", self.scenario.name()));
            }
            _ => {}
        }
        if self.n < 2 {
            return bad("n must be at least 2".into());
        }
        if let Some([lo, hi]) = self.fit_window {
            if lo < 2 || lo > hi {
                return bad(format!("fit_window [{lo}, {hi}] must satisfy 2 <= lo <= hi"));
            }
        }
        if self.c_thresh.is_nan() || self.c_thresh <= 0.0 {
            return bad("c_thresh must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        for c in &self.certify {
            if c.r == 0 {
                return bad("certify.r must be positive".into());
            }
        }
        if let Some(d) = &self.diagnose {
            if d.k < 2 || d.r == 0 {
                return bad("diagnose needs k >= 2 and r >= 1".into());
            }
        }
        Ok(())
    }

    pub fn family_kind(&self) -> FamilyKind {
        match self.scenario {
            Scenario::GridLines | Scenario::LatticeLines => FamilyKind::Lines,
            Scenario::LatticePlanes | Scenario::GridPlanes => FamilyKind::Planes,
            Scenario::Custom => self.family.unwrap_or(FamilyKind::Lines),
        }
    }

    /// SHA-256 of the compact JSON form, excluding the thread count.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.threads = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Size parameters of the sweep; a single 0 for the custom scenario.
    pub fn size_params(&self) -> Vec<u64> {
        if self.scenario == Scenario::Custom {
            vec![0]
        } else {
            self.sizes.clone()
        }
    }

    /// The point set for one size parameter.
    pub fn instance(&self, size: u64) -> Result<PointSet, XplabError> {
        let ps = match self.scenario {
            Scenario::GridLines | Scenario::GridPlanes => integer_grid(size, self.n, self.seed)?,
            Scenario::LatticeLines | Scenario::LatticePlanes => perturbed_lattice(self.n, size as usize, self.seed)?,
            Scenario::Custom => {
                let path = self.points_file.clone().expect("validated");
                let text = std::fs::read_to_string(&path).map_err(|source| XplabError::Io {
                    path: path.clone(),
                    source,
                })?;
                PointSet::from_text(&text).map_err(|source| XplabError::ParsePoints { path, source })?
            }
        };
        let c_hom = self.c_hom.unwrap_or_else(|| crate::pointgen::default_c_hom(ps.dim()));
        Ok(ps.with_constants(c_hom, self.c_vol))
    }
}

/// One size of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub size: u64,
    pub n_points: usize,
    pub histogram: SizeHistogram,
}

impl RunRecord {
    /// Number of flats `M`.
    pub fn flats(&self) -> usize {
        self.histogram.flat_count()
    }

    pub fn total_incidences(&self) -> usize {
        self.histogram.total_incidences()
    }

    pub fn max_rich(&self) -> usize {
        self.histogram.max_richness()
    }

    pub fn rich(&self, k: usize) -> usize {
        self.histogram.rich_count(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: Scenario,
    pub n: usize,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
    pub runs: Vec<RunRecord>,
}

/// Size histogram of the spanned family of `ps`.
pub fn spanned_histogram(ps: &PointSet, kind: FamilyKind) -> Result<SizeHistogram, XplabError> {
    Ok(match kind {
        FamilyKind::Lines => spanned_line_sizes(ps),
        FamilyKind::Planes => spanned_plane_sizes(ps)?,
    })
}

/// Generates every size, counts the spanned family and records its
/// profile. Sizes run concurrently and are merged in size order.
pub fn run_rich_scaling(cfg: &ExperimentConfig) -> Result<ExperimentReport, XplabError> {
    cfg.validate()?;
    let kind = cfg.family_kind();
    let runs = cfg
        .size_params()
        .into_par_iter()
        .map(|size| {
            let ps = cfg.instance(size)?;
            Ok(RunRecord {
                size,
                n_points: ps.len(),
                histogram: spanned_histogram(&ps, kind)?,
            })
        })
        .collect::<Result<Vec<_>, XplabError>>()?;
    Ok(ExperimentReport {
        scenario: cfg.scenario,
        n: cfg.n,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        version: VERSION.to_string(),
        runs,
    })
}

use serde::{Deserialize, Serialize};

use crate::clustering::KMeansConfig;
use crate::coefficients::{ConstraintMode, DEFAULT_CONSTRAINT_SAMPLES};
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

/// The four segmentation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hgsp,
    Gsp,
    Laplacian,
    Kmeans,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Hgsp, Method::Gsp, Method::Laplacian, Method::Kmeans];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hgsp => "hgsp",
            Method::Gsp => "gsp",
            Method::Laplacian => "laplacian",
            Method::Kmeans => "kmeans",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    #[default]
    Relaxed,
    Sampled,
}

/// Steep-drop rule parameters for choosing the embedding dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub max_e: usize,
    pub fallback_e: usize,
}

impl Default for SelectionRule {
    fn default() -> Self {
        Self {
            max_e: 5,
            fallback_e: 2,
        }
    }
}

/// Everything that determines a segmentation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub k: usize,
    pub beta: f64,
    pub constraint_mode: ConstraintKind,
    pub constraint_samples: usize,
    pub max_e: usize,
    pub fallback_e: usize,
    pub seed: u64,
    /// Gaussian-graph bandwidth; estimated from the data when absent.
    pub delta: Option<f64>,
    /// Gaussian-graph squared-distance threshold; estimated when absent.
    pub t: Option<f64>,
    pub snr_db: Option<f64>,
    pub sample_n: Option<usize>,
    pub kmeans: KMeansConfig,
}

impl SegmentationConfig {
    pub fn new(k: usize) -> Self {
        let rule = SelectionRule::default();
        Self {
            k,
            beta: 1.0,
            constraint_mode: ConstraintKind::Relaxed,
            constraint_samples: DEFAULT_CONSTRAINT_SAMPLES,
            max_e: rule.max_e,
            fallback_e: rule.fallback_e,
            seed: 0,
            delta: None,
            t: None,
            snr_db: None,
            sample_n: None,
            kmeans: KMeansConfig::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta must be finite and nonnegative"));
        }
        if self.max_e == 0 || self.fallback_e == 0 {
            return Err(Error::invalid("max_e and fallback_e must be at least 1"));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid("delta must be positive"));
            }
        }
        if let Some(t) = self.t {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::invalid("t must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn selection(&self) -> SelectionRule {
        SelectionRule {
            max_e: self.max_e,
            fallback_e: self.fallback_e,
        }
    }

    pub fn coefficient_mode(&self) -> ConstraintMode {
        match self.constraint_mode {
            ConstraintKind::Relaxed => ConstraintMode::Relaxed,
            ConstraintKind::Sampled => ConstraintMode::Sampled {
                n_samples: self.constraint_samples,
                seed: self.sub_seed(Stream::Constraints),
            },
        }
    }

    pub fn sub_seed(&self, stream: Stream) -> u64 {
        seed::derive(self.seed, stream)
    }
}

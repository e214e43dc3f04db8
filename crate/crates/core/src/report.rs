//! Versioned JSON analysis reports. The layout is documented in
//! `docs/report-schema.md`; plots are rendered from these objects only.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::DivergenceReport;
use crate::error::{Error, Result};
use crate::fit::{fit_breakpoint, fit_power_law, goodness_report, GoodnessReport, PiecewiseFit, RankWindow, ScalingFit};
use crate::freq::RankedDistribution;
use crate::monkey::{MonkeyParams, RNG_ALGORITHM};
use crate::strata::StrataReport;

pub const SCHEMA: &str = "rankfreq-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_bytes(path: impl Into<String>, data: &[u8]) -> Self {
        InputDigest { path: path.into(), bytes: data.len() as u64, sha256: hex::encode(Sha256::digest(data)) }
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::of_bytes(path.display().to_string(), &data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub label: String,
    /// Total tokens N; 0 when the distribution does not come from counts.
    pub tokens: u64,
    /// Vocabulary size V (number of ranks).
    pub vocabulary: usize,
    pub normalized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub piecewise: Option<PiecewiseFit<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goodness: Option<GoodnessReport<f64>>,
    /// `(rank, frequency)` pairs, present when requested for plotting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportOptions {
    pub piecewise: bool,
    pub goodness: bool,
    pub series: bool,
}

impl DistributionReport {
    /// Bare entry with counts and optionally the series, no fits.
    pub fn describe(dist: &RankedDistribution<f64>, series: bool) -> Self {
        DistributionReport {
            label: dist.label().to_owned(),
            tokens: dist.total_tokens(),
            vocabulary: dist.len(),
            normalized: dist.is_normalized(),
            fit: None,
            piecewise: None,
            goodness: None,
            series: series.then(|| dist.points().iter().map(|p| (p.rank, p.frequency)).collect()),
        }
    }

    /// Fits over `window`; any fit failure is an error.
    pub fn analyze(dist: &RankedDistribution<f64>, window: RankWindow, opts: ReportOptions) -> Result<Self> {
        let mut r = Self::describe(dist, opts.series);
        let fit = fit_power_law(dist, window)?;
        if opts.goodness {
            r.goodness = Some(goodness_report(&fit, dist)?);
        }
        if opts.piecewise {
            r.piecewise = Some(fit_breakpoint(dist, window)?);
        }
        r.fit = Some(fit);
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonkeyReport {
    pub params: MonkeyParams,
    pub rng: String,
    pub analytic_alpha: f64,
}

impl MonkeyReport {
    pub fn new(params: MonkeyParams) -> Result<Self> {
        Ok(MonkeyReport {
            params,
            rng: RNG_ALGORITHM.to_owned(),
            analytic_alpha: crate::monkey::monkey_alpha(params.alphabet_size, params.space_prob)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub tool_version: String,
    pub generated_at_unix: u64,
    pub inputs: Vec<InputDigest>,
    pub distributions: Vec<DistributionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divergences: Vec<DivergenceReport<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strata: Option<StrataReport<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monkey: Option<MonkeyReport>,
}

/// `SOURCE_DATE_EPOCH` when set, otherwise the wall clock.
pub fn report_timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

impl AnalysisReport {
    pub fn new(inputs: Vec<InputDigest>) -> Self {
        AnalysisReport {
            schema: SCHEMA.to_owned(),
            tool_version: TOOL_VERSION.to_owned(),
            generated_at_unix: report_timestamp(),
            inputs,
            distributions: Vec::new(),
            divergences: Vec::new(),
            strata: None,
            monkey: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a report, rejecting other schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: AnalysisReport = serde_json::from_str(text)?;
        if r.schema != SCHEMA {
            return Err(Error::Domain(format!("unsupported report schema {:?}, expected {SCHEMA:?}", r.schema)));
        }
        Ok(r)
    }

    /// Folds another report into this one, keeping argument order.
    pub fn absorb(&mut self, other: AnalysisReport) {
        self.inputs.extend(other.inputs);
        self.distributions.extend(other.distributions);
        self.divergences.extend(other.divergences);
        if self.strata.is_none() {
            self.strata = other.strata;
        }
        if self.monkey.is_none() {
            self.monkey = other.monkey;
        }
    }
}

//! Size-matched corpus assembly and distribution comparison.
//!
//! A manifest is a plain-text file with one document path per line
//! (relative paths resolve against the manifest's directory) and optional
//! header directives:
//!
//! ```text
//! #label=single-author
//! #target=900000
//! #trim=truncate_last_document
//! plays/hamlet.txt
//! plays/lear.txt
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq::{FrequencyTable, RankedDistribution};
use crate::scalar::Scalar;
use crate::tokenizer::{count_tokens, tokenize_bytes, TokenStream};

/// Relative size tolerance for the `none` trim policy.
pub const SIZE_TOLERANCE: f64 = 0.02;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_SUSTAIN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimPolicy {
    #[default]
    None,
    TruncateLastDocument,
}

impl std::str::FromStr for TrimPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(TrimPolicy::None),
            "truncate_last_document" => Ok(TrimPolicy::TruncateLastDocument),
            other => Err(Error::Domain(format!("unknown trim policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSpec {
    pub label: String,
    pub documents: Vec<PathBuf>,
    pub target_size: Option<u64>,
    pub trim: TrimPolicy,
}

impl CorpusSpec {
    pub fn new(label: impl Into<String>, documents: Vec<PathBuf>) -> Self {
        CorpusSpec { label: label.into(), documents, target_size: None, trim: TrimPolicy::None }
    }

    /// Parses a manifest. `path` is used for error messages and to resolve
    /// relative document paths.
    pub fn parse_manifest(text: &str, path: &Path) -> Result<Self> {
        let shown = path.display().to_string();
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let mut label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut target_size = None;
        let mut trim = TrimPolicy::None;
        let mut documents = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("#label=") {
                label = v.to_owned();
            } else if let Some(v) = line.strip_prefix("#target=") {
                let n: u64 =
                    v.trim().parse().map_err(|_| Error::parse(&shown, lineno, format!("bad target {v:?}")))?;
                target_size = Some(n);
            } else if let Some(v) = line.strip_prefix("#trim=") {
                trim = v.parse().map_err(|e: Error| Error::parse(&shown, lineno, e.to_string()))?;
            } else if line.starts_with('#') {
                continue;
            } else {
                let p = Path::new(line);
                documents.push(if p.is_absolute() { p.to_path_buf() } else { base.join(p) });
            }
        }
        if documents.is_empty() {
            return Err(Error::parse(&shown, 0, "manifest lists no documents"));
        }
        Ok(CorpusSpec { label, documents, target_size, trim })
    }

    pub fn read_manifest(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_manifest(&text, path)
    }
}

/// Reads, tokenizes and assembles the documents of `spec`. Files are read
/// and tokenized in parallel; assembly follows manifest order.
pub fn assemble(spec: &CorpusSpec) -> Result<FrequencyTable> {
    if spec.documents.is_empty() {
        return Err(Error::Domain(format!("corpus {} has no documents", spec.label)));
    }
    let streams: Vec<TokenStream> = spec
        .documents
        .par_iter()
        .map(|p| {
            let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
            tokenize_bytes(&bytes, &p.display().to_string())
        })
        .collect::<Result<_>>()?;
    assemble_streams(&spec.label, streams, spec.target_size, spec.trim)
}

/// Assembly on already tokenized documents, in order.
pub fn assemble_streams(
    label: &str,
    mut streams: Vec<TokenStream>,
    target_size: Option<u64>,
    trim: TrimPolicy,
) -> Result<FrequencyTable> {
    if streams.is_empty() {
        return Err(Error::Domain(format!("corpus {label} has no documents")));
    }
    let achieved: u64 = streams.iter().map(|s| s.len() as u64).sum();
    if let Some(target) = target_size {
        match trim {
            TrimPolicy::None => {
                let gap = (achieved as f64 - target as f64).abs();
                if gap > SIZE_TOLERANCE * target as f64 {
                    return Err(Error::SizeMismatch { label: label.to_owned(), achieved, target });
                }
            }
            TrimPolicy::TruncateLastDocument => {
                let last = streams.last_mut().expect("non-empty");
                let before_last = achieved - last.len() as u64;
                if before_last >= target || achieved < target {
                    return Err(Error::SizeMismatch { label: label.to_owned(), achieved, target });
                }
                last.truncate((target - before_last) as usize);
            }
        }
    }
    let mut table = FrequencyTable::new(label);
    for s in &streams {
        for (tok, c) in count_tokens(s).entries() {
            table.add(tok.clone(), *c);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayDirection {
    /// The first distribution sits below the second beyond the divergence.
    FirstDecaysFaster,
    SecondDecaysFaster,
}

impl DecayDirection {
    pub fn flipped(self) -> Self {
        match self {
            DecayDirection::FirstDecaysFaster => DecayDirection::SecondDecaysFaster,
            DecayDirection::SecondDecaysFaster => DecayDirection::FirstDecaysFaster,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport<F> {
    pub label_a: String,
    pub label_b: String,
    /// First rank of the first sustained run, `None` when there is no run.
    pub divergence_rank: Option<usize>,
    pub direction: Option<DecayDirection>,
    /// Gap threshold δ in decades of frequency.
    pub threshold: F,
    pub sustain_length: usize,
    /// Ranks present in both distributions.
    pub compared_ranks: usize,
    /// `log10 fA - log10 fB` at the divergence rank.
    pub gap_at_divergence: Option<F>,
}

/// Finds the smallest rank where `|log10 fA(r) - log10 fB(r)| > delta` holds
/// with one sign for `sustain` consecutive ranks.
pub fn compare<F: Scalar>(
    a: &RankedDistribution<F>,
    b: &RankedDistribution<F>,
    delta: F,
    sustain: usize,
) -> Result<DivergenceReport<F>> {
    for d in [a, b] {
        if !d.is_normalized() {
            return Err(Error::NotNormalized(d.label().to_owned()));
        }
    }
    if delta.is_nan() || delta < F::zero() {
        return Err(Error::Domain(format!("threshold must be non-negative, got {delta}")));
    }
    if sustain == 0 {
        return Err(Error::Domain("sustain length must be at least 1".into()));
    }
    let compared = a.len().min(b.len());
    let mut run_start = 0usize;
    let mut run_len = 0usize;
    let mut run_sign = 0i8;
    let mut found = None;
    for (pa, pb) in a.points().iter().zip(b.points()) {
        let gap = pa.frequency.log10() - pb.frequency.log10();
        let sign = if gap > delta {
            1
        } else if gap < -delta {
            -1
        } else {
            0
        };
        if sign == 0 {
            run_len = 0;
            continue;
        }
        if run_len == 0 || sign != run_sign {
            run_start = pa.rank;
            run_sign = sign;
            run_len = 0;
        }
        run_len += 1;
        if run_len == sustain {
            found = Some(run_start);
            break;
        }
    }
    let gap_at = found.map(|r| {
        a.frequency(r).expect("rank in a").log10() - b.frequency(r).expect("rank in b").log10()
    });
    Ok(DivergenceReport {
        label_a: a.label().to_owned(),
        label_b: b.label().to_owned(),
        divergence_rank: found,
        direction: found.map(|_| {
            if run_sign > 0 {
                DecayDirection::SecondDecaysFaster
            } else {
                DecayDirection::FirstDecaysFaster
            }
        }),
        threshold: delta,
        sustain_length: sustain,
        compared_ranks: compared,
        gap_at_divergence: gap_at,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyProfile {
    pub vocabulary_size: usize,
    pub total_tokens: u64,
    pub type_token_ratio: f64,
    /// Tokens seen exactly once.
    pub hapax_count: usize,
}

pub fn vocabulary_profile(table: &FrequencyTable) -> Result<VocabularyProfile> {
    if table.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let v = table.vocabulary_size();
    let n = table.total_tokens();
    Ok(VocabularyProfile {
        vocabulary_size: v,
        total_tokens: n,
        type_token_ratio: v as f64 / n as f64,
        hapax_count: table.entries().values().filter(|&&c| c == 1).count(),
    })
}

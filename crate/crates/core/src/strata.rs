//! Part-of-speech strata of pre-tagged lemma frequency lists.
//!
//! List format (TSV, UTF-8): optional `#unit=per_million|count` and
//! `#label=` directives, then `lemma\tpos\tfrequency` lines. Other `#` lines
//! are comments. Source tags go through a [`PosMapping`]; the default covers
//! common BNC-style tags and the canonical names themselves, and anything it
//! does not know becomes [`PosTag::Other`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, RankWindow, ScalingFit, MIN_FIT_POINTS};
use crate::freq::RankedDistribution;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other(String),
}

impl PosTag {
    pub const OPEN_CLASSES: [PosTag; 4] = [PosTag::Noun, PosTag::Verb, PosTag::Adjective, PosTag::Adverb];

    /// Canonical name as used in mapping files.
    pub fn parse_canonical(s: &str) -> PosTag {
        match s.trim().to_ascii_lowercase().as_str() {
            "noun" => PosTag::Noun,
            "verb" => PosTag::Verb,
            "adjective" => PosTag::Adjective,
            "adverb" => PosTag::Adverb,
            _ => PosTag::Other(s.trim().to_owned()),
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosTag::Noun => f.write_str("noun"),
            PosTag::Verb => f.write_str("verb"),
            PosTag::Adjective => f.write_str("adjective"),
            PosTag::Adverb => f.write_str("adverb"),
            PosTag::Other(l) => write!(f, "other({l})"),
        }
    }
}

/// Source tag to canonical tag, matched case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosMapping {
    table: HashMap<String, PosTag>,
}

impl Default for PosMapping {
    fn default() -> Self {
        let pairs = [
            ("NoC", PosTag::Noun),
            ("Verb", PosTag::Verb),
            ("Adj", PosTag::Adjective),
            ("Adv", PosTag::Adverb),
            ("noun", PosTag::Noun),
            ("adjective", PosTag::Adjective),
            ("adverb", PosTag::Adverb),
        ];
        PosMapping { table: pairs.into_iter().map(|(k, v)| (k.to_ascii_lowercase(), v)).collect() }
    }
}

impl PosMapping {
    pub fn empty() -> Self {
        PosMapping { table: HashMap::new() }
    }

    pub fn insert(&mut self, source: &str, tag: PosTag) {
        self.table.insert(source.trim().to_ascii_lowercase(), tag);
    }

    /// `None` means the tag is unmapped.
    pub fn lookup(&self, source: &str) -> Option<&PosTag> {
        self.table.get(&source.trim().to_ascii_lowercase())
    }

    /// Parses `<source_tag>\t<canonical_pos>` lines; these entries replace
    /// the defaults entirely.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut m = PosMapping::empty();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (src, dst) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, idx + 1, "expected <source_tag>\\t<canonical_pos>"))?;
            if src.trim().is_empty() || dst.trim().is_empty() {
                return Err(Error::parse(path, idx + 1, "empty tag"));
            }
            m.insert(src, PosTag::parse_canonical(dst));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyUnit {
    #[default]
    PerMillion,
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRecord<F> {
    pub lemma: String,
    pub pos: PosTag,
    pub source_tag: String,
    pub frequency: F,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedLemmaList<F> {
    pub source_label: String,
    pub unit: FrequencyUnit,
    pub records: Vec<LemmaRecord<F>>,
    /// Records whose source tag was not in the mapping.
    pub unmapped_tags: usize,
}

impl<F: Scalar> TaggedLemmaList<F> {
    pub fn total_frequency(&self) -> F {
        self.records.iter().fold(F::zero(), |a, r| a + r.frequency)
    }

    /// Every distinct tag in the list, canonical classes first.
    pub fn tags(&self) -> Vec<PosTag> {
        let mut t: Vec<PosTag> = self.records.iter().map(|r| r.pos.clone()).collect();
        t.sort();
        t.dedup();
        t
    }

    /// Same list with frequencies multiplied by `c`, e.g. per-million to counts.
    pub fn rescaled(&self, c: F, unit: FrequencyUnit) -> Self {
        let mut out = self.clone();
        out.unit = unit;
        for r in &mut out.records {
            r.frequency = r.frequency * c;
        }
        out
    }
}

pub fn parse_tagged_list<F: Scalar>(text: &str, path: &str, mapping: &PosMapping) -> Result<TaggedLemmaList<F>> {
    let mut list = TaggedLemmaList {
        source_label: std::path::Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        unit: FrequencyUnit::default(),
        records: Vec::new(),
        unmapped_tags: 0,
    };
    let mut seen: HashMap<(String, PosTag), usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(v) = line.strip_prefix("#unit=") {
            list.unit = match v.trim() {
                "per_million" => FrequencyUnit::PerMillion,
                "count" => FrequencyUnit::Count,
                other => return Err(Error::parse(path, lineno, format!("unknown unit {other:?}"))),
            };
            continue;
        }
        if let Some(v) = line.strip_prefix("#label=") {
            list.source_label = v.trim().to_owned();
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, lineno, format!("expected lemma\\tpos\\tfrequency, found {} fields", fields.len())));
        }
        let lemma = fields[0].trim();
        let tag = fields[1].trim();
        if lemma.is_empty() || tag.is_empty() {
            return Err(Error::parse(path, lineno, "empty lemma or tag"));
        }
        let frequency = fields[2]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|f| f.is_finite() && *f >= 0.0)
            .map(F::from_f64_lossy)
            .ok_or_else(|| Error::parse(path, lineno, format!("bad frequency {:?}", fields[2])))?;
        let pos = match mapping.lookup(tag) {
            Some(p) => p.clone(),
            None => {
                list.unmapped_tags += 1;
                PosTag::Other(tag.to_owned())
            }
        };
        let key = (lemma.to_owned(), pos.clone());
        if let Some(&first) = seen.get(&key) {
            return Err(Error::DuplicateLemma { lemma: key.0, pos: pos.to_string(), first, second: lineno });
        }
        seen.insert(key, lineno);
        list.records.push(LemmaRecord { lemma: lemma.to_owned(), pos, source_tag: tag.to_owned(), frequency, line: lineno });
    }
    Ok(list)
}

/// Ranked distribution of a single part of speech. Zero-frequency records
/// carry no rank and are left out.
pub fn stratify<F: Scalar>(list: &TaggedLemmaList<F>, pos: &PosTag) -> Result<RankedDistribution<F>> {
    let pts: Vec<(String, F)> =
        list.records.iter().filter(|r| &r.pos == pos).map(|r| (r.lemma.clone(), r.frequency)).collect();
    if pts.iter().all(|(_, f)| *f <= F::zero()) {
        return Err(Error::EmptyStratum(pos.to_string()));
    }
    RankedDistribution::from_unsorted(format!("{}:{}", list.source_label, pos), pts, false)
}

/// All records ranked together; tokens are `lemma/pos`.
pub fn combined<F: Scalar>(list: &TaggedLemmaList<F>) -> Result<RankedDistribution<F>> {
    let pts = list.records.iter().map(|r| (format!("{}/{}", r.lemma, r.pos), r.frequency)).collect();
    RankedDistribution::from_unsorted(format!("{}:all", list.source_label), pts, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StratumOutcome<F> {
    Fitted { fit: ScalingFit<F> },
    Insufficient { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumFit<F> {
    /// Part of speech, or `all` for the combined list.
    pub stratum: String,
    pub lemmas: usize,
    pub total_frequency: F,
    #[serde(flatten)]
    pub outcome: StratumOutcome<F>,
}

impl<F: Scalar> StratumFit<F> {
    pub fn fit(&self) -> Option<&ScalingFit<F>> {
        match &self.outcome {
            StratumOutcome::Fitted { fit } => Some(fit),
            StratumOutcome::Insufficient { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrataReport<F> {
    pub source_label: String,
    pub unit: FrequencyUnit,
    /// The four open classes, fitted strata first in descending R², then
    /// insufficient ones in class order.
    pub strata: Vec<StratumFit<F>>,
    pub combined: StratumFit<F>,
}

impl<F: Scalar> StrataReport<F> {
    pub fn stratum(&self, pos: &PosTag) -> Option<&StratumFit<F>> {
        let name = pos.to_string();
        self.strata.iter().find(|s| s.stratum == name)
    }
}

/// Default window for a stratum of `v` lemmas: `[10, min(1000, v)]`.
pub fn default_stratum_window(v: usize) -> Option<RankWindow> {
    RankWindow::new(10, v.min(1000)).ok()
}

fn fit_stratum<F: Scalar>(name: String, dist: Result<RankedDistribution<F>>, window: Option<RankWindow>) -> StratumFit<F> {
    let dist = match dist {
        Ok(d) => d,
        Err(e) => {
            return StratumFit {
                stratum: name,
                lemmas: 0,
                total_frequency: F::zero(),
                outcome: StratumOutcome::Insufficient { reason: e.to_string() },
            }
        }
    };
    let lemmas = dist.len();
    let total_frequency = dist.frequencies().fold(F::zero(), |a, f| a + f);
    let outcome = match window.or_else(|| default_stratum_window(lemmas)) {
        None => StratumOutcome::Insufficient {
            reason: format!("{lemmas} lemmas, at least {} ranks needed from rank 10", MIN_FIT_POINTS),
        },
        Some(w) => match fit_power_law(&dist, w) {
            Ok(fit) => StratumOutcome::Fitted { fit },
            Err(e) => StratumOutcome::Insufficient { reason: e.to_string() },
        },
    };
    StratumFit { stratum: name, lemmas, total_frequency, outcome }
}

/// One fit per open class plus the combined list. `window = None` uses
/// [`default_stratum_window`] per stratum; a stratum that cannot be fitted
/// is reported as insufficient without failing the others.
pub fn strata_report<F: Scalar>(list: &TaggedLemmaList<F>, window: Option<RankWindow>) -> StrataReport<F> {
    let mut strata: Vec<StratumFit<F>> = PosTag::OPEN_CLASSES
        .iter()
        .map(|pos| fit_stratum(pos.to_string(), stratify(list, pos), window))
        .collect();
    let class_order: BTreeMap<String, usize> =
        PosTag::OPEN_CLASSES.iter().enumerate().map(|(i, p)| (p.to_string(), i)).collect();
    strata.sort_by(|a, b| match (a.fit(), b.fit()) {
        (Some(fa), Some(fb)) => fb.r_squared.partial_cmp(&fa.r_squared).unwrap_or(std::cmp::Ordering::Equal),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => class_order[&a.stratum].cmp(&class_order[&b.stratum]),
    });
    StrataReport {
        source_label: list.source_label.clone(),
        unit: list.unit,
        combined: fit_stratum("all".to_owned(), combined(list), window),
        strata,
    }
}

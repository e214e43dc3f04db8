//! Frequency tables, ranked distributions and the TSV table format.
//!
//! Counts stay exact `u64` until a distribution is normalized. Ranking sorts
//! by descending count and breaks ties by ascending code-point order of the
//! token, so every ranked artifact is reproducible byte for byte.
//!
//! TSV layout (UTF-8, LF):
//!
//! ```text
//! #label=<label>\t#total=<N>
//! <rank>\t<token>\t<count>
//! ```
//!
//! Lines starting with `#` other than the header are comments.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyTable {
    label: String,
    entries: BTreeMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new(label: impl Into<String>) -> Self {
        FrequencyTable { label: label.into(), ..Default::default() }
    }

    /// Builds a table from a count map. Zero counts are dropped.
    pub fn from_map(label: impl Into<String>, mut entries: BTreeMap<String, u64>) -> Self {
        entries.retain(|_, c| *c > 0);
        let total = entries.values().sum();
        FrequencyTable { label: label.into(), entries, total }
    }

    /// Builds a table from `(token, count)` pairs, summing repeated tokens.
    pub fn from_counts<I, S>(label: impl Into<String>, counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut t = FrequencyTable::new(label);
        for (tok, c) in counts {
            t.add(tok, c);
        }
        t
    }

    pub fn add(&mut self, token: impl Into<String>, count: u64) {
        if count == 0 {
            return;
        }
        *self.entries.entry(token.into()).or_default() += count;
        self.total += count;
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn entries(&self) -> &BTreeMap<String, u64> {
        &self.entries
    }

    pub fn count(&self, token: &str) -> u64 {
        self.entries.get(token).copied().unwrap_or(0)
    }

    /// N, the number of tokens.
    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    /// V, the number of distinct tokens.
    pub fn vocabulary_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tokens in rank order with their counts.
    pub fn ranked_counts(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.entries.iter().map(|(t, c)| (t.as_str(), *c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// Rank-frequency distribution with raw counts.
    pub fn rank<F: Scalar>(&self) -> Result<RankedDistribution<F>> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let points = self
            .ranked_counts()
            .into_iter()
            .enumerate()
            .map(|(i, (tok, c))| RankedPoint { rank: i + 1, token: tok.to_owned(), frequency: F::from_count(c) })
            .collect();
        Ok(RankedDistribution { label: self.label.clone(), points, normalized: false, total: self.total })
    }

    /// Writes the TSV form.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        check_field("label", &self.label)?;
        let io = |e| Error::io("<output>", e);
        writeln!(w, "#label={}\t#total={}", self.label, self.total).map_err(io)?;
        for (i, (tok, c)) in self.ranked_counts().into_iter().enumerate() {
            check_field("token", tok)?;
            writeln!(w, "{}\t{}\t{}", i + 1, tok, c).map_err(io)?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("tsv output is UTF-8"))
    }
}

fn check_field(what: &str, s: &str) -> Result<()> {
    if s.contains(['\t', '\n', '\r']) {
        return Err(Error::Domain(format!("{what} {s:?} contains a tab or line break")));
    }
    Ok(())
}

/// Pointwise sum of tables. The result is independent of argument order.
pub fn merge(tables: &[FrequencyTable], label: impl Into<String>) -> Result<FrequencyTable> {
    if tables.is_empty() {
        return Err(Error::EmptyMerge);
    }
    let mut out = FrequencyTable::new(label);
    for t in tables {
        for (tok, c) in &t.entries {
            *out.entries.entry(tok.clone()).or_default() += c;
        }
        out.total += t.total;
    }
    Ok(out)
}

/// Reads every table in a TSV stream. Each `#label=` header starts a new table.
pub fn read_tsv_tables<R: BufRead>(reader: R, path: &str) -> Result<Vec<FrequencyTable>> {
    let mut tables = Vec::new();
    let mut current: Option<TableBuilder> = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(rest) = line.strip_prefix("#label=") {
            if let Some(b) = current.take() {
                tables.push(b.finish(path)?);
            }
            current = Some(TableBuilder::from_header(rest, path, lineno)?);
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        match current.as_mut() {
            Some(b) => b.push(&line, path, lineno)?,
            None => return Err(Error::parse(path, lineno, "data line before #label= header")),
        }
    }
    if let Some(b) = current {
        tables.push(b.finish(path)?);
    }
    Ok(tables)
}

/// Reads exactly one table.
pub fn read_tsv<R: BufRead>(reader: R, path: &str) -> Result<FrequencyTable> {
    let mut tables = read_tsv_tables(reader, path)?;
    match tables.len() {
        1 => Ok(tables.remove(0)),
        0 => Err(Error::parse(path, 0, "no #label= header found")),
        n => Err(Error::parse(path, 0, format!("expected one table, found {n}"))),
    }
}

struct TableBuilder {
    header_line: usize,
    declared_total: u64,
    table: FrequencyTable,
    last: Option<(String, u64)>,
    next_rank: usize,
}

impl TableBuilder {
    fn from_header(rest: &str, path: &str, lineno: usize) -> Result<Self> {
        let (label, total) = rest
            .split_once("\t#total=")
            .ok_or_else(|| Error::parse(path, lineno, "header must be #label=<label>\\t#total=<N>"))?;
        let declared_total =
            total.trim().parse().map_err(|_| Error::parse(path, lineno, format!("bad total {total:?}")))?;
        Ok(TableBuilder {
            header_line: lineno,
            declared_total,
            table: FrequencyTable::new(label),
            last: None,
            next_rank: 1,
        })
    }

    fn push(&mut self, line: &str, path: &str, lineno: usize) -> Result<()> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, lineno, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let rank: usize =
            fields[0].parse().map_err(|_| Error::parse(path, lineno, format!("bad rank {:?}", fields[0])))?;
        let token = fields[1];
        let count: u64 =
            fields[2].parse().map_err(|_| Error::parse(path, lineno, format!("bad count {:?}", fields[2])))?;
        if rank != self.next_rank {
            return Err(Error::parse(path, lineno, format!("rank {rank} out of sequence, expected {}", self.next_rank)));
        }
        if token.is_empty() {
            return Err(Error::parse(path, lineno, "empty token"));
        }
        if count == 0 {
            return Err(Error::parse(path, lineno, "count must be positive"));
        }
        if let Some((prev_tok, prev_count)) = &self.last {
            if count > *prev_count {
                return Err(Error::parse(path, lineno, "counts must be non-increasing in rank"));
            }
            if count == *prev_count && token <= prev_tok.as_str() {
                return Err(Error::parse(path, lineno, "tied tokens must be in ascending order"));
            }
        }
        if self.table.entries.contains_key(token) {
            return Err(Error::parse(path, lineno, format!("duplicate token {token:?}")));
        }
        self.table.add(token, count);
        self.last = Some((token.to_owned(), count));
        self.next_rank += 1;
        Ok(())
    }

    fn finish(self, path: &str) -> Result<FrequencyTable> {
        if self.table.total != self.declared_total {
            return Err(Error::parse(
                path,
                self.header_line,
                format!("declared total {} but counts sum to {}", self.declared_total, self.table.total),
            ));
        }
        Ok(self.table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPoint<F> {
    pub rank: usize,
    pub token: String,
    pub frequency: F,
}

/// `(rank, token, f(rank))` points with ranks `1..=V`, frequencies
/// non-increasing and ties ordered by token.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDistribution<F> {
    label: String,
    points: Vec<RankedPoint<F>>,
    normalized: bool,
    total: u64,
}

impl<F: Scalar> RankedDistribution<F> {
    /// Takes points already in rank order and checks the invariants.
    pub fn from_ranked(label: impl Into<String>, points: Vec<(String, F)>, normalized: bool) -> Result<Self> {
        let points: Vec<RankedPoint<F>> = points
            .into_iter()
            .enumerate()
            .map(|(i, (token, frequency))| RankedPoint { rank: i + 1, token, frequency })
            .collect();
        let d = RankedDistribution { label: label.into(), points, normalized, total: 0 };
        d.check_invariants()?;
        Ok(d)
    }

    /// Sorts `(token, frequency)` pairs into rank order. Entries with zero
    /// frequency have no rank and are left out.
    pub fn from_unsorted(label: impl Into<String>, mut points: Vec<(String, F)>, normalized: bool) -> Result<Self> {
        if points.iter().any(|(_, f)| !(f.is_finite() && *f >= F::zero())) {
            return Err(Error::InvalidDistribution("frequencies must be finite and non-negative".into()));
        }
        points.retain(|(_, f)| *f > F::zero());
        if points.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        points.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then_with(|| a.0.cmp(&b.0)));
        Self::from_ranked(label, points, normalized)
    }

    /// Synthetic distribution from frequencies in rank order. Tokens are
    /// zero-padded rank numbers so their order agrees with rank order.
    pub fn from_frequencies(label: impl Into<String>, freqs: &[F], normalized: bool) -> Result<Self> {
        let pts = freqs.iter().enumerate().map(|(i, f)| (format!("r{:010}", i + 1), *f)).collect();
        Self::from_ranked(label, pts, normalized)
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.rank != i + 1 {
                return Err(Error::InvalidDistribution(format!("rank {} at position {}", p.rank, i + 1)));
            }
            if !(p.frequency.is_finite() && p.frequency > F::zero()) {
                return Err(Error::InvalidDistribution(format!("non-positive frequency at rank {}", p.rank)));
            }
            if i > 0 {
                let prev = &self.points[i - 1];
                if p.frequency > prev.frequency {
                    return Err(Error::InvalidDistribution(format!("frequency increases at rank {}", p.rank)));
                }
                if p.frequency == prev.frequency && p.token <= prev.token {
                    return Err(Error::InvalidDistribution(format!("tie out of token order at rank {}", p.rank)));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn points(&self) -> &[RankedPoint<F>] {
        &self.points
    }

    pub fn frequencies(&self) -> impl Iterator<Item = F> + '_ {
        self.points.iter().map(|p| p.frequency)
    }

    pub fn frequency(&self, rank: usize) -> Option<F> {
        rank.checked_sub(1).and_then(|i| self.points.get(i)).map(|p| p.frequency)
    }

    /// V.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// N of the source table, 0 when the distribution was not built from one.
    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    /// Points with `r_min <= rank <= r_max`.
    pub fn window_points(&self, r_min: usize, r_max: usize) -> &[RankedPoint<F>] {
        let lo = r_min.saturating_sub(1).min(self.points.len());
        let hi = r_max.min(self.points.len()).max(lo);
        &self.points[lo..hi]
    }

    /// Divides every frequency by `total`.
    pub fn normalize(&self, total: F) -> Result<Self> {
        if !(total.is_finite() && total > F::zero()) {
            return Err(Error::Domain(format!("normalization total must be positive, got {total}")));
        }
        let mut out = self.clone();
        for p in &mut out.points {
            p.frequency = p.frequency / total;
        }
        out.normalized = true;
        Ok(out)
    }

    /// Normalizes by the source table's N.
    pub fn to_relative(&self) -> Result<Self> {
        self.normalize(F::from_count(self.total))
    }

    /// Multiplies every frequency by `c > 0`; rank order is unchanged.
    pub fn scale(&self, c: F) -> Result<Self> {
        if !(c.is_finite() && c > F::zero()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
        }
        let mut out = self.clone();
        for p in &mut out.points {
            p.frequency = p.frequency * c;
        }
        Ok(out)
    }
}

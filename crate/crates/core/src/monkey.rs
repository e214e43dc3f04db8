//! Intermittent-silence ("typewriting monkey") random text.
//!
//! Each keystroke is a word boundary with probability `q`, otherwise one of
//! `M` letters chosen uniformly. Two boundaries in a row would make an empty
//! word; those are discarded and do not count, so word lengths are exactly
//! geometric: `P(L) = q(1-q)^(L-1)`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tokenizer::TokenStream;

/// Generator identity, recorded in reports so runs can be re-derived.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.10, seed_from_u64)";

/// Latin lowercase followed by Greek lowercase (final sigma excluded).
pub const ALPHABET: [char; 50] = [
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's', 't', 'u', 'v',
    'w', 'x', 'y', 'z', 'α', 'β', 'γ', 'δ', 'ε', 'ζ', 'η', 'θ', 'ι', 'κ', 'λ', 'μ', 'ν', 'ξ', 'ο', 'π', 'ρ', 'σ',
    'τ', 'υ', 'φ', 'χ', 'ψ', 'ω',
];

pub const MAX_ALPHABET: usize = ALPHABET.len();

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonkeyParams {
    pub alphabet_size: usize,
    pub space_prob: f64,
    pub token_count: usize,
    pub seed: u64,
}

impl MonkeyParams {
    pub fn new(alphabet_size: usize, space_prob: f64, token_count: usize, seed: u64) -> Result<Self> {
        let p = MonkeyParams { alphabet_size, space_prob, token_count, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_model(self.alphabet_size, self.space_prob)?;
        if self.token_count == 0 {
            return Err(Error::Domain("token_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Comment line written ahead of a generated table.
    pub fn header(&self, analytic_alpha: f64) -> String {
        format!(
            "# monkey alphabet={} space_prob={} tokens={} seed={} rng={} analytic_alpha={}",
            self.alphabet_size, self.space_prob, self.token_count, self.seed, RNG_ALGORITHM, analytic_alpha
        )
    }

    /// Parameters from a line written by [`MonkeyParams::header`].
    pub fn from_header(line: &str) -> Option<Self> {
        let rest = line.trim().strip_prefix("# monkey ")?;
        let field = |key: &str| {
            rest.split_whitespace().find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        };
        let p = MonkeyParams {
            alphabet_size: field("alphabet")?.parse().ok()?,
            space_prob: field("space_prob")?.parse().ok()?,
            token_count: field("tokens")?.parse().ok()?,
            seed: field("seed")?.parse().ok()?,
        };
        p.validate().ok().map(|_| p)
    }
}

fn check_model(m: usize, q: f64) -> Result<()> {
    if !(2..=MAX_ALPHABET).contains(&m) {
        return Err(Error::Domain(format!("alphabet size {m} outside 2..={MAX_ALPHABET}")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("space probability {q} outside (0, 1)")));
    }
    Ok(())
}

/// Endless word source; `monkey_generate` takes a prefix of it.
pub struct MonkeyWords {
    rng: ChaCha8Rng,
    letters: &'static [char],
    q: f64,
}

impl MonkeyWords {
    pub fn new(alphabet_size: usize, space_prob: f64, seed: u64) -> Result<Self> {
        check_model(alphabet_size, space_prob)?;
        Ok(MonkeyWords { rng: ChaCha8Rng::seed_from_u64(seed), letters: &ALPHABET[..alphabet_size], q: space_prob })
    }
}

impl Iterator for MonkeyWords {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        let mut word = String::new();
        loop {
            if self.rng.random::<f64>() < self.q {
                if !word.is_empty() {
                    return Some(word);
                }
            } else {
                word.push(self.letters[self.rng.random_range(0..self.letters.len())]);
            }
        }
    }
}

pub fn monkey_generate(params: &MonkeyParams) -> Result<TokenStream> {
    params.validate()?;
    let words = MonkeyWords::new(params.alphabet_size, params.space_prob, params.seed)?;
    let id = format!("monkey(M={},q={},seed={})", params.alphabet_size, params.space_prob, params.seed);
    Ok(TokenStream::new(id, words.take(params.token_count).collect()))
}

/// Envelope exponent `1 - ln(1-q)/ln(M)`.
pub fn monkey_alpha<F: Scalar>(alphabet_size: usize, space_prob: F) -> Result<F> {
    if alphabet_size < 2 {
        return Err(Error::Domain(format!("alphabet size {alphabet_size} below 2")));
    }
    let q = space_prob;
    if !(q > F::zero() && q < F::one()) {
        return Err(Error::Domain(format!("space probability {q} outside (0, 1)")));
    }
    Ok(F::one() - (F::one() - q).ln() / F::from_count(alphabet_size as u64).ln())
}

/// Probability that a given word of `len` letters is the next token.
pub fn word_probability(alphabet_size: usize, space_prob: f64, len: usize) -> f64 {
    let q = space_prob;
    q * (1.0 - q).powi(len as i32 - 1) / (alphabet_size as f64).powi(len as i32)
}

//! Tokenization, n-gram overlap and normalized edit distance.
//!
//! Overlap scores use set semantics and are normalized by the smaller of the
//! two sets (containment), so a short fragment fully contained in a longer
//! text scores 1.0.

use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// Lowercased word tokens of a text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Wraps pre-split tokens, dropping empty ones.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TokenSequence(
            tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty())
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Appends another sequence, as if the two texts were joined by a space.
    pub fn concat(&self, other: &TokenSequence) -> TokenSequence {
        let mut tokens = self.0.clone();
        tokens.extend(other.0.iter().cloned());
        TokenSequence(tokens)
    }

    pub fn join(&self, sep: &str) -> String {
        self.0.join(sep)
    }

    pub fn unigrams(&self) -> HashSet<&str> {
        self.0.iter().map(String::as_str).collect()
    }

    pub fn bigrams(&self) -> HashSet<(&str, &str)> {
        self.0
            .windows(2)
            .map(|w| (w[0].as_str(), w[1].as_str()))
            .collect()
    }
}

impl From<TokenSequence> for Vec<String> {
    fn from(seq: TokenSequence) -> Self {
        seq.0
    }
}

/// A similarity value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);
    pub const ONE: SimilarityScore = SimilarityScore(1.0);

    /// Clamps into `[0, 1]`.
    pub fn new(value: f64) -> Self {
        SimilarityScore(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<SimilarityScore> for f64 {
    fn from(s: SimilarityScore) -> f64 {
        s.0
    }
}

/// Lowercases `text` and splits it on every maximal run of
/// non-alphanumeric characters.
pub fn tokenize(text: &str) -> TokenSequence {
    let lowered = text.to_lowercase();
    TokenSequence(
        lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
    )
}

/// `|A ∩ B| / max(1, min(|A|, |B|))` over two sets.
pub fn containment<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|x| large.contains(x)).count();
    inter as f64 / small.len().max(1) as f64
}

/// `|A ∩ B| / |A ∪ B|`, or 0 when both sets are empty.
pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|x| large.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Bigram-set overlap normalized by the smaller bigram set.
///
/// Sequences too short to have bigrams score 0, except that two identical
/// non-empty sequences always score 1.
pub fn bigram_overlap(a: &TokenSequence, b: &TokenSequence) -> SimilarityScore {
    if !a.is_empty() && a == b {
        return SimilarityScore::ONE;
    }
    let (ba, bb) = (a.bigrams(), b.bigrams());
    if ba.is_empty() || bb.is_empty() {
        return SimilarityScore::ZERO;
    }
    SimilarityScore::new(containment(&ba, &bb))
}

/// Unigram-set overlap normalized by the smaller unigram set.
pub fn unigram_overlap(a: &TokenSequence, b: &TokenSequence) -> SimilarityScore {
    if !a.is_empty() && a == b {
        return SimilarityScore::ONE;
    }
    SimilarityScore::new(containment(&a.unigrams(), &b.unigrams()))
}

/// Character-level Levenshtein distance.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance over characters divided by the longer length.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein(&a, &b) as f64 / a.len().max(b.len()).max(1) as f64
}

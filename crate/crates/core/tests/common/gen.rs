//! Seeded generators for synthetic revisions, reviews and responses.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revalign::corpus::{Corpus, PaperRecord, ParagraphRecord};
use revalign::revision::{DocumentVersion, Role};
use revalign::silver::{AuthorResponse, Review};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "ch", "tr",
];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];

/// `n` distinct pseudo-words; `tag` keeps separate vocabularies disjoint.
pub fn vocabulary(n: usize, tag: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut k = 0usize;
    while out.len() < n {
        let mut w = String::from(tag);
        let mut x = k;
        loop {
            w.push_str(ONSETS[x % ONSETS.len()]);
            x /= ONSETS.len();
            w.push_str(VOWELS[x % VOWELS.len()]);
            x /= VOWELS.len();
            if x == 0 {
                break;
            }
        }
        out.push(w);
        k += 1;
    }
    out
}

pub fn sentence(rng: &mut impl Rng, vocab: &[String], len: usize) -> Vec<String> {
    (0..len)
        .map(|_| vocab.choose(rng).unwrap().clone())
        .collect()
}

pub fn paragraph(rng: &mut impl Rng, vocab: &[String], lo: usize, hi: usize) -> String {
    let n = rng.random_range(lo..=hi);
    sentence(rng, vocab, n).join(" ")
}

/// Changes `k` random tokens: substitution, insertion or deletion.
pub fn perturb(rng: &mut impl Rng, text: &str, vocab: &[String], k: usize) -> String {
    let mut toks: Vec<String> = text.split_whitespace().map(String::from).collect();
    for _ in 0..k {
        let op = rng.random_range(0..3);
        if toks.is_empty() || op == 0 {
            let at = rng.random_range(0..=toks.len());
            toks.insert(at, vocab.choose(rng).unwrap().clone());
        } else if op == 1 {
            let at = rng.random_range(0..toks.len());
            toks[at] = vocab.choose(rng).unwrap().clone();
        } else if toks.len() > 1 {
            let at = rng.random_range(0..toks.len());
            toks.remove(at);
        }
    }
    toks.join(" ")
}

fn doc(id: &str, role: Role, paras: &[String]) -> DocumentVersion {
    DocumentVersion::new(id, role, paras.iter().cloned())
}

/// A random revision pair with at most `max_paras` paragraphs per side,
/// built from keep / minor / major / delete / split / join / insert
/// mutations over a small shared vocabulary (so accidental overlaps occur).
pub fn random_revision(rng: &mut impl Rng, max_paras: usize) -> (DocumentVersion, DocumentVersion) {
    let vocab = vocabulary(rng.random_range(12..60), "");
    let n_src = rng.random_range(0..=max_paras);
    let src: Vec<String> = (0..n_src).map(|_| paragraph(rng, &vocab, 1, 30)).collect();
    let mut tgt: Vec<String> = Vec::new();
    let mut i = 0;
    while i < src.len() {
        match rng.random_range(0..100) {
            0..=29 => tgt.push(src[i].clone()),
            30..=49 => {
                let k = rng.random_range(1..4);
                tgt.push(perturb(rng, &src[i], &vocab, k));
            }
            50..=59 => {
                let k = rng.random_range(5..20);
                tgt.push(perturb(rng, &src[i], &vocab, k));
            }
            60..=69 => {}
            70..=79 => {
                let toks: Vec<&str> = src[i].split_whitespace().collect();
                if toks.len() >= 2 {
                    let cut = rng.random_range(1..toks.len());
                    tgt.push(toks[..cut].join(" "));
                    tgt.push(toks[cut..].join(" "));
                } else {
                    tgt.push(src[i].clone());
                }
            }
            80..=89 if i + 1 < src.len() => {
                tgt.push(format!("{} {}", src[i], src[i + 1]));
                i += 1;
            }
            _ => {
                tgt.push(src[i].clone());
                tgt.push(paragraph(rng, &vocab, 1, 30));
            }
        }
        i += 1;
    }
    if rng.random_bool(0.3) {
        let at = rng.random_range(0..=tgt.len());
        tgt.insert(at, paragraph(rng, &vocab, 1, 30));
    }
    if rng.random_bool(0.2) && tgt.len() > 1 {
        // occasional reordering exercises the locality penalty
        let a = rng.random_range(0..tgt.len());
        let b = rng.random_range(0..tgt.len());
        tgt.swap(a, b);
    }
    tgt.truncate(max_paras);
    (
        doc("rand", Role::Source, &src),
        doc("rand", Role::Target, &tgt),
    )
}

/// A document where paragraph `split` of the source appears in the target
/// cut into two consecutive paragraphs; the rest is kept or lightly edited.
pub struct SplitFixture {
    pub source: DocumentVersion,
    pub target: DocumentVersion,
    pub split: usize,
    /// Target index of the first half.
    pub first_half: usize,
}

pub fn split_fixture(rng: &mut impl Rng) -> SplitFixture {
    let vocab = vocabulary(2000, "");
    let n = rng.random_range(3..=7);
    let src: Vec<String> = (0..n).map(|_| paragraph(rng, &vocab, 25, 60)).collect();
    let split = rng.random_range(0..n);
    let mut tgt = Vec::new();
    let mut first_half = 0;
    for (i, p) in src.iter().enumerate() {
        if i == split {
            let toks: Vec<&str> = p.split_whitespace().collect();
            let cut = rng.random_range(toks.len() / 4..=3 * toks.len() / 4);
            first_half = tgt.len();
            tgt.push(toks[..cut].join(" "));
            tgt.push(toks[cut..].join(" "));
        } else if rng.random_bool(0.3) {
            tgt.push(perturb(rng, p, &vocab, 2));
        } else {
            tgt.push(p.clone());
        }
    }
    SplitFixture {
        source: doc("split", Role::Source, &src),
        target: doc("split", Role::Target, &tgt),
        split,
        first_half,
    }
}

/// A quote -> reply -> edit chain planted in a synthetic paper.
#[derive(Debug, Clone)]
pub struct PlantedChain {
    pub doc_id: String,
    pub review_id: String,
    /// The review sentence that is quoted.
    pub comment: String,
    /// Target paragraph that carries the requested change.
    pub target_index: usize,
}

pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub chains: Vec<PlantedChain>,
}

/// Overwrites about `rate` of the characters with a filler letter.
fn typos(rng: &mut impl Rng, s: &str, rate: f64) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let k = (chars.len() as f64 * rate).floor() as usize;
    for _ in 0..k {
        let at = rng.random_range(0..chars.len());
        chars[at] = if chars[at] == 'x' { 'q' } else { 'x' };
    }
    chars.into_iter().collect()
}

pub struct CorpusShape {
    pub papers: usize,
    pub chains_per_paper: usize,
    /// Paragraphs per source version.
    pub paragraphs: usize,
    /// Extra edited or added paragraphs per paper that reuse the words of
    /// the review comments but none of the reply phrasing.
    pub distractors_per_paper: usize,
}

/// A corpus of papers with planted quote chains and lexical distractors.
///
/// Each chain is a review sentence, a response line quoting it with a few
/// typos, a reply naming the change, and a target paragraph containing that
/// change: half added paragraphs, half insertions into an existing one.
pub fn synthetic_corpus(seed: u64, shape: &CorpusShape) -> SyntheticCorpus {
    let mut rng = rng(seed);
    let generic = vocabulary(3000, "");
    let request = vocabulary(4000, "q");
    let mut corpus = Corpus::default();
    let mut chains = Vec::new();
    for p in 0..shape.papers {
        let doc_id = format!("paper-{p:03}");
        let src: Vec<String> = (0..shape.paragraphs)
            .map(|_| paragraph(&mut rng, &generic, 20, 60))
            .collect();
        let mut tgt: Vec<Option<String>> = src.iter().map(|s| Some(s.clone())).collect();
        // light background churn: a few minor edits and one deletion
        for slot in tgt.iter_mut() {
            if rng.random_bool(0.2) {
                let t = slot.take().unwrap();
                *slot = Some(perturb(&mut rng, &t, &generic, 2));
            }
        }
        if shape.paragraphs > 4 {
            let d = rng.random_range(0..shape.paragraphs);
            tgt[d] = None;
        }
        let mut tgt: Vec<(String, Option<usize>)> =
            tgt.into_iter().flatten().map(|t| (t, None)).collect();

        let mut review_sentences = Vec::new();
        let mut response_lines = Vec::new();
        for c in 0..shape.chains_per_paper {
            let topic = sentence(&mut rng, &request, 5);
            let comment = format!(
                "The authors should also report {} because the current evidence is thin.",
                topic.join(" ")
            );
            let change = sentence(&mut rng, &request, 8).join(" ");
            let tag = chains.len();
            if c % 2 == 0 {
                let filler = paragraph(&mut rng, &generic, 15, 30);
                let at = rng.random_range(0..=tgt.len());
                tgt.insert(
                    at,
                    (format!("{filler} {change} {}", topic.join(" ")), Some(tag)),
                );
            } else {
                let candidates: Vec<usize> =
                    (0..tgt.len()).filter(|&k| tgt[k].1.is_none()).collect();
                let k = *candidates.choose(&mut rng).unwrap();
                let mut toks: Vec<String> = tgt[k].0.split_whitespace().map(String::from).collect();
                let at = rng.random_range(0..=toks.len());
                toks.insert(at, change.clone());
                tgt[k] = (toks.join(" "), Some(tag));
            }
            review_sentences.push(comment.clone());
            review_sentences.push(format!("{}.", paragraph(&mut rng, &generic, 8, 14)));
            response_lines.push(format!("> {}", typos(&mut rng, &comment, 0.03)));
            response_lines.push(format!(
                "We thank the reviewer and added {change} to the revision."
            ));
            chains.push(PlantedChain {
                doc_id: doc_id.clone(),
                review_id: format!("{doc_id}-r0"),
                comment,
                target_index: usize::MAX,
            });
        }
        // lexical distractors: words of the comments, shuffled, no reply phrasing
        let comment_words: Vec<String> = review_sentences
            .iter()
            .flat_map(|s| {
                s.split_whitespace()
                    .map(|w| w.trim_matches('.').to_lowercase())
            })
            .collect();
        for _ in 0..shape.distractors_per_paper {
            let mut words: Vec<String> = comment_words
                .choose_multiple(&mut rng, 12)
                .cloned()
                .collect();
            words.extend(sentence(&mut rng, &generic, 12));
            words.shuffle(&mut rng);
            let at = rng.random_range(0..=tgt.len());
            tgt.insert(at, (words.join(" "), None));
        }
        for (k, (_, tag)) in tgt.iter().enumerate() {
            if let Some(t) = tag {
                chains[*t].target_index = k;
            }
        }
        response_lines.insert(
            0,
            "We thank all reviewers for their careful reading.".to_string(),
        );

        corpus.papers.push(PaperRecord {
            doc_id: doc_id.clone(),
            source: src.into_iter().map(ParagraphRecord::Text).collect(),
            target: tgt
                .into_iter()
                .map(|(t, _)| ParagraphRecord::Text(t))
                .collect(),
        });
        corpus.reviews.push(Review {
            review_id: format!("{doc_id}-r0"),
            doc_id: doc_id.clone(),
            text: review_sentences.join(" "),
        });
        corpus.reviews.push(Review {
            review_id: format!("{doc_id}-r1"),
            doc_id: doc_id.clone(),
            text: format!("{}.", paragraph(&mut rng, &generic, 30, 60)),
        });
        corpus.responses.push(AuthorResponse {
            response_id: format!("{doc_id}-a0"),
            doc_id,
            lines: response_lines,
        });
    }
    SyntheticCorpus { corpus, chains }
}

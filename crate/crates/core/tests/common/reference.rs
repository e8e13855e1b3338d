//! A deliberately naive aligner used as an oracle for the production one.
//!
//! Everything works on strings: similarities are recomputed from scratch
//! for every candidate, merged groups are re-joined and re-tokenized, and
//! diff counts come from a textbook LCS table. Quadratic (and worse) by
//! design; only meant for small documents.

use std::collections::{BTreeMap, HashSet};

use revalign::revision::{AlignmentMap, DocumentVersion, Edit, EditCategory, Paragraph, Span};

fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

fn bigrams(w: &[String]) -> HashSet<(String, String)> {
    w.windows(2).map(|p| (p[0].clone(), p[1].clone())).collect()
}

/// Bigram containment; identical non-empty sequences score 1.
pub fn overlap(a: &str, b: &str) -> f64 {
    let (wa, wb) = (words(a), words(b));
    if !wa.is_empty() && wa == wb {
        return 1.0;
    }
    let (ba, bb) = (bigrams(&wa), bigrams(&wb));
    let smaller = ba.len().min(bb.len());
    if smaller == 0 {
        return 0.0;
    }
    ba.intersection(&bb).count() as f64 / smaller as f64
}

/// Bigram Jaccard; identical non-empty sequences score 1.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let (wa, wb) = (words(a), words(b));
    if !wa.is_empty() && wa == wb {
        return 1.0;
    }
    let (ba, bb) = (bigrams(&wa), bigrams(&wb));
    let union = ba.union(&bb).count();
    if union == 0 {
        return 0.0;
    }
    ba.intersection(&bb).count() as f64 / union as f64
}

fn text_of(doc: &DocumentVersion, lo: usize, hi: usize) -> String {
    doc.paragraphs[lo..hi]
        .iter()
        .map(|p| p.text.clone())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Greedy pass: each target paragraph, in order, takes the source paragraph
/// with the highest penalized similarity (first one on ties) if it beats 0.1.
pub fn greedy(source: &DocumentVersion, target: &DocumentVersion) -> Vec<Option<usize>> {
    let n = source.paragraphs.len();
    let mut prev: Option<usize> = None;
    let mut out = Vec::new();
    for t in &target.paragraphs {
        let expected = match prev {
            None => 0,
            Some(p) => p + 1,
        };
        let mut best_i = None;
        let mut best_sim = f64::NEG_INFINITY;
        for i in 0..n {
            let penalty = (expected as f64 - i as f64).abs() / n as f64;
            let sim = overlap(&source.paragraphs[i].text, &t.text) - penalty;
            if sim > best_sim {
                best_sim = sim;
                best_i = Some(i);
            }
        }
        if best_i.is_some() && best_sim > 0.1 {
            out.push(best_i);
            prev = best_i;
        } else {
            out.push(None);
        }
    }
    out
}

/// (source lo, source hi, target lo, target hi), half-open.
type G = (usize, usize, usize, usize);

fn merge(groups: &mut Vec<G>, source: &DocumentVersion, target: &DocumentVersion) {
    let (ns, nt) = (source.paragraphs.len(), target.paragraphs.len());
    let passes = ns.max(nt).max(1);
    for _ in 0..passes {
        let mut changed = false;
        let mut g = 0;
        while g < groups.len() {
            let (sl, sh, tl, th) = groups[g];
            let base_o = overlap(&text_of(source, sl, sh), &text_of(target, tl, th));
            let base_j = jaccard(&text_of(source, sl, sh), &text_of(target, tl, th));
            let src_used = |x: usize, gs: &Vec<G>| gs.iter().any(|&(a, b, _, _)| a <= x && x < b);
            // Some(None): target free; Some(Some(k)): absorbable group k; None: blocked.
            let tgt_state = |y: usize, gs: &Vec<G>| -> Option<Option<usize>> {
                for (k, &(a, b, c, d)) in gs.iter().enumerate() {
                    if c <= y && y < d {
                        if k != g && d - c == 1 && sl <= a && b <= sh {
                            return Some(Some(k));
                        }
                        return None;
                    }
                }
                Some(None)
            };
            let mut options: Vec<(G, Option<usize>)> = Vec::new();
            if sl > 0 && !src_used(sl - 1, groups) {
                options.push(((sl - 1, sh, tl, th), None));
            }
            if sh < ns && !src_used(sh, groups) {
                options.push(((sl, sh + 1, tl, th), None));
            }
            if tl > 0 {
                if let Some(k) = tgt_state(tl - 1, groups) {
                    options.push(((sl, sh, tl - 1, th), k));
                }
            }
            if th < nt {
                if let Some(k) = tgt_state(th, groups) {
                    options.push(((sl, sh, tl, th + 1), k));
                }
            }
            let mut pick: Option<(G, Option<usize>, f64)> = None;
            for (cand, absorbed) in options {
                let s = text_of(source, cand.0, cand.1);
                let t = text_of(target, cand.2, cand.3);
                let (o, j) = (overlap(&s, &t), jaccard(&s, &t));
                if o >= base_o && j > base_j && pick.as_ref().is_none_or(|p| j > p.2) {
                    pick = Some((cand, absorbed, j));
                }
            }
            if let Some((cand, absorbed, _)) = pick {
                groups[g] = cand;
                changed = true;
                if let Some(k) = absorbed {
                    groups.remove(k);
                    if k < g {
                        g -= 1;
                    }
                }
            }
            g += 1;
        }
        if !changed {
            break;
        }
    }
}

/// Longest common subsequence length of two token lists.
pub fn lcs_len(a: &[&str], b: &[&str]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

fn make_edit(
    id: usize,
    src: Option<(&DocumentVersion, usize, usize)>,
    tgt: Option<(&DocumentVersion, usize, usize)>,
) -> Edit {
    let para = |x: Option<(&DocumentVersion, usize, usize)>| {
        x.map(|(d, lo, hi)| Paragraph {
            index: lo,
            text: text_of(d, lo, hi),
            section: d.paragraphs[lo].section.clone(),
        })
    };
    let (sp, tp) = (para(src), para(tgt));
    let s_tok: Vec<&str> = sp
        .as_ref()
        .map_or(vec![], |p| p.text.split_whitespace().collect());
    let t_tok: Vec<&str> = tp
        .as_ref()
        .map_or(vec![], |p| p.text.split_whitespace().collect());
    let common = lcs_len(&s_tok, &t_tok);
    let (added, deleted) = (t_tok.len() - common, s_tok.len() - common);
    let category = match (&sp, &tp) {
        (None, _) => EditCategory::Added,
        (_, None) => EditCategory::Deleted,
        _ if added + deleted == 0 => EditCategory::Unchanged,
        _ if added + deleted < 10 => EditCategory::Minor,
        _ => EditCategory::Major,
    };
    Edit {
        edit_id: id,
        source: sp,
        target: tp,
        source_span: src.map(|(_, lo, hi)| Span { start: lo, end: hi }),
        target_span: tgt.map(|(_, lo, hi)| Span { start: lo, end: hi }),
        category,
        tokens_added: added,
        tokens_deleted: deleted,
    }
}

/// Reference alignment with merging, and the ordered edit list.
pub fn reference_extract(
    source: &DocumentVersion,
    target: &DocumentVersion,
) -> (AlignmentMap, Vec<Edit>) {
    let mut groups: Vec<G> = greedy(source, target)
        .into_iter()
        .enumerate()
        .filter_map(|(j, m)| m.map(|i| (i, i + 1, j, j + 1)))
        .collect();
    merge(&mut groups, source, target);

    let mut entries = BTreeMap::new();
    for &(sl, sh, tl, th) in &groups {
        for j in tl..th {
            entries.insert(j, Span { start: sl, end: sh });
        }
    }

    // Items in target order: Ok(group) or Err(unmatched target index).
    let mut items: Vec<Result<G, usize>> = Vec::new();
    let mut j = 0;
    while j < target.paragraphs.len() {
        match groups.iter().find(|g| g.2 == j) {
            Some(&g) => {
                items.push(Ok(g));
                j = g.3;
            }
            None => {
                items.push(Err(j));
                j += 1;
            }
        }
    }
    let mut pending: Vec<usize> = (0..source.paragraphs.len())
        .filter(|&i| !groups.iter().any(|g| g.0 <= i && i < g.1))
        .collect();
    let mut edits = Vec::new();
    for k in 0..items.len() {
        let bound = items[k..]
            .iter()
            .find_map(|it| it.as_ref().ok().map(|g| g.0))
            .unwrap_or(usize::MAX);
        while let Some(&i) = pending.first() {
            if i >= bound {
                break;
            }
            edits.push(make_edit(edits.len(), Some((source, i, i + 1)), None));
            pending.remove(0);
        }
        let e = match items[k] {
            Ok((sl, sh, tl, th)) => {
                make_edit(edits.len(), Some((source, sl, sh)), Some((target, tl, th)))
            }
            Err(j) => make_edit(edits.len(), None, Some((target, j, j + 1))),
        };
        edits.push(e);
    }
    for i in pending {
        edits.push(make_edit(edits.len(), Some((source, i, i + 1)), None));
    }
    (AlignmentMap { entries }, edits)
}

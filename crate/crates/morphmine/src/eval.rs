//! Evaluation: segmentation P/R/F1 against gold standards, word-similarity
//! Spearman correlation, and 3CosAdd analogies.

use std::collections::HashMap;

use crate::candidates::MorphemeVocab;
use crate::embed::{cosine, EmbeddingModel};
use crate::error::{MorphError, Result};

#[derive(Debug, Clone)]
pub struct GoldSegmentation {
    pub word: String,
    pub alternatives: Vec<Vec<String>>,
}

/// Gold file: `word<TAB>alt1, alt2, ...`, morphemes space-separated inside
/// each alternative. Anything from a tag delimiter onward inside a morpheme
/// is stripped (MorphoChallenge-style part-of-speech annotations).
pub fn parse_gold(text: &str, tag_delims: &[char]) -> Result<Vec<GoldSegmentation>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, ['\t']);
        let word = parts.next().unwrap().trim().to_string();
        let rest = parts.next().ok_or_else(|| MorphError::Parse {
            line: lineno + 1,
            msg: "expected word<TAB>segmentation".into(),
        })?;
        let mut alternatives = Vec::new();
        for alt in rest.split(',') {
            let morphs: Vec<String> = alt
                .split_whitespace()
                .map(|m| match m.find(|c| tag_delims.contains(&c)) {
                    Some(i) => m[..i].to_string(),
                    None => m.to_string(),
                })
                .filter(|m| !m.is_empty())
                .collect();
            if !morphs.is_empty() {
                alternatives.push(morphs);
            }
        }
        if alternatives.is_empty() {
            return Err(MorphError::Parse {
                line: lineno + 1,
                msg: "no gold alternative".into(),
            });
        }
        out.push(GoldSegmentation { word, alternatives });
    }
    if out.is_empty() {
        return Err(MorphError::EmptyGold);
    }
    Ok(out)
}

fn multiset_intersection(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for m in a {
        *counts.entry(m.as_str()).or_insert(0) += 1;
    }
    let mut tp = 0;
    for m in b {
        if let Some(c) = counts.get_mut(m.as_str()) {
            if *c > 0 {
                *c -= 1;
                tp += 1;
            }
        }
    }
    tp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn prf(tp: f64, pred: f64, gold: f64) -> Prf {
    let p = if pred > 0.0 { tp / pred } else { 0.0 };
    let r = if gold > 0.0 { tp / gold } else { 0.0 };
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    Prf { precision: p, recall: r, f1 }
}

/// Exact-match morpheme P/R/F1 against the best-matching gold alternative
/// per word. Micro-averaged by default; `macro_average` averages the
/// per-word scores instead.
pub fn seg_prf(
    pred: &HashMap<String, Vec<String>>,
    gold: &[GoldSegmentation],
    macro_average: bool,
) -> Result<Prf> {
    if gold.is_empty() {
        return Err(MorphError::EmptyGold);
    }
    let empty = Vec::new();
    let mut sum_tp = 0.0;
    let mut sum_pred = 0.0;
    let mut sum_gold = 0.0;
    let mut per_word = Vec::new();
    for g in gold {
        let p = pred.get(&g.word).unwrap_or(&empty);
        // credit the alternative this prediction matches best
        let mut best: Option<(f64, usize, usize)> = None; // (f1, tp, gold_len)
        for alt in &g.alternatives {
            let tp = multiset_intersection(alt, p);
            let f = prf(tp as f64, p.len() as f64, alt.len() as f64).f1;
            if best.map_or(true, |(bf, _, _)| f > bf) {
                best = Some((f, tp, alt.len()));
            }
        }
        let (_, tp, gold_len) = best.unwrap();
        sum_tp += tp as f64;
        sum_pred += p.len() as f64;
        sum_gold += gold_len as f64;
        per_word.push(prf(tp as f64, p.len() as f64, gold_len as f64));
    }
    if macro_average {
        let n = per_word.len() as f64;
        let p = per_word.iter().map(|x| x.precision).sum::<f64>() / n;
        let r = per_word.iter().map(|x| x.recall).sum::<f64>() / n;
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        Ok(Prf { precision: p, recall: r, f1 })
    } else {
        Ok(prf(sum_tp, sum_pred, sum_gold))
    }
}

#[derive(Debug, Clone)]
pub struct SimilarityPair {
    pub word_a: String,
    pub word_b: String,
    pub human_score: f64,
}

/// Similarity file: `word_a<TAB>word_b<TAB>score`.
pub fn parse_similarity(text: &str) -> Result<Vec<SimilarityPair>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(MorphError::Parse {
                line: lineno + 1,
                msg: "expected word_a<TAB>word_b<TAB>score".into(),
            });
        }
        let score: f64 = f[2].trim().parse().map_err(|_| MorphError::Parse {
            line: lineno + 1,
            msg: format!("bad score {:?}", f[2]),
        })?;
        if !score.is_finite() {
            return Err(MorphError::Parse { line: lineno + 1, msg: "non-finite score".into() });
        }
        out.push(SimilarityPair {
            word_a: f[0].trim().to_string(),
            word_b: f[1].trim().to_string(),
            human_score: score,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OovPolicy {
    Infer,
    Skip,
}

/// Anything that can hand out word vectors: a trained model or vectors
/// loaded back from disk.
pub trait WordVectorSource {
    fn vector_of(&self, word: &str) -> Option<Vec<f64>>;
    fn infer_vector(&self, word: &str, mv: &MorphemeVocab) -> Option<Vec<f64>>;
    fn vocabulary(&self) -> Vec<String>;
}

impl WordVectorSource for EmbeddingModel {
    fn vector_of(&self, word: &str) -> Option<Vec<f64>> {
        self.word_vector(word)
    }

    fn infer_vector(&self, word: &str, mv: &MorphemeVocab) -> Option<Vec<f64>> {
        match self.infer_oov(word, mv) {
            Ok((v, true)) => Some(v),
            _ => None,
        }
    }

    fn vocabulary(&self) -> Vec<String> {
        let mut w: Vec<String> = self.words().map(str::to_owned).collect();
        w.sort();
        w
    }
}

/// Word vectors loaded from the text export, with optional morpheme vectors
/// for OOV inference.
pub struct VectorStore {
    pub words: HashMap<String, Vec<f64>>,
    pub morphs: HashMap<String, Vec<f64>>,
    pub dim: usize,
}

impl WordVectorSource for VectorStore {
    fn vector_of(&self, word: &str) -> Option<Vec<f64>> {
        self.words.get(word).cloned()
    }

    fn infer_vector(&self, word: &str, mv: &MorphemeVocab) -> Option<Vec<f64>> {
        let forest = crate::pipeline::segment_recursive(word, mv, false).ok()?;
        let mut v = vec![0.0; self.dim];
        let mut any = false;
        for m in forest.flat_set() {
            if let Some(z) = self.morphs.get(&m) {
                for k in 0..self.dim {
                    v[k] += z[k];
                }
                any = true;
            }
        }
        any.then_some(v)
    }

    fn vocabulary(&self) -> Vec<String> {
        let mut w: Vec<String> = self.words.keys().cloned().collect();
        w.sort();
        w
    }
}

/// Average ranks, ties share the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[idx[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rho: Pearson correlation of average ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> f64 {
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    pearson(&ra, &rb)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    if da == 0.0 || db == 0.0 {
        0.0
    } else {
        num / (da * db).sqrt()
    }
}

fn vector_for(
    model: &impl WordVectorSource,
    word: &str,
    policy: OovPolicy,
    mv: Option<&MorphemeVocab>,
) -> Option<Vec<f64>> {
    if let Some(v) = model.vector_of(word) {
        return Some(v);
    }
    match (policy, mv) {
        (OovPolicy::Infer, Some(mv)) => model.infer_vector(word, mv),
        _ => None,
    }
}

/// Spearman rho between model cosine similarities and human scores.
pub fn spearman_eval(
    model: &impl WordVectorSource,
    pairs: &[SimilarityPair],
    policy: OovPolicy,
    mv: Option<&MorphemeVocab>,
) -> Result<(f64, usize)> {
    let mut model_scores = Vec::new();
    let mut human_scores = Vec::new();
    for pair in pairs {
        let (Some(va), Some(vb)) = (
            vector_for(model, &pair.word_a, policy, mv),
            vector_for(model, &pair.word_b, policy, mv),
        ) else {
            continue;
        };
        model_scores.push(cosine(&va, &vb));
        human_scores.push(pair.human_score);
    }
    if model_scores.len() < 2 {
        return Err(MorphError::TooFewPairs(model_scores.len()));
    }
    Ok((spearman_rho(&model_scores, &human_scores), model_scores.len()))
}

#[derive(Debug, Clone)]
pub struct AnalogyQuad {
    pub section: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

/// Analogy file: `a b c d` per line; `: name` lines start a section.
pub fn parse_analogies(text: &str) -> Result<Vec<AnalogyQuad>> {
    let mut out = Vec::new();
    let mut section = String::from("default");
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            section = name.trim().to_string();
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(MorphError::Parse {
                line: lineno + 1,
                msg: "expected 4 tokens".into(),
            });
        }
        out.push(AnalogyQuad {
            section: section.clone(),
            a: f[0].into(),
            b: f[1].into(),
            c: f[2].into(),
            d: f[3].into(),
        });
    }
    if out.is_empty() {
        return Err(MorphError::EmptyAnalogies);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AnalogyReport {
    pub accuracy: f64,
    pub correct: usize,
    pub attempted: usize,
    pub per_section: Vec<(String, f64, usize, usize)>,
}

/// 3CosAdd: predict argmax over the vocabulary of cosine(v_b - v_a + v_c, .)
/// excluding the three query words.
pub fn analogy_eval(
    model: &impl WordVectorSource,
    quads: &[AnalogyQuad],
    mv: Option<&MorphemeVocab>,
) -> Result<AnalogyReport> {
    if quads.is_empty() {
        return Err(MorphError::EmptyAnalogies);
    }
    let vocab: Vec<String> = model.vocabulary();
    let vectors: Vec<Vec<f64>> =
        vocab.iter().map(|w| model.vector_of(w).unwrap()).collect();
    let mut correct = 0usize;
    let mut attempted = 0usize;
    let mut sections: HashMap<String, (usize, usize)> = HashMap::new();
    for q in quads {
        let (Some(va), Some(vb), Some(vc)) = (
            vector_for(model, &q.a, OovPolicy::Infer, mv),
            vector_for(model, &q.b, OovPolicy::Infer, mv),
            vector_for(model, &q.c, OovPolicy::Infer, mv),
        ) else {
            continue;
        };
        attempted += 1;
        let target: Vec<f64> =
            (0..va.len()).map(|k| vb[k] - va[k] + vc[k]).collect();
        let mut best: Option<(&str, f64)> = None;
        for (w, v) in vocab.iter().zip(&vectors) {
            if *w == q.a || *w == q.b || *w == q.c {
                continue;
            }
            let cs = cosine(&target, v);
            if best.map_or(true, |(_, bs)| cs > bs) {
                best = Some((w.as_str(), cs));
            }
        }
        let entry = sections.entry(q.section.clone()).or_insert((0, 0));
        entry.1 += 1;
        if let Some((w, _)) = best {
            if w == q.d {
                correct += 1;
                entry.0 += 1;
            }
        }
    }
    if attempted == 0 {
        return Err(MorphError::EmptyAnalogies);
    }
    let mut per_section: Vec<(String, f64, usize, usize)> = sections
        .into_iter()
        .map(|(s, (c, n))| (s, c as f64 / n as f64, c, n))
        .collect();
    per_section.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(AnalogyReport {
        accuracy: correct as f64 / attempted as f64,
        correct,
        attempted,
        per_section,
    })
}

/// Least-squares line fit; returns (slope, intercept, r_squared).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let pred = slope * x + intercept;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - my) * (y - my);
    }
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

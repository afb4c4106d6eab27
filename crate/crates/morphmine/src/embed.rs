//! Morpheme-enriched skip-gram embeddings with negative sampling.
//!
//! A word is scored against a context word as the sum of its morpheme
//! vectors dotted with the context vector; the morpheme bag is every node of
//! the word's hierarchical segmentation, the full word included.

use std::cell::UnsafeCell;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::candidates::MorphemeVocab;
use crate::error::{MorphError, Result};
use crate::pipeline::{segment_recursive, MorphForest};

#[derive(Debug, Clone)]
pub struct Hyper {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            dim: 100,
            window: 5,
            negatives: 5,
            learning_rate: 0.025,
            epochs: 5,
            seed: 42,
            threads: 1,
        }
    }
}

pub struct EmbeddingModel {
    pub hyper: Hyper,
    morph_ids: HashMap<String, usize>,
    morph_names: Vec<String>,
    morph_vecs: Vec<f64>,
    ctx_ids: HashMap<String, usize>,
    ctx_names: Vec<String>,
    ctx_vecs: Vec<f64>,
    /// word -> sorted deduplicated morpheme-token ids (full-word token included)
    word_bags: HashMap<String, Vec<usize>>,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.hyper.dim
    }

    pub fn morph_vector(&self, morpheme: &str) -> Option<&[f64]> {
        let &id = self.morph_ids.get(morpheme)?;
        Some(&self.morph_vecs[id * self.hyper.dim..(id + 1) * self.hyper.dim])
    }

    pub fn ctx_vector(&self, word: &str) -> Option<&[f64]> {
        let &id = self.ctx_ids.get(word)?;
        Some(&self.ctx_vecs[id * self.hyper.dim..(id + 1) * self.hyper.dim])
    }

    pub fn bag_of(&self, word: &str) -> Option<&[usize]> {
        self.word_bags.get(word).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.word_bags.keys().map(String::as_str)
    }

    pub fn morphemes(&self) -> impl Iterator<Item = &str> {
        self.morph_names.iter().map(String::as_str)
    }

    pub fn context_words(&self) -> impl Iterator<Item = &str> {
        self.ctx_names.iter().map(String::as_str)
    }

    /// Word vector: sum of the word's morpheme vectors.
    pub fn word_vector(&self, word: &str) -> Option<Vec<f64>> {
        let bag = self.word_bags.get(word)?;
        let d = self.hyper.dim;
        let mut v = vec![0.0; d];
        for &m in bag {
            for (k, x) in v.iter_mut().enumerate() {
                *x += self.morph_vecs[m * d + k];
            }
        }
        Some(v)
    }

    /// s(w, c) = sum over the bag of dot products with the context vector.
    pub fn score(&self, word: &str, context_word: &str) -> Result<f64> {
        let bag = self
            .word_bags
            .get(word)
            .filter(|b| !b.is_empty())
            .ok_or_else(|| MorphError::EmptyBag(word.to_owned()))?;
        let ctx = self
            .ctx_vector(context_word)
            .ok_or_else(|| MorphError::EmptyBag(context_word.to_owned()))?;
        let d = self.hyper.dim;
        let mut s = 0.0;
        for &m in bag {
            let dot: f64 =
                (0..d).map(|k| self.morph_vecs[m * d + k] * ctx[k]).sum();
            s += dot;
        }
        Ok(s)
    }

    /// Vector for an unseen word: segment it against `mv`, sum the vectors
    /// of known morpheme tokens. The second return is false when no morpheme
    /// was known (zero vector).
    pub fn infer_oov(&self, word: &str, mv: &MorphemeVocab) -> Result<(Vec<f64>, bool)> {
        let forest = segment_recursive(word, mv, false)?;
        let d = self.hyper.dim;
        let mut v = vec![0.0; d];
        let mut any = false;
        for m in forest.flat_set() {
            if let Some(z) = self.morph_vector(&m) {
                for k in 0..d {
                    v[k] += z[k];
                }
                any = true;
            }
        }
        Ok((v, any))
    }

    /// Text export: `<token_count> <dim>` then `token v1 .. vd`, 6 decimals.
    pub fn morphs_to_text(&self) -> String {
        vectors_to_text(&self.morph_names, &self.morph_vecs, self.hyper.dim)
    }

    /// Word-level vectors (bag sums) in the same text format.
    pub fn words_to_text(&self) -> String {
        let mut names: Vec<&String> = self.word_bags.keys().collect();
        names.sort();
        let d = self.hyper.dim;
        let mut flat = Vec::with_capacity(names.len() * d);
        for w in &names {
            flat.extend(self.word_vector(w).unwrap());
        }
        let owned: Vec<String> = names.into_iter().cloned().collect();
        vectors_to_text(&owned, &flat, d)
    }
}

fn vectors_to_text(names: &[String], vecs: &[f64], dim: usize) -> String {
    let mut out = format!("{} {}\n", names.len(), dim);
    for (i, name) in names.iter().enumerate() {
        out.push_str(name);
        for k in 0..dim {
            out.push_str(&format!(" {:.6}", vecs[i * dim + k]));
        }
        out.push('\n');
    }
    out
}

/// Parse the text vector format into (token -> vector). Errors if a row's
/// width disagrees with the header.
pub fn vectors_from_text(text: &str) -> Result<(HashMap<String, Vec<f64>>, usize)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(MorphError::EmptyInput)?;
    let mut hp = header.split_whitespace();
    let (_count, dim): (usize, usize) = match (hp.next(), hp.next()) {
        (Some(c), Some(d)) => (
            c.parse().map_err(|_| MorphError::Parse { line: 1, msg: "bad header".into() })?,
            d.parse().map_err(|_| MorphError::Parse { line: 1, msg: "bad header".into() })?,
        ),
        _ => return Err(MorphError::Parse { line: 1, msg: "bad header".into() }),
    };
    let mut map = HashMap::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().unwrap().to_string();
        let vals: std::result::Result<Vec<f64>, _> = parts.map(str::parse).collect();
        let vals = vals.map_err(|_| MorphError::Parse {
            line: i + 2,
            msg: "bad vector component".into(),
        })?;
        if vals.len() != dim {
            return Err(MorphError::DimensionMismatch { file: vals.len(), expected: dim });
        }
        map.insert(token, vals);
    }
    Ok((map, dim))
}

/// Numerically stable softplus of -x: log(1 + exp(-x)).
pub fn log_loss(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Gradients keyed by morpheme / context token name.
pub struct Gradients {
    pub morph: HashMap<String, Vec<f64>>,
    pub ctx: HashMap<String, Vec<f64>>,
}

/// Loss and analytic gradients of one (center, context, negatives) example:
/// loss = l(s(w,c)) + sum_t l(-s(w,t)).
pub fn loss_and_gradients(
    model: &EmbeddingModel,
    center_word: &str,
    context_word: &str,
    negative_words: &[&str],
) -> Result<(f64, Gradients)> {
    let d = model.hyper.dim;
    let bag = model
        .word_bags
        .get(center_word)
        .filter(|b| !b.is_empty())
        .ok_or_else(|| MorphError::EmptyBag(center_word.to_owned()))?;
    let mut bag_sum = vec![0.0; d];
    for &m in bag {
        for k in 0..d {
            bag_sum[k] += model.morph_vecs[m * d + k];
        }
    }
    let mut loss = 0.0;
    let mut morph_grad = vec![0.0; d]; // shared by every bag member
    let mut grads = Gradients { morph: HashMap::new(), ctx: HashMap::new() };

    let accumulate = |word: &str, label_positive: bool,
                          loss: &mut f64,
                          morph_grad: &mut [f64],
                          grads: &mut Gradients|
     -> Result<()> {
        let ctx = model
            .ctx_vector(word)
            .ok_or_else(|| MorphError::EmptyBag(word.to_owned()))?;
        let s: f64 = (0..d).map(|k| bag_sum[k] * ctx[k]).sum();
        let (l, dlds) = if label_positive {
            (log_loss(s), -sigmoid(-s))
        } else {
            (log_loss(-s), sigmoid(s))
        };
        *loss += l;
        for k in 0..d {
            morph_grad[k] += dlds * ctx[k];
        }
        let entry = grads
            .ctx
            .entry(word.to_owned())
            .or_insert_with(|| vec![0.0; d]);
        for k in 0..d {
            entry[k] += dlds * bag_sum[k];
        }
        Ok(())
    };

    accumulate(context_word, true, &mut loss, &mut morph_grad, &mut grads)?;
    for neg in negative_words {
        accumulate(neg, false, &mut loss, &mut morph_grad, &mut grads)?;
    }

    for &m in bag {
        grads.morph.insert(model.morph_names[m].clone(), morph_grad.clone());
    }
    Ok((loss, grads))
}

struct NegativeTable {
    cdf: Vec<f64>,
}

impl NegativeTable {
    /// Unigram distribution raised to the 3/4 power.
    fn build(counts: &[u64]) -> NegativeTable {
        let mut cdf = Vec::with_capacity(counts.len());
        let mut acc = 0.0;
        for &c in counts {
            acc += (c as f64).powf(0.75);
            cdf.push(acc);
        }
        NegativeTable { cdf }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let x: f64 = rng.gen::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        match self.cdf.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i.min(self.cdf.len() - 1),
        }
    }
}

struct RacyVecs(UnsafeCell<Vec<f64>>);
// Lock-free asynchronous SGD: concurrent updates may race and lose writes,
// which the parallel training contract tolerates.
unsafe impl Sync for RacyVecs {}

impl RacyVecs {
    fn ptr(&self) -> *mut f64 {
        unsafe { (*self.0.get()).as_mut_ptr() }
    }
}

fn flat_bags(
    corpus: &[String],
    forests: &HashMap<String, MorphForest>,
    mv: Option<&MorphemeVocab>,
) -> Result<HashMap<String, Vec<String>>> {
    let mut bags: HashMap<String, Vec<String>> = HashMap::new();
    for tok in corpus {
        if bags.contains_key(tok) {
            continue;
        }
        let mut set: Vec<String> = match (forests.get(tok), mv) {
            (Some(f), _) => f.flat_set().into_iter().collect(),
            (None, Some(mv)) => {
                segment_recursive(tok, mv, false)?.flat_set().into_iter().collect()
            }
            (None, None) => vec![tok.clone()],
        };
        if !set.iter().any(|m| m == tok) {
            set.push(tok.clone());
        }
        set.sort();
        set.dedup();
        bags.insert(tok.clone(), set);
    }
    Ok(bags)
}

/// Train on a token stream. Deterministic when `hyper.threads == 1`; with
/// more threads, workers share parameters without locks.
pub fn train(
    corpus: &[String],
    forests: &HashMap<String, MorphForest>,
    mv: Option<&MorphemeVocab>,
    hyper: &Hyper,
) -> Result<EmbeddingModel> {
    if corpus.is_empty() {
        return Err(MorphError::EmptyCorpus);
    }
    let d = hyper.dim;
    let bags = flat_bags(corpus, forests, mv)?;

    // deterministic id assignment: sorted orders
    let mut ctx_names: Vec<String> = bags.keys().cloned().collect();
    ctx_names.sort();
    let ctx_ids: HashMap<String, usize> =
        ctx_names.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let mut morph_names: Vec<String> = {
        let mut s: Vec<String> = bags.values().flatten().cloned().collect();
        s.sort();
        s.dedup();
        s
    };
    morph_names.sort();
    let morph_ids: HashMap<String, usize> =
        morph_names.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let word_bags: HashMap<String, Vec<usize>> = bags
        .iter()
        .map(|(w, ms)| {
            let mut ids: Vec<usize> = ms.iter().map(|m| morph_ids[m]).collect();
            ids.sort();
            ids.dedup();
            (w.clone(), ids)
        })
        .collect();

    let mut init_rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let bound = 1.0 / (2.0 * d as f64);
    let mut morph_vecs = vec![0.0; morph_names.len() * d];
    for x in morph_vecs.iter_mut() {
        *x = init_rng.gen_range(-bound..bound);
    }
    let ctx_vecs = vec![0.0; ctx_names.len() * d];

    let tokens: Vec<usize> = corpus.iter().map(|t| ctx_ids[t]).collect();
    let mut counts = vec![0u64; ctx_names.len()];
    for &t in &tokens {
        counts[t] += 1;
    }
    let table = NegativeTable::build(&counts);
    let bag_by_id: Vec<Vec<usize>> =
        ctx_names.iter().map(|w| word_bags[w].clone()).collect();

    let morph_cell = RacyVecs(UnsafeCell::new(morph_vecs));
    let ctx_cell = RacyVecs(UnsafeCell::new(ctx_vecs));
    let total_updates = (hyper.epochs * tokens.len()).max(1) as f64;

    let worker = |range: std::ops::Range<usize>, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zp = morph_cell.ptr();
        let vp = ctx_cell.ptr();
        let mut processed = 0usize;
        let span = (range.len() * hyper.epochs).max(1) as f64;
        for epoch in 0..hyper.epochs {
            let _ = epoch;
            for x in range.clone() {
                let progress = if hyper.threads == 1 {
                    processed as f64 / total_updates
                } else {
                    processed as f64 / span
                };
                let lr = hyper.learning_rate * (1.0 - progress).max(1e-4);
                processed += 1;
                let b = rng.gen_range(1..=hyper.window.max(1));
                let lo = x.saturating_sub(b);
                let hi = (x + b).min(tokens.len() - 1);
                let bag = &bag_by_id[tokens[x]];
                for c in lo..=hi {
                    if c == x {
                        continue;
                    }
                    let ctx_id = tokens[c];
                    sgd_step(
                        zp, vp, d, bag, ctx_id, true, lr,
                    );
                    for _ in 0..hyper.negatives {
                        let mut neg = table.sample(&mut rng);
                        let mut tries = 0;
                        while neg == ctx_id && tries < 8 {
                            neg = table.sample(&mut rng);
                            tries += 1;
                        }
                        if neg == ctx_id {
                            continue;
                        }
                        sgd_step(zp, vp, d, bag, neg, false, lr);
                    }
                }
            }
        }
    };

    if hyper.threads <= 1 {
        worker(0..tokens.len(), hyper.seed.wrapping_add(1));
    } else {
        let n = tokens.len();
        let chunk = n.div_ceil(hyper.threads);
        std::thread::scope(|s| {
            for (i, start) in (0..n).step_by(chunk.max(1)).enumerate() {
                let end = (start + chunk).min(n);
                let w = &worker;
                let seed = hyper.seed.wrapping_add(1 + i as u64);
                s.spawn(move || w(start..end, seed));
            }
        });
    }

    let morph_vecs = morph_cell.0.into_inner();
    let ctx_vecs = ctx_cell.0.into_inner();
    for v in morph_vecs.iter().chain(ctx_vecs.iter()) {
        debug_assert!(v.is_finite());
    }
    Ok(EmbeddingModel {
        hyper: hyper.clone(),
        morph_ids,
        morph_names,
        morph_vecs,
        ctx_ids,
        ctx_names,
        ctx_vecs,
        word_bags,
    })
}

/// One SGNS update on raw parameter storage.
fn sgd_step(
    zp: *mut f64,
    vp: *mut f64,
    d: usize,
    bag: &[usize],
    ctx_id: usize,
    positive: bool,
    lr: f64,
) {
    unsafe {
        let ctx = vp.add(ctx_id * d);
        let mut s = 0.0;
        for &m in bag {
            let z = zp.add(m * d);
            for k in 0..d {
                s += *z.add(k) * *ctx.add(k);
            }
        }
        let dlds = if positive { -sigmoid(-s) } else { sigmoid(s) };
        // ctx gradient needs the pre-update bag sum
        let mut bag_sum = vec![0.0; d];
        for &m in bag {
            let z = zp.add(m * d);
            for k in 0..d {
                bag_sum[k] += *z.add(k);
            }
        }
        for &m in bag {
            let z = zp.add(m * d);
            for k in 0..d {
                *z.add(k) -= lr * dlds * *ctx.add(k);
            }
        }
        for k in 0..d {
            *ctx.add(k) -= lr * dlds * bag_sum[k];
        }
    }
}

/// Build a model directly from explicit bags and vectors (evaluation of
/// saved vector files, tests).
pub fn model_from_parts(
    dim: usize,
    morph_vectors: HashMap<String, Vec<f64>>,
    ctx_vectors: HashMap<String, Vec<f64>>,
    word_bags_by_name: HashMap<String, Vec<String>>,
    hyper: Hyper,
) -> Result<EmbeddingModel> {
    let mut morph_names: Vec<String> = morph_vectors.keys().cloned().collect();
    morph_names.sort();
    let morph_ids: HashMap<String, usize> =
        morph_names.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let mut morph_vecs = vec![0.0; morph_names.len() * dim];
    for (m, v) in &morph_vectors {
        if v.len() != dim {
            return Err(MorphError::DimensionMismatch { file: v.len(), expected: dim });
        }
        morph_vecs[morph_ids[m] * dim..(morph_ids[m] + 1) * dim].copy_from_slice(v);
    }
    let mut ctx_names: Vec<String> = ctx_vectors.keys().cloned().collect();
    ctx_names.sort();
    let ctx_ids: HashMap<String, usize> =
        ctx_names.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let mut ctx_vecs = vec![0.0; ctx_names.len() * dim];
    for (m, v) in &ctx_vectors {
        if v.len() != dim {
            return Err(MorphError::DimensionMismatch { file: v.len(), expected: dim });
        }
        ctx_vecs[ctx_ids[m] * dim..(ctx_ids[m] + 1) * dim].copy_from_slice(v);
    }
    let word_bags = word_bags_by_name
        .into_iter()
        .map(|(w, ms)| {
            let mut ids: Vec<usize> =
                ms.iter().filter_map(|m| morph_ids.get(m).copied()).collect();
            ids.sort();
            ids.dedup();
            (w, ids)
        })
        .collect();
    Ok(EmbeddingModel {
        hyper: Hyper { dim, ..hyper },
        morph_ids,
        morph_names,
        morph_vecs,
        ctx_ids,
        ctx_names,
        ctx_vecs,
        word_bags,
    })
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

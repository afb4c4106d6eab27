//! Initial morpheme vocabulary: prefixes and suffixes at entropy local
//! maxima, plus root words obtained by stripping affix combinations.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{MorphError, Result};
use crate::trie::{Direction, EntropyTrie};
use crate::vocab::Vocabulary;

/// Which roles a morpheme may fill during segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassSet {
    pub prefix: bool,
    pub suffix: bool,
    pub root: bool,
}

impl ClassSet {
    pub fn is_empty(&self) -> bool {
        !(self.prefix || self.suffix || self.root)
    }

    /// Subset string over {P,S,R}, e.g. `PS`.
    pub fn code(&self) -> String {
        let mut s = String::new();
        if self.prefix {
            s.push('P');
        }
        if self.suffix {
            s.push('S');
        }
        if self.root {
            s.push('R');
        }
        s
    }

    pub fn parse(code: &str) -> Option<ClassSet> {
        let mut cs = ClassSet::default();
        for ch in code.chars() {
            match ch {
                'P' => cs.prefix = true,
                'S' => cs.suffix = true,
                'R' => cs.root = true,
                _ => return None,
            }
        }
        Some(cs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphemeEntry {
    pub classes: ClassSet,
    pub count: u64,
}

/// The learned morpheme vocabulary: morpheme text → roles and count.
#[derive(Debug, Clone, Default)]
pub struct MorphemeVocab {
    entries: HashMap<String, MorphemeEntry>,
    /// Longest entry in characters, maintained incrementally: `max_len` is on
    /// every word's segmentation path, so it must not rescan the entries.
    max_len: usize,
    pub min_support: u64,
    pub min_root_len: usize,
    pub min_affix_len: usize,
}

impl MorphemeVocab {
    pub fn new(min_support: u64, min_root_len: usize, min_affix_len: usize) -> Self {
        MorphemeVocab {
            entries: HashMap::new(),
            max_len: 0,
            min_support,
            min_root_len,
            min_affix_len,
        }
    }

    pub fn insert(&mut self, morpheme: impl Into<String>, classes: ClassSet, count: u64) {
        let morpheme = morpheme.into();
        self.max_len = self.max_len.max(morpheme.chars().count());
        self.entries.insert(morpheme, MorphemeEntry { classes, count });
    }

    pub fn get(&self, morpheme: &str) -> Option<&MorphemeEntry> {
        self.entries.get(morpheme)
    }

    pub fn count_of(&self, morpheme: &str) -> Option<u64> {
        self.entries.get(morpheme).map(|e| e.count)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MorphemeEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn retain<F: FnMut(&str, &MorphemeEntry) -> bool>(&mut self, mut f: F) {
        self.entries.retain(|k, v| f(k, v));
        self.max_len = self.entries.keys().map(|m| m.chars().count()).max().unwrap_or(0);
    }

    pub fn set_count(&mut self, morpheme: &str, count: u64) {
        if let Some(e) = self.entries.get_mut(morpheme) {
            e.count = count;
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// TSV: `morpheme<TAB>classes<TAB>count`, descending count then lexicographic.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&String, &MorphemeEntry)> = self.entries.iter().collect();
        rows.sort_by(|a, b| b.1.count.cmp(&a.1.count).then_with(|| a.0.cmp(b.0)));
        let mut out = String::new();
        for (m, e) in rows {
            out.push_str(&format!("{m}\t{}\t{}\n", e.classes.code(), e.count));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<MorphemeVocab> {
        let mut mv = MorphemeVocab::new(2, 4, 1);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (m, cls, cnt) = match (parts.next(), parts.next(), parts.next()) {
                (Some(m), Some(c), Some(n)) => (m, c, n),
                _ => {
                    return Err(MorphError::Parse {
                        line: lineno + 1,
                        msg: "expected morpheme<TAB>classes<TAB>count".into(),
                    })
                }
            };
            let classes = ClassSet::parse(cls).ok_or_else(|| MorphError::Parse {
                line: lineno + 1,
                msg: format!("bad class set {cls:?}"),
            })?;
            let count = cnt.trim().parse::<u64>().map_err(|_| MorphError::Parse {
                line: lineno + 1,
                msg: format!("bad count {cnt:?}"),
            })?;
            mv.insert(m, classes, count);
        }
        Ok(mv)
    }
}

/// Indices i (1 <= i < |word|) where the entropy profile has a strict local
/// maximum: H(m_i) > H(m_{i-1}) and H(m_i) > H(m_{i+1}). For a forward trie
/// these are prefix lengths; for a reversed trie, suffix lengths (the word is
/// reversed internally).
pub fn affix_boundaries(trie: &EntropyTrie, word: &str) -> Result<Vec<usize>> {
    let oriented: String = match trie.direction() {
        Direction::Forward => word.to_owned(),
        Direction::Reversed => word.chars().rev().collect(),
    };
    let profile = trie.entropy_profile(&oriented)?;
    let n = profile.len() - 1; // |word|
    let mut out = Vec::new();
    for i in 1..n {
        if profile[i] > profile[i - 1] && profile[i] > profile[i + 1] {
            out.push(i);
        }
    }
    Ok(out)
}

/// Raw candidate multisets before support/length filtering. Counts here are
/// "number of words that generated the candidate"; [`finalize`] recounts
/// against the whole vocabulary.
#[derive(Debug, Clone, Default)]
pub struct RawCandidates {
    pub prefixes: HashMap<String, u64>,
    pub suffixes: HashMap<String, u64>,
    pub roots: HashMap<String, u64>,
}

/// Strip every (prefix-or-empty, suffix-or-empty) combination off each word;
/// the remaining interior substrings are root candidates.
pub fn extract_roots(
    vocab: &Vocabulary,
    prefixes: &HashMap<String, Vec<String>>,
    suffixes: &HashMap<String, Vec<String>>,
) -> HashMap<String, u64> {
    let mut roots: HashMap<String, u64> = HashMap::new();
    for (word, _) in vocab.entries() {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let empty = Vec::new();
        let ps = prefixes.get(word.as_str()).unwrap_or(&empty);
        let ss = suffixes.get(word.as_str()).unwrap_or(&empty);
        let mut plens: Vec<usize> = ps.iter().map(|p| p.chars().count()).collect();
        plens.push(0);
        let mut slens: Vec<usize> = ss.iter().map(|s| s.chars().count()).collect();
        slens.push(0);
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for &pl in &plens {
            for &sl in &slens {
                if pl + sl < n {
                    seen.insert(chars[pl..n - sl].iter().collect());
                }
            }
        }
        for r in seen {
            *roots.entry(r).or_insert(0) += 1;
        }
    }
    roots
}

/// Generate the raw candidate pool for the whole vocabulary from the two
/// entropy tries.
pub fn generate_candidates(
    vocab: &Vocabulary,
    forward: &EntropyTrie,
    reversed: &EntropyTrie,
) -> Result<RawCandidates> {
    let mut raw = RawCandidates::default();
    let mut word_prefixes: HashMap<String, Vec<String>> = HashMap::new();
    let mut word_suffixes: HashMap<String, Vec<String>> = HashMap::new();
    for (word, _) in vocab.entries() {
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        if n < 2 {
            continue;
        }
        let pb = affix_boundaries(forward, word)?;
        let sb = affix_boundaries(reversed, word)?;
        let ps: Vec<String> = pb.iter().map(|&i| chars[..i].iter().collect()).collect();
        let ss: Vec<String> = sb.iter().map(|&i| chars[n - i..].iter().collect()).collect();
        for p in &ps {
            *raw.prefixes.entry(p.clone()).or_insert(0) += 1;
        }
        for s in &ss {
            *raw.suffixes.entry(s.clone()).or_insert(0) += 1;
        }
        if !ps.is_empty() {
            word_prefixes.insert(word.clone(), ps);
        }
        if !ss.is_empty() {
            word_suffixes.insert(word.clone(), ss);
        }
    }
    raw.roots = extract_roots(vocab, &word_prefixes, &word_suffixes);
    Ok(raw)
}

/// Per-candidate support counted against the vocabulary in each role:
/// prefix at word start, suffix at word end, root (and scoring count)
/// anywhere as a contiguous substring.
struct SupportCounts {
    prefix: HashMap<String, u64>,
    suffix: HashMap<String, u64>,
    substring: HashMap<String, u64>,
}

fn count_support(vocab: &Vocabulary, raw: &RawCandidates, token_weighted: bool) -> SupportCounts {
    let pset: HashSet<&str> = raw.prefixes.keys().map(String::as_str).collect();
    let sset: HashSet<&str> = raw.suffixes.keys().map(String::as_str).collect();
    let mut all: HashSet<&str> = raw.roots.keys().map(String::as_str).collect();
    all.extend(&pset);
    all.extend(&sset);
    let max_len = all.iter().map(|m| m.chars().count()).max().unwrap_or(0);

    let mut sc = SupportCounts {
        prefix: HashMap::new(),
        suffix: HashMap::new(),
        substring: HashMap::new(),
    };
    for (word, count) in vocab.entries() {
        let weight = if token_weighted { *count } else { 1 };
        let chars: Vec<char> = word.chars().collect();
        let n = chars.len();
        let mut seen: HashSet<&str> = HashSet::new();
        for i in 0..n {
            let mut sub = String::new();
            for j in i..n.min(i + max_len) {
                sub.push(chars[j]);
                if let Some(hit) = all.get(sub.as_str()) {
                    if seen.insert(hit) {
                        *sc.substring.entry(sub.clone()).or_insert(0) += weight;
                    }
                    if i == 0 && pset.contains(sub.as_str()) {
                        *sc.prefix.entry(sub.clone()).or_insert(0) += weight;
                    }
                    if j == n - 1 && sset.contains(sub.as_str()) {
                        *sc.suffix.entry(sub.clone()).or_insert(0) += weight;
                    }
                }
            }
        }
    }
    sc
}

/// Apply the support and length filters and produce the final
/// [`MorphemeVocab`]. Returns the vocabulary plus a flag that is true when
/// every candidate was filtered out (a warning condition, not an error).
pub fn finalize(
    raw: &RawCandidates,
    vocab: &Vocabulary,
    min_support: u64,
    min_root_len: usize,
    min_affix_len: usize,
    token_weighted: bool,
) -> (MorphemeVocab, bool) {
    let sc = count_support(vocab, raw, token_weighted);
    let mut mv = MorphemeVocab::new(min_support, min_root_len, min_affix_len);
    let mut texts: BTreeSet<&str> = BTreeSet::new();
    texts.extend(raw.prefixes.keys().map(String::as_str));
    texts.extend(raw.suffixes.keys().map(String::as_str));
    texts.extend(raw.roots.keys().map(String::as_str));

    for text in texts {
        let len = text.chars().count();
        let shared = sc.substring.get(text).copied().unwrap_or(0);
        // a candidate equal to a one-off full word cannot be shared
        if vocab.contains(text) && shared < 2 {
            continue;
        }
        let mut classes = ClassSet::default();
        if raw.prefixes.contains_key(text)
            && len >= min_affix_len
            && sc.prefix.get(text).copied().unwrap_or(0) >= min_support
        {
            classes.prefix = true;
        }
        if raw.suffixes.contains_key(text)
            && len >= min_affix_len
            && sc.suffix.get(text).copied().unwrap_or(0) >= min_support
        {
            classes.suffix = true;
        }
        if raw.roots.contains_key(text) && len >= min_root_len && shared >= min_support {
            classes.root = true;
        }
        if !classes.is_empty() && shared >= min_support {
            mv.insert(text, classes, shared);
        }
    }
    let emptied = mv.is_empty()
        && !(raw.prefixes.is_empty() && raw.suffixes.is_empty() && raw.roots.is_empty());
    (mv, emptied)
}

//! Word-list / corpus ingestion into a frequency-annotated vocabulary.

use std::collections::HashMap;
use std::io::BufRead;

use unicode_normalization::UnicodeNormalization;

use crate::error::{MorphError, Result};

/// How input lines are interpreted by [`load_vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// One word per line, optionally `word<TAB>count`; missing counts default to 1.
    WordList,
    /// Whitespace-tokenized running text; counts are token frequencies.
    Corpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizationPolicy {
    pub case_fold: bool,
    pub compose: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        // Gold segmentation files are lowercase, so fold by default.
        NormalizationPolicy { case_fold: true, compose: true }
    }
}

/// Deterministic, idempotent word normalization.
pub fn normalize(word: &str, policy: NormalizationPolicy) -> String {
    let mut s = if policy.compose { word.nfc().collect::<String>() } else { word.to_owned() };
    if policy.case_fold {
        s = s.to_lowercase();
        if policy.compose {
            // lowercasing can denormalize; recompose so the function is idempotent
            s = s.nfc().collect();
        }
    }
    s
}

/// Unique words with counts plus a character index assigned in
/// first-appearance order.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index_of: HashMap<String, usize>,
    char_index: HashMap<char, u32>,
    char_order: Vec<char>,
}

impl Vocabulary {
    pub fn from_counts(words: Vec<(String, u64)>) -> Self {
        let mut v = Vocabulary {
            entries: Vec::new(),
            index_of: HashMap::new(),
            char_index: HashMap::new(),
            char_order: Vec::new(),
        };
        for (w, c) in words {
            v.add(w, c);
        }
        v
    }

    fn add(&mut self, word: String, count: u64) {
        debug_assert!(count >= 1);
        match self.index_of.get(&word) {
            Some(&i) => self.entries[i].1 += count,
            None => {
                for ch in word.chars() {
                    if !self.char_index.contains_key(&ch) {
                        self.char_index.insert(ch, self.char_order.len() as u32 + 1);
                        self.char_order.push(ch);
                    }
                }
                self.index_of.insert(word.clone(), self.entries.len());
                self.entries.push((word, count));
            }
        }
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(w, _)| w.as_str())
    }

    pub fn count_of(&self, word: &str) -> Option<u64> {
        self.index_of.get(word).map(|&i| self.entries[i].1)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index_of.contains_key(word)
    }

    /// |V|: number of unique words.
    pub fn total_types(&self) -> usize {
        self.entries.len()
    }

    /// C: number of distinct characters.
    pub fn char_count(&self) -> usize {
        self.char_order.len()
    }

    /// 1-based id of a character, in first-appearance order.
    pub fn char_id(&self, ch: char) -> Option<u32> {
        self.char_index.get(&ch).copied()
    }

    /// Canonical TSV: `word<TAB>count`, descending count then lexicographic.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<&(String, u64)> = self.entries.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut out = String::new();
        for (w, c) in rows {
            out.push_str(w);
            out.push('\t');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parse a line-oriented source into a [`Vocabulary`].
pub fn load_vocabulary<R: BufRead>(
    source: R,
    mode: LoadMode,
    policy: NormalizationPolicy,
) -> Result<Vocabulary> {
    let mut words: Vec<(String, u64)> = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        match mode {
            LoadMode::WordList => {
                let mut parts = line.splitn(2, '\t');
                let word = parts.next().unwrap().trim();
                let count = match parts.next() {
                    Some(c) => c.trim().parse::<u64>().map_err(|_| MorphError::Parse {
                        line: lineno + 1,
                        msg: format!("malformed count field {c:?}"),
                    })?,
                    None => 1,
                };
                if count == 0 {
                    return Err(MorphError::Parse {
                        line: lineno + 1,
                        msg: "count must be >= 1".into(),
                    });
                }
                words.push((normalize(word, policy), count));
            }
            LoadMode::Corpus => {
                for tok in line.split_whitespace() {
                    words.push((normalize(tok, policy), 1));
                }
            }
        }
    }
    if words.is_empty() {
        return Err(MorphError::EmptyInput);
    }
    Ok(Vocabulary::from_counts(words))
}

//! Orchestration: learn a morpheme vocabulary, segment every word
//! hierarchically, refine counts from usage, and resegment.

use std::collections::{BTreeSet, HashMap};

use crate::candidates::{finalize, generate_candidates, MorphemeVocab};
use crate::error::{MorphError, Result};
use crate::segmenter::{dp_segment, ml_select, Interval, MorphClass};
use crate::trie::{Direction, EntropyTrie, TrieOptions};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub min_support: u64,
    pub min_root_len: usize,
    pub min_affix_len: usize,
    /// Refinement rounds; 0 means the initial segmentation is final.
    pub rounds: usize,
    /// Morphemes with usage below this after a pass are pruned.
    pub prune_below: u64,
    pub token_weighted: bool,
    pub end_of_word_event: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_support: 2,
            min_root_len: 4,
            min_affix_len: 1,
            rounds: 1,
            prune_below: 1,
            token_weighted: false,
            end_of_word_event: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.min_support == 0 {
            problems.push("min_support must be >= 1".to_string());
        }
        if self.min_root_len == 0 {
            problems.push("min_root_len must be >= 1".to_string());
        }
        if self.min_affix_len == 0 {
            problems.push("min_affix_len must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(MorphError::InvalidConfig(problems))
        }
    }
}

/// One node of a word's hierarchical segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphNode {
    pub text: String,
    pub class: MorphClass,
    pub children: Vec<MorphNode>,
}

impl MorphNode {
    fn leaf(text: String, class: MorphClass) -> Self {
        MorphNode { text, class, children: Vec::new() }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a MorphNode)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }
}

/// A word's recursive segmentation: the root is the word itself.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphForest {
    pub root: MorphNode,
}

impl MorphForest {
    pub fn word(&self) -> &str {
        &self.root.text
    }

    /// All node strings excluding fillers (the word itself included).
    pub fn flat_set(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.root.visit(&mut |n| {
            if n.class != MorphClass::Filler {
                out.insert(n.text.clone());
            }
        });
        out
    }

    /// Morphemes used strictly below the root, fillers excluded.
    pub fn inner_set(&self) -> BTreeSet<String> {
        let mut out = self.flat_set();
        out.remove(self.word());
        // the word may also appear as a proper sub-node of itself only if a
        // full-span interval existed, which the segmenter forbids
        out
    }

    /// Top-level morphemes in word order, fillers included.
    pub fn top_level(&self) -> Vec<&str> {
        if self.root.children.is_empty() {
            vec![self.root.text.as_str()]
        } else {
            self.root.children.iter().map(|c| c.text.as_str()).collect()
        }
    }

    /// Leaves in word order, fillers included; concatenates to the word.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn rec<'a>(n: &'a MorphNode, out: &mut Vec<&'a str>) {
            if n.children.is_empty() {
                out.push(n.text.as_str());
            } else {
                for c in &n.children {
                    rec(c, out);
                }
            }
        }
        rec(&self.root, &mut out);
        out
    }
}

/// Map every occurrence of a vocabulary morpheme in `word` to an interval,
/// honoring class placement: prefixes at the start, suffixes at the end,
/// roots anywhere. Full-span occurrences are excluded.
pub fn morpheme_intervals(word: &str, mv: &MorphemeVocab) -> Vec<Interval> {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    let max_len = mv.max_len().min(n.saturating_sub(1));
    let mut out = Vec::new();
    for i in 0..n {
        let mut sub = String::new();
        for j in i..n.min(i + max_len) {
            sub.push(chars[j]);
            if let Some(entry) = mv.get(&sub) {
                let span_len = j - i + 1;
                if span_len == n {
                    continue;
                }
                let class = if entry.classes.prefix && i == 0 {
                    Some(MorphClass::Prefix)
                } else if entry.classes.suffix && j == n - 1 {
                    Some(MorphClass::Suffix)
                } else if entry.classes.root {
                    Some(MorphClass::Root)
                } else {
                    None
                };
                if let Some(class) = class {
                    out.push(Interval::new(i + 1, j + 1, class));
                }
            }
        }
    }
    out
}

/// Recursively segment one word against a frozen morpheme vocabulary
/// (Occam's-razor DP at every level, likelihood tie-breaking).
pub fn segment_recursive(
    word: &str,
    mv: &MorphemeVocab,
    training_mode: bool,
) -> Result<MorphForest> {
    Ok(segment_recursive_flagged(word, mv, training_mode)?.0)
}

/// Like [`segment_recursive`] but also reports whether training-mode
/// filtering ever removed every candidate for this word.
pub fn segment_recursive_flagged(
    word: &str,
    mv: &MorphemeVocab,
    training_mode: bool,
) -> Result<(MorphForest, bool)> {
    let mut fallback = false;
    let root = segment_node(word, MorphClass::Word, mv, training_mode, &mut fallback)?;
    Ok((MorphForest { root }, fallback))
}

fn segment_node(
    text: &str,
    class: MorphClass,
    mv: &MorphemeVocab,
    training_mode: bool,
    fallback: &mut bool,
) -> Result<MorphNode> {
    if text.chars().count() < 2 {
        return Ok(MorphNode::leaf(text.to_owned(), class));
    }
    let intervals = morpheme_intervals(text, mv);
    if intervals.is_empty() {
        return Ok(MorphNode::leaf(text.to_owned(), class));
    }
    let res = dp_segment(text, &intervals)?;
    let sel = ml_select(&res.all_optimal, mv, training_mode)?;
    if sel.fallback {
        *fallback = true;
    }
    let mut children = Vec::new();
    for (t, iv) in &sel.segmentation.morphemes {
        if iv.class == MorphClass::Filler {
            children.push(MorphNode::leaf(t.clone(), MorphClass::Filler));
        } else {
            children.push(segment_node(t, iv.class, mv, training_mode, fallback)?);
        }
    }
    Ok(MorphNode { text: text.to_owned(), class, children })
}

/// Replace every morpheme's count by its usage count (number of words whose
/// selected segmentation used it at any hierarchy level below the root) and
/// prune entries used fewer than `prune_below` times.
pub fn refine_counts(
    forests: &[MorphForest],
    mv: &MorphemeVocab,
    prune_below: u64,
) -> MorphemeVocab {
    let mut usage: HashMap<String, u64> = HashMap::new();
    for forest in forests {
        for m in forest.inner_set() {
            *usage.entry(m).or_insert(0) += 1;
        }
    }
    let mut refined = mv.clone();
    refined.retain(|m, _| usage.get(m).copied().unwrap_or(0) >= prune_below);
    let used: Vec<(String, u64)> =
        usage.iter().map(|(m, u)| (m.clone(), *u)).collect();
    for (m, u) in used {
        refined.set_count(&m, u);
    }
    refined
}

pub struct PipelineOutput {
    pub morphemes: MorphemeVocab,
    /// One forest per vocabulary word, in input order.
    pub forests: Vec<MorphForest>,
    /// Words where training-mode filtering removed every candidate.
    pub fallback_words: Vec<String>,
}

fn segment_all(
    vocab: &Vocabulary,
    mv: &MorphemeVocab,
    training_mode: bool,
) -> Result<(Vec<MorphForest>, Vec<String>)> {
    let mut forests = Vec::with_capacity(vocab.total_types());
    let mut fallbacks = Vec::new();
    for (word, _) in vocab.entries() {
        let (forest, fell_back) = segment_recursive_flagged(word, mv, training_mode)?;
        if fell_back {
            fallbacks.push(word.clone());
        }
        forests.push(forest);
    }
    Ok((forests, fallbacks))
}

/// Segment the vocabulary against an already-learned morpheme vocabulary,
/// with `rounds` refinement rounds.
pub fn run_segmentation(
    vocab: &Vocabulary,
    mv: &MorphemeVocab,
    config: &PipelineConfig,
) -> Result<PipelineOutput> {
    config.validate()?;
    let mut mv = mv.clone();
    let (mut forests, mut fallbacks) = segment_all(vocab, &mv, true)?;
    for round in 1..=config.rounds {
        mv = refine_counts(&forests, &mv, config.prune_below);
        let training = round < config.rounds;
        let (f, fb) = segment_all(vocab, &mv, training)?;
        forests = f;
        fallbacks = fb;
    }
    Ok(PipelineOutput { morphemes: mv, forests, fallback_words: fallbacks })
}

/// Learn the morpheme vocabulary from entropy boundaries, then run
/// [`run_segmentation`].
pub fn run_pipeline(vocab: &Vocabulary, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let mv = mine_morphemes(vocab, config)?;
    run_segmentation(vocab, &mv, config)
}

/// The mining phase alone: tries, entropy boundaries, roots, filtering.
pub fn mine_morphemes(vocab: &Vocabulary, config: &PipelineConfig) -> Result<MorphemeVocab> {
    config.validate()?;
    let opts = TrieOptions {
        end_of_word_event: config.end_of_word_event,
        token_weighted: config.token_weighted,
    };
    let forward = EntropyTrie::build(vocab, Direction::Forward, opts);
    let reversed = EntropyTrie::build(vocab, Direction::Reversed, opts);
    let raw = generate_candidates(vocab, &forward, &reversed)?;
    let (mv, _emptied) = finalize(
        &raw,
        vocab,
        config.min_support,
        config.min_root_len,
        config.min_affix_len,
        config.token_weighted,
    );
    Ok(mv)
}

/// Flat output: `word<TAB>m1 m2 ...` using top-level morphemes.
pub fn render_flat(forests: &[MorphForest]) -> String {
    let mut out = String::new();
    for f in forests {
        out.push_str(f.word());
        out.push('\t');
        out.push_str(&f.top_level().join(" "));
        out.push('\n');
    }
    out
}

fn render_node(node: &MorphNode, out: &mut String) {
    if node.class == MorphClass::Filler {
        out.push_str(&node.text);
        return;
    }
    out.push('(');
    if node.children.is_empty() {
        out.push_str(&node.text);
    } else {
        for (i, c) in node.children.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            render_node(c, out);
        }
    }
    out.push(')');
}

/// Hierarchical output: `word<TAB>((spati) o (temporal))`; fillers bare.
pub fn render_hierarchical(forests: &[MorphForest]) -> String {
    let mut out = String::new();
    for f in forests {
        out.push_str(f.word());
        out.push('\t');
        render_node(&f.root, &mut out);
        out.push('\n');
    }
    out
}

/// Parse one bracketed tree back into a [`MorphForest`]; node texts are
/// reconstructed by concatenating leaves.
pub fn parse_hierarchical(s: &str) -> Result<MorphForest> {
    let chars: Vec<char> = s.trim().chars().collect();
    let mut pos = 0usize;
    let root = parse_node(&chars, &mut pos).ok_or_else(|| MorphError::Parse {
        line: 1,
        msg: format!("malformed bracketed segmentation {s:?}"),
    })?;
    if pos != chars.len() {
        return Err(MorphError::Parse {
            line: 1,
            msg: format!("trailing input after bracketed segmentation {s:?}"),
        });
    }
    Ok(MorphForest { root })
}

fn parse_node(chars: &[char], pos: &mut usize) -> Option<MorphNode> {
    if *pos >= chars.len() {
        return None;
    }
    if chars[*pos] != '(' {
        // bare filler token: runs until whitespace or a paren
        let start = *pos;
        while *pos < chars.len() && !"() \t".contains(chars[*pos]) {
            *pos += 1;
        }
        if *pos == start {
            return None;
        }
        let text: String = chars[start..*pos].iter().collect();
        return Some(MorphNode::leaf(text, MorphClass::Filler));
    }
    *pos += 1; // '('
    let mut children = Vec::new();
    let mut literal = String::new();
    loop {
        if *pos >= chars.len() {
            return None;
        }
        match chars[*pos] {
            ')' => {
                *pos += 1;
                break;
            }
            ' ' | '\t' => {
                *pos += 1;
            }
            _ => {
                let child = parse_node(chars, pos)?;
                if child.class == MorphClass::Filler && children.is_empty() && literal.is_empty() {
                    // might be a pure leaf like (spati): defer the decision
                    literal = child.text.clone();
                    children.push(child);
                } else {
                    children.push(child);
                }
            }
        }
    }
    if children.len() == 1 && !literal.is_empty() {
        return Some(MorphNode::leaf(literal, MorphClass::Root));
    }
    let text: String = {
        let mut t = String::new();
        for c in &children {
            t.push_str(&c.text);
        }
        t
    };
    Some(MorphNode { text, class: MorphClass::Root, children })
}

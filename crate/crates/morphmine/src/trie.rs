//! Prefix trees with per-node transition entropy.
//!
//! A forward trie holds every prefix of the vocabulary; a reversed trie holds
//! every prefix of the reversed words, which makes suffixes addressable as
//! prefixes. Entropy is the Shannon entropy (bits) of the next-character
//! distribution at a node, with the end-of-word event optionally counted as
//! one more outcome.

use std::collections::HashMap;

use crate::error::{MorphError, Result};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reversed,
}

#[derive(Debug, Clone, Copy)]
pub struct TrieOptions {
    /// Count the end of a word as an explicit continuation outcome.
    pub end_of_word_event: bool,
    /// Weight words by their corpus count instead of once per type.
    pub token_weighted: bool,
}

impl Default for TrieOptions {
    fn default() -> Self {
        TrieOptions { end_of_word_event: true, token_weighted: false }
    }
}

#[derive(Debug, Clone)]
struct Node {
    children: HashMap<char, usize>,
    count: u64,
    terminal: u64,
    entropy_bits: f64,
}

impl Node {
    fn new() -> Self {
        Node { children: HashMap::new(), count: 0, terminal: 0, entropy_bits: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct EntropyTrie {
    nodes: Vec<Node>,
    direction: Direction,
    options: TrieOptions,
}

const ROOT: usize = 0;

impl EntropyTrie {
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn options(&self) -> TrieOptions {
        self.options
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Build the trie and populate counts and entropies in one insertion pass
    /// plus one scoring pass over the nodes.
    pub fn build(vocab: &Vocabulary, direction: Direction, options: TrieOptions) -> EntropyTrie {
        let mut trie =
            EntropyTrie { nodes: vec![Node::new()], direction, options };
        for (word, count) in vocab.entries() {
            let weight = if options.token_weighted { *count } else { 1 };
            let chars: Vec<char> = match direction {
                Direction::Forward => word.chars().collect(),
                Direction::Reversed => word.chars().rev().collect(),
            };
            let mut cur = ROOT;
            trie.nodes[ROOT].count += weight;
            for ch in chars {
                let next = match trie.nodes[cur].children.get(&ch) {
                    Some(&n) => n,
                    None => {
                        let n = trie.nodes.len();
                        trie.nodes.push(Node::new());
                        trie.nodes[cur].children.insert(ch, n);
                        n
                    }
                };
                trie.nodes[next].count += weight;
                cur = next;
            }
            trie.nodes[cur].terminal += weight;
        }
        for i in 0..trie.nodes.len() {
            trie.nodes[i].entropy_bits = trie.node_entropy(i);
        }
        trie
    }

    fn node_entropy(&self, idx: usize) -> f64 {
        let node = &self.nodes[idx];
        let total = node.count as f64;
        if total == 0.0 {
            return 0.0;
        }
        let mut bits = 0.0;
        let mut events = 0usize;
        for &child in node.children.values() {
            let c = self.nodes[child].count;
            if c > 0 {
                let p = c as f64 / total;
                bits -= p * p.log2();
                events += 1;
            }
        }
        if self.options.end_of_word_event && node.terminal > 0 {
            let p = node.terminal as f64 / total;
            bits -= p * p.log2();
            events += 1;
        }
        if events <= 1 {
            // a degenerate distribution is exactly zero, avoid -0.0 / rounding dust
            return 0.0;
        }
        bits
    }

    fn walk(&self, prefix: &str) -> Option<usize> {
        let mut cur = ROOT;
        for ch in prefix.chars() {
            cur = *self.nodes[cur].children.get(&ch)?;
        }
        Some(cur)
    }

    /// Entropy in bits of the next-transition distribution after `prefix`.
    /// `prefix` is read in the trie's direction (already-reversed for a
    /// reversed trie).
    pub fn transition_entropy(&self, prefix: &str) -> Result<f64> {
        let idx = self
            .walk(prefix)
            .ok_or_else(|| MorphError::UnknownPrefix(prefix.to_owned()))?;
        Ok(self.nodes[idx].entropy_bits)
    }

    /// f(prefix): the aggregated weight passing through the prefix node.
    pub fn prefix_count(&self, prefix: &str) -> Option<u64> {
        self.walk(prefix).map(|i| self.nodes[i].count)
    }

    /// Entropy at every prefix length of `word`: index i holds H of the
    /// length-i prefix, i = 0 (root) through |word| (the full word).
    /// `word` is read in the trie's direction.
    pub fn entropy_profile(&self, word: &str) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(word.chars().count() + 1);
        let mut cur = ROOT;
        out.push(self.nodes[ROOT].entropy_bits);
        for ch in word.chars() {
            cur = match self.nodes[cur].children.get(&ch) {
                Some(&n) => n,
                None => return Err(MorphError::UnknownWord(word.to_owned())),
            };
            out.push(self.nodes[cur].entropy_bits);
        }
        Ok(out)
    }

    /// Debug dump: `prefix<TAB>count<TAB>entropy_bits`, depth-first in
    /// character order. Not a stability contract.
    pub fn dump_tsv(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<(usize, String)> = vec![(ROOT, String::new())];
        while let Some((idx, prefix)) = stack.pop() {
            let node = &self.nodes[idx];
            out.push_str(&format!("{prefix}\t{}\t{:.6}\n", node.count, node.entropy_bits));
            let mut kids: Vec<(&char, &usize)> = node.children.iter().collect();
            kids.sort_by(|a, b| b.0.cmp(a.0));
            for (ch, &n) in kids {
                let mut p = prefix.clone();
                p.push(*ch);
                stack.push((n, p));
            }
        }
        out
    }

    /// Probabilities of all transition events at `prefix` (children plus the
    /// end-of-word event when enabled).
    pub fn transition_probs(&self, prefix: &str) -> Result<Vec<f64>> {
        let idx = self
            .walk(prefix)
            .ok_or_else(|| MorphError::UnknownPrefix(prefix.to_owned()))?;
        let node = &self.nodes[idx];
        let total = node.count as f64;
        let mut probs: Vec<f64> = node
            .children
            .values()
            .map(|&c| self.nodes[c].count as f64 / total)
            .collect();
        if self.options.end_of_word_event && node.terminal > 0 {
            probs.push(node.terminal as f64 / total);
        }
        Ok(probs)
    }
}

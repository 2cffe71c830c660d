//! Grammar construction by iterated most-frequent-pair replacement.
//!
//! The builder repeatedly replaces the most frequent adjacent pair of symbols
//! with a fresh rule until no pair occurs twice, then folds the remaining
//! sequence into a root with pairwise rounds (so the top of the grammar stays
//! shallow). Any valid CNF grammar works with the indexes; this builder is a
//! convenience for turning raw text into one.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use crate::error::GrammarError;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};

/// Build a CNF grammar whose root expands to exactly `text`.
///
/// Symbols must lie in `1..=sigma`. Replacement is deterministic: ties on
/// pair frequency break toward the numerically smallest pair, and occurrences
/// are replaced left to right without overlap.
pub fn build_grammar(text: &[Symbol], sigma: u32) -> Result<Grammar, GrammarError> {
    if text.is_empty() {
        return Err(GrammarError::EmptyInput);
    }
    for &Symbol(c) in text {
        if c == 0 || c > sigma {
            return Err(GrammarError::SymbolOutOfRange { rule: 0, symbol: c, sigma });
        }
    }

    // Terminal rules for the distinct symbols present, in symbol order.
    let mut present: Vec<u32> = text.iter().map(|s| s.0).collect();
    present.sort_unstable();
    present.dedup();
    let mut kinds: Vec<RuleKind> = Vec::new();
    let mut term_rule = HashMap::new();
    for c in present {
        term_rule.insert(c, kinds.len() as u32);
        kinds.push(RuleKind::Term(Symbol(c)));
    }

    if text.len() == 1 {
        return Grammar::new(kinds, RuleId(0), sigma);
    }

    let mut rp = Replacer::new(text.iter().map(|s| term_rule[&s.0]).collect());
    loop {
        let Some(pair) = rp.pop_frequent_pair() else { break };
        let fresh = kinds.len() as u32;
        // Overlapping self-pairs ("aaa") can leave only one greedy
        // replacement even when two occurrences were counted.
        let replaced = rp.replace_all(pair, fresh);
        debug_assert!(replaced >= 1);
        kinds.push(RuleKind::Pair(RuleId(pair.0), RuleId(pair.1)));
    }

    // Fold the remaining sequence pairwise until one symbol is left.
    let mut level = rp.live_symbols();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2 + 1);
        let mut it = level.chunks_exact(2);
        for ch in &mut it {
            kinds.push(RuleKind::Pair(RuleId(ch[0]), RuleId(ch[1])));
            next.push((kinds.len() - 1) as u32);
        }
        next.extend_from_slice(it.remainder());
        level = next;
    }
    let root = RuleId(level[0]);
    Grammar::new(kinds, root, sigma)
}

/// Doubly linked sequence with pair occurrence sets and a lazy max-heap.
struct Replacer {
    sym: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    alive: Vec<bool>,
    occ: HashMap<(u32, u32), BTreeSet<u32>>,
    heap: BinaryHeap<(usize, Reverse<(u32, u32)>)>,
    head: u32,
}

const NIL: u32 = u32::MAX;

impl Replacer {
    fn new(seq: Vec<u32>) -> Self {
        let n = seq.len();
        let mut rp = Replacer {
            sym: seq,
            next: (1..=n as u32).map(|i| if i as usize == n { NIL } else { i }).collect(),
            prev: (0..n as u32).map(|i| if i == 0 { NIL } else { i - 1 }).collect(),
            alive: vec![true; n],
            occ: HashMap::new(),
            heap: BinaryHeap::new(),
            head: 0,
        };
        for i in 0..n.saturating_sub(1) as u32 {
            let p = (rp.sym[i as usize], rp.sym[i as usize + 1]);
            rp.add_occ(p, i);
        }
        rp
    }

    fn add_occ(&mut self, pair: (u32, u32), pos: u32) {
        let set = self.occ.entry(pair).or_default();
        set.insert(pos);
        let count = set.len();
        if count >= 2 {
            self.heap.push((count, Reverse(pair)));
        }
    }

    fn remove_occ(&mut self, pair: (u32, u32), pos: u32) {
        if let Some(set) = self.occ.get_mut(&pair) {
            set.remove(&pos);
            if set.is_empty() {
                self.occ.remove(&pair);
            }
        }
    }

    /// Most frequent pair with count >= 2, ties toward the smallest pair.
    /// Stale heap entries are re-checked against the live occurrence sets.
    fn pop_frequent_pair(&mut self) -> Option<(u32, u32)> {
        while let Some((claimed, Reverse(pair))) = self.heap.pop() {
            let actual = self.occ.get(&pair).map_or(0, |s| s.len());
            if actual < 2 {
                continue;
            }
            if actual == claimed {
                return Some(pair);
            }
            self.heap.push((actual, Reverse(pair)));
        }
        None
    }

    /// Replace every live, non-overlapping occurrence of `pair` (left to
    /// right) with `fresh`. Returns the number of replacements.
    fn replace_all(&mut self, pair: (u32, u32), fresh: u32) -> usize {
        let Some(set) = self.occ.remove(&pair) else { return 0 };
        let (a, b) = pair;
        let mut replaced = 0;
        for pos in set {
            let i = pos as usize;
            if !self.alive[i] || self.sym[i] != a {
                continue;
            }
            let q = self.next[i];
            if q == NIL || !self.alive[q as usize] || self.sym[q as usize] != b {
                continue;
            }
            let q = q as usize;
            let l = self.prev[i];
            let r = self.next[q];
            if l != NIL {
                self.remove_occ((self.sym[l as usize], a), l);
            }
            if r != NIL {
                self.remove_occ((b, self.sym[r as usize]), q as u32);
            }
            // unlink q and substitute the fresh symbol at i
            self.alive[q] = false;
            self.next[i] = r;
            if r != NIL {
                self.prev[r as usize] = pos;
            }
            self.sym[i] = fresh;
            if l != NIL {
                self.add_occ((self.sym[l as usize], fresh), l);
            }
            if r != NIL {
                self.add_occ((fresh, self.sym[r as usize]), pos);
            }
            replaced += 1;
        }
        replaced
    }

    fn live_symbols(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut i = self.head;
        debug_assert!(self.alive[self.head as usize]);
        while i != NIL {
            out.push(self.sym[i as usize]);
            i = self.next[i as usize];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| Symbol((b - b'a' + 1) as u32)).collect()
    }

    fn roundtrip(text: &[Symbol], sigma: u32) -> Grammar {
        let g = build_grammar(text, sigma).unwrap();
        assert!(g.validate().is_ok());
        assert_eq!(g.expand_naive(g.root()), text);
        g
    }

    #[test]
    fn abab_uses_few_pair_rules() {
        let g = roundtrip(&syms("abab"), 2);
        assert!(g.num_pair_rules() <= 4, "got {} pair rules", g.num_pair_rules());
    }

    #[test]
    fn single_symbol_text() {
        let g = roundtrip(&syms("a"), 1);
        assert_eq!(g.num_rules(), 1);
        assert_eq!(g.rule(g.root()).kind, RuleKind::Term(Symbol(1)));
    }

    #[test]
    fn unary_run_compresses_logarithmically() {
        let g = roundtrip(&syms("aaaaaaaa"), 1);
        // log-many rules for a run of 2^3 symbols (1 terminal + ~3 pairs)
        assert!(g.num_rules() <= 6, "got {} rules", g.num_rules());
    }

    #[test]
    fn abracadabra_roundtrips_and_is_pruned() {
        let g = roundtrip(&syms("abracadabra"), 26);
        let p = g.prune();
        assert_eq!(p.num_rules(), g.num_rules(), "builder emits only reachable rules");
    }

    #[test]
    fn empty_text_rejected() {
        assert_eq!(build_grammar(&[], 4), Err(GrammarError::EmptyInput));
    }

    #[test]
    fn overlapping_runs_replace_greedily() {
        for n in 1..40 {
            let text: Vec<Symbol> = vec![Symbol(1); n];
            roundtrip(&text, 1);
        }
    }

    #[test]
    fn random_texts_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for sigma in [2u32, 4, 26] {
            for n in [1usize, 2, 3, 10, 100, 1000] {
                let text: Vec<Symbol> =
                    (0..n).map(|_| Symbol(rng.random_range(1..=sigma))).collect();
                roundtrip(&text, sigma);
            }
        }
    }
}

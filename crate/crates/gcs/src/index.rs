//! One query interface over both engines.

use crate::access::{packed_symbols, AccessIndex};
use crate::balanced::BalancedIndex;
use crate::bitpack::PackedString;
use crate::counters::Counters;
use crate::error::{GrammarError, QueryError};
use crate::grammar::{Grammar, Symbol};
use crate::heavypath::HeavyForest;
use crate::rankselect::RankSelectIndex;
use crate::repair::build_grammar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Unbalanced,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexOptions {
    pub engine: Engine,
    pub epsilon: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { engine: Engine::Unbalanced, epsilon: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum EngineIndex {
    Unbalanced { forest: HeavyForest, access: AccessIndex, rankselect: RankSelectIndex },
    Balanced { index: BalancedIndex },
}

/// A grammar with whichever engine structures answer its queries.
#[derive(Debug, Clone, PartialEq)]
pub struct TextIndex {
    pub(crate) grammar: Grammar,
    pub(crate) engine: EngineIndex,
}

/// Build statistics reported by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexStats {
    pub n_rules: usize,
    pub n_pairs: usize,
    pub text_len: u64,
    pub sigma: u32,
    pub height: u32,
}

impl TextIndex {
    /// Compress `text` with the built-in builder and index it.
    pub fn build_from_text(
        text: &[Symbol],
        sigma: u32,
        opts: IndexOptions,
    ) -> Result<Self, GrammarError> {
        Self::from_grammar(build_grammar(text, sigma)?, opts)
    }

    /// Index an existing grammar (validated first).
    pub fn from_grammar(g: Grammar, opts: IndexOptions) -> Result<Self, GrammarError> {
        g.validate()?;
        let engine = match opts.engine {
            Engine::Unbalanced => {
                let forest = HeavyForest::build(&g);
                let access = AccessIndex::build(&g, &forest);
                let rankselect = RankSelectIndex::build(&g, &forest);
                EngineIndex::Unbalanced { forest, access, rankselect }
            }
            Engine::Balanced => {
                EngineIndex::Balanced { index: BalancedIndex::build(&g, opts.epsilon) }
            }
        };
        Ok(TextIndex { grammar: g, engine })
    }

    pub fn engine(&self) -> Engine {
        match self.engine {
            EngineIndex::Unbalanced { .. } => Engine::Unbalanced,
            EngineIndex::Balanced { .. } => Engine::Balanced,
        }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn text_len(&self) -> u64 {
        self.grammar.text_len()
    }

    pub fn sigma(&self) -> u32 {
        self.grammar.sigma()
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            n_rules: self.grammar.num_rules(),
            n_pairs: self.grammar.num_pair_rules(),
            text_len: self.grammar.text_len(),
            sigma: self.grammar.sigma(),
            height: self.grammar.height(),
        }
    }

    /// `S[i ..= j]` as symbols.
    pub fn access(&self, i: u64, j: u64) -> Result<Vec<Symbol>, QueryError> {
        Ok(packed_symbols(&self.access_packed(i, j, &mut Counters::default())?))
    }

    /// `S[i ..= j]` in packed form, instrumented.
    pub fn access_packed(
        &self,
        i: u64,
        j: u64,
        counters: &mut Counters,
    ) -> Result<PackedString, QueryError> {
        match &self.engine {
            EngineIndex::Unbalanced { forest, access, .. } => {
                access.extract_counted(&self.grammar, forest, i, j, counters)
            }
            EngineIndex::Balanced { index } => index.extract(&self.grammar, i, j, counters),
        }
    }

    pub fn access_char(&self, i: u64) -> Result<Symbol, QueryError> {
        self.access_char_counted(i, &mut Counters::default())
    }

    pub fn access_char_counted(
        &self,
        i: u64,
        counters: &mut Counters,
    ) -> Result<Symbol, QueryError> {
        match &self.engine {
            EngineIndex::Unbalanced { forest, access, .. } => {
                access.access_char(&self.grammar, forest, i, counters)
            }
            EngineIndex::Balanced { index } => index.access_char(&self.grammar, i, counters),
        }
    }

    /// Occurrences of `c` among the first `i` symbols.
    pub fn rank(&self, c: Symbol, i: u64) -> Result<u64, QueryError> {
        self.rank_counted(c, i, &mut Counters::default())
    }

    pub fn rank_counted(
        &self,
        c: Symbol,
        i: u64,
        counters: &mut Counters,
    ) -> Result<u64, QueryError> {
        match &self.engine {
            EngineIndex::Unbalanced { forest, rankselect, .. } => {
                rankselect.ranks.rank_counted(&self.grammar, forest, c, i, counters)
            }
            EngineIndex::Balanced { index } => index.rank(&self.grammar, c, i, counters),
        }
    }

    /// Position of the `k`-th occurrence of `c`.
    pub fn select(&self, c: Symbol, k: u64) -> Result<u64, QueryError> {
        self.select_counted(c, k, &mut Counters::default())
    }

    pub fn select_counted(
        &self,
        c: Symbol,
        k: u64,
        counters: &mut Counters,
    ) -> Result<u64, QueryError> {
        match &self.engine {
            EngineIndex::Unbalanced { rankselect, .. } => {
                rankselect.selects.select_counted(c, k, counters)
            }
            EngineIndex::Balanced { index } => index.select(&self.grammar, c, k, counters),
        }
    }

    /// The heavy forest and access structures, when this is the heavy-path
    /// engine (instrumented sweeps use the parts directly).
    pub fn unbalanced_parts(&self) -> Option<(&HeavyForest, &AccessIndex)> {
        match &self.engine {
            EngineIndex::Unbalanced { forest, access, .. } => Some((forest, access)),
            EngineIndex::Balanced { .. } => None,
        }
    }

    /// Decompress the whole string.
    pub fn decompress(&self) -> Vec<Symbol> {
        match &self.engine {
            EngineIndex::Unbalanced { access, .. } => {
                packed_symbols(&access.decompress_rule(&self.grammar, self.grammar.root()))
            }
            EngineIndex::Balanced { .. } => {
                let mut c = Counters::default();
                let n = self.text_len();
                packed_symbols(&self.access_packed(1, n, &mut c).expect("full range is valid"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{naive_rank, naive_select};

    #[test]
    fn both_engines_agree_with_each_other_and_the_oracle() {
        let text = crate::corpus::versioned_text(4, 1500, 10, 3);
        let n = text.len() as u64;
        let unb = TextIndex::build_from_text(&text, 4, IndexOptions::default()).unwrap();
        let bal = TextIndex::build_from_text(
            &text,
            4,
            IndexOptions { engine: Engine::Balanced, epsilon: 0.5 },
        )
        .unwrap();
        assert_eq!(unb.engine(), Engine::Unbalanced);
        assert_eq!(bal.engine(), Engine::Balanced);
        for ix in [&unb, &bal] {
            assert_eq!(ix.decompress(), text);
            for i in (1..=n).step_by(97) {
                for j in (i..=n).step_by(131) {
                    assert_eq!(ix.access(i, j).unwrap(), &text[i as usize - 1..j as usize]);
                }
                for c in 1..=4u32 {
                    assert_eq!(ix.rank(Symbol(c), i).unwrap(), naive_rank(&text, Symbol(c), i));
                }
            }
            for c in 1..=4u32 {
                let total = naive_rank(&text, Symbol(c), n);
                for k in (1..=total).step_by(41) {
                    assert_eq!(
                        ix.select(Symbol(c), k).unwrap(),
                        naive_select(&text, Symbol(c), k).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn single_symbol_text_works_on_both_engines() {
        for engine in [Engine::Unbalanced, Engine::Balanced] {
            let ix = TextIndex::build_from_text(
                &[Symbol(1)],
                1,
                IndexOptions { engine, epsilon: 0.5 },
            )
            .unwrap();
            assert_eq!(ix.text_len(), 1);
            assert_eq!(ix.access(1, 1).unwrap(), vec![Symbol(1)]);
            assert_eq!(ix.rank(Symbol(1), 1).unwrap(), 1);
            assert_eq!(ix.select(Symbol(1), 1).unwrap(), 1);
        }
    }
}

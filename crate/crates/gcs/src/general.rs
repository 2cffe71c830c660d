//! General (non-CNF) grammars and their normalization into CNF.

use crate::error::GrammarError;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};

/// One element of a general rule's right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralSym {
    Term(Symbol),
    /// Index of another general rule.
    Rule(usize),
}

/// A grammar whose rules may have right-hand sides of arbitrary length.
/// Rules may reference each other in any order as long as the reference
/// graph is acyclic.
#[derive(Debug, Clone)]
pub struct GeneralGrammar {
    pub rules: Vec<Vec<GeneralSym>>,
    pub root: usize,
    pub sigma: u32,
}

impl GeneralGrammar {
    /// Expansion by direct substitution; oracle for normalization tests.
    pub fn expand_naive(&self, rule: usize) -> Vec<Symbol> {
        let mut out = Vec::new();
        let mut stack = vec![GeneralSym::Rule(rule)];
        while let Some(s) = stack.pop() {
            match s {
                GeneralSym::Term(c) => out.push(c),
                GeneralSym::Rule(r) => {
                    for e in self.rules[r].iter().rev() {
                        stack.push(*e);
                    }
                }
            }
        }
        out
    }

    fn topo_order(&self) -> Result<Vec<usize>, GrammarError> {
        let n = self.rules.len();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 in progress, 2 done
        let mut order = Vec::with_capacity(n);
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            // iterative DFS with an explicit phase marker
            let mut stack = vec![(start, false)];
            while let Some((r, expanded)) = stack.pop() {
                if expanded {
                    state[r] = 2;
                    order.push(r);
                    continue;
                }
                if state[r] == 2 {
                    continue;
                }
                if state[r] == 1 {
                    return Err(GrammarError::CyclicRule(r as u32));
                }
                state[r] = 1;
                stack.push((r, true));
                for e in &self.rules[r] {
                    if let GeneralSym::Rule(c) = e {
                        if *c >= n {
                            return Err(GrammarError::DanglingReference(r as u32));
                        }
                        match state[*c] {
                            0 => stack.push((*c, false)),
                            1 => return Err(GrammarError::CyclicRule(*c as u32)),
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok(order)
    }

    /// Binarize into CNF. Unit rules are collapsed; right-hand sides of
    /// length `k >= 2` become `k - 1` pair rules chained through the tail
    /// (`X -> A B C` becomes `X -> A X'`, `X' -> B C`). The output expands
    /// to exactly the same string, with total size at most twice the sum of
    /// input right-hand-side lengths.
    pub fn cnf_normalize(&self) -> Result<Grammar, GrammarError> {
        let order = self.topo_order()?;
        let mut kinds: Vec<RuleKind> = Vec::new();
        let mut term_id = std::collections::HashMap::new();
        let mut cnf_of = vec![u32::MAX; self.rules.len()];
        let mut term = |c: Symbol, kinds: &mut Vec<RuleKind>| -> u32 {
            *term_id.entry(c).or_insert_with(|| {
                kinds.push(RuleKind::Term(c));
                (kinds.len() - 1) as u32
            })
        };
        for r in order {
            let rhs = &self.rules[r];
            if rhs.is_empty() {
                return Err(GrammarError::NotCnf(r as u32));
            }
            let ids: Vec<u32> = rhs
                .iter()
                .map(|e| match e {
                    GeneralSym::Term(c) => term(*c, &mut kinds),
                    GeneralSym::Rule(child) => cnf_of[*child],
                })
                .collect();
            let mut acc = *ids.last().unwrap();
            for &id in ids[..ids.len() - 1].iter().rev() {
                kinds.push(RuleKind::Pair(RuleId(id), RuleId(acc)));
                acc = (kinds.len() - 1) as u32;
            }
            cnf_of[r] = acc;
        }
        Grammar::new(kinds, RuleId(cnf_of[self.root]), self.sigma).map(|g| g.prune())
    }
}

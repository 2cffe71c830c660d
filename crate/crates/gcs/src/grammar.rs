//! CNF grammar representation: validation, naive expansion, pruning, and the
//! line-oriented `GCS1` interchange format.
//!
//! A grammar is a straight-line program: every rule is either a terminal rule
//! generating one symbol or a pair of two earlier rules. Rule order is
//! topological (children strictly before parents), which keeps every
//! construction pass single-sweep and free of recursion on grammar height.

use std::fmt::Write as _;

use crate::error::GrammarError;

/// Terminal alphabet code in `1..=sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

/// Index into [`Grammar::rules`]. Terminal and pair rules share one id space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub u32);

impl RuleId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Term(Symbol),
    Pair(RuleId, RuleId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub kind: RuleKind,
    /// Length of the string this rule generates.
    pub exp_len: u64,
}

/// A CNF grammar generating exactly one string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    rules: Vec<Rule>,
    root: RuleId,
    sigma: u32,
}

impl Grammar {
    /// Build from rule kinds, computing expansion lengths, and validate.
    pub fn new(kinds: Vec<RuleKind>, root: RuleId, sigma: u32) -> Result<Self, GrammarError> {
        if kinds.is_empty() {
            return Err(GrammarError::EmptyInput);
        }
        let n = kinds.len();
        let mut rules: Vec<Rule> = Vec::with_capacity(n);
        for (i, kind) in kinds.into_iter().enumerate() {
            let exp_len = match kind {
                RuleKind::Term(_) => 1,
                RuleKind::Pair(l, r) => {
                    let get = |id: RuleId| -> Result<u64, GrammarError> {
                        if id.idx() >= n {
                            Err(GrammarError::DanglingReference(i as u32))
                        } else if id.idx() >= i {
                            Err(GrammarError::CyclicRule(i as u32))
                        } else {
                            Ok(rules[id.idx()].exp_len)
                        }
                    };
                    get(l)?.checked_add(get(r)?).expect("expansion length overflow")
                }
            };
            rules.push(Rule { kind, exp_len });
        }
        let g = Grammar { rules, root, sigma };
        g.validate()?;
        Ok(g)
    }

    /// Assemble without any checks. Intended for tests and deserialization;
    /// call [`Grammar::validate`] before querying untrusted input.
    pub fn from_parts(rules: Vec<Rule>, root: RuleId, sigma: u32) -> Self {
        Grammar { rules, root, sigma }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.idx()]
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn num_pair_rules(&self) -> usize {
        self.rules.iter().filter(|r| matches!(r.kind, RuleKind::Pair(..))).count()
    }

    pub fn root(&self) -> RuleId {
        self.root
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn exp_len(&self, id: RuleId) -> u64 {
        self.rules[id.idx()].exp_len
    }

    /// Length of the generated string.
    pub fn text_len(&self) -> u64 {
        self.exp_len(self.root)
    }

    /// Check topological order, CNF shape, expansion-length consistency and
    /// id resolution; returns the first violation found. Unreachable rules
    /// are permitted (see [`Grammar::prune`]).
    pub fn validate(&self) -> Result<(), GrammarError> {
        if self.rules.is_empty() {
            return Err(GrammarError::EmptyInput);
        }
        if self.sigma == 0 {
            return Err(GrammarError::SymbolOutOfRange { rule: 0, symbol: 0, sigma: 0 });
        }
        let n = self.rules.len();
        if self.root.idx() >= n {
            return Err(GrammarError::DanglingReference(self.root.0));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            match rule.kind {
                RuleKind::Term(Symbol(c)) => {
                    if c == 0 || c > self.sigma {
                        return Err(GrammarError::SymbolOutOfRange {
                            rule: i as u32,
                            symbol: c,
                            sigma: self.sigma,
                        });
                    }
                    if rule.exp_len != 1 {
                        return Err(GrammarError::LengthMismatch(i as u32));
                    }
                }
                RuleKind::Pair(l, r) => {
                    for id in [l, r] {
                        if id.idx() >= n {
                            return Err(GrammarError::DanglingReference(i as u32));
                        }
                        if id.idx() >= i {
                            return Err(GrammarError::CyclicRule(i as u32));
                        }
                    }
                    let want = self.rules[l.idx()]
                        .exp_len
                        .checked_add(self.rules[r.idx()].exp_len)
                        .ok_or(GrammarError::LengthMismatch(i as u32))?;
                    if rule.exp_len != want {
                        return Err(GrammarError::LengthMismatch(i as u32));
                    }
                }
            }
        }
        Ok(())
    }

    /// Full expansion of `id` by iterative substitution. This is the oracle
    /// the rest of the crate is tested against; it never touches the indexes.
    pub fn expand_naive(&self, id: RuleId) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.exp_len(id) as usize);
        let mut stack = vec![id];
        while let Some(r) = stack.pop() {
            match self.rules[r.idx()].kind {
                RuleKind::Term(c) => out.push(c),
                RuleKind::Pair(l, rt) => {
                    stack.push(rt);
                    stack.push(l);
                }
            }
        }
        out
    }

    /// Rules reachable from the root, as a bitmap.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.rules.len()];
        let mut stack = vec![self.root];
        seen[self.root.idx()] = true;
        while let Some(r) = stack.pop() {
            if let RuleKind::Pair(l, rt) = self.rules[r.idx()].kind {
                for c in [l, rt] {
                    if !seen[c.idx()] {
                        seen[c.idx()] = true;
                        stack.push(c);
                    }
                }
            }
        }
        seen
    }

    /// Drop rules unreachable from the root, remapping ids and preserving
    /// relative (topological) order. The expansion is unchanged.
    pub fn prune(&self) -> Grammar {
        let seen = self.reachable();
        let mut remap = vec![u32::MAX; self.rules.len()];
        let mut rules = Vec::with_capacity(self.rules.len());
        for (i, rule) in self.rules.iter().enumerate() {
            if !seen[i] {
                continue;
            }
            remap[i] = rules.len() as u32;
            let kind = match rule.kind {
                RuleKind::Term(c) => RuleKind::Term(c),
                RuleKind::Pair(l, r) => {
                    RuleKind::Pair(RuleId(remap[l.idx()]), RuleId(remap[r.idx()]))
                }
            };
            rules.push(Rule { kind, exp_len: rule.exp_len });
        }
        Grammar { rules, root: RuleId(remap[self.root.idx()]), sigma: self.sigma }
    }

    /// Maximal number of edges from the root down to a terminal rule.
    pub fn height(&self) -> u32 {
        let mut h = vec![0u32; self.rules.len()];
        for (i, rule) in self.rules.iter().enumerate() {
            if let RuleKind::Pair(l, r) = rule.kind {
                h[i] = 1 + h[l.idx()].max(h[r.idx()]);
            }
        }
        h[self.root.idx()]
    }

    /// Serialize to the `GCS1` text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "GCS1 {} {} {}", self.sigma, self.rules.len(), self.root.0);
        for (i, rule) in self.rules.iter().enumerate() {
            match rule.kind {
                RuleKind::Term(Symbol(c)) => {
                    let _ = writeln!(s, "T {i} {c}");
                }
                RuleKind::Pair(l, r) => {
                    let _ = writeln!(s, "P {i} {} {}", l.0, r.0);
                }
            }
        }
        s
    }

    /// Parse the `GCS1` text format and validate the result.
    pub fn from_text(input: &str) -> Result<Self, GrammarFileError> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or(GrammarFileError::Empty)?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 4 || head[0] != "GCS1" {
            return Err(GrammarFileError::BadHeader(ln + 1));
        }
        let parse = |s: &str, ln: usize| -> Result<u64, GrammarFileError> {
            s.parse().map_err(|_| GrammarFileError::BadLine(ln + 1))
        };
        let sigma = parse(head[1], ln)? as u32;
        let nrules = parse(head[2], ln)? as usize;
        let root = parse(head[3], ln)? as u32;
        let mut kinds: Vec<Option<RuleKind>> = vec![None; nrules];
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let kind = match f.first() {
                Some(&"T") if f.len() == 3 => {
                    RuleKind::Term(Symbol(parse(f[2], ln)? as u32))
                }
                Some(&"P") if f.len() == 4 => RuleKind::Pair(
                    RuleId(parse(f[2], ln)? as u32),
                    RuleId(parse(f[3], ln)? as u32),
                ),
                _ => return Err(GrammarFileError::BadLine(ln + 1)),
            };
            let id = parse(f[1], ln)? as usize;
            if id >= nrules || kinds[id].is_some() {
                return Err(GrammarFileError::BadLine(ln + 1));
            }
            kinds[id] = Some(kind);
        }
        let mut flat = Vec::with_capacity(nrules);
        for (i, k) in kinds.into_iter().enumerate() {
            flat.push(k.ok_or(GrammarFileError::MissingRule(i as u32))?);
        }
        Grammar::new(flat, RuleId(root), sigma).map_err(GrammarFileError::Invalid)
    }
}

/// Errors from parsing the `GCS1` text format.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GrammarFileError {
    #[error("empty grammar file")]
    Empty,
    #[error("line 1: malformed header (expected `GCS1 <sigma> <nrules> <root>`)")]
    BadHeader(usize),
    #[error("line {0}: malformed rule line")]
    BadLine(usize),
    #[error("rule {0} missing from file")]
    MissingRule(u32),
    #[error("grammar invalid: {0}")]
    Invalid(GrammarError),
}

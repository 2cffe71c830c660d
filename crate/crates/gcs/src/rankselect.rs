//! Rank and select on the compressed string.
//!
//! Rank stores, per rule and character, the number of occurrences of the
//! character up to the rule's center. A rank query walks the same triplet
//! descent as access, converting each step into a counter difference.
//!
//! Select builds one DAG per character: rules whose expansion lacks the
//! character are dropped, rules where only one child contains it collapse
//! onto that child (with a recorded position shift), and the rest form a
//! binary DAG reweighted by occurrence counts. A heavy decomposition of that
//! DAG by occurrence weight supports the descent in occurrence-ordinal
//! space; per-node `u` values record where the center occurrence sits in the
//! original expansion, so the answer is assembled from position offsets
//! accumulated on the way down.

use crate::counters::Counters;
use crate::error::QueryError;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};
use crate::heavypath::{Exit, HeavyForest};

const NIL: u32 = u32::MAX;

/// Per-rule, per-character occurrence counters.
///
/// `v(r, c)` counts `c` in the prefix of `r`'s expansion up to and including
/// the center; `total(r, c)` counts `c` in the whole expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCounters {
    pub(crate) sigma: u32,
    pub(crate) v: Vec<u64>,
    pub(crate) total: Vec<u64>,
}

impl RankCounters {
    /// Bottom-up over the topological rule order, O(n sigma) time and space;
    /// no rule is ever expanded.
    pub fn build(g: &Grammar, f: &HeavyForest) -> Self {
        let n = g.num_rules();
        let s = g.sigma() as usize;
        let mut v = vec![0u64; n * s];
        let mut total = vec![0u64; n * s];
        for (i, rule) in g.rules().iter().enumerate() {
            match rule.kind {
                RuleKind::Term(Symbol(c)) => {
                    let col = (c - 1) as usize;
                    v[i * s + col] = 1;
                    total[i * s + col] = 1;
                }
                RuleKind::Pair(l, r) => {
                    let (li, ri) = (l.idx(), r.idx());
                    for c in 0..s {
                        total[i * s + c] = total[li * s + c] + total[ri * s + c];
                    }
                    let h = f.heavy_child(RuleId(i as u32)).unwrap().idx();
                    if h == li {
                        // center is inside the left child at the same offset
                        v.copy_within(li * s..(li + 1) * s, i * s);
                    } else {
                        for c in 0..s {
                            v[i * s + c] = total[li * s + c] + v[ri * s + c];
                        }
                    }
                }
            }
        }
        RankCounters { sigma: g.sigma(), v, total }
    }

    /// Occurrences of `c` in `expand(r)[1..=center(r)]`.
    pub fn v(&self, r: RuleId, c: Symbol) -> u64 {
        self.v[r.idx() * self.sigma as usize + (c.0 - 1) as usize]
    }

    /// Occurrences of `c` in the whole expansion of `r`.
    pub fn total(&self, r: RuleId, c: Symbol) -> u64 {
        self.total[r.idx() * self.sigma as usize + (c.0 - 1) as usize]
    }

    /// Occurrences of `c` among the first `i` symbols of the string
    /// (1-based inclusive; `i = 0` is the empty prefix).
    pub fn rank(&self, g: &Grammar, f: &HeavyForest, c: Symbol, i: u64) -> Result<u64, QueryError> {
        self.rank_counted(g, f, c, i, &mut Counters::default())
    }

    pub fn rank_counted(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        c: Symbol,
        i: u64,
        counters: &mut Counters,
    ) -> Result<u64, QueryError> {
        if c.0 == 0 || c.0 > self.sigma {
            return Err(QueryError::SymbolOutOfRange(c.0, self.sigma));
        }
        if i > g.text_len() {
            return Err(QueryError::PositionOutOfRange { pos: i, lo: 0, hi: g.text_len() });
        }
        if i == 0 {
            return Ok(0);
        }
        let start_transitions = counters.light_transitions;
        let mut cur = g.root();
        let mut x = i;
        let mut acc = 0u64;
        loop {
            match f.exit(g, cur, x, counters) {
                Exit::Center { .. } => {
                    // the prefix up to the center is exactly what v stores
                    counters.note_chain(counters.light_transitions - start_transitions);
                    return Ok(acc + self.v(cur, c));
                }
                Exit::Light(pe) => {
                    counters.light_transitions += 1;
                    // occurrences left of the exit node's window
                    acc += self.v(cur, c) - self.v(pe.exit_node, c);
                    if pe.light_side == crate::heavypath::Side::Right {
                        // the heavy child's whole expansion also precedes x
                        let RuleKind::Pair(l, _) = g.rule(pe.exit_node).kind else {
                            unreachable!()
                        };
                        acc += self.total(l, c);
                    }
                    if let RuleKind::Term(t) = g.rule(pe.light).kind {
                        counters.note_chain(counters.light_transitions - start_transitions);
                        return Ok(acc + u64::from(t == c));
                    }
                    cur = pe.light;
                    x = pe.offset_in_light;
                }
            }
        }
    }
}

/// One per-character occurrence-weighted DAG with its heavy decomposition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CharDag {
    /// Original rule behind each node (sinks are terminal rules).
    pub(crate) orig: Vec<u32>,
    /// Child nodes; NIL pair for the sink.
    pub(crate) left: Vec<u32>,
    pub(crate) right: Vec<u32>,
    /// Occurrence count of the character below each node / edge.
    pub(crate) count: Vec<u64>,
    pub(crate) count_left: Vec<u64>,
    /// Start offset (0-based) of each child's surviving node inside the
    /// original rule's expansion.
    pub(crate) pos_left: Vec<u64>,
    pub(crate) pos_right: Vec<u64>,
    pub(crate) heavy_is_left: Vec<bool>,
    /// Ordinal (occurrence number) of the heavy-path occurrence.
    pub(crate) center_ord: Vec<u64>,
    /// Position of that occurrence inside the node's original expansion.
    pub(crate) u_pos: Vec<u64>,
    pub(crate) path_len: Vec<u32>,
    pub(crate) levels: u32,
    pub(crate) anc: Vec<u32>,
    /// Ordinal offset accumulated over 2^k heavy steps.
    pub(crate) ord_cum: Vec<u64>,
    /// Position offset of the target's window start over those steps.
    pub(crate) pos_cum: Vec<u64>,
    /// Entry point: surviving node for the grammar root plus its shift.
    pub(crate) root_node: u32,
    pub(crate) root_shift: u64,
}

/// The per-character DAGs for a whole grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharDags {
    pub(crate) sigma: u32,
    pub(crate) dags: Vec<CharDag>,
}

impl CharDags {
    /// Build all sigma DAGs. Rules that contain the character in both
    /// children become binary nodes; single-side rules collapse onto the
    /// containing child with a position shift; the terminal rule for the
    /// character is the sink.
    pub fn build(g: &Grammar, ranks: &RankCounters) -> Self {
        let n = g.num_rules();
        let mut dags = Vec::with_capacity(g.sigma() as usize);
        // scratch: surviving node + shift per rule, reused across characters
        let mut rep_node = vec![NIL; n];
        let mut rep_shift = vec![0u64; n];
        for c in 1..=g.sigma() {
            dags.push(Self::build_one(g, ranks, Symbol(c), &mut rep_node, &mut rep_shift));
        }
        CharDags { sigma: g.sigma(), dags }
    }

    fn build_one(
        g: &Grammar,
        ranks: &RankCounters,
        c: Symbol,
        rep_node: &mut [u32],
        rep_shift: &mut [u64],
    ) -> CharDag {
        let mut d = CharDag::default();
        for (i, rule) in g.rules().iter().enumerate() {
            rep_node[i] = NIL;
            rep_shift[i] = 0;
            match rule.kind {
                RuleKind::Term(t) if t == c => {
                    let id = d.push_sink(i as u32);
                    rep_node[i] = id;
                }
                RuleKind::Term(_) => {}
                RuleKind::Pair(l, r) => {
                    let (cl, cr) = (ranks.total(l, c), ranks.total(r, c));
                    match (cl > 0, cr > 0) {
                        (false, false) => {}
                        (true, false) => {
                            rep_node[i] = rep_node[l.idx()];
                            rep_shift[i] = rep_shift[l.idx()];
                        }
                        (false, true) => {
                            rep_node[i] = rep_node[r.idx()];
                            rep_shift[i] = g.exp_len(l) + rep_shift[r.idx()];
                        }
                        (true, true) => {
                            let id = d.push_pair(
                                i as u32,
                                rep_node[l.idx()],
                                rep_node[r.idx()],
                                cl,
                                cr,
                                rep_shift[l.idx()],
                                g.exp_len(l) + rep_shift[r.idx()],
                            );
                            rep_node[i] = id;
                        }
                    }
                }
            }
        }
        if rep_node[g.root().idx()] != NIL {
            d.root_node = rep_node[g.root().idx()];
            d.root_shift = rep_shift[g.root().idx()];
        } else {
            d.root_node = NIL;
        }
        d.build_jump_tables();
        d
    }
}

impl CharDag {
    /// Total occurrences of the character in the string.
    pub fn occurrences(&self) -> u64 {
        if self.root_node == NIL { 0 } else { self.count[self.root_node as usize] }
    }

    pub fn is_empty(&self) -> bool {
        self.orig.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.orig.len()
    }

    /// Occurrence count of the character below rule `r`'s surviving node,
    /// walking the collapse chain on demand (test support).
    pub fn node_of_rule(&self, r: RuleId) -> Option<u32> {
        self.orig.iter().position(|&o| o == r.0).map(|i| i as u32)
    }

    fn push_sink(&mut self, orig: u32) -> u32 {
        self.push_node(orig, NIL, NIL, 1, 1, 0, 0, true, 1, 1, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn push_pair(
        &mut self,
        orig: u32,
        left: u32,
        right: u32,
        cl: u64,
        cr: u64,
        pos_l: u64,
        pos_r: u64,
    ) -> u32 {
        let heavy_is_left = cl >= cr;
        let (h, center_ord, u_pos) = if heavy_is_left {
            (left, self.center_ord[left as usize], pos_l + self.u_pos[left as usize])
        } else {
            (right, cl + self.center_ord[right as usize], pos_r + self.u_pos[right as usize])
        };
        let pl = self.path_len[h as usize] + 1;
        self.push_node(orig, left, right, cl + cr, cl, pos_l, pos_r, heavy_is_left, center_ord, u_pos, pl)
    }

    #[allow(clippy::too_many_arguments)]
    fn push_node(
        &mut self,
        orig: u32,
        left: u32,
        right: u32,
        count: u64,
        count_left: u64,
        pos_left: u64,
        pos_right: u64,
        heavy_is_left: bool,
        center_ord: u64,
        u_pos: u64,
        path_len: u32,
    ) -> u32 {
        self.orig.push(orig);
        self.left.push(left);
        self.right.push(right);
        self.count.push(count);
        self.count_left.push(count_left);
        self.pos_left.push(pos_left);
        self.pos_right.push(pos_right);
        self.heavy_is_left.push(heavy_is_left);
        self.center_ord.push(center_ord);
        self.u_pos.push(u_pos);
        self.path_len.push(path_len);
        (self.orig.len() - 1) as u32
    }

    fn heavy_node(&self, i: usize) -> u32 {
        if self.left[i] == NIL {
            NIL
        } else if self.heavy_is_left[i] {
            self.left[i]
        } else {
            self.right[i]
        }
    }

    fn build_jump_tables(&mut self) {
        let n = self.orig.len();
        let max_pl = self.path_len.iter().copied().max().unwrap_or(0);
        self.levels = if max_pl == 0 { 0 } else { 64 - u64::from(max_pl).leading_zeros() };
        self.anc = vec![NIL; self.levels as usize * n];
        self.ord_cum = vec![0u64; self.levels as usize * n];
        self.pos_cum = vec![0u64; self.levels as usize * n];
        if self.levels == 0 {
            return;
        }
        for i in 0..n {
            let h = self.heavy_node(i);
            self.anc[i] = h;
            if h != NIL {
                if self.heavy_is_left[i] {
                    self.pos_cum[i] = self.pos_left[i];
                } else {
                    self.ord_cum[i] = self.count_left[i];
                    self.pos_cum[i] = self.pos_right[i];
                }
            }
        }
        for k in 1..self.levels as usize {
            for i in 0..n {
                let half = self.anc[(k - 1) * n + i];
                if half == NIL {
                    continue;
                }
                let hop = self.anc[(k - 1) * n + half as usize];
                self.anc[k * n + i] = hop;
                if hop != NIL {
                    self.ord_cum[k * n + i] =
                        self.ord_cum[(k - 1) * n + i] + self.ord_cum[(k - 1) * n + half as usize];
                    self.pos_cum[k * n + i] =
                        self.pos_cum[(k - 1) * n + i] + self.pos_cum[(k - 1) * n + half as usize];
                }
            }
        }
    }

}

impl CharDags {
    /// Position of the `k`-th occurrence of `c` in the string.
    pub fn select(&self, c: Symbol, k: u64) -> Result<u64, QueryError> {
        self.select_counted(c, k, &mut Counters::default())
    }

    pub fn select_counted(
        &self,
        c: Symbol,
        k: u64,
        counters: &mut Counters,
    ) -> Result<u64, QueryError> {
        if c.0 == 0 || c.0 > self.sigma {
            return Err(QueryError::SymbolOutOfRange(c.0, self.sigma));
        }
        let d = &self.dags[(c.0 - 1) as usize];
        let max = d.occurrences();
        if k == 0 || k > max {
            return Err(QueryError::OccurrenceOutOfRange { symbol: c.0, k, max });
        }
        let n = d.orig.len();
        let start_transitions = counters.light_transitions;
        let mut node = d.root_node as usize;
        let mut pos = d.root_shift;
        let mut x = k;
        loop {
            if x == d.center_ord[node] {
                counters.note_chain(counters.light_transitions - start_transitions);
                return Ok(pos + d.u_pos[node]);
            }
            // ordinal-space descent along the occurrence-weighted heavy path
            let mut cur = node;
            let mut ord = 0u64;
            let mut poff = 0u64;
            for lvl in (0..d.levels as usize).rev() {
                let a = d.anc[lvl * n + cur];
                if a == NIL {
                    continue;
                }
                counters.lift_steps += 1;
                let aord = ord + d.ord_cum[lvl * n + cur];
                if aord < x && x <= aord + d.count[a as usize] {
                    poff += d.pos_cum[lvl * n + cur];
                    ord = aord;
                    cur = a as usize;
                }
            }
            debug_assert!(d.left[cur] != NIL, "non-center ordinals exit at a binary node");
            counters.light_transitions += 1;
            let (light, lord, lpos) = if d.heavy_is_left[cur] {
                (d.right[cur], ord + d.count_left[cur], poff + d.pos_right[cur])
            } else {
                (d.left[cur], ord, poff + d.pos_left[cur])
            };
            debug_assert!(
                2 * d.count[light as usize] <= d.count[node],
                "occurrence weight halves across light transitions"
            );
            debug_assert!(x > lord && x <= lord + d.count[light as usize]);
            x -= lord;
            pos += lpos;
            node = light as usize;
        }
    }

    /// `u` value of an arbitrary rule containing `c`: the position, inside
    /// that rule's expansion, of its center occurrence in the c-weighted
    /// decomposition. Walks the collapse chain (test support).
    pub fn u_value(&self, g: &Grammar, ranks: &RankCounters, r: RuleId, c: Symbol) -> Option<u64> {
        if ranks.total(r, c) == 0 {
            return None;
        }
        let d = &self.dags[(c.0 - 1) as usize];
        let mut cur = r;
        let mut shift = 0u64;
        loop {
            match g.rule(cur).kind {
                RuleKind::Term(_) => {
                    // the sink for c
                    return Some(shift + 1);
                }
                RuleKind::Pair(l, rt) => {
                    let (cl, cr) = (ranks.total(l, c), ranks.total(rt, c));
                    if cl > 0 && cr > 0 {
                        let node = d
                            .orig
                            .iter()
                            .position(|&o| o == cur.0)
                            .expect("binary nodes are materialized");
                        return Some(shift + d.u_pos[node]);
                    } else if cl > 0 {
                        cur = l;
                    } else {
                        shift += g.exp_len(l);
                        cur = rt;
                    }
                }
            }
        }
    }

    pub fn dag(&self, c: Symbol) -> &CharDag {
        &self.dags[(c.0 - 1) as usize]
    }
}

/// Rank counters and select DAGs bundled per grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSelectIndex {
    pub ranks: RankCounters,
    pub selects: CharDags,
}

impl RankSelectIndex {
    pub fn build(g: &Grammar, f: &HeavyForest) -> Self {
        let ranks = RankCounters::build(g, f);
        let selects = CharDags::build(g, &ranks);
        RankSelectIndex { ranks, selects }
    }

    pub fn rank(&self, g: &Grammar, f: &HeavyForest, c: Symbol, i: u64) -> Result<u64, QueryError> {
        self.ranks.rank(g, f, c, i)
    }

    pub fn select(&self, c: Symbol, k: u64) -> Result<u64, QueryError> {
        self.selects.select(c, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{naive_rank, naive_select};

    fn abab() -> (Grammar, HeavyForest) {
        let g = Grammar::new(
            vec![
                RuleKind::Term(Symbol(1)),
                RuleKind::Term(Symbol(2)),
                RuleKind::Pair(RuleId(0), RuleId(1)),
                RuleKind::Pair(RuleId(2), RuleId(2)),
            ],
            RuleId(3),
            2,
        )
        .unwrap();
        let f = HeavyForest::build(&g);
        (g, f)
    }

    fn from_text(s: &str, sigma: u32) -> (Grammar, HeavyForest, Vec<Symbol>) {
        let text: Vec<Symbol> = s.bytes().map(|b| Symbol((b - b'a' + 1) as u32)).collect();
        let g = crate::repair::build_grammar(&text, sigma).unwrap();
        let f = HeavyForest::build(&g);
        (g, f, text)
    }

    #[test]
    fn center_prefix_counters_on_abab() {
        let (g, f) = abab();
        let rc = RankCounters::build(&g, &f);
        // center(Y) = 1, so only the leading 'a' is counted
        assert_eq!(rc.v(RuleId(3), Symbol(1)), 1);
        assert_eq!(rc.v(RuleId(3), Symbol(2)), 0);
        // terminal rules count themselves
        assert_eq!(rc.v(RuleId(0), Symbol(1)), 1);
        assert_eq!(rc.v(RuleId(0), Symbol(2)), 0);
    }

    #[test]
    fn counters_match_naive_scans_on_random_grammars() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let n = rng.random_range(1usize..300);
            let text: Vec<Symbol> = (0..n).map(|_| Symbol(rng.random_range(1..=4))).collect();
            let g = crate::repair::build_grammar(&text, 4).unwrap();
            let f = HeavyForest::build(&g);
            let rc = RankCounters::build(&g, &f);
            for r in 0..g.num_rules() as u32 {
                let sub = g.expand_naive(RuleId(r));
                let center = f.center(RuleId(r));
                let mut sum = 0;
                for c in 1..=4u32 {
                    let vv = rc.v(RuleId(r), Symbol(c));
                    assert_eq!(vv, naive_rank(&sub, Symbol(c), center));
                    assert!(vv <= rc.total(RuleId(r), Symbol(c)));
                    sum += vv;
                }
                assert_eq!(sum, center, "v values partition the center prefix");
            }
        }
    }

    #[test]
    fn rank_basics() {
        let (g, f, text) = from_text("abracadabra", 26);
        let rc = RankCounters::build(&g, &f);
        for c in 1..=26u32 {
            assert_eq!(rc.rank(&g, &f, Symbol(c), 0).unwrap(), 0);
        }
        assert_eq!(rc.rank(&g, &f, Symbol(1), 5).unwrap(), 2);
        // partition identity at every prefix
        for i in 0..=text.len() as u64 {
            let sum: u64 =
                (1..=26u32).map(|c| rc.rank(&g, &f, Symbol(c), i).unwrap()).sum();
            assert_eq!(sum, i);
        }
        assert!(rc.rank(&g, &f, Symbol(1), text.len() as u64 + 1).is_err());
        assert!(rc.rank(&g, &f, Symbol(0), 1).is_err());
    }

    #[test]
    fn select_dag_shapes_on_abab() {
        let (g, f) = abab();
        let rs = RankSelectIndex::build(&g, &f);
        let db = rs.selects.dag(Symbol(2));
        // occurrence weights: 2 below Y, 1 below X (via its collapse chain)
        assert_eq!(db.occurrences(), 2);
        assert_eq!(rs.ranks.total(RuleId(2), Symbol(2)), 1);
        // u values: center occurrence of 'b' in X = AB sits at position 2
        assert_eq!(rs.selects.u_value(&g, &rs.ranks, RuleId(2), Symbol(2)), Some(2));
        assert_eq!(rs.selects.u_value(&g, &rs.ranks, RuleId(3), Symbol(2)), Some(2));
        // X collapses onto B in the b-DAG, so only Y and the sink remain
        assert_eq!(db.num_nodes(), 2);
    }

    #[test]
    fn select_on_absent_character_errors() {
        let (g, f, _) = from_text("abracadabra", 26);
        let rs = RankSelectIndex::build(&g, &f);
        let z = Symbol(26);
        assert!(rs.selects.dag(z).is_empty());
        assert!(matches!(
            rs.select(z, 1),
            Err(QueryError::OccurrenceOutOfRange { max: 0, .. })
        ));
    }

    #[test]
    fn select_basics() {
        let (g, f, text) = from_text("abracadabra", 26);
        let rs = RankSelectIndex::build(&g, &f);
        assert_eq!(rs.select(Symbol(1), 1).unwrap(), 1);
        assert_eq!(rs.select(Symbol(1), 3).unwrap(), 6);
        // boundary: the last occurrence of every present character
        for c in 1..=26u32 {
            let total = naive_rank(&text, Symbol(c), text.len() as u64);
            if total > 0 {
                assert_eq!(
                    rs.select(Symbol(c), total).unwrap(),
                    naive_select(&text, Symbol(c), total).unwrap()
                );
                assert!(rs.select(Symbol(c), total + 1).is_err());
            }
        }
    }

    #[test]
    fn inverse_laws_and_monotonicity() {
        let text = crate::corpus::versioned_text(4, 700, 7, 77);
        let g = crate::repair::build_grammar(&text, 4).unwrap();
        let f = HeavyForest::build(&g);
        let rs = RankSelectIndex::build(&g, &f);
        let n = text.len() as u64;
        for c in 1..=4u32 {
            let c = Symbol(c);
            let total = naive_rank(&text, c, n);
            for k in 1..=total {
                let pos = rs.select(c, k).unwrap();
                assert_eq!(rs.rank(&g, &f, c, pos).unwrap(), k, "rank(select(k)) = k");
            }
            let mut prev = 0;
            for i in 1..=n {
                let r = rs.rank(&g, &f, c, i).unwrap();
                let bumped = text[i as usize - 1] == c;
                assert_eq!(r, prev + u64::from(bumped), "rank increments exactly at c");
                if bumped {
                    assert_eq!(rs.select(c, r).unwrap(), i, "select(rank(i)) = i when S[i]=c");
                }
                prev = r;
            }
        }
    }

    #[test]
    fn u_values_point_at_the_character() {
        let text = crate::corpus::random_text(4, 400, 5);
        let g = crate::repair::build_grammar(&text, 4).unwrap();
        let f = HeavyForest::build(&g);
        let rs = RankSelectIndex::build(&g, &f);
        for r in 0..g.num_rules() as u32 {
            let sub = g.expand_naive(RuleId(r));
            for c in 1..=4u32 {
                if let Some(u) = rs.selects.u_value(&g, &rs.ranks, RuleId(r), Symbol(c)) {
                    assert_eq!(sub[u as usize - 1], Symbol(c), "rule {r} char {c}");
                }
            }
        }
    }
}

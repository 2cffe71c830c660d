//! Heavy-path decomposition of the grammar DAG.
//!
//! Every pair rule designates its longer child as heavy (ties toward the
//! left); chasing heavy children from any rule reaches a terminal, the
//! rule's heavy-path leaf. The position of that leaf's character inside the
//! rule's expansion is the rule's center: one plus the total weight of light
//! children hanging off the path on the left.
//!
//! Descending to the light child that contains a queried position halves the
//! remaining expansion length, so a root-to-terminal search makes at most
//! log2(N) light transitions. Locating the exit point on one heavy path uses
//! 2^k ancestor jump tables with cumulative left-hanging weights.

use crate::counters::Counters;
use crate::error::QueryError;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One step of a descent: a light child and the interval its expansion
/// occupies inside the enclosing context (1-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub rule: RuleId,
    pub start: u64,
    pub end: u64,
}

/// Where a position leaves a rule's heavy path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathExit {
    /// Heavy steps from the context rule down to the exit node.
    pub exit_step: u32,
    /// Last heavy-path node whose expansion still contains the position.
    pub exit_node: RuleId,
    /// Left-hanging light weight above the exit node; its expansion occupies
    /// `exit_offset + 1 ..= exit_offset + |exit_node|` within the context.
    pub exit_offset: u64,
    /// The light child of the exit node, which contains the position.
    pub light: RuleId,
    pub light_side: Side,
    /// Interval of `light` inside the context rule's expansion.
    pub light_start: u64,
    pub light_end: u64,
    /// 1-based position of the query inside `light`.
    pub offset_in_light: u64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Exit {
    /// The position is exactly the center; the heavy-path leaf generates it.
    Center { terminal: RuleId, pos: u64 },
    Light(PathExit),
}

/// Heavy decomposition plus ancestor jump tables for every rule.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyForest {
    pub(crate) heavy: Vec<u32>,
    pub(crate) light: Vec<u32>,
    pub(crate) heavy_is_left: Vec<bool>,
    pub(crate) center: Vec<u64>,
    pub(crate) leaf: Vec<u32>,
    pub(crate) path_len: Vec<u32>,
    pub(crate) levels: u32,
    /// `anc[k * n + r]` is the rule 2^k heavy steps below `r`, or NIL.
    pub(crate) anc: Vec<u32>,
    /// Left-hanging light weight accumulated over those 2^k steps.
    pub(crate) left_cum: Vec<u64>,
}

impl HeavyForest {
    /// Decompose `g`. Single topological sweep plus O(n log n) table fill.
    pub fn build(g: &Grammar) -> Self {
        let n = g.num_rules();
        let mut heavy = vec![NIL; n];
        let mut light = vec![NIL; n];
        let mut heavy_is_left = vec![false; n];
        let mut center = vec![0u64; n];
        let mut leaf = vec![NIL; n];
        let mut path_len = vec![0u32; n];

        for (i, rule) in g.rules().iter().enumerate() {
            match rule.kind {
                RuleKind::Term(_) => {
                    center[i] = 1;
                    leaf[i] = i as u32;
                }
                RuleKind::Pair(l, r) => {
                    let is_left = g.exp_len(l) >= g.exp_len(r);
                    let (h, q) = if is_left { (l, r) } else { (r, l) };
                    heavy[i] = h.0;
                    light[i] = q.0;
                    heavy_is_left[i] = is_left;
                    center[i] = if is_left {
                        center[h.idx()]
                    } else {
                        g.exp_len(q) + center[h.idx()]
                    };
                    leaf[i] = leaf[h.idx()];
                    path_len[i] = path_len[h.idx()] + 1;
                }
            }
        }

        let max_pl = path_len.iter().copied().max().unwrap_or(0);
        let levels = if max_pl == 0 { 0 } else { 64 - u64::from(max_pl).leading_zeros() };
        let mut anc = vec![NIL; levels as usize * n];
        let mut left_cum = vec![0u64; levels as usize * n];
        if levels > 0 {
            for i in 0..n {
                anc[i] = heavy[i];
                if heavy[i] != NIL && !heavy_is_left[i] {
                    left_cum[i] = g.exp_len(RuleId(light[i]));
                }
            }
            for k in 1..levels as usize {
                for i in 0..n {
                    let half = anc[(k - 1) * n + i];
                    if half == NIL {
                        continue;
                    }
                    let hop = anc[(k - 1) * n + half as usize];
                    anc[k * n + i] = hop;
                    if hop != NIL {
                        left_cum[k * n + i] = left_cum[(k - 1) * n + i]
                            + left_cum[(k - 1) * n + half as usize];
                    }
                }
            }
        }

        HeavyForest { heavy, light, heavy_is_left, center, leaf, path_len, levels, anc, left_cum }
    }

    fn n(&self) -> usize {
        self.heavy.len()
    }

    pub fn heavy_child(&self, r: RuleId) -> Option<RuleId> {
        (self.heavy[r.idx()] != NIL).then(|| RuleId(self.heavy[r.idx()]))
    }

    pub fn light_child(&self, r: RuleId) -> Option<RuleId> {
        (self.light[r.idx()] != NIL).then(|| RuleId(self.light[r.idx()]))
    }

    pub fn heavy_side(&self, r: RuleId) -> Option<Side> {
        self.heavy_child(r)
            .map(|_| if self.heavy_is_left[r.idx()] { Side::Left } else { Side::Right })
    }

    /// Position of the heavy-path leaf character inside `r`'s expansion.
    pub fn center(&self, r: RuleId) -> u64 {
        self.center[r.idx()]
    }

    /// Terminal rule at the end of `r`'s heavy path.
    pub fn heavy_leaf(&self, r: RuleId) -> RuleId {
        RuleId(self.leaf[r.idx()])
    }

    /// The character generated at `r`'s center.
    pub fn leaf_symbol(&self, g: &Grammar, r: RuleId) -> Symbol {
        match g.rule(self.heavy_leaf(r)).kind {
            RuleKind::Term(c) => c,
            RuleKind::Pair(..) => unreachable!("heavy paths end at terminals"),
        }
    }

    pub fn path_len(&self, r: RuleId) -> u32 {
        self.path_len[r.idx()]
    }

    /// Locate where position `x` (1-based, in `r`'s expansion) leaves `r`'s
    /// heavy path, or report that it is the center. O(log n) jump steps.
    pub(crate) fn exit(&self, g: &Grammar, r: RuleId, x: u64, counters: &mut Counters) -> Exit {
        debug_assert!(x >= 1 && x <= g.exp_len(r));
        if x == self.center[r.idx()] {
            return Exit::Center { terminal: self.heavy_leaf(r), pos: x };
        }
        let n = self.n();
        let mut cur = r.idx();
        let mut off = 0u64;
        let mut step = 0u32;
        for k in (0..self.levels as usize).rev() {
            let a = self.anc[k * n + cur];
            if a == NIL {
                continue;
            }
            counters.lift_steps += 1;
            let aoff = off + self.left_cum[k * n + cur];
            if aoff < x && x <= aoff + g.exp_len(RuleId(a)) {
                cur = a as usize;
                off = aoff;
                step += 1 << k;
            }
        }
        let RuleKind::Pair(l, rt) = g.rule(RuleId(cur as u32)).kind else {
            unreachable!("non-center positions exit at a pair rule");
        };
        let is_left = self.heavy_is_left[cur];
        let (h, q) = if is_left { (l, rt) } else { (rt, l) };
        let (side, s, e) = if is_left {
            let h_end = off + g.exp_len(h);
            debug_assert!(x > h_end);
            (Side::Right, h_end + 1, off + g.exp_len(RuleId(cur as u32)))
        } else {
            debug_assert!(x <= off + g.exp_len(q));
            (Side::Left, off + 1, off + g.exp_len(q))
        };
        Exit::Light(PathExit {
            exit_step: step,
            exit_node: RuleId(cur as u32),
            exit_offset: off,
            light: q,
            light_side: side,
            light_start: s,
            light_end: e,
            offset_in_light: x - s + 1,
        })
    }

    /// The unique step where position `x` leaves `r`'s heavy path.
    ///
    /// Precondition: `x != center(r)` (at the center the answer would be the
    /// heavy-path terminal, not a light child).
    pub fn path_predecessor(&self, g: &Grammar, r: RuleId, x: u64) -> PathExit {
        assert!(x != self.center[r.idx()], "position {x} is the center of the rule");
        let mut c = Counters::default();
        match self.exit(g, r, x, &mut c) {
            Exit::Light(pe) => pe,
            Exit::Center { .. } => unreachable!(),
        }
    }

    /// Full descent from `r` to the terminal generating position `x`.
    /// The last triplet's rule is a terminal rule; summing `start - 1` over
    /// the trace and adding 1 recovers `x`.
    pub fn triplet_search(
        &self,
        g: &Grammar,
        r: RuleId,
        x: u64,
    ) -> Result<Vec<Triplet>, QueryError> {
        self.triplet_search_counted(g, r, x, &mut Counters::default())
    }

    pub fn triplet_search_counted(
        &self,
        g: &Grammar,
        r: RuleId,
        x: u64,
        counters: &mut Counters,
    ) -> Result<Vec<Triplet>, QueryError> {
        if x < 1 || x > g.exp_len(r) {
            return Err(QueryError::PositionOutOfRange { pos: x, lo: 1, hi: g.exp_len(r) });
        }
        let start_transitions = counters.light_transitions;
        let mut trips = Vec::new();
        let mut cur = r;
        let mut pos = x;
        loop {
            match self.exit(g, cur, pos, counters) {
                Exit::Center { terminal, pos } => {
                    trips.push(Triplet { rule: terminal, start: pos, end: pos });
                    break;
                }
                Exit::Light(pe) => {
                    counters.light_transitions += 1;
                    debug_assert!(
                        2 * g.exp_len(pe.light) <= g.exp_len(cur),
                        "light child must weigh at most half its context"
                    );
                    trips.push(Triplet {
                        rule: pe.light,
                        start: pe.light_start,
                        end: pe.light_end,
                    });
                    if matches!(g.rule(pe.light).kind, RuleKind::Term(_)) {
                        break;
                    }
                    cur = pe.light;
                    pos = pe.offset_in_light;
                }
            }
        }
        counters.note_chain(counters.light_transitions - start_transitions);
        Ok(trips)
    }

    /// Character at position `x` of `r`'s expansion via the triplet descent.
    pub fn char_at(
        &self,
        g: &Grammar,
        r: RuleId,
        x: u64,
        counters: &mut Counters,
    ) -> Result<Symbol, QueryError> {
        let trips = self.triplet_search_counted(g, r, x, counters)?;
        let last = trips.last().expect("trace is never empty");
        match g.rule(last.rule).kind {
            RuleKind::Term(c) => Ok(c),
            RuleKind::Pair(..) => unreachable!(),
        }
    }

    /// Deepest node on `r`'s heavy path whose accumulated left-hanging weight
    /// stays within `limit`; returns (node, weight, steps taken).
    pub(crate) fn deepest_within_left_cum(
        &self,
        r: RuleId,
        limit: u64,
    ) -> (RuleId, u64, u32) {
        let n = self.n();
        let mut cur = r.idx();
        let mut cum = 0u64;
        let mut steps = 0u32;
        for k in (0..self.levels as usize).rev() {
            let a = self.anc[k * n + cur];
            if a == NIL {
                continue;
            }
            let c = cum + self.left_cum[k * n + cur];
            if c <= limit {
                cur = a as usize;
                cum = c;
                steps += 1 << k;
            }
        }
        (RuleId(cur as u32), cum, steps)
    }

    /// Mirror of [`Self::deepest_within_left_cum`] for right-hanging weight.
    /// Right-hanging weight over k steps is the window shrink minus the
    /// left-hanging weight, so it needs no second table.
    pub(crate) fn deepest_within_right_cum(
        &self,
        g: &Grammar,
        r: RuleId,
        limit: u64,
    ) -> (RuleId, u64, u32) {
        let n = self.n();
        let top = g.exp_len(r);
        let mut cur = r.idx();
        let mut left = 0u64;
        let mut steps = 0u32;
        for k in (0..self.levels as usize).rev() {
            let a = self.anc[k * n + cur];
            if a == NIL {
                continue;
            }
            let l = left + self.left_cum[k * n + cur];
            let right = (top - g.exp_len(RuleId(a))) - l;
            if right <= limit {
                cur = a as usize;
                left = l;
                steps += 1 << k;
            }
        }
        let right = (top - g.exp_len(RuleId(cur as u32))) - left;
        (RuleId(cur as u32), right, steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::RuleKind;

    fn abab() -> Grammar {
        Grammar::new(
            vec![
                RuleKind::Term(Symbol(1)),
                RuleKind::Term(Symbol(2)),
                RuleKind::Pair(RuleId(0), RuleId(1)),
                RuleKind::Pair(RuleId(2), RuleId(2)),
            ],
            RuleId(3),
            2,
        )
        .unwrap()
    }

    #[test]
    fn ties_break_left_and_centers_match() {
        let g = abab();
        let f = HeavyForest::build(&g);
        // Y = XX picks the left X; X = AB picks A.
        assert_eq!(f.heavy_child(RuleId(3)), Some(RuleId(2)));
        assert_eq!(f.heavy_side(RuleId(3)), Some(Side::Left));
        assert_eq!(f.heavy_child(RuleId(2)), Some(RuleId(0)));
        assert_eq!(f.center(RuleId(3)), 1);
        assert_eq!(f.center(RuleId(2)), 1);
        assert_eq!(f.center(RuleId(0)), 1);
        // the character at the center is the heavy-path leaf character
        let text = g.expand_naive(g.root());
        assert_eq!(text[(f.center(g.root()) - 1) as usize], f.leaf_symbol(&g, g.root()));
    }

    #[test]
    fn center_accumulates_left_hanging_weight() {
        // X -> A B with |A| = 1, |B| = 3: B is heavy, A hangs left.
        let g = Grammar::new(
            vec![
                RuleKind::Term(Symbol(1)),            // 0: a
                RuleKind::Term(Symbol(2)),            // 1: b
                RuleKind::Pair(RuleId(1), RuleId(1)), // 2: bb
                RuleKind::Pair(RuleId(2), RuleId(1)), // 3: B = bbb
                RuleKind::Pair(RuleId(0), RuleId(3)), // 4: X = a bbb
            ],
            RuleId(4),
            2,
        )
        .unwrap();
        let f = HeavyForest::build(&g);
        assert_eq!(f.heavy_child(RuleId(4)), Some(RuleId(3)));
        assert_eq!(f.heavy_side(RuleId(4)), Some(Side::Right));
        // center = 1 + |A| + (left hangs inside B's path: none) = 2... the
        // heavy path of B = bbb goes B -> bb -> b with light b hanging right,
        // so center(B) = 1 and center(X) = |A| + center(B) = 2.
        assert_eq!(f.center(RuleId(4)), 1 + 1);
        let text = g.expand_naive(g.root());
        assert_eq!(text[(f.center(g.root()) - 1) as usize], f.leaf_symbol(&g, g.root()));
    }

    #[test]
    fn terminal_rule_center_is_one() {
        let g = abab();
        let f = HeavyForest::build(&g);
        assert_eq!(f.center(RuleId(0)), 1);
        assert_eq!(f.heavy_child(RuleId(0)), None);
    }

    #[test]
    fn triplet_search_at_center_is_direct() {
        let g = abab();
        let f = HeavyForest::build(&g);
        let trips = f.triplet_search(&g, g.root(), 1).unwrap();
        assert_eq!(trips.len(), 1, "no light transitions when x is the center");
        assert_eq!(g.rule(trips[0].rule).kind, RuleKind::Term(Symbol(1)));
    }

    #[test]
    fn triplet_search_satisfies_position_identity() {
        let g = abab();
        let f = HeavyForest::build(&g);
        let trips = f.triplet_search(&g, g.root(), 4).unwrap();
        let last = trips.last().unwrap();
        assert_eq!(g.rule(last.rule).kind, RuleKind::Term(Symbol(2)));
        let sum: u64 = trips.iter().map(|t| t.start - 1).sum();
        assert_eq!(sum + 1, 4);
    }

    #[test]
    fn path_predecessor_examples() {
        let g = abab();
        let f = HeavyForest::build(&g);
        // x = 2 leaves at X = AB with light child B, offset 1
        let pe = f.path_predecessor(&g, g.root(), 2);
        assert_eq!(pe.exit_node, RuleId(2));
        assert_eq!(pe.light, RuleId(1));
        assert_eq!(pe.offset_in_light, 1);
        // x = 3 leaves at Y = XX with the right X as light child, offset 1
        let pe = f.path_predecessor(&g, g.root(), 3);
        assert_eq!(pe.exit_node, RuleId(3));
        assert_eq!(pe.light, RuleId(2));
        assert_eq!(pe.light_side, Side::Right);
        assert_eq!(pe.offset_in_light, 1);
    }

    #[test]
    fn exit_just_left_of_center_lands_in_the_light_child() {
        // X = A B with |A| = 1: A hangs left, center(X) = 2, so x = 1 exits
        // into A at offset 1.
        let g = Grammar::new(
            vec![
                RuleKind::Term(Symbol(1)),
                RuleKind::Term(Symbol(2)),
                RuleKind::Pair(RuleId(1), RuleId(1)),
                RuleKind::Pair(RuleId(2), RuleId(1)),
                RuleKind::Pair(RuleId(0), RuleId(3)),
            ],
            RuleId(4),
            2,
        )
        .unwrap();
        let f = HeavyForest::build(&g);
        assert_eq!(f.center(RuleId(4)), 2);
        let pe = f.path_predecessor(&g, RuleId(4), 1);
        assert_eq!(pe.light, RuleId(0));
        assert_eq!(pe.light_side, Side::Left);
        assert_eq!(pe.offset_in_light, 1);
    }

    #[test]
    fn center_equals_one_plus_left_hanging_weight() {
        let text = crate::corpus::versioned_text(4, 700, 7, 3);
        let g = crate::repair::build_grammar(&text, 4).unwrap();
        let f = HeavyForest::build(&g);
        for r in 0..g.num_rules() as u32 {
            // independent recomputation: walk the heavy path, summing the
            // weights of light children that hang on the left
            let mut cur = RuleId(r);
            let mut left_weight = 0u64;
            while let Some(h) = f.heavy_child(cur) {
                if f.heavy_side(cur) == Some(Side::Right) {
                    left_weight += g.exp_len(f.light_child(cur).unwrap());
                }
                cur = h;
            }
            assert_eq!(f.center(RuleId(r)), left_weight + 1, "rule {r}");
        }
    }

    #[test]
    fn random_grammar_positions_match_naive_expansion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = rng.random_range(1usize..400);
            let text: Vec<Symbol> = (0..n).map(|_| Symbol(rng.random_range(1..=4))).collect();
            let g = crate::repair::build_grammar(&text, 4).unwrap();
            let f = HeavyForest::build(&g);
            let expanded = g.expand_naive(g.root());
            let mut c = Counters::default();
            for _ in 0..50 {
                let x = rng.random_range(1..=n as u64);
                assert_eq!(
                    f.char_at(&g, g.root(), x, &mut c).unwrap(),
                    expanded[x as usize - 1],
                    "trial {trial} position {x}"
                );
            }
            // every rule's center generates the heavy-path leaf character
            for r in 0..g.num_rules() {
                let sub = g.expand_naive(RuleId(r as u32));
                assert_eq!(
                    sub[(f.center(RuleId(r as u32)) - 1) as usize],
                    f.leaf_symbol(&g, RuleId(r as u32))
                );
            }
        }
    }

    #[test]
    fn light_transition_count_is_logarithmic() {
        let text = crate::corpus::versioned_text(4, 2048, 16, 5);
        let g = crate::repair::build_grammar(&text, 4).unwrap();
        let f = HeavyForest::build(&g);
        let bound = 64 - (g.text_len().leading_zeros() as u64) - 1; // floor(log2 N)
        for x in 1..=g.text_len() {
            let mut c = Counters::default();
            f.char_at(&g, g.root(), x, &mut c).unwrap();
            assert!(c.light_transitions <= bound, "t = {} at x = {x}", c.light_transitions);
        }
    }

    #[test]
    fn out_of_range_positions_error() {
        let g = abab();
        let f = HeavyForest::build(&g);
        assert!(f.triplet_search(&g, g.root(), 0).is_err());
        assert!(f.triplet_search(&g, g.root(), 5).is_err());
    }
}

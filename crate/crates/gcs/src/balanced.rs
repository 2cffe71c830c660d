//! The expanded-fanout engine.
//!
//! Every rule's right-hand side is pre-expanded `d = max(1, floor(epsilon *
//! log2 log2 N))` levels, giving a frontier of at most `2^d <= log2(N)^epsilon`
//! slots. Frontier entries whose expansion fits in one packed chunk are
//! inlined as literals; the rest stay rule references. A query walks one
//! predecessor search over the slot prefix sums per visited node and
//! therefore descends `d` grammar levels per step, visiting at most
//! `ceil(h / d) + 1` nodes on a grammar of height `h`.
//!
//! Rank accumulates per-slot character counts on the way down; select picks
//! the slot by cumulative character count and accumulates slot start
//! offsets. Both read the per-rule totals table, so no per-slot count
//! matrices are materialized.
//!
//! Extraction stitches a suffix walk, whole slots, and a prefix walk, with
//! stored long fringes (`w * ceil(log2(N)^epsilon)` symbols) short-cutting
//! the boundary walks.

use crate::access::{chunk_width, symbol_bits};
use crate::bitpack::PackedString;
use crate::counters::Counters;
use crate::error::QueryError;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};

/// One frontier slot: a rule reference or an inlined literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Var(RuleId),
    /// Offset and length (in symbols) into the shared literal buffer.
    Lit { off: u32, len: u32 },
}

/// The balanced index over one grammar.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedIndex {
    pub(crate) epsilon: f64,
    pub(crate) depth: u32,
    pub(crate) w: u64,
    pub(crate) fringe_len: u64,
    pub(crate) sym_bits: u32,
    pub(crate) sigma: u32,
    /// Slot range per rule: `slots[slot_start[r] .. slot_start[r + 1]]`.
    pub(crate) slot_start: Vec<u32>,
    pub(crate) slots: Vec<Slot>,
    /// Start offset of each slot inside its rule's expansion (0-based),
    /// aligned with `slots`.
    pub(crate) starts: Vec<u64>,
    pub(crate) lits: PackedString,
    /// Long fringes, stride `fringe_len` per rule.
    pub(crate) fringe_l: PackedString,
    pub(crate) fringe_r: PackedString,
    /// Per rule and character, occurrences in the whole expansion.
    pub(crate) totals: Vec<u64>,
    pub(crate) height: u32,
}

impl BalancedIndex {
    pub fn build(g: &Grammar, epsilon: f64) -> Self {
        let n = g.num_rules();
        let big_n = g.text_len();
        let w = chunk_width(big_n, g.sigma());
        let sym_bits = symbol_bits(g.sigma());
        let log_n = (big_n.max(4) as f64).log2();
        let depth = ((epsilon * log_n.log2()).floor() as u32).max(1);
        let fanout_cap = log_n.powf(epsilon).ceil() as u64;
        let fringe_len = (w * fanout_cap).max(w);

        // literal cache: each sub-chunk rule is materialized once
        let mut lits = PackedString::new(sym_bits);
        let mut lit_of: Vec<Option<(u32, u32)>> = vec![None; n];
        let mut slot_start = Vec::with_capacity(n + 1);
        let mut slots = Vec::new();
        let mut starts = Vec::new();
        let mut frontier = Vec::new();
        for i in 0..n {
            slot_start.push(slots.len() as u32);
            let r = RuleId(i as u32);
            frontier.clear();
            collect_frontier(g, r, depth, w, &mut frontier);
            let mut off = 0u64;
            for &(rule, len) in &frontier {
                starts.push(off);
                if len <= w {
                    let (lo, ll) = *lit_of[rule.idx()].get_or_insert_with(|| {
                        let lo = lits.len() as u32;
                        for s in g.expand_naive(rule) {
                            lits.push(u64::from(s.0 - 1));
                        }
                        (lo, len as u32)
                    });
                    slots.push(Slot::Lit { off: lo, len: ll });
                } else {
                    slots.push(Slot::Var(rule));
                }
                off += len;
            }
            debug_assert_eq!(off, g.exp_len(r));
        }
        slot_start.push(slots.len() as u32);

        // long fringes, bottom-up exactly like the narrow ones
        let mut fringe_l = PackedString::with_capacity(sym_bits, n * fringe_len as usize);
        let mut fringe_r = PackedString::with_capacity(sym_bits, n * fringe_len as usize);
        for rule in g.rules() {
            let len = rule.exp_len;
            let flen = len.min(fringe_len);
            match rule.kind {
                RuleKind::Term(Symbol(c)) => {
                    fringe_l.push(u64::from(c - 1));
                    fringe_r.push(u64::from(c - 1));
                }
                RuleKind::Pair(l, r) => {
                    let (ll, rl) = (g.exp_len(l), g.exp_len(r));
                    let from_l = ll.min(flen);
                    fringe_l.extend_from_self(l.idx() * fringe_len as usize, from_l as usize);
                    if from_l < flen {
                        fringe_l
                            .extend_from_self(r.idx() * fringe_len as usize, (flen - from_l) as usize);
                    }
                    let from_r = rl.min(flen);
                    if from_r < flen {
                        let take = flen - from_r;
                        let l_flen = ll.min(fringe_len);
                        fringe_r.extend_from_self(
                            l.idx() * fringe_len as usize + (l_flen - take) as usize,
                            take as usize,
                        );
                    }
                    fringe_r.extend_from_self(r.idx() * fringe_len as usize, from_r as usize);
                }
            }
            for _ in flen..fringe_len {
                fringe_l.push(0);
                fringe_r.push(0);
            }
        }

        // per-rule character totals
        let s = g.sigma() as usize;
        let mut totals = vec![0u64; n * s];
        for (i, rule) in g.rules().iter().enumerate() {
            match rule.kind {
                RuleKind::Term(Symbol(c)) => totals[i * s + (c - 1) as usize] = 1,
                RuleKind::Pair(l, r) => {
                    for c in 0..s {
                        totals[i * s + c] = totals[l.idx() * s + c] + totals[r.idx() * s + c];
                    }
                }
            }
        }

        BalancedIndex {
            epsilon,
            depth,
            w,
            fringe_len,
            sym_bits,
            sigma: g.sigma(),
            slot_start,
            slots,
            starts,
            lits,
            fringe_l,
            fringe_r,
            totals,
            height: g.height(),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Grammar levels expanded per traversal step.
    pub fn expansion_depth(&self) -> u32 {
        self.depth
    }

    pub fn chunk_symbols(&self) -> u64 {
        self.w
    }

    pub fn fringe_symbols(&self) -> u64 {
        self.fringe_len
    }

    pub fn grammar_height(&self) -> u32 {
        self.height
    }

    /// Upper bound on nodes visited by any descent.
    pub fn depth_bound(&self) -> u64 {
        (u64::from(self.height)).div_ceil(u64::from(self.depth)) + 1
    }

    fn rule_slots(&self, r: RuleId) -> (&[Slot], &[u64]) {
        let lo = self.slot_start[r.idx()] as usize;
        let hi = self.slot_start[r.idx() + 1] as usize;
        (&self.slots[lo..hi], &self.starts[lo..hi])
    }

    /// Expanded right-hand side of `r` with slot start offsets (test support
    /// and serialization).
    pub fn expanded_node(&self, r: RuleId) -> (&[Slot], &[u64]) {
        self.rule_slots(r)
    }

    pub fn total(&self, r: RuleId, c: Symbol) -> u64 {
        self.totals[r.idx() * self.sigma as usize + (c.0 - 1) as usize]
    }

    /// Count of `c` in the first `take` symbols of a slot.
    fn slot_count_prefix(&self, slot: Slot, c: Symbol, take: u64) -> u64 {
        match slot {
            Slot::Var(r) => {
                debug_assert_eq!(take, u64::MAX, "full-slot counts only for vars");
                self.total(r, c)
            }
            Slot::Lit { off, len } => {
                let take = take.min(u64::from(len));
                let want = u64::from(c.0 - 1);
                (0..take)
                    .filter(|&k| self.lits.get(off as usize + k as usize) == want)
                    .count() as u64
            }
        }
    }

    fn slot_full_count(&self, slot: Slot, c: Symbol) -> u64 {
        match slot {
            Slot::Var(r) => self.total(r, c),
            lit => self.slot_count_prefix(lit, c, u64::MAX),
        }
    }

    /// Index of the slot containing 1-based position `x`.
    fn slot_of(starts: &[u64], x: u64) -> usize {
        starts.partition_point(|&s| s < x) - 1
    }

    /// Character at position `i` of the text.
    pub fn access_char(
        &self,
        g: &Grammar,
        i: u64,
        counters: &mut Counters,
    ) -> Result<Symbol, QueryError> {
        let n = g.text_len();
        if i < 1 || i > n {
            return Err(QueryError::PositionOutOfRange { pos: i, lo: 1, hi: n });
        }
        let mut cur = g.root();
        let mut x = i;
        loop {
            counters.visited_nodes += 1;
            let (slots, starts) = self.rule_slots(cur);
            let at = Self::slot_of(starts, x);
            x -= starts[at];
            match slots[at] {
                Slot::Lit { off, .. } => {
                    let v = self.lits.get(off as usize + (x - 1) as usize);
                    return Ok(Symbol(v as u32 + 1));
                }
                Slot::Var(r) => cur = r,
            }
        }
    }

    /// Occurrences of `c` among the first `i` symbols.
    pub fn rank(
        &self,
        g: &Grammar,
        c: Symbol,
        i: u64,
        counters: &mut Counters,
    ) -> Result<u64, QueryError> {
        if c.0 == 0 || c.0 > self.sigma {
            return Err(QueryError::SymbolOutOfRange(c.0, self.sigma));
        }
        let n = g.text_len();
        if i > n {
            return Err(QueryError::PositionOutOfRange { pos: i, lo: 0, hi: n });
        }
        if i == 0 {
            return Ok(0);
        }
        let mut cur = g.root();
        let mut x = i;
        let mut acc = 0u64;
        loop {
            counters.visited_nodes += 1;
            let (slots, starts) = self.rule_slots(cur);
            let at = Self::slot_of(starts, x);
            for slot in &slots[..at] {
                acc += self.slot_full_count(*slot, c);
            }
            x -= starts[at];
            match slots[at] {
                Slot::Lit { .. } => {
                    return Ok(acc + self.slot_count_prefix(slots[at], c, x));
                }
                Slot::Var(r) => cur = r,
            }
        }
    }

    /// Position of the `k`-th occurrence of `c`.
    pub fn select(
        &self,
        g: &Grammar,
        c: Symbol,
        k: u64,
        counters: &mut Counters,
    ) -> Result<u64, QueryError> {
        if c.0 == 0 || c.0 > self.sigma {
            return Err(QueryError::SymbolOutOfRange(c.0, self.sigma));
        }
        let max = self.total(g.root(), c);
        if k == 0 || k > max {
            return Err(QueryError::OccurrenceOutOfRange { symbol: c.0, k, max });
        }
        let mut cur = g.root();
        let mut k = k;
        let mut pos = 0u64;
        loop {
            counters.visited_nodes += 1;
            let (slots, starts) = self.rule_slots(cur);
            let mut at = 0;
            loop {
                let cnt = self.slot_full_count(slots[at], c);
                if k <= cnt {
                    break;
                }
                k -= cnt;
                at += 1;
            }
            pos += starts[at];
            match slots[at] {
                Slot::Lit { off, len } => {
                    let want = u64::from(c.0 - 1);
                    let mut seen = 0u64;
                    for idx in 0..len as usize {
                        if self.lits.get(off as usize + idx) == want {
                            seen += 1;
                            if seen == k {
                                return Ok(pos + idx as u64 + 1);
                            }
                        }
                    }
                    unreachable!("slot counts said the occurrence is here");
                }
                Slot::Var(r) => cur = r,
            }
        }
    }

    /// Fully decompress a rule in frontier order. Rules no longer than a
    /// stored fringe come straight out of it; the rest walk their slots.
    fn decompress_into(
        &self,
        g: &Grammar,
        r: RuleId,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        enum Item {
            Var(RuleId),
            Lit { off: u32, len: u32 },
        }
        let mut stack = vec![Item::Var(r)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Lit { off, len } => {
                    out.extend_from(&self.lits, off as usize, len as usize)
                }
                Item::Var(r) => {
                    counters.decompress_nodes += 1;
                    let len = g.exp_len(r);
                    if len <= self.fringe_len {
                        out.extend_from(
                            &self.fringe_l,
                            r.idx() * self.fringe_len as usize,
                            len as usize,
                        );
                        continue;
                    }
                    let (slots, _) = self.rule_slots(r);
                    for slot in slots.iter().rev() {
                        stack.push(match *slot {
                            Slot::Var(v) => Item::Var(v),
                            Slot::Lit { off, len } => Item::Lit { off, len },
                        });
                    }
                }
            }
        }
    }

    /// Emit `expand(r)[x ..=]`.
    fn suffix_into(
        &self,
        g: &Grammar,
        r: RuleId,
        x: u64,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        // (rule, first remaining slot) pairs to finish after the descent
        let mut pending: Vec<(RuleId, usize)> = Vec::new();
        let mut cur = r;
        let mut x = x;
        'descend: loop {
            counters.visited_nodes += 1;
            if x == 1 {
                self.decompress_into(g, cur, out, counters);
                break;
            }
            let len = g.exp_len(cur);
            let rem = len - x + 1;
            if rem <= self.fringe_len {
                let flen = len.min(self.fringe_len);
                out.extend_from(
                    &self.fringe_r,
                    cur.idx() * self.fringe_len as usize + (flen - rem) as usize,
                    rem as usize,
                );
                break;
            }
            let (slots, starts) = self.rule_slots(cur);
            let at = Self::slot_of(starts, x);
            x -= starts[at];
            pending.push((cur, at + 1));
            match slots[at] {
                Slot::Lit { off, len } => {
                    out.extend_from(
                        &self.lits,
                        off as usize + (x - 1) as usize,
                        (u64::from(len) - x + 1) as usize,
                    );
                    break 'descend;
                }
                Slot::Var(v) => cur = v,
            }
        }
        for (rule, from) in pending.into_iter().rev() {
            let (slots, _) = self.rule_slots(rule);
            for slot in &slots[from..] {
                match *slot {
                    Slot::Lit { off, len } => {
                        out.extend_from(&self.lits, off as usize, len as usize)
                    }
                    Slot::Var(v) => self.decompress_into(g, v, out, counters),
                }
            }
        }
    }

    /// Emit `expand(r)[..= y]`.
    fn prefix_into(
        &self,
        g: &Grammar,
        r: RuleId,
        y: u64,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        let mut cur = r;
        let mut y = y;
        loop {
            counters.visited_nodes += 1;
            let len = g.exp_len(cur);
            if y == len {
                self.decompress_into(g, cur, out, counters);
                return;
            }
            if y <= self.fringe_len {
                out.extend_from(&self.fringe_l, cur.idx() * self.fringe_len as usize, y as usize);
                return;
            }
            let (slots, starts) = self.rule_slots(cur);
            let at = Self::slot_of(starts, y);
            for slot in &slots[..at] {
                match *slot {
                    Slot::Lit { off, len } => {
                        out.extend_from(&self.lits, off as usize, len as usize)
                    }
                    Slot::Var(v) => self.decompress_into(g, v, out, counters),
                }
            }
            y -= starts[at];
            match slots[at] {
                Slot::Lit { off, .. } => {
                    out.extend_from(&self.lits, off as usize, y as usize);
                    return;
                }
                Slot::Var(v) => cur = v,
            }
        }
    }

    /// The substring `S[i ..= j]`, packed.
    pub fn extract(
        &self,
        g: &Grammar,
        i: u64,
        j: u64,
        counters: &mut Counters,
    ) -> Result<PackedString, QueryError> {
        let n = g.text_len();
        if i < 1 || j > n || i > j {
            return Err(QueryError::PositionOutOfRange {
                pos: if i < 1 { i } else { j },
                lo: 1,
                hi: n,
            });
        }
        let mut out = PackedString::with_capacity(self.sym_bits, (j - i + 1) as usize);
        if i == j {
            let c = self.access_char(g, i, counters)?;
            out.push(u64::from(c.0 - 1));
            return Ok(out);
        }
        // descend while both endpoints share a slot
        let mut cur = g.root();
        let mut xi = i;
        let mut xj = j;
        loop {
            counters.visited_nodes += 1;
            let (slots, starts) = self.rule_slots(cur);
            let ai = Self::slot_of(starts, xi);
            let aj = Self::slot_of(starts, xj);
            if ai == aj {
                xi -= starts[ai];
                xj -= starts[ai];
                match slots[ai] {
                    Slot::Lit { off, .. } => {
                        out.extend_from(
                            &self.lits,
                            off as usize + (xi - 1) as usize,
                            (xj - xi + 1) as usize,
                        );
                        debug_assert_eq!(out.len() as u64, j - i + 1);
                        return Ok(out);
                    }
                    Slot::Var(v) => {
                        cur = v;
                        continue;
                    }
                }
            }
            // split: suffix of slot ai, full slots between, prefix of slot aj
            match slots[ai] {
                Slot::Lit { off, len } => out.extend_from(
                    &self.lits,
                    off as usize + (xi - starts[ai] - 1) as usize,
                    (u64::from(len) - (xi - starts[ai]) + 1) as usize,
                ),
                Slot::Var(v) => self.suffix_into(g, v, xi - starts[ai], &mut out, counters),
            }
            for slot in &slots[ai + 1..aj] {
                match *slot {
                    Slot::Lit { off, len } => {
                        out.extend_from(&self.lits, off as usize, len as usize)
                    }
                    Slot::Var(v) => self.decompress_into(g, v, &mut out, counters),
                }
            }
            match slots[aj] {
                Slot::Lit { off, .. } => out.extend_from(
                    &self.lits,
                    off as usize,
                    (xj - starts[aj]) as usize,
                ),
                Slot::Var(v) => self.prefix_into(g, v, xj - starts[aj], &mut out, counters),
            }
            debug_assert_eq!(out.len() as u64, j - i + 1);
            return Ok(out);
        }
    }
}

/// Frontier of `r` after `depth` levels: stop early at terminals and at
/// rules whose expansion fits one packed chunk.
fn collect_frontier(g: &Grammar, r: RuleId, depth: u32, w: u64, out: &mut Vec<(RuleId, u64)>) {
    if depth == 0 || g.exp_len(r) <= w {
        out.push((r, g.exp_len(r)));
        return;
    }
    match g.rule(r).kind {
        RuleKind::Term(_) => out.push((r, 1)),
        RuleKind::Pair(l, rt) => {
            collect_frontier(g, l, depth - 1, w, out);
            collect_frontier(g, rt, depth - 1, w, out);
        }
    }
}

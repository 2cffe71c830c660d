//! Substring extraction over the compressed string.
//!
//! Each rule stores its first and last `w = log2(N) / log2(sigma)` symbols
//! packed into machine words, plus three jump pointers:
//!
//! - The central pointer names a descendant whose expansion covers all of
//!   the rule's expansion except a prefix and suffix of at most `w` symbols
//!   each. Full-rule decompression follows central pointers and copies
//!   fringe words, visiting O(1 + len / w) nodes.
//! - The left and right jump pointers skip along the heavy path past runs of
//!   small light children whose combined weight fits in a fringe, so the
//!   one-sided zones walked during interval extraction also move w symbols
//!   per step.
//!
//! Interval extraction descends to the last common triplet of the two
//! endpoints and stitches the answer out of one suffix, one prefix, and
//! center-anchored zone walks between them.

use crate::bitpack::PackedString;
use crate::counters::Counters;
use crate::error::QueryError;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};
use crate::heavypath::{Exit, HeavyForest, PathExit, Side};

const NIL: u32 = u32::MAX;

/// Packed fringes and jump pointers for every rule; O(1) words per rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessIndex {
    pub(crate) w: u64,
    pub(crate) sym_bits: u32,
    pub(crate) left_fr: PackedString,
    pub(crate) right_fr: PackedString,
    pub(crate) central_rule: Vec<u32>,
    pub(crate) central_start: Vec<u64>,
    pub(crate) left_jump_rule: Vec<u32>,
    /// Symbols before the jump target's window; at most `w`.
    pub(crate) left_jump_prefix: Vec<u64>,
    pub(crate) right_jump_rule: Vec<u32>,
    /// Symbols after the jump target's window; at most `w`.
    pub(crate) right_jump_suffix: Vec<u64>,
}

/// Packed symbols per word for a text of length `n` over `sigma` symbols.
pub fn chunk_width(n: u64, sigma: u32) -> u64 {
    let sigma = sigma.max(2) as f64;
    let n = n.max(2) as f64;
    ((n.log2() / sigma.log2()).floor() as u64).clamp(1, 64)
}

/// Bits per packed symbol.
pub fn symbol_bits(sigma: u32) -> u32 {
    32 - sigma.max(2).saturating_sub(1).leading_zeros()
}

impl AccessIndex {
    pub fn build(g: &Grammar, f: &HeavyForest) -> Self {
        let n = g.num_rules();
        let w = chunk_width(g.text_len(), g.sigma());
        let sym_bits = symbol_bits(g.sigma());

        // Fringes assemble bottom-up from the children's fringes; every rule
        // occupies a fixed stride of w slots, zero-padded.
        let mut left_fr = PackedString::with_capacity(sym_bits, n * w as usize);
        let mut right_fr = PackedString::with_capacity(sym_bits, n * w as usize);
        for rule in g.rules() {
            let len = rule.exp_len;
            let flen = len.min(w);
            match rule.kind {
                RuleKind::Term(Symbol(c)) => {
                    left_fr.push(u64::from(c - 1));
                    right_fr.push(u64::from(c - 1));
                }
                RuleKind::Pair(l, r) => {
                    let (ll, rl) = (g.exp_len(l), g.exp_len(r));
                    // prefix: all of l's fringe, topped up from r's
                    let from_l = ll.min(flen);
                    left_fr.extend_from_self(l.idx() * w as usize, from_l as usize);
                    if from_l < flen {
                        left_fr.extend_from_self(r.idx() * w as usize, (flen - from_l) as usize);
                    }
                    // suffix: all of r's fringe, preceded by l's tail
                    let from_r = rl.min(flen);
                    if from_r < flen {
                        let l_take = flen - from_r;
                        let l_flen = ll.min(w);
                        right_fr.extend_from_self(
                            l.idx() * w as usize + (l_flen - l_take) as usize,
                            l_take as usize,
                        );
                    }
                    right_fr.extend_from_self(r.idx() * w as usize, from_r as usize);
                }
            }
            for _ in flen..w {
                left_fr.push(0);
                right_fr.push(0);
            }
        }

        let mut ix = AccessIndex {
            w,
            sym_bits,
            left_fr,
            right_fr,
            central_rule: vec![NIL; n],
            central_start: vec![0; n],
            left_jump_rule: vec![NIL; n],
            left_jump_prefix: vec![0; n],
            right_jump_rule: vec![NIL; n],
            right_jump_suffix: vec![0; n],
        };
        ix.build_central(g);
        ix.build_side_jumps(g, f);
        ix
    }

    /// Descend from each long rule, trimming sub-`w` children into the two
    /// fringe counters while they fit; where the trim stops is the central
    /// pointer. Rules whose children are both at least `w` long need none
    /// (decompression branches into both).
    fn build_central(&mut self, g: &Grammar) {
        let w = self.w;
        for (i, rule) in g.rules().iter().enumerate() {
            if rule.exp_len < 2 * w {
                continue;
            }
            let mut cl = 0u64;
            let mut cr = 0u64;
            let mut cur = RuleId(i as u32);
            loop {
                let RuleKind::Pair(l, r) = g.rule(cur).kind else {
                    break; // landed on a terminal; the fringes cover it
                };
                let (ll, rl) = (g.exp_len(l), g.exp_len(r));
                if ll >= w && rl >= w {
                    break;
                }
                if ll < w && rl < w {
                    break; // |cur| < 2w, covered by its own fringes
                }
                if ll < w {
                    if cl + ll > w {
                        break;
                    }
                    cl += ll;
                    cur = r;
                } else {
                    if cr + rl > w {
                        break;
                    }
                    cr += rl;
                    cur = l;
                }
            }
            if cur.idx() != i {
                self.central_rule[i] = cur.0;
                self.central_start[i] = cl + 1;
                debug_assert!(cl <= w && cr <= w);
                debug_assert_eq!(
                    rule.exp_len,
                    cl + g.exp_len(cur) + cr,
                    "central pointer splits the rule exactly"
                );
            }
        }
    }

    /// Left jump of a rule: the deepest heavy-path node whose accumulated
    /// left-hanging weight still fits in the fringe; stored only when the
    /// walk makes progress and the path's total left weight overflows `w`.
    fn build_side_jumps(&mut self, g: &Grammar, f: &HeavyForest) {
        let w = self.w;
        for i in 0..g.num_rules() {
            let r = RuleId(i as u32);
            let len = g.exp_len(r);
            let center = f.center(r);
            if center - 1 > w {
                let (node, cum, steps) = f.deepest_within_left_cum(r, w);
                if steps > 0 {
                    self.left_jump_rule[i] = node.0;
                    self.left_jump_prefix[i] = cum;
                }
            }
            if len - center > w {
                let (node, cum, steps) = f.deepest_within_right_cum(g, r, w);
                if steps > 0 {
                    self.right_jump_rule[i] = node.0;
                    self.right_jump_suffix[i] = cum;
                }
            }
        }
    }

    pub fn chunk_symbols(&self) -> u64 {
        self.w
    }

    pub fn central(&self, r: RuleId) -> Option<(RuleId, u64)> {
        (self.central_rule[r.idx()] != NIL)
            .then(|| (RuleId(self.central_rule[r.idx()]), self.central_start[r.idx()]))
    }

    pub fn left_jump(&self, r: RuleId) -> Option<(RuleId, u64)> {
        (self.left_jump_rule[r.idx()] != NIL)
            .then(|| (RuleId(self.left_jump_rule[r.idx()]), self.left_jump_prefix[r.idx()]))
    }

    pub fn right_jump(&self, r: RuleId) -> Option<(RuleId, u64)> {
        (self.right_jump_rule[r.idx()] != NIL)
            .then(|| (RuleId(self.right_jump_rule[r.idx()]), self.right_jump_suffix[r.idx()]))
    }

    /// First `k` symbols of `r`'s stored prefix fringe.
    pub fn fringe_prefix(&self, g: &Grammar, r: RuleId, k: u64) -> Vec<Symbol> {
        debug_assert!(k <= g.exp_len(r).min(self.w));
        let mut out = PackedString::new(self.sym_bits);
        self.emit_left_head(&mut out, r, k);
        packed_symbols(&out)
    }

    /// Last `k` symbols of `r`'s stored suffix fringe.
    pub fn fringe_suffix(&self, g: &Grammar, r: RuleId, k: u64) -> Vec<Symbol> {
        let mut out = PackedString::new(self.sym_bits);
        self.emit_right_tail(g, &mut out, r, k);
        packed_symbols(&out)
    }

    fn emit_left_head(&self, out: &mut PackedString, r: RuleId, k: u64) {
        out.extend_from(&self.left_fr, r.idx() * self.w as usize, k as usize);
    }

    fn emit_right_tail(&self, g: &Grammar, out: &mut PackedString, r: RuleId, k: u64) {
        let rlen = g.exp_len(r).min(self.w);
        debug_assert!(k <= rlen);
        out.extend_from(
            &self.right_fr,
            r.idx() * self.w as usize + (rlen - k) as usize,
            k as usize,
        );
    }

    /// Decompress `r`'s entire expansion. Iterative; the virtual
    /// decompression tree has O(1 + len / w) nodes.
    pub fn decompress_rule(&self, g: &Grammar, r: RuleId) -> PackedString {
        let mut out = PackedString::with_capacity(self.sym_bits, g.exp_len(r) as usize);
        self.decompress_rule_into(g, r, &mut out, &mut Counters::default());
        out
    }

    pub fn decompress_rule_counted(
        &self,
        g: &Grammar,
        r: RuleId,
        counters: &mut Counters,
    ) -> PackedString {
        let mut out = PackedString::with_capacity(self.sym_bits, g.exp_len(r) as usize);
        self.decompress_rule_into(g, r, &mut out, counters);
        out
    }

    fn decompress_rule_into(
        &self,
        g: &Grammar,
        r: RuleId,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        enum Item {
            Rule(RuleId),
            Tail(RuleId, u64),
        }
        let w = self.w;
        let mut stack = vec![Item::Rule(r)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Rule(r) => {
                    counters.decompress_nodes += 1;
                    let len = g.exp_len(r);
                    if len <= 2 * w {
                        let head = len.min(w);
                        self.emit_left_head(out, r, head);
                        self.emit_right_tail(g, out, r, len - head);
                    } else if let Some((c, start)) = self.central(r) {
                        self.emit_left_head(out, r, start - 1);
                        stack.push(Item::Tail(r, len - (start - 1) - g.exp_len(c)));
                        stack.push(Item::Rule(c));
                    } else {
                        let RuleKind::Pair(l, rt) = g.rule(r).kind else { unreachable!() };
                        stack.push(Item::Rule(rt));
                        stack.push(Item::Rule(l));
                    }
                }
                Item::Tail(r, k) => self.emit_right_tail(g, out, r, k),
            }
        }
    }

    /// Emit `expand(p)[1 ..= x-1]`: everything left of a heavy-path boundary.
    /// `x - 1` must be a pure left-hanging prefix (a window start of a path
    /// node, a left slab start, or the center).
    fn left_zone(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        mut p: RuleId,
        mut x: u64,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        let w = self.w;
        loop {
            let len = x - 1;
            if len == 0 {
                return;
            }
            counters.zone_steps += 1;
            if len <= w {
                self.emit_left_head(out, p, len);
                return;
            }
            if let Some((target, prefix)) = self.left_jump(p) {
                debug_assert!(x > prefix);
                self.emit_left_head(out, p, prefix);
                x -= prefix;
                p = target;
            } else {
                // no jump: the first step's light child hangs left and is
                // itself longer than a fringe, so copy it wholesale
                let q = f.light_child(p).expect("zones end before terminals");
                debug_assert_eq!(f.heavy_side(p), Some(Side::Right));
                debug_assert!(g.exp_len(q) > w && x > g.exp_len(q));
                self.decompress_rule_into(g, q, out, counters);
                x -= g.exp_len(q);
                p = f.heavy_child(p).unwrap();
            }
        }
    }

    /// Emit `expand(p)[pos+1 ..= |p|]`: everything right of a heavy-path
    /// boundary (window end of a path node, a right slab end, or the center).
    fn right_zone(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        mut p: RuleId,
        mut pos: u64,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        enum Item {
            Tail(RuleId, u64),
            Full(RuleId),
        }
        let w = self.w;
        let mut pending: Vec<Item> = Vec::new();
        loop {
            let zone = g.exp_len(p) - pos;
            if zone == 0 {
                break;
            }
            counters.zone_steps += 1;
            if zone <= w {
                pending.push(Item::Tail(p, zone));
                break;
            }
            if let Some((target, suffix)) = self.right_jump(p) {
                let win_start = g.exp_len(p) - suffix - g.exp_len(target);
                debug_assert!(pos >= win_start);
                pending.push(Item::Tail(p, suffix));
                pos -= win_start;
                p = target;
            } else {
                let q = f.light_child(p).expect("zones end before terminals");
                let h = f.heavy_child(p).unwrap();
                debug_assert_eq!(f.heavy_side(p), Some(Side::Left));
                debug_assert!(g.exp_len(q) > w && pos <= g.exp_len(h));
                pending.push(Item::Full(q));
                p = h;
            }
        }
        for item in pending.into_iter().rev() {
            match item {
                Item::Tail(r, k) => self.emit_right_tail(g, out, r, k),
                Item::Full(r) => self.decompress_rule_into(g, r, out, counters),
            }
        }
    }

    /// Emit `expand(r)[x ..= |r|]`.
    fn suffix_into(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        r: RuleId,
        x: u64,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        if x == 1 {
            self.decompress_rule_into(g, r, out, counters);
            return;
        }
        let rem = g.exp_len(r) - x + 1;
        if rem <= self.w {
            counters.zone_steps += 1;
            self.emit_right_tail(g, out, r, rem);
            return;
        }
        match f.exit(g, r, x, counters) {
            Exit::Center { pos, .. } => {
                out.push(u64::from(f.leaf_symbol(g, r).0 - 1));
                self.right_zone(g, f, r, pos, out, counters);
            }
            Exit::Light(pe) => {
                self.suffix_into(g, f, pe.light, pe.offset_in_light, out, counters);
                counters.light_transitions += 1;
                if pe.light_side == Side::Left {
                    let h = f.heavy_child(pe.exit_node).unwrap();
                    self.decompress_rule_into(g, h, out, counters);
                    self.right_zone(
                        g,
                        f,
                        r,
                        pe.exit_offset + g.exp_len(pe.exit_node),
                        out,
                        counters,
                    );
                } else {
                    self.right_zone(g, f, r, pe.light_end, out, counters);
                }
            }
        }
    }

    /// Emit `expand(r)[1 ..= y]`.
    fn prefix_into(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        r: RuleId,
        y: u64,
        out: &mut PackedString,
        counters: &mut Counters,
    ) {
        if y == g.exp_len(r) {
            self.decompress_rule_into(g, r, out, counters);
            return;
        }
        if y <= self.w {
            counters.zone_steps += 1;
            self.emit_left_head(out, r, y);
            return;
        }
        match f.exit(g, r, y, counters) {
            Exit::Center { pos, .. } => {
                self.left_zone(g, f, r, pos, out, counters);
                out.push(u64::from(f.leaf_symbol(g, r).0 - 1));
            }
            Exit::Light(pe) => {
                counters.light_transitions += 1;
                if pe.light_side == Side::Left {
                    self.left_zone(g, f, r, pe.light_start, out, counters);
                } else {
                    let h = f.heavy_child(pe.exit_node).unwrap();
                    self.left_zone(g, f, r, pe.exit_offset + 1, out, counters);
                    self.decompress_rule_into(g, h, out, counters);
                }
                self.prefix_into(g, f, pe.light, pe.offset_in_light, out, counters);
            }
        }
    }

    /// The substring `S[i ..= j]`, packed.
    pub fn extract(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        i: u64,
        j: u64,
    ) -> Result<PackedString, QueryError> {
        self.extract_counted(g, f, i, j, &mut Counters::default())
    }

    pub fn extract_counted(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        i: u64,
        j: u64,
        counters: &mut Counters,
    ) -> Result<PackedString, QueryError> {
        let n = g.text_len();
        if i < 1 || j > n || i > j {
            return Err(QueryError::PositionOutOfRange { pos: if i < 1 { i } else { j }, lo: 1, hi: n });
        }
        let mut out = PackedString::with_capacity(self.sym_bits, (j - i + 1) as usize);
        if i == j {
            let c = f.char_at(g, g.root(), i, counters)?;
            out.push(u64::from(c.0 - 1));
            return Ok(out);
        }
        // descend to the last common triplet
        let mut cur = g.root();
        let mut xi = i;
        let mut xj = j;
        let mut common = 0u64;
        let (a, b) = loop {
            let ei = f.exit(g, cur, xi, counters);
            let ej = f.exit(g, cur, xj, counters);
            match (ei, ej) {
                (Exit::Light(a), Exit::Light(b)) if a.light_start == b.light_start => {
                    debug_assert_eq!(a.light, b.light);
                    counters.light_transitions += 1;
                    common += 1;
                    cur = a.light;
                    xi = a.offset_in_light;
                    xj = b.offset_in_light;
                }
                pair => break pair,
            }
        };
        let heavy_of = |pe: &PathExit| f.heavy_child(pe.exit_node).unwrap();
        let side_chain = |counters: &mut Counters, run: &mut dyn FnMut(&mut Counters)| {
            let before = counters.light_transitions;
            run(counters);
            counters.light_transitions - before
        };
        let (tail_i, tail_j);
        match (a, b) {
            (Exit::Center { .. }, Exit::Light(b)) => {
                debug_assert_eq!(b.light_side, Side::Right);
                out.push(u64::from(f.leaf_symbol(g, cur).0 - 1));
                let hb = heavy_of(&b);
                self.right_zone(g, f, hb, f.center(hb), &mut out, counters);
                tail_i = 0;
                tail_j = 1 + side_chain(counters, &mut |c| {
                    self.prefix_into(g, f, b.light, b.offset_in_light, &mut out, c)
                });
            }
            (Exit::Light(a), Exit::Center { .. }) => {
                debug_assert_eq!(a.light_side, Side::Left);
                tail_i = 1 + side_chain(counters, &mut |c| {
                    self.suffix_into(g, f, a.light, a.offset_in_light, &mut out, c)
                });
                let ha = heavy_of(&a);
                self.left_zone(g, f, ha, f.center(ha), &mut out, counters);
                out.push(u64::from(f.leaf_symbol(g, cur).0 - 1));
                tail_j = 0;
            }
            (Exit::Light(a), Exit::Light(b)) => {
                tail_i = 1 + side_chain(counters, &mut |c| {
                    self.suffix_into(g, f, a.light, a.offset_in_light, &mut out, c)
                });
                match (a.light_side, b.light_side) {
                    (Side::Left, Side::Left) => {
                        let ha = heavy_of(&a);
                        self.left_zone(g, f, ha, b.light_start - a.light_end, &mut out, counters);
                    }
                    (Side::Right, Side::Right) => {
                        let hb = heavy_of(&b);
                        self.right_zone(g, f, hb, a.light_end - b.exit_offset, &mut out, counters);
                    }
                    (Side::Left, Side::Right) => {
                        let ha = heavy_of(&a);
                        self.left_zone(g, f, ha, f.center(ha), &mut out, counters);
                        out.push(u64::from(f.leaf_symbol(g, cur).0 - 1));
                        let hb = heavy_of(&b);
                        self.right_zone(g, f, hb, f.center(hb), &mut out, counters);
                    }
                    (Side::Right, Side::Left) => {
                        unreachable!("left-hanging slabs precede right-hanging slabs")
                    }
                }
                tail_j = 1 + side_chain(counters, &mut |c| {
                    self.prefix_into(g, f, b.light, b.offset_in_light, &mut out, c)
                });
            }
            _ => unreachable!("two distinct positions cannot both be the center"),
        }
        counters.note_chain(common + tail_i.max(tail_j));
        debug_assert_eq!(out.len() as u64, j - i + 1);
        Ok(out)
    }

    /// Single character access.
    pub fn access_char(
        &self,
        g: &Grammar,
        f: &HeavyForest,
        i: u64,
        counters: &mut Counters,
    ) -> Result<Symbol, QueryError> {
        f.char_at(g, g.root(), i, counters)
    }
}

/// Decode a packed buffer produced by this module into symbols.
pub fn packed_symbols(p: &PackedString) -> Vec<Symbol> {
    (0..p.len()).map(|i| Symbol(p.get(i) as u32 + 1)).collect()
}

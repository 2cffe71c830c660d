//! Counting distinct node-to-sink paths in a DAG via rank queries.
//!
//! The input DAG is normalized so every node has outdegree 0 or 2 under a
//! single source; reading the normalized DAG as a grammar (internal node =
//! pair rule, sink = terminal rule) generates a string whose length is the
//! total number of source-to-sink paths, and the number of `u -> v` paths
//! equals the number of occurrences of `v`'s terminal inside the leftmost
//! occurrence of `u`'s rule. That count is the difference of two rank
//! queries, answered by the plain rank machinery over the derived grammar.

use std::collections::HashMap;

use crate::counters::Counters;
use crate::error::DagError;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};
use crate::heavypath::HeavyForest;
use crate::rankselect::RankCounters;

/// Default ceiling on the derived string length (total path count).
pub const DEFAULT_MAX_PATHS: u64 = 1 << 48;

const NIL: u32 = u32::MAX;

/// A multigraph with named nodes and ordered edges (duplicates allowed).
#[derive(Debug, Clone, Default)]
pub struct InputDag {
    names: Vec<String>,
    index: HashMap<String, u32>,
    out: Vec<Vec<u32>>,
}

impl InputDag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add (or look up) a node by name.
    pub fn add_node(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.out.push(Vec::new());
        i
    }

    pub fn add_edge(&mut self, from: u32, to: u32) {
        self.out[from as usize].push(to);
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.out.iter().map(|e| e.len()).sum()
    }

    pub fn node_index(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn node_name(&self, i: u32) -> &str {
        &self.names[i as usize]
    }

    pub fn out_edges(&self, i: u32) -> &[u32] {
        &self.out[i as usize]
    }

    pub fn is_sink(&self, i: u32) -> bool {
        self.out[i as usize].is_empty()
    }

    pub fn sinks(&self) -> Vec<u32> {
        (0..self.num_nodes() as u32).filter(|&i| self.is_sink(i)).collect()
    }

    /// Topological order (sources first); `CyclicInput` if none exists,
    /// `NoSink` on an empty graph.
    pub fn topo_order(&self) -> Result<Vec<u32>, DagError> {
        let n = self.num_nodes();
        if n == 0 {
            return Err(DagError::NoSink);
        }
        let mut indeg = vec![0usize; n];
        for edges in &self.out {
            for &t in edges {
                indeg[t as usize] += 1;
            }
        }
        let mut queue: Vec<u32> =
            (0..n as u32).filter(|&i| indeg[i as usize] == 0).collect();
        let mut order = Vec::with_capacity(n);
        let mut at = 0;
        while at < queue.len() {
            let v = queue[at];
            at += 1;
            order.push(v);
            for &t in &self.out[v as usize] {
                indeg[t as usize] -= 1;
                if indeg[t as usize] == 0 {
                    queue.push(t);
                }
            }
        }
        if order.len() != n {
            return Err(DagError::CyclicInput);
        }
        Ok(order)
    }

    /// Parse the line-oriented format: `V <id>` declares a node, `E <a> <b>`
    /// an edge. Ids are arbitrary whitespace-free strings; edges declare
    /// their endpoints implicitly.
    pub fn parse_text(input: &str) -> Result<Self, DagError> {
        let mut dag = InputDag::new();
        for line in input.lines() {
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                [] => {}
                ["V", name] => {
                    dag.add_node(name);
                }
                ["E", a, b] => {
                    let fa = dag.add_node(a);
                    let fb = dag.add_node(b);
                    dag.add_edge(fa, fb);
                }
                _ => return Err(DagError::UnknownNode(line.to_string())),
            }
        }
        Ok(dag)
    }
}

/// The normalized DAG: outdegrees all 0 or 2, one source, and a map from
/// every original node to the surviving node generating the same paths.
#[derive(Debug, Clone)]
pub struct NormalizedDag {
    /// Children (ordered) per normalized node; sinks hold no entry.
    children: Vec<Option<[u32; 2]>>,
    /// Terminal symbol per normalized sink (assigned in input order).
    sink_symbol: Vec<u32>,
    root: u32,
    /// Original node -> normalized node preserving path counts.
    node_map: Vec<u32>,
    sigma: u32,
}

/// Normalize: collapse outdegree-1 chains (recording the mapping), add a
/// single source over all remaining sources, and split outdegree d >= 3 into
/// d - 2 binary intermediates. Edge order is preserved throughout, which
/// fixes the generated string uniquely.
pub fn normalize_dag(dag: &InputDag) -> Result<NormalizedDag, DagError> {
    let order = dag.topo_order()?;
    let n = dag.num_nodes();

    // Collapse outdegree-1 nodes onto their successors; sinks stay. Working
    // bottom-up makes the representative map compose in one pass.
    let mut rep = vec![NIL; n];
    for &v in order.iter().rev() {
        let edges = dag.out_edges(v);
        rep[v as usize] =
            if edges.len() == 1 { rep[edges[0] as usize] } else { v };
    }

    // Normalized node ids: retained originals first, then synthetics.
    let retained: Vec<u32> =
        (0..n as u32).filter(|&v| rep[v as usize] == v).collect();
    let mut norm_id = vec![NIL; n];
    for (i, &v) in retained.iter().enumerate() {
        norm_id[v as usize] = i as u32;
    }
    let mut children: Vec<Option<[u32; 2]>> = vec![None; retained.len()];
    let mut sink_symbol = vec![0u32; retained.len()];
    let mut next_symbol = 1u32;
    let push_node = |children: &mut Vec<Option<[u32; 2]>>,
                         sink_symbol: &mut Vec<u32>,
                         kids: Option<[u32; 2]>| {
        children.push(kids);
        sink_symbol.push(0);
        (children.len() - 1) as u32
    };

    // Split redirected out-edge lists into binary spines.
    for &v in &retained {
        let edges: Vec<u32> = dag
            .out_edges(v)
            .iter()
            .map(|&t| norm_id[rep[t as usize] as usize])
            .collect();
        match edges.len() {
            0 => {
                sink_symbol[norm_id[v as usize] as usize] = next_symbol;
                next_symbol += 1;
            }
            1 => unreachable!("outdegree-1 nodes were collapsed"),
            2 => children[norm_id[v as usize] as usize] = Some([edges[0], edges[1]]),
            d => {
                // v -> (e1, s1), s1 -> (e2, s2), ..., s_{d-2} -> (e_{d-1}, e_d)
                let mut spine = push_node(
                    &mut children,
                    &mut sink_symbol,
                    Some([edges[d - 2], edges[d - 1]]),
                );
                for k in (1..d - 2).rev() {
                    spine = push_node(&mut children, &mut sink_symbol, Some([edges[k], spine]));
                }
                children[norm_id[v as usize] as usize] = Some([edges[0], spine]);
            }
        }
    }

    // Single source. The root fans out over the images of the ORIGINAL
    // sources (one edge per source, in declaration order): collapsing an
    // outdegree-1 source onto its successor must not drop or merge its
    // paths, so indegree counts of the redirected graph are not the right
    // child set. With t >= 2 sources the spine uses t - 2 intermediates.
    let mut indeg = vec![0usize; n];
    for edges in (0..n as u32).map(|v| dag.out_edges(v)) {
        for &t in edges {
            indeg[t as usize] += 1;
        }
    }
    let sources: Vec<u32> = (0..n as u32)
        .filter(|&v| indeg[v as usize] == 0)
        .map(|v| norm_id[rep[v as usize] as usize])
        .collect();
    let root = match sources.len() {
        0 => unreachable!("acyclic graphs have a source"),
        1 => sources[0],
        t => {
            // root = (s0, (s1, ... (s_{t-2}, s_{t-1}))), t - 2 intermediates
            let mut spine = push_node(
                &mut children,
                &mut sink_symbol,
                Some([sources[t - 2], sources[t - 1]]),
            );
            for k in (0..t - 2).rev() {
                spine = push_node(&mut children, &mut sink_symbol, Some([sources[k], spine]));
            }
            spine
        }
    };

    let node_map = (0..n).map(|v| norm_id[rep[v] as usize]).collect();
    Ok(NormalizedDag { children, sink_symbol, root, node_map, sigma: next_symbol - 1 })
}

impl NormalizedDag {
    pub fn num_nodes(&self) -> usize {
        self.children.len()
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    /// Surviving normalized node for an original node.
    pub fn mapped(&self, original: u32) -> u32 {
        self.node_map[original as usize]
    }

    pub fn children(&self, v: u32) -> Option<[u32; 2]> {
        self.children[v as usize]
    }

    pub fn sink_symbol(&self, v: u32) -> Option<Symbol> {
        let s = self.sink_symbol[v as usize];
        (s != 0).then_some(Symbol(s))
    }

    /// Total source-to-sink path count of the original DAG, which is the
    /// length of the derived string. Errors if it exceeds `ceiling`.
    pub fn total_paths(&self, ceiling: u64) -> Result<u64, DagError> {
        let order = self.topo(); // children before parents
        let mut paths = vec![0u128; self.num_nodes()];
        for &v in &order {
            let total = match self.children[v as usize] {
                None => 1,
                Some([a, b]) => paths[a as usize] + paths[b as usize],
            };
            if total > ceiling as u128 {
                return Err(DagError::TooManyPaths(ceiling));
            }
            paths[v as usize] = total;
        }
        Ok(paths[self.root as usize] as u64)
    }

    /// Topological order with children first, restricted to nodes reachable
    /// from the root.
    fn topo(&self) -> Vec<u32> {
        let n = self.num_nodes();
        let mut state = vec![0u8; n];
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                state[v as usize] = 2;
                order.push(v);
                continue;
            }
            if state[v as usize] != 0 {
                continue;
            }
            state[v as usize] = 1;
            stack.push((v, true));
            if let Some([a, b]) = self.children[v as usize] {
                for c in [a, b] {
                    if state[c as usize] == 0 {
                        stack.push((c, false));
                    }
                }
            }
        }
        order
    }

    /// Read the normalized DAG as a CNF grammar. Returns the grammar and the
    /// rule id of every normalized node (NIL-free for reachable nodes).
    pub fn to_grammar(&self, ceiling: u64) -> Result<(Grammar, Vec<u32>), DagError> {
        self.total_paths(ceiling)?;
        let order = self.topo();
        let mut rule_of = vec![NIL; self.num_nodes()];
        let mut kinds = Vec::with_capacity(order.len());
        for &v in &order {
            let kind = match self.children[v as usize] {
                None => RuleKind::Term(Symbol(self.sink_symbol[v as usize])),
                Some([a, b]) => {
                    RuleKind::Pair(RuleId(rule_of[a as usize]), RuleId(rule_of[b as usize]))
                }
            };
            rule_of[v as usize] = kinds.len() as u32;
            kinds.push(kind);
        }
        let root = RuleId(rule_of[self.root as usize]);
        let g = Grammar::new(kinds, root, self.sigma).expect("derived grammar is well formed");
        Ok((g, rule_of))
    }
}

/// Start and end (1-based, inclusive) of each rule's leftmost occurrence in
/// the expansion of the root. Top-down minimum propagation in O(n).
pub fn build_leftmost(g: &Grammar) -> Vec<(u64, u64)> {
    let n = g.num_rules();
    let mut start = vec![u64::MAX; n];
    start[g.root().idx()] = 1;
    for i in (0..n).rev() {
        if start[i] == u64::MAX {
            continue;
        }
        if let RuleKind::Pair(l, r) = g.rule(RuleId(i as u32)).kind {
            start[l.idx()] = start[l.idx()].min(start[i]);
            start[r.idx()] = start[r.idx()].min(start[i] + g.exp_len(l));
        }
    }
    (0..n)
        .map(|i| {
            let s = start[i];
            (s, s + g.exp_len(RuleId(i as u32)) - 1)
        })
        .collect()
}

/// The assembled reduction: normalized DAG metadata, derived grammar, its
/// heavy decomposition, rank counters, and leftmost-occurrence intervals.
#[derive(Debug, Clone)]
pub struct PathCountIndex {
    pub(crate) names: Vec<String>,
    pub(crate) name_index: HashMap<String, u32>,
    pub(crate) original_is_sink: Vec<bool>,
    pub(crate) node_map: Vec<u32>,
    pub(crate) rule_of: Vec<u32>,
    pub(crate) sink_symbol: Vec<u32>,
    pub(crate) grammar: Grammar,
    pub(crate) forest: HeavyForest,
    pub(crate) ranks: RankCounters,
    pub(crate) leftmost: Vec<(u64, u64)>,
}

impl PathCountIndex {
    pub fn build(dag: &InputDag, ceiling: u64) -> Result<Self, DagError> {
        let nd = normalize_dag(dag)?;
        let (grammar, rule_of) = nd.to_grammar(ceiling)?;
        let forest = HeavyForest::build(&grammar);
        let ranks = RankCounters::build(&grammar, &forest);
        let leftmost = build_leftmost(&grammar);
        let n = dag.num_nodes();
        Ok(PathCountIndex {
            names: (0..n as u32).map(|i| dag.node_name(i).to_string()).collect(),
            name_index: (0..n as u32)
                .map(|i| (dag.node_name(i).to_string(), i))
                .collect(),
            original_is_sink: (0..n as u32).map(|i| dag.is_sink(i)).collect(),
            node_map: (0..n as u32).map(|v| nd.mapped(v)).collect(),
            sink_symbol: (0..nd.num_nodes() as u32)
                .map(|v| nd.sink_symbol(v).map_or(0, |s| s.0))
                .collect(),
            rule_of,
            grammar,
            forest,
            ranks,
            leftmost,
        })
    }

    /// Length of the derived string = total source-to-sink path count.
    pub fn total_paths(&self) -> u64 {
        self.grammar.text_len()
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    /// Number of distinct `u -> v` paths (v must be a sink of the original
    /// DAG). Two rank queries over the derived grammar.
    pub fn count_paths(&self, u: &str, v: &str) -> Result<u64, DagError> {
        self.count_paths_counted(u, v, &mut Counters::default())
    }

    pub fn count_paths_counted(
        &self,
        u: &str,
        v: &str,
        counters: &mut Counters,
    ) -> Result<u64, DagError> {
        let ui = *self
            .name_index
            .get(u)
            .ok_or_else(|| DagError::UnknownNode(u.to_string()))?;
        let vi = *self
            .name_index
            .get(v)
            .ok_or_else(|| DagError::UnknownNode(v.to_string()))?;
        if !self.original_is_sink[vi as usize] {
            return Err(DagError::NotASink(v.to_string()));
        }
        if ui == vi {
            return Ok(1); // the empty path
        }
        let c = Symbol(self.sink_symbol[self.node_map[vi as usize] as usize]);
        let rule = RuleId(self.rule_of[self.node_map[ui as usize] as usize]);
        let (i, j) = self.leftmost[rule.idx()];
        let hi = self
            .ranks
            .rank_counted(&self.grammar, &self.forest, c, j, counters)
            .expect("leftmost intervals are in range");
        let lo = self
            .ranks
            .rank_counted(&self.grammar, &self.forest, c, i - 1, counters)
            .expect("leftmost intervals are in range");
        Ok(hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_count_paths;

    fn dag(edges: &[(&str, &str)]) -> InputDag {
        let mut d = InputDag::new();
        for (a, b) in edges {
            let fa = d.add_node(a);
            let fb = d.add_node(b);
            d.add_edge(fa, fb);
        }
        d
    }

    #[test]
    fn chain_collapses_into_the_sink() {
        // a -> b -> s: both a and b have outdegree 1 and collapse onto s.
        let d = dag(&[("a", "b"), ("b", "s")]);
        let nd = normalize_dag(&d).unwrap();
        let s = d.node_index("s").unwrap();
        assert_eq!(nd.mapped(d.node_index("a").unwrap()), nd.mapped(s));
        assert_eq!(nd.mapped(d.node_index("b").unwrap()), nd.mapped(s));
        assert_eq!(nd.total_paths(DEFAULT_MAX_PATHS).unwrap(), 1);
    }

    #[test]
    fn outdegree_three_gets_one_intermediate() {
        let d = dag(&[("u", "s1"), ("u", "s2"), ("u", "s3")]);
        let nd = normalize_dag(&d).unwrap();
        // 4 original nodes retained + exactly d - 2 = 1 intermediate
        assert_eq!(nd.num_nodes(), 5);
        assert_eq!(nd.total_paths(DEFAULT_MAX_PATHS).unwrap(), 3);
    }

    #[test]
    fn two_sources_need_no_intermediates() {
        let d = dag(&[("u", "s"), ("u", "s"), ("w", "s"), ("w", "s")]);
        let nd = normalize_dag(&d).unwrap();
        // u, w, s retained; one fresh root; t - 2 = 0 intermediates
        assert_eq!(nd.num_nodes(), 4);
        assert_eq!(nd.total_paths(DEFAULT_MAX_PATHS).unwrap(), 4);
    }

    #[test]
    fn double_edge_generates_ss() {
        let d = dag(&[("u", "s"), ("u", "s")]);
        let nd = normalize_dag(&d).unwrap();
        let (g, _) = nd.to_grammar(DEFAULT_MAX_PATHS).unwrap();
        assert_eq!(g.text_len(), 2);
        let text = g.expand_naive(g.root());
        assert_eq!(text, vec![text[0]; 2], "both characters are the same sink");
    }

    #[test]
    fn diamond_counts() {
        let d = dag(&[("u", "v"), ("u", "w"), ("v", "s"), ("w", "s")]);
        let ix = PathCountIndex::build(&d, DEFAULT_MAX_PATHS).unwrap();
        assert_eq!(ix.total_paths(), 2);
        assert_eq!(ix.count_paths("u", "s").unwrap(), 2);
        assert_eq!(ix.count_paths("v", "s").unwrap(), 1);
        assert_eq!(ix.count_paths("s", "s").unwrap(), 1, "empty path convention");
    }

    #[test]
    fn three_path_listing() {
        // paths u-v-s1, u-w-s1, u-w-s2
        let d = dag(&[("u", "v"), ("u", "w"), ("v", "s1"), ("w", "s1"), ("w", "s2")]);
        let ix = PathCountIndex::build(&d, DEFAULT_MAX_PATHS).unwrap();
        assert_eq!(ix.total_paths(), 3);
        assert_eq!(ix.count_paths("u", "s1").unwrap(), 2);
        assert_eq!(ix.count_paths("u", "s2").unwrap(), 1);
        assert_eq!(ix.count_paths("w", "s1").unwrap(), 1);
        assert_eq!(ix.count_paths("v", "s2").unwrap(), 0);
    }

    #[test]
    fn leftmost_intervals_are_real_occurrences() {
        let text = crate::corpus::versioned_text(4, 512, 8, 21);
        let g = crate::repair::build_grammar(&text, 4).unwrap();
        let leftmost = build_leftmost(&g);
        let full = g.expand_naive(g.root());
        assert_eq!(leftmost[g.root().idx()], (1, g.text_len()));
        for r in 0..g.num_rules() {
            let (i, j) = leftmost[r];
            let sub = g.expand_naive(RuleId(r as u32));
            assert_eq!(&full[i as usize - 1..j as usize], &sub[..], "rule {r}");
        }
    }

    #[test]
    fn leftmost_of_left_child_of_root() {
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
        let lm = build_leftmost(&g);
        assert_eq!(lm[2], (1, 2), "left child of the root's leftmost copy");
    }

    #[test]
    fn cyclic_input_rejected() {
        let d = dag(&[("a", "b"), ("b", "a")]);
        assert_eq!(normalize_dag(&d).err(), Some(DagError::CyclicInput));
    }

    #[test]
    fn ceiling_guards_expansion() {
        // 40 stacked double edges: 2^40 paths
        let mut d = InputDag::new();
        let nodes: Vec<u32> = (0..41).map(|i| d.add_node(&format!("n{i}"))).collect();
        for i in 0..40 {
            d.add_edge(nodes[i], nodes[i + 1]);
            d.add_edge(nodes[i], nodes[i + 1]);
        }
        assert!(matches!(
            PathCountIndex::build(&d, 1 << 20),
            Err(DagError::TooManyPaths(_))
        ));
        let ix = PathCountIndex::build(&d, 1 << 41).unwrap();
        assert_eq!(ix.total_paths(), 1 << 40);
        assert_eq!(ix.count_paths("n0", "n40").unwrap(), 1 << 40);
    }

    #[test]
    fn random_small_dags_match_dfs_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for trial in 0..60 {
            let n = rng.random_range(2usize..=8);
            let mut d = InputDag::new();
            let ids: Vec<u32> = (0..n).map(|i| d.add_node(&format!("v{i}"))).collect();
            let m = rng.random_range(1usize..=16);
            for _ in 0..m {
                let a = rng.random_range(0..n - 1);
                let b = rng.random_range(a + 1..n); // forward edges keep it acyclic
                d.add_edge(ids[a], ids[b]);
            }
            let Ok(ix) = PathCountIndex::build(&d, DEFAULT_MAX_PATHS) else {
                continue;
            };
            for u in 0..n {
                for s in 0..n as u32 {
                    if !d.is_sink(s) {
                        continue;
                    }
                    let want = naive_count_paths(&d, &format!("v{u}"), d.node_name(s)).unwrap();
                    let got = ix.count_paths(&format!("v{u}"), d.node_name(s)).unwrap();
                    assert_eq!(got as u128, want, "trial {trial}: v{u} -> {}", d.node_name(s));
                }
            }
        }
    }
}

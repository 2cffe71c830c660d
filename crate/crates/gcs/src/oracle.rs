//! Brute-force reference implementations used by tests and the CLI's
//! `--oracle` cross-check. Deliberately simple, and independent of every
//! index code path: answers come from plain scans over the expanded text.

use crate::error::DagError;
use crate::grammar::Symbol;
use crate::pathcount::InputDag;

/// Occurrences of `c` among the first `i` symbols (1-based, inclusive).
pub fn naive_rank(text: &[Symbol], c: Symbol, i: u64) -> u64 {
    text[..i as usize].iter().filter(|&&s| s == c).count() as u64
}

/// Position (1-based) of the `k`-th occurrence of `c`, or `None`.
pub fn naive_select(text: &[Symbol], c: Symbol, k: u64) -> Option<u64> {
    if k == 0 {
        return None;
    }
    let mut seen = 0u64;
    for (idx, &s) in text.iter().enumerate() {
        if s == c {
            seen += 1;
            if seen == k {
                return Some(idx as u64 + 1);
            }
        }
    }
    None
}

/// The substring `text[i..=j]` in 1-based inclusive coordinates.
pub fn naive_access(text: &[Symbol], i: u64, j: u64) -> &[Symbol] {
    &text[i as usize - 1..j as usize]
}

/// Number of distinct `u -> v` paths, counting parallel edges separately.
/// `v` must be a sink. Computed by dynamic programming over a topological
/// order of the input DAG.
pub fn naive_count_paths(dag: &InputDag, u: &str, v: &str) -> Result<u128, DagError> {
    let ui = dag.node_index(u).ok_or_else(|| DagError::UnknownNode(u.to_string()))?;
    let vi = dag.node_index(v).ok_or_else(|| DagError::UnknownNode(v.to_string()))?;
    if !dag.out_edges(vi).is_empty() {
        return Err(DagError::NotASink(v.to_string()));
    }
    let order = dag.topo_order()?;
    let mut paths = vec![0u128; dag.num_nodes()];
    paths[vi as usize] = 1;
    for &x in order.iter().rev() {
        if x == vi {
            continue;
        }
        let mut total = 0u128;
        for &succ in dag.out_edges(x) {
            total += paths[succ as usize];
        }
        paths[x as usize] = total;
    }
    Ok(paths[ui as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| Symbol((b - b'a' + 1) as u32)).collect()
    }

    #[test]
    fn rank_of_empty_prefix_is_zero() {
        let t = syms("abracadabra");
        for c in 1..=26 {
            assert_eq!(naive_rank(&t, Symbol(c), 0), 0);
        }
        assert_eq!(naive_rank(&t, Symbol(1), 11), 5);
    }

    #[test]
    fn select_then_rank_is_identity() {
        let t = syms("abracadabra");
        for c in 1..=26u32 {
            let total = naive_rank(&t, Symbol(c), t.len() as u64);
            for k in 1..=total {
                let pos = naive_select(&t, Symbol(c), k).unwrap();
                assert_eq!(naive_rank(&t, Symbol(c), pos), k);
            }
            assert_eq!(naive_select(&t, Symbol(c), total + 1), None);
        }
    }

    #[test]
    fn count_paths_basics() {
        let mut d = InputDag::new();
        let u = d.add_node("u");
        let v = d.add_node("v");
        d.add_edge(u, v);
        assert_eq!(naive_count_paths(&d, "u", "v").unwrap(), 1);
        d.add_edge(u, v); // parallel edge counts separately
        assert_eq!(naive_count_paths(&d, "u", "v").unwrap(), 2);

        let mut dia = InputDag::new();
        let a = dia.add_node("a");
        let b = dia.add_node("b");
        let c = dia.add_node("c");
        let s = dia.add_node("s");
        dia.add_edge(a, b);
        dia.add_edge(a, c);
        dia.add_edge(b, s);
        dia.add_edge(c, s);
        assert_eq!(naive_count_paths(&dia, "a", "s").unwrap(), 2);
    }
}

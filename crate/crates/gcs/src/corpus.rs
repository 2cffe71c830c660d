//! Deterministic text generators for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grammar::Symbol;

/// Uniform random text over `1..=sigma`.
pub fn random_text(sigma: u32, n: usize, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Symbol(rng.random_range(1..=sigma))).collect()
}

/// `n` copies of symbol 1.
pub fn unary_text(n: usize) -> Vec<Symbol> {
    vec![Symbol(1); n]
}

/// Prefix of the Fibonacci word over symbols {1, 2}.
pub fn fibonacci_word(n: usize) -> Vec<Symbol> {
    let mut prev = vec![Symbol(2)];
    let mut cur = vec![Symbol(1)];
    while cur.len() < n {
        let mut next = cur.clone();
        next.extend_from_slice(&prev);
        prev = cur;
        cur = next;
    }
    cur.truncate(n.max(1));
    cur
}

/// Versioned-document-style text: a random seed document followed by mutated
/// copies (point substitutions plus occasional short indels), truncated or
/// padded to exactly `n` symbols.
pub fn versioned_text(sigma: u32, n: usize, copies: usize, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc_len = (n / copies.max(1)).max(1);
    let base: Vec<Symbol> = (0..doc_len).map(|_| Symbol(rng.random_range(1..=sigma))).collect();
    let mut out = Vec::with_capacity(n + doc_len);
    out.extend_from_slice(&base);
    while out.len() < n {
        let mut copy = base.clone();
        let mutations = (doc_len / 100).max(1);
        for _ in 0..mutations {
            let at = rng.random_range(0..copy.len());
            match rng.random_range(0..3u8) {
                0 => copy[at] = Symbol(rng.random_range(1..=sigma)),
                1 => copy.insert(at, Symbol(rng.random_range(1..=sigma))),
                _ => {
                    if copy.len() > 1 {
                        copy.remove(at);
                    }
                }
            }
        }
        out.extend_from_slice(&copy);
    }
    out.truncate(n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_hit_requested_lengths() {
        assert_eq!(random_text(4, 100, 1).len(), 100);
        assert_eq!(unary_text(7), vec![Symbol(1); 7]);
        assert_eq!(fibonacci_word(1), vec![Symbol(1)]);
        let fib = fibonacci_word(13);
        assert_eq!(fib.len(), 13);
        // 1 2 1 1 2 1 2 1 ... (s(n) = s(n-1) s(n-2) with s1 = 1, s0 = 2)
        assert_eq!(fib[..5].iter().map(|s| s.0).collect::<Vec<_>>(), vec![1, 2, 1, 1, 2]);
        assert_eq!(versioned_text(26, 1000, 10, 3).len(), 1000);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_text(26, 64, 9), random_text(26, 64, 9));
        assert_eq!(versioned_text(4, 256, 8, 9), versioned_text(4, 256, 8, 9));
    }
}

//! Property tests for the crate-wide invariants.

use gcs::access::packed_symbols;
use gcs::format::{self, IndexFile};
use gcs::grammar::Symbol;
use gcs::index::{Engine, IndexOptions, TextIndex};
use gcs::oracle::{naive_rank, naive_select};
use gcs::repair::build_grammar;
use proptest::prelude::*;

fn arb_text(max_sigma: u32, max_len: usize) -> impl Strategy<Value = (u32, Vec<Symbol>)> {
    (1..=max_sigma).prop_flat_map(move |sigma| {
        (
            Just(sigma),
            prop::collection::vec((1..=sigma).prop_map(Symbol), 1..max_len),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builder_roundtrips_any_text((sigma, text) in arb_text(12, 300)) {
        let g = build_grammar(&text, sigma).unwrap();
        prop_assert!(g.validate().is_ok());
        prop_assert_eq!(g.expand_naive(g.root()), text);
        prop_assert_eq!(g.text_len(), g.expand_naive(g.root()).len() as u64);
    }

    #[test]
    fn serialized_indexes_answer_identically((sigma, text) in arb_text(8, 200), balanced in any::<bool>()) {
        let opts = IndexOptions {
            engine: if balanced { Engine::Balanced } else { Engine::Unbalanced },
            epsilon: 0.5,
        };
        let ix = TextIndex::build_from_text(&text, sigma, opts).unwrap();
        let IndexFile::Text(back) = format::read_index(&format::write_text_index(&ix)).unwrap()
        else { unreachable!() };
        let n = text.len() as u64;
        for i in 1..=n {
            prop_assert_eq!(back.access_char(i).unwrap(), ix.access_char(i).unwrap());
        }
        for c in 1..=sigma {
            let c = Symbol(c);
            prop_assert_eq!(back.rank(c, n).unwrap(), ix.rank(c, n).unwrap());
        }
    }

    #[test]
    fn queries_match_scans_on_arbitrary_texts((sigma, text) in arb_text(6, 400), balanced in any::<bool>()) {
        let opts = IndexOptions {
            engine: if balanced { Engine::Balanced } else { Engine::Unbalanced },
            epsilon: 0.5,
        };
        let ix = TextIndex::build_from_text(&text, sigma, opts).unwrap();
        let n = text.len() as u64;
        let mut counters = gcs::counters::Counters::default();
        let whole = ix.access_packed(1, n, &mut counters).unwrap();
        prop_assert_eq!(packed_symbols(&whole), text.clone());
        for c in 1..=sigma {
            let c = Symbol(c);
            for i in [0, 1, n / 2, n] {
                prop_assert_eq!(ix.rank(c, i).unwrap(), naive_rank(&text, c, i));
            }
            let total = naive_rank(&text, c, n);
            if total > 0 {
                prop_assert_eq!(ix.select(c, 1).unwrap(), naive_select(&text, c, 1).unwrap());
                prop_assert_eq!(ix.select(c, total).unwrap(), naive_select(&text, c, total).unwrap());
                prop_assert!(ix.select(c, total + 1).is_err());
            }
        }
    }
}

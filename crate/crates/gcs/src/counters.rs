//! Per-query instrumentation counters.
//!
//! Every query path threads a [`Counters`] through so tests and the bench
//! command can check the structural work bounds (light transitions per
//! descent, decompression-tree nodes, ancestor-table steps).

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Counters {
    /// Descents into a light child (one per triplet).
    pub light_transitions: u64,
    /// Ancestor jump-table iterations during path searches.
    pub lift_steps: u64,
    /// Nodes of the virtual decompression tree.
    pub decompress_nodes: u64,
    /// Expanded-fanout nodes visited (balanced engine).
    pub visited_nodes: u64,
    /// Steps of fringe/jump zone walks during extraction.
    pub zone_steps: u64,
    /// Longest single descent chain (light transitions of one triplet
    /// sequence) observed; this is the quantity bounded by log2(N).
    pub max_chain: u64,
}

impl Counters {
    pub fn total_work(&self) -> u64 {
        self.light_transitions
            + self.lift_steps
            + self.decompress_nodes
            + self.visited_nodes
            + self.zone_steps
    }

    pub fn note_chain(&mut self, chain: u64) {
        self.max_chain = self.max_chain.max(chain);
    }
}

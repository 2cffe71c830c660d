//! Binary index files.
//!
//! Layout (see FORMAT.md at the repository root): a fixed header with magic,
//! version, kind byte, payload length and a CRC-64 of the payload, followed
//! by the payload. Integers are fixed-width little-endian 64-bit; boolean
//! and fringe arrays are packed bit arrays. The checksum is verified before
//! any structure is parsed.

use std::path::Path;

use crate::access::AccessIndex;
use crate::balanced::{BalancedIndex, Slot};
use crate::bitpack::PackedString;
use crate::grammar::{Grammar, RuleId, RuleKind, Symbol};
use crate::heavypath::HeavyForest;
use crate::index::{EngineIndex, TextIndex};
use crate::pathcount::PathCountIndex;
use crate::rankselect::{CharDag, CharDags, RankCounters, RankSelectIndex};

pub const MAGIC: &[u8; 4] = b"GCSX";
pub const VERSION: u64 = 1;

const KIND_UNBALANCED: u64 = 0;
const KIND_BALANCED: u64 = 1;
const KIND_PATHCOUNT: u64 = 2;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u64),
    #[error("checksum mismatch: file is corrupt")]
    ChecksumMismatch,
    #[error("truncated or malformed index file: {0}")]
    Corrupt(&'static str),
    #[error("stored grammar is invalid: {0}")]
    InvalidGrammar(#[from] crate::error::GrammarError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Either kind of index file.
pub enum IndexFile {
    Text(TextIndex),
    PathCount(PathCountIndex),
}

// ---------------------------------------------------------------- checksum

const CRC64_POLY: u64 = 0x42F0_E1EB_A9EA_3693;

const fn crc64_table() -> [u64; 256] {
    let mut table = [0u64; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u64) << 56;
        let mut b = 0;
        while b < 8 {
            crc = if crc & (1 << 63) != 0 { (crc << 1) ^ CRC64_POLY } else { crc << 1 };
            b += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

static CRC64_TABLE: [u64; 256] = crc64_table();

/// CRC-64/ECMA-182. Any single-bit flip changes the value.
pub fn crc64(data: &[u8]) -> u64 {
    let mut crc = 0u64;
    for &byte in data {
        crc = CRC64_TABLE[(((crc >> 56) ^ u64::from(byte)) & 0xFF) as usize] ^ (crc << 8);
    }
    crc
}

// ------------------------------------------------------------- primitives

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64s(&mut self, vs: &[u64]) {
        self.u64(vs.len() as u64);
        for &v in vs {
            self.u64(v);
        }
    }

    fn ids(&mut self, vs: &[u32]) {
        self.u64(vs.len() as u64);
        for &v in vs {
            self.u64(u64::from(v));
        }
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    fn bits(&mut self, vs: &[bool]) {
        self.u64(vs.len() as u64);
        let mut word = 0u64;
        for (i, &b) in vs.iter().enumerate() {
            if b {
                word |= 1 << (i % 64);
            }
            if i % 64 == 63 {
                self.u64(word);
                word = 0;
            }
        }
        if vs.len() % 64 != 0 {
            self.u64(word);
        }
    }

    fn packed(&mut self, p: &PackedString) {
        self.u64(u64::from(p.width()));
        self.u64(p.len() as u64);
        self.u64(p.words().len() as u64);
        for &w in p.words() {
            self.u64(w);
        }
    }

    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.buf.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        let end = self.pos + 8;
        if end > self.buf.len() {
            return Err(FormatError::Corrupt("unexpected end of payload"));
        }
        let v = u64::from_le_bytes(self.buf[self.pos..end].try_into().unwrap());
        self.pos = end;
        Ok(v)
    }

    fn len(&mut self, width: usize) -> Result<usize, FormatError> {
        let n = self.u64()? as usize;
        if n.saturating_mul(width) > self.buf.len() - self.pos {
            return Err(FormatError::Corrupt("length field exceeds payload"));
        }
        Ok(n)
    }

    fn u64s(&mut self) -> Result<Vec<u64>, FormatError> {
        let n = self.len(8)?;
        (0..n).map(|_| self.u64()).collect()
    }

    fn ids(&mut self) -> Result<Vec<u32>, FormatError> {
        let n = self.len(8)?;
        (0..n)
            .map(|_| {
                let v = self.u64()?;
                u32::try_from(v).map_err(|_| FormatError::Corrupt("id exceeds 32 bits"))
            })
            .collect()
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn bits(&mut self) -> Result<Vec<bool>, FormatError> {
        let n = self.len(0)?;
        let words = n.div_ceil(64);
        if words * 8 > self.buf.len() - self.pos {
            return Err(FormatError::Corrupt("bit array exceeds payload"));
        }
        let mut out = Vec::with_capacity(n);
        let mut word = 0u64;
        for i in 0..n {
            if i % 64 == 0 {
                word = self.u64()?;
            }
            out.push(word & (1 << (i % 64)) != 0);
        }
        Ok(out)
    }

    fn packed(&mut self) -> Result<PackedString, FormatError> {
        let width = self.u64()?;
        if !(1..=32).contains(&width) {
            return Err(FormatError::Corrupt("bad packed width"));
        }
        let len = self.u64()? as usize;
        let nwords = self.len(8)?;
        if nwords * 64 < len * width as usize {
            return Err(FormatError::Corrupt("packed words too short for length"));
        }
        let words = (0..nwords).map(|_| self.u64()).collect::<Result<Vec<_>, _>>()?;
        Ok(PackedString::from_raw(words, width as u32, len))
    }

    fn str(&mut self) -> Result<String, FormatError> {
        let n = self.len(1)?;
        let end = self.pos + n;
        let s = std::str::from_utf8(&self.buf[self.pos..end])
            .map_err(|_| FormatError::Corrupt("bad utf-8 in string"))?
            .to_string();
        self.pos = end;
        Ok(s)
    }

    fn finish(&self) -> Result<(), FormatError> {
        if self.pos != self.buf.len() {
            return Err(FormatError::Corrupt("trailing bytes in payload"));
        }
        Ok(())
    }
}

// -------------------------------------------------------------- structures

fn write_grammar(w: &mut Writer, g: &Grammar) {
    w.u64(u64::from(g.sigma()));
    w.u64(g.root().0.into());
    w.u64(g.num_rules() as u64);
    for rule in g.rules() {
        match rule.kind {
            RuleKind::Term(Symbol(c)) => {
                w.u64(0);
                w.u64(u64::from(c));
            }
            RuleKind::Pair(l, r) => {
                w.u64(1);
                w.u64(u64::from(l.0));
                w.u64(u64::from(r.0));
            }
        }
    }
}

fn read_grammar(r: &mut Reader) -> Result<Grammar, FormatError> {
    let sigma = r.u64()? as u32;
    let root = r.u64()? as u32;
    let n = r.len(16)?;
    let mut kinds = Vec::with_capacity(n);
    for _ in 0..n {
        let kind = match r.u64()? {
            0 => RuleKind::Term(Symbol(r.u64()? as u32)),
            1 => RuleKind::Pair(RuleId(r.u64()? as u32), RuleId(r.u64()? as u32)),
            _ => return Err(FormatError::Corrupt("unknown rule tag")),
        };
        kinds.push(kind);
    }
    Ok(Grammar::new(kinds, RuleId(root), sigma)?)
}

fn write_forest(w: &mut Writer, f: &HeavyForest) {
    w.ids(&f.heavy);
    w.ids(&f.light);
    w.bits(&f.heavy_is_left);
    w.u64s(&f.center);
    w.ids(&f.leaf);
    w.ids(&f.path_len);
    w.u64(u64::from(f.levels));
    w.ids(&f.anc);
    w.u64s(&f.left_cum);
}

fn read_forest(r: &mut Reader) -> Result<HeavyForest, FormatError> {
    Ok(HeavyForest {
        heavy: r.ids()?,
        light: r.ids()?,
        heavy_is_left: r.bits()?,
        center: r.u64s()?,
        leaf: r.ids()?,
        path_len: r.ids()?,
        levels: r.u64()? as u32,
        anc: r.ids()?,
        left_cum: r.u64s()?,
    })
}

fn write_access(w: &mut Writer, a: &AccessIndex) {
    w.u64(a.w);
    w.u64(u64::from(a.sym_bits));
    w.packed(&a.left_fr);
    w.packed(&a.right_fr);
    w.ids(&a.central_rule);
    w.u64s(&a.central_start);
    w.ids(&a.left_jump_rule);
    w.u64s(&a.left_jump_prefix);
    w.ids(&a.right_jump_rule);
    w.u64s(&a.right_jump_suffix);
}

fn read_access(r: &mut Reader) -> Result<AccessIndex, FormatError> {
    Ok(AccessIndex {
        w: r.u64()?,
        sym_bits: r.u64()? as u32,
        left_fr: r.packed()?,
        right_fr: r.packed()?,
        central_rule: r.ids()?,
        central_start: r.u64s()?,
        left_jump_rule: r.ids()?,
        left_jump_prefix: r.u64s()?,
        right_jump_rule: r.ids()?,
        right_jump_suffix: r.u64s()?,
    })
}

fn write_ranks(w: &mut Writer, rc: &RankCounters) {
    w.u64(u64::from(rc.sigma));
    w.u64s(&rc.v);
    w.u64s(&rc.total);
}

fn read_ranks(r: &mut Reader) -> Result<RankCounters, FormatError> {
    Ok(RankCounters { sigma: r.u64()? as u32, v: r.u64s()?, total: r.u64s()? })
}

fn write_chardag(w: &mut Writer, d: &CharDag) {
    w.ids(&d.orig);
    w.ids(&d.left);
    w.ids(&d.right);
    w.u64s(&d.count);
    w.u64s(&d.count_left);
    w.u64s(&d.pos_left);
    w.u64s(&d.pos_right);
    w.bits(&d.heavy_is_left);
    w.u64s(&d.center_ord);
    w.u64s(&d.u_pos);
    w.ids(&d.path_len);
    w.u64(u64::from(d.levels));
    w.ids(&d.anc);
    w.u64s(&d.ord_cum);
    w.u64s(&d.pos_cum);
    w.u64(u64::from(d.root_node));
    w.u64(d.root_shift);
}

fn read_chardag(r: &mut Reader) -> Result<CharDag, FormatError> {
    Ok(CharDag {
        orig: r.ids()?,
        left: r.ids()?,
        right: r.ids()?,
        count: r.u64s()?,
        count_left: r.u64s()?,
        pos_left: r.u64s()?,
        pos_right: r.u64s()?,
        heavy_is_left: r.bits()?,
        center_ord: r.u64s()?,
        u_pos: r.u64s()?,
        path_len: r.ids()?,
        levels: r.u64()? as u32,
        anc: r.ids()?,
        ord_cum: r.u64s()?,
        pos_cum: r.u64s()?,
        root_node: r.u64()? as u32,
        root_shift: r.u64()?,
    })
}

fn write_balanced(w: &mut Writer, b: &BalancedIndex) {
    w.f64(b.epsilon);
    w.u64(u64::from(b.depth));
    w.u64(b.w);
    w.u64(b.fringe_len);
    w.u64(u64::from(b.sym_bits));
    w.u64(u64::from(b.sigma));
    w.ids(&b.slot_start);
    w.u64(b.slots.len() as u64);
    for slot in &b.slots {
        match *slot {
            Slot::Var(r) => {
                w.u64(0);
                w.u64(u64::from(r.0));
            }
            Slot::Lit { off, len } => {
                w.u64(1);
                w.u64(u64::from(off));
                w.u64(u64::from(len));
            }
        }
    }
    w.u64s(&b.starts);
    w.packed(&b.lits);
    w.packed(&b.fringe_l);
    w.packed(&b.fringe_r);
    w.u64s(&b.totals);
    w.u64(u64::from(b.height));
}

fn read_balanced(r: &mut Reader) -> Result<BalancedIndex, FormatError> {
    let epsilon = r.f64()?;
    let depth = r.u64()? as u32;
    let w = r.u64()?;
    let fringe_len = r.u64()?;
    let sym_bits = r.u64()? as u32;
    let sigma = r.u64()? as u32;
    let slot_start = r.ids()?;
    let nslots = r.len(16)?;
    let mut slots = Vec::with_capacity(nslots);
    for _ in 0..nslots {
        slots.push(match r.u64()? {
            0 => Slot::Var(RuleId(r.u64()? as u32)),
            1 => Slot::Lit { off: r.u64()? as u32, len: r.u64()? as u32 },
            _ => return Err(FormatError::Corrupt("unknown slot tag")),
        });
    }
    Ok(BalancedIndex {
        epsilon,
        depth,
        w,
        fringe_len,
        sym_bits,
        sigma,
        slot_start,
        slots,
        starts: r.u64s()?,
        lits: r.packed()?,
        fringe_l: r.packed()?,
        fringe_r: r.packed()?,
        totals: r.u64s()?,
        height: r.u64()? as u32,
    })
}

// -------------------------------------------------------------- top level

fn frame(kind: u64, payload: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 40);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&crc64(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

fn open_frame(bytes: &[u8]) -> Result<(u64, &[u8]), FormatError> {
    if bytes.len() < 36 || &bytes[..4] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    if version != VERSION {
        return Err(FormatError::BadVersion(version));
    }
    let kind = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let len = u64::from_le_bytes(bytes[20..28].try_into().unwrap()) as usize;
    let stored = u64::from_le_bytes(bytes[28..36].try_into().unwrap());
    let payload = &bytes[36..];
    if payload.len() != len {
        return Err(FormatError::Corrupt("payload length mismatch"));
    }
    if crc64(payload) != stored {
        return Err(FormatError::ChecksumMismatch);
    }
    Ok((kind, payload))
}

/// Serialize a text index.
pub fn write_text_index(ix: &TextIndex) -> Vec<u8> {
    let mut w = Writer::default();
    write_grammar(&mut w, &ix.grammar);
    let kind = match &ix.engine {
        EngineIndex::Unbalanced { forest, access, rankselect } => {
            write_forest(&mut w, forest);
            write_access(&mut w, access);
            write_ranks(&mut w, &rankselect.ranks);
            w.u64(u64::from(rankselect.selects.sigma));
            w.u64(rankselect.selects.dags.len() as u64);
            for d in &rankselect.selects.dags {
                write_chardag(&mut w, d);
            }
            KIND_UNBALANCED
        }
        EngineIndex::Balanced { index } => {
            write_balanced(&mut w, index);
            KIND_BALANCED
        }
    };
    frame(kind, w.buf)
}

/// Serialize a path-count index.
pub fn write_pathcount_index(ix: &PathCountIndex) -> Vec<u8> {
    let mut w = Writer::default();
    w.u64(ix.names.len() as u64);
    for name in &ix.names {
        w.str(name);
    }
    w.bits(&ix.original_is_sink);
    w.ids(&ix.node_map);
    w.ids(&ix.rule_of);
    w.ids(&ix.sink_symbol);
    write_grammar(&mut w, &ix.grammar);
    write_forest(&mut w, &ix.forest);
    write_ranks(&mut w, &ix.ranks);
    w.u64(ix.leftmost.len() as u64);
    for &(a, b) in &ix.leftmost {
        w.u64(a);
        w.u64(b);
    }
    frame(KIND_PATHCOUNT, w.buf)
}

/// Parse any index file; the checksum is verified before parsing.
pub fn read_index(bytes: &[u8]) -> Result<IndexFile, FormatError> {
    let (kind, payload) = open_frame(bytes)?;
    let mut r = Reader::new(payload);
    match kind {
        KIND_UNBALANCED => {
            let grammar = read_grammar(&mut r)?;
            let forest = read_forest(&mut r)?;
            let access = read_access(&mut r)?;
            let ranks = read_ranks(&mut r)?;
            let sigma = r.u64()? as u32;
            let ndags = r.len(8)?;
            let mut dags = Vec::with_capacity(ndags);
            for _ in 0..ndags {
                dags.push(read_chardag(&mut r)?);
            }
            r.finish()?;
            Ok(IndexFile::Text(TextIndex {
                grammar,
                engine: EngineIndex::Unbalanced {
                    forest,
                    access,
                    rankselect: RankSelectIndex { ranks, selects: CharDags { sigma, dags } },
                },
            }))
        }
        KIND_BALANCED => {
            let grammar = read_grammar(&mut r)?;
            let index = read_balanced(&mut r)?;
            r.finish()?;
            Ok(IndexFile::Text(TextIndex { grammar, engine: EngineIndex::Balanced { index } }))
        }
        KIND_PATHCOUNT => {
            let n = r.len(8)?;
            let names = (0..n).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
            let original_is_sink = r.bits()?;
            let node_map = r.ids()?;
            let rule_of = r.ids()?;
            let sink_symbol = r.ids()?;
            let grammar = read_grammar(&mut r)?;
            let forest = read_forest(&mut r)?;
            let ranks = read_ranks(&mut r)?;
            let nlm = r.len(16)?;
            let leftmost =
                (0..nlm).map(|_| Ok((r.u64()?, r.u64()?))).collect::<Result<Vec<_>, FormatError>>()?;
            r.finish()?;
            let name_index =
                names.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
            Ok(IndexFile::PathCount(PathCountIndex {
                names,
                name_index,
                original_is_sink,
                node_map,
                rule_of,
                sink_symbol,
                grammar,
                forest,
                ranks,
                leftmost,
            }))
        }
        _ => Err(FormatError::Corrupt("unknown index kind")),
    }
}

pub fn save(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<IndexFile, FormatError> {
    let bytes = std::fs::read(path)?;
    read_index(&bytes)
}

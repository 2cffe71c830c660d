//! `gcs`: build, query and benchmark grammar-compressed string indexes.
//!
//! Bytes map to symbols as `symbol = byte + 1` (the alphabet is 1-based);
//! query symbols are single byte literals (or `\xHH`) while the alphabet
//! fits in a byte, decimal symbol codes otherwise.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gcs::counters::Counters;
use gcs::format::{self, IndexFile};
use gcs::grammar::{Grammar, Symbol};
use gcs::index::{Engine, IndexOptions, TextIndex};
use gcs::pathcount::{InputDag, PathCountIndex, DEFAULT_MAX_PATHS};

#[derive(Parser)]
#[command(name = "gcs", version, about = "rank/select/access on grammar-compressed strings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an index from a byte file (or a GCS1 grammar file) and print
    /// build stats as key=value lines.
    Build(BuildArgs),
    /// Run queries against an index: `access i j`, `rank c i`, `select c k`,
    /// `pathcount u v`. Batch processing continues past per-line errors.
    Query(QueryArgs),
    /// Run a seeded random workload and emit per-query instrumentation
    /// counters as CSV.
    #[command(long_about = "Run a seeded random workload and emit one CSV row per query.\n\
        Columns: op,arg1,arg2,answer,light_transitions,lift_steps,decompress_nodes,\n\
        visited_nodes,zone_steps,max_chain\n\
        - light_transitions: descents into light children (triplet steps)\n\
        - lift_steps: ancestor jump-table iterations\n\
        - decompress_nodes: nodes of the virtual decompression tree\n\
        - visited_nodes: expanded-fanout nodes visited (balanced engine)\n\
        - zone_steps: fringe/jump zone walk steps during extraction\n\
        - max_chain: longest single triplet chain in the query\n\
        For `--op extract` the answer column holds the extracted length.")]
    Bench(BenchArgs),
    /// Path counting in DAGs via the grammar reduction.
    Pathcount {
        #[command(subcommand)]
        cmd: PathCmd,
    },
}

#[derive(Args)]
struct BuildArgs {
    /// Input byte file (each byte becomes one symbol).
    input: Option<PathBuf>,
    /// Output index file.
    #[arg(short, long)]
    output: PathBuf,
    /// Build the expanded-fanout engine instead of the heavy-path engine.
    #[arg(long)]
    balanced: bool,
    /// Expansion exponent for the balanced engine.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Read a GCS1 grammar file instead of compressing the input bytes.
    #[arg(long)]
    grammar_in: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Index file produced by `build` or `pathcount build`.
    index: PathBuf,
    /// A single inline query, e.g. `rank a 5`.
    query: Vec<String>,
    /// File with one query per line.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Cross-check every answer against a naive scan of the decompressed
    /// text (text indexes only; intended for small inputs).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct BenchArgs {
    index: PathBuf,
    /// Workload: access | extract | rank | select.
    #[arg(long)]
    op: String,
    /// Number of queries.
    #[arg(long, default_value_t = 1000)]
    count: u64,
    /// RNG seed; identical seeds give identical workloads.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extract length for `--op extract`.
    #[arg(long, default_value_t = 64)]
    len: u64,
}

#[derive(Subcommand)]
enum PathCmd {
    /// Build a path-count index from a `V <id>` / `E <a> <b>` edge list.
    /// The ceiling on the total path count is 2^48, overridable through
    /// the GCS_MAX_PATHS environment variable.
    Build {
        dagfile: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Count distinct paths from NODE to SINK.
    Query { index: PathBuf, node: String, sink: String },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Build(args) => build(args),
        Cmd::Query(args) => query(args),
        Cmd::Bench(args) => bench(args),
        Cmd::Pathcount { cmd } => pathcount(cmd),
    }
}

fn text_symbols(bytes: &[u8]) -> Vec<Symbol> {
    bytes.iter().map(|&b| Symbol(u32::from(b) + 1)).collect()
}

fn build(args: BuildArgs) -> Result<ExitCode, String> {
    let opts = IndexOptions {
        engine: if args.balanced { Engine::Balanced } else { Engine::Unbalanced },
        epsilon: args.epsilon,
    };
    let ix = if let Some(gpath) = &args.grammar_in {
        let text = std::fs::read_to_string(gpath).map_err(|e| format!("{}: {e}", gpath.display()))?;
        let g = Grammar::from_text(&text).map_err(|e| format!("invalid grammar file: {e}"))?;
        TextIndex::from_grammar(g, opts).map_err(|e| format!("invalid grammar: {e}"))?
    } else {
        let input = args.input.as_ref().ok_or("either an input file or --grammar-in is required")?;
        let bytes = std::fs::read(input).map_err(|e| format!("{}: {e}", input.display()))?;
        if bytes.is_empty() {
            return Err("input file is empty".into());
        }
        TextIndex::build_from_text(&text_symbols(&bytes), 256, opts)
            .map_err(|e| format!("build failed: {e}"))?
    };
    let bytes = format::write_text_index(&ix);
    format::save(&args.output, &bytes).map_err(|e| e.to_string())?;
    let s = ix.stats();
    println!("n={}", s.n_rules);
    println!("N={}", s.text_len);
    println!("sigma={}", s.sigma);
    println!("height={}", s.height);
    println!("bytes={}", bytes.len());
    println!(
        "engine={}",
        match ix.engine() {
            Engine::Unbalanced => "unbalanced",
            Engine::Balanced => "balanced",
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_symbol(tok: &str, sigma: u32) -> Result<Symbol, String> {
    if sigma <= 256 {
        if let Some(hex) = tok.strip_prefix("\\x") {
            let b = u8::from_str_radix(hex, 16).map_err(|_| format!("bad byte escape {tok:?}"))?;
            return Ok(Symbol(u32::from(b) + 1));
        }
        let bytes = tok.as_bytes();
        if bytes.len() == 1 {
            return Ok(Symbol(u32::from(bytes[0]) + 1));
        }
        Err(format!("expected a byte literal, got {tok:?}"))
    } else {
        let code: u32 = tok.parse().map_err(|_| format!("bad symbol code {tok:?}"))?;
        if code == 0 || code > sigma {
            return Err(format!("symbol code {code} outside 1..={sigma}"));
        }
        Ok(Symbol(code))
    }
}

fn symbols_to_display(sigma: u32, syms: &[Symbol]) -> String {
    if sigma <= 256 {
        let bytes: Vec<u8> = syms.iter().map(|s| (s.0 - 1) as u8).collect();
        String::from_utf8_lossy(&bytes).into_owned()
    } else {
        syms.iter().map(|s| s.0.to_string()).collect::<Vec<_>>().join(" ")
    }
}

enum LoadedIndex {
    Text(TextIndex),
    Path(PathCountIndex),
}

fn answer_query(
    ix: &LoadedIndex,
    oracle_text: Option<&[Symbol]>,
    line: &str,
) -> Result<String, String> {
    let tok: Vec<&str> = line.split_whitespace().collect();
    let parse_num = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number {s:?}"));
    match (ix, tok.as_slice()) {
        (_, []) => Ok(String::new()),
        (LoadedIndex::Text(ix), ["access", i, j]) => {
            let (i, j) = (parse_num(i)?, parse_num(j)?);
            let syms = ix.access(i, j).map_err(|e| e.to_string())?;
            if let Some(text) = oracle_text {
                if syms != text[i as usize - 1..j as usize] {
                    return Err("oracle mismatch".into());
                }
            }
            Ok(symbols_to_display(ix.sigma(), &syms))
        }
        (LoadedIndex::Text(ix), ["rank", c, i]) => {
            let c = parse_symbol(c, ix.sigma())?;
            let i = parse_num(i)?;
            let r = ix.rank(c, i).map_err(|e| e.to_string())?;
            if let Some(text) = oracle_text {
                if r != gcs::oracle::naive_rank(text, c, i) {
                    return Err("oracle mismatch".into());
                }
            }
            Ok(r.to_string())
        }
        (LoadedIndex::Text(ix), ["select", c, k]) => {
            let c = parse_symbol(c, ix.sigma())?;
            let k = parse_num(k)?;
            let p = ix.select(c, k).map_err(|e| e.to_string())?;
            if let Some(text) = oracle_text {
                if Some(p) != gcs::oracle::naive_select(text, c, k) {
                    return Err("oracle mismatch".into());
                }
            }
            Ok(p.to_string())
        }
        (LoadedIndex::Path(ix), ["pathcount", u, v]) => {
            ix.count_paths(u, v).map(|n| n.to_string()).map_err(|e| e.to_string())
        }
        (LoadedIndex::Text(_), ["pathcount", ..]) => {
            Err("pathcount queries need an index built by `gcs pathcount build`".into())
        }
        (LoadedIndex::Path(_), [op, ..]) if ["access", "rank", "select"].contains(op) => {
            Err("path-count indexes only answer `pathcount u v` queries".into())
        }
        _ => Err(format!("unrecognized query {line:?}")),
    }
}

fn query(args: QueryArgs) -> Result<ExitCode, String> {
    let loaded = match format::load(&args.index).map_err(|e| e.to_string())? {
        IndexFile::Text(ix) => LoadedIndex::Text(ix),
        IndexFile::PathCount(ix) => LoadedIndex::Path(ix),
    };
    let oracle_text = if args.oracle {
        match &loaded {
            LoadedIndex::Text(ix) => {
                Some(ix.grammar().expand_naive(ix.grammar().root()))
            }
            LoadedIndex::Path(_) => {
                return Err("--oracle supports text indexes only".into());
            }
        }
    } else {
        None
    };
    let mut lines: Vec<String> = Vec::new();
    if !args.query.is_empty() {
        lines.push(args.query.join(" "));
    }
    if let Some(script) = &args.script {
        let body = std::fs::read_to_string(script).map_err(|e| format!("{}: {e}", script.display()))?;
        lines.extend(body.lines().map(|l| l.to_string()));
    }
    if lines.is_empty() {
        return Err("no query given (inline or --script)".into());
    }
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        match answer_query(&loaded, oracle_text.as_deref(), &line) {
            Ok(ans) => println!("{line} -> {ans}"),
            Err(e) if e == "oracle mismatch" => {
                return Err(format!("oracle mismatch on {line:?}"));
            }
            Err(e) => println!("{line} -> error: {e}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode, String> {
    let IndexFile::Text(ix) = format::load(&args.index).map_err(|e| e.to_string())? else {
        return Err("bench runs against text indexes".into());
    };
    let n = ix.text_len();
    let sigma = ix.sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    println!(
        "op,arg1,arg2,answer,light_transitions,lift_steps,decompress_nodes,visited_nodes,zone_steps,max_chain"
    );
    // present characters, for rank/select workloads
    let present: Vec<Symbol> = if args.op == "rank" || args.op == "select" {
        (1..=sigma)
            .map(Symbol)
            .filter(|&c| ix.rank(c, n).unwrap_or(0) > 0)
            .collect()
    } else {
        Vec::new()
    };
    for _ in 0..args.count {
        let mut c = Counters::default();
        let (a1, a2, answer) = match args.op.as_str() {
            "access" => {
                let i = rng.random_range(1..=n);
                let ch = ix.access_char_counted(i, &mut c).map_err(|e| e.to_string())?;
                (i, i, u64::from(ch.0))
            }
            "extract" => {
                let m = args.len.min(n);
                let i = rng.random_range(1..=n - m + 1);
                let j = i + m - 1;
                let out = ix.access_packed(i, j, &mut c).map_err(|e| e.to_string())?;
                (i, j, out.len() as u64)
            }
            "rank" => {
                let ch = present[rng.random_range(0..present.len())];
                let i = rng.random_range(0..=n);
                (u64::from(ch.0), i, ix.rank_counted(ch, i, &mut c).map_err(|e| e.to_string())?)
            }
            "select" => {
                let ch = present[rng.random_range(0..present.len())];
                let total = ix.rank(ch, n).unwrap();
                let k = rng.random_range(1..=total);
                (u64::from(ch.0), k, ix.select_counted(ch, k, &mut c).map_err(|e| e.to_string())?)
            }
            other => return Err(format!("unknown workload {other:?}")),
        };
        println!(
            "{},{},{},{},{},{},{},{},{},{}",
            args.op,
            a1,
            a2,
            answer,
            c.light_transitions,
            c.lift_steps,
            c.decompress_nodes,
            c.visited_nodes,
            c.zone_steps,
            c.max_chain
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn pathcount(cmd: PathCmd) -> Result<ExitCode, String> {
    match cmd {
        PathCmd::Build { dagfile, output } => {
            let body =
                std::fs::read_to_string(&dagfile).map_err(|e| format!("{}: {e}", dagfile.display()))?;
            let dag = InputDag::parse_text(&body).map_err(|e| e.to_string())?;
            let ceiling = match std::env::var("GCS_MAX_PATHS") {
                Ok(v) => v.parse::<u64>().map_err(|_| "bad GCS_MAX_PATHS value".to_string())?,
                Err(_) => DEFAULT_MAX_PATHS,
            };
            let ix = PathCountIndex::build(&dag, ceiling).map_err(|e| e.to_string())?;
            let bytes = format::write_pathcount_index(&ix);
            format::save(&output, &bytes).map_err(|e| e.to_string())?;
            println!("nodes={}", dag.num_nodes());
            println!("edges={}", dag.num_edges());
            println!("N={}", ix.total_paths());
            println!("n={}", ix.grammar().num_rules());
            println!("sigma={}", ix.grammar().sigma());
            println!("bytes={}", bytes.len());
            Ok(ExitCode::SUCCESS)
        }
        PathCmd::Query { index, node, sink } => {
            let IndexFile::PathCount(ix) = format::load(&index).map_err(|e| e.to_string())? else {
                return Err("not a path-count index".into());
            };
            let count = ix.count_paths(&node, &sink).map_err(|e| e.to_string())?;
            println!("pathcount {node} {sink} -> {count}");
            Ok(ExitCode::SUCCESS)
        }
    }
}



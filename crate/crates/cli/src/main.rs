use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dg_core::generator::{generate_dg_with, GeneratorConfig, KindChoice};
use dg_core::{
    canonical_code, is_isomorphic, parse_graph, recognize, replay, similarity_report, BatchItem, CanonError, Format,
    GraphDocument, GraphError, IoError, Verdict,
};

/// Recognize, fingerprint and compare structured control-flow graphs.
///
/// Exit status: 0 for DIJKSTRA / MATCH, 1 for NOT-DIJKSTRA, NOT-FLOW-GRAPH or
/// NO-MATCH, 2 for unreadable input or usage errors.
#[derive(Parser)]
#[command(name = "dg", version)]
struct Cli {
    /// Graph file format. Defaults to the file extension (.json, .dot, .gv),
    /// then to json.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Suppress traces (witness steps, provenance, progress lines).
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a graph is a Dijkstra graph.
    Check {
        file: PathBuf,
        /// Print the contraction steps, one per line.
        #[arg(long)]
        witness: bool,
        /// Replay the contraction steps and confirm where they end.
        #[arg(long)]
        verify_witness: bool,
    },
    /// Print the canonical code of a Dijkstra graph.
    Canon {
        file: PathBuf,
        /// Also print the vertex behind every `1` token.
        #[arg(long)]
        provenance: bool,
    },
    /// Decide whether two Dijkstra graphs are isomorphic.
    Iso { first: PathBuf, second: PathBuf },
    /// Generate a random Dijkstra graph.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Minimum number of vertices.
        #[arg(long)]
        size: usize,
        /// Statement kinds to draw from (sequence, if-then, if-then-else,
        /// case, caseN, while, repeat). Defaults to all, uniformly.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<KindChoice>,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the full expansion script as JSON to this file.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Group all graph files of a directory by canonical code.
    Batch {
        dir: PathBuf,
        /// Include a vertex mapping for every pair in a cluster.
        #[arg(long)]
        mappings: bool,
    },
}

/// Result of a command that ran to completion: `true` maps to exit status 0.
type Outcome = Result<bool, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("dg: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Check {
            file,
            witness,
            verify_witness,
        } => check(cli, file, *witness, *verify_witness),
        Command::Canon { file, provenance } => canon(cli, file, *provenance),
        Command::Iso { first, second } => iso(cli, first, second),
        Command::Gen {
            seed,
            size,
            kinds,
            output,
            script,
        } => gen(cli, *seed, *size, kinds, output.as_deref(), script.as_deref()),
        Command::Batch { dir, mappings } => batch(cli, dir, *mappings),
    }
}

/// Reads a graph file. Self-loops and parallel edges make the input a
/// non-Dijkstra graph rather than an unreadable one.
fn load(path: &Path, format: Option<Format>) -> Result<Result<GraphDocument, Verdict>, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let format = format.or_else(|| Format::from_path(path)).unwrap_or_default();
    match parse_graph(&bytes, format) {
        Ok(doc) => Ok(Ok(doc)),
        Err(
            err @ IoError::Graph {
                error: GraphError::SelfLoop(_) | GraphError::ParallelEdge(..),
                ..
            },
        ) => Ok(Err(Verdict::malformed(err.to_string()))),
        Err(err) => Err(format!("{}: {err}", path.display())),
    }
}

fn check(cli: &Cli, file: &Path, witness: bool, verify: bool) -> Outcome {
    let doc = match load(file, cli.format)? {
        Ok(doc) => doc,
        Err(verdict) => {
            println!("{verdict}");
            return Ok(false);
        }
    };
    let g = &doc.graph;
    let verdict = recognize(g);
    println!("{verdict}");
    if witness && !cli.quiet {
        for (i, step) in verdict.trace.steps().iter().enumerate() {
            let members: Vec<&str> = step.members().iter().map(|&v| g.name(v)).collect();
            println!(
                "{}. {} at {}: {}",
                i + 1,
                step.kind(),
                g.name(step.source()),
                members.join(" ")
            );
        }
    }
    if verify {
        let end = replay(g, &verdict.trace).map_err(|e| format!("witness replay failed: {e}"))?;
        if end.is_trivial() != verdict.is_dijkstra() {
            return Err("witness replay disagrees with the verdict".into());
        }
        if !cli.quiet {
            let n = end.vertex_count();
            println!(
                "witness verified: replay ends with {n} vertex{}",
                if n == 1 { "" } else { "es" }
            );
        }
    }
    Ok(verdict.is_dijkstra())
}

fn canon(cli: &Cli, file: &Path, provenance: bool) -> Outcome {
    let doc = match load(file, cli.format)? {
        Ok(doc) => doc,
        Err(verdict) => {
            println!("{verdict}");
            return Ok(false);
        }
    };
    match canonical_code(&doc.graph) {
        Ok(code) => {
            println!("{code}");
            if provenance && !cli.quiet {
                for &(pos, v) in code.provenance() {
                    println!("{pos} {}", doc.graph.name(v));
                }
            }
            Ok(true)
        }
        Err(CanonError::NotDijkstra(verdict)) => {
            println!("{verdict}");
            Ok(false)
        }
        Err(other) => Err(other.to_string()),
    }
}

fn iso(cli: &Cli, first: &Path, second: &Path) -> Outcome {
    let a = load(first, cli.format)?;
    let b = load(second, cli.format)?;
    let (a, b) = match (a, b) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(verdict), _) => return not_dijkstra(1, &verdict),
        (Ok(_), Err(verdict)) => return not_dijkstra(2, &verdict),
    };
    match is_isomorphic(&a.graph, &b.graph) {
        Ok(Some(mapping)) => {
            println!("MATCH");
            for &(x, y) in mapping.pairs() {
                println!("{} -> {}", a.graph.name(x), b.graph.name(y));
            }
            Ok(true)
        }
        Ok(None) => {
            println!("NO-MATCH");
            Ok(false)
        }
        Err(CanonError::OperandNotDijkstra { which, verdict }) => not_dijkstra(which, &verdict),
        Err(other) => Err(other.to_string()),
    }
}

fn not_dijkstra(which: usize, verdict: &Verdict) -> Outcome {
    println!("graph {which} is not a Dijkstra graph: {verdict}");
    Ok(false)
}

fn gen(
    cli: &Cli,
    seed: u64,
    size: usize,
    kinds: &[KindChoice],
    output: Option<&Path>,
    script_path: Option<&Path>,
) -> Outcome {
    if size == 0 {
        return Err("--size must be at least 1".into());
    }
    let config = if kinds.is_empty() {
        GeneratorConfig::default()
    } else {
        GeneratorConfig::uniform(kinds)
    };
    let (g, script) = generate_dg_with(seed, size, &config);
    let mut doc = GraphDocument::new(format!("gen-{seed}-{size}"), g);
    doc.metadata.insert("seed".into(), seed.to_string());
    doc.metadata.insert("size".into(), size.to_string());
    doc.metadata.insert("script".into(), script.summary());
    let format = cli
        .format
        .or_else(|| output.and_then(Format::from_path))
        .unwrap_or_default();
    let text = doc.serialize(format);
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
            if !cli.quiet {
                println!(
                    "wrote {}: n={} m={} expansions={}",
                    path.display(),
                    doc.graph.vertex_count(),
                    doc.graph.edge_count(),
                    script.steps.len()
                );
            }
        }
        None => print!("{text}"),
    }
    if let Some(path) = script_path {
        let mut json = serde_json::to_string_pretty(&script).map_err(|e| e.to_string())?;
        json.push('\n');
        fs::write(path, json).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(true)
}

fn batch(cli: &Cli, dir: &Path, mappings: bool) -> Outcome {
    let listing = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut items = Vec::new();
    for entry in listing {
        let path = entry.map_err(|e| format!("{}: {e}", dir.display()))?.path();
        let Some(found) = Format::from_path(&path) else {
            continue;
        };
        if cli.format.is_some_and(|f| f != found) || !path.is_file() {
            continue;
        }
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let item = match load(&path, Some(found)) {
            Ok(Ok(doc)) => BatchItem::Graph(doc.graph),
            Ok(Err(verdict)) => BatchItem::Rejected(verdict),
            Err(message) => BatchItem::Unreadable(message),
        };
        items.push((name, item));
    }
    print!("{}", similarity_report(items, mappings).to_json());
    Ok(true)
}

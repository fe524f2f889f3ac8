//! Command-line front end and HTTP service for the query engine.

pub mod api;
pub mod server;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use exemplar_core::eval::{read_suite, run_suite, write_report};
use exemplar_core::{DataGraph, Engine, QueryParams};

#[derive(Debug, Parser)]
#[command(name = "exemplar", version, about = "Query a knowledge graph by example entity tuples")]
pub struct Cli {
    /// Tab-separated triple file.
    #[arg(long, global = true, env = "GQBE_TRIPLES")]
    pub triples: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and index the triples, then print their statistics.
    Load,
    /// Rank answer tuples similar to the example tuples.
    Query(QueryArgs),
    /// Run a JSON-lines query suite and write a CSV accuracy report.
    Eval(EvalArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Example tuple, entity names separated by `|`. Repeat for more tuples.
    #[arg(long = "tuple", required = true)]
    pub tuples: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long = "kprime", default_value_t = 100)]
    pub k_prime: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 15)]
    pub r: usize,
    /// Print answers as JSON.
    #[arg(long)]
    pub json: bool,
    /// Write the reduced neighborhood(s) here.
    #[arg(long)]
    pub dump_neighborhood: Option<PathBuf>,
    /// Write the maximal query graph here.
    #[arg(long)]
    pub dump_mqg: Option<PathBuf>,
    /// Print lattice events to stderr.
    #[arg(long)]
    pub trace_lattice: bool,
    /// Disable data-parallel joins.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub suite: PathBuf,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long = "kprime", default_value_t = 100)]
    pub k_prime: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 15)]
    pub r: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}

/// Splits `"A|B"` into trimmed names.
pub fn parse_tuple(raw: &str) -> anyhow::Result<Vec<String>> {
    let names: Vec<String> = raw.split('|').map(|s| s.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        bail!("empty entity name in tuple `{raw}`");
    }
    Ok(names)
}

fn load_graph(path: Option<&Path>) -> anyhow::Result<DataGraph> {
    let path = path.context("no triple file: pass --triples or set GQBE_TRIPLES")?;
    DataGraph::from_path(path).with_context(|| format!("loading {}", path.display()))
}

/// Answers of a query as the `--json` output prints them (no newline).
pub fn answers_json(answers: &[exemplar_core::Answer]) -> serde_json::Result<String> {
    serde_json::to_string(answers)
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> anyhow::Result<()> {
    match cli.command {
        Command::Load => {
            let g = load_graph(cli.triples.as_deref())?;
            writeln!(out, "entities\t{}", g.entity_count())?;
            writeln!(out, "labels\t{}", g.label_count())?;
            writeln!(out, "edges\t{}", g.edge_count())?;
        }
        Command::Query(args) => {
            let g = load_graph(cli.triples.as_deref())?;
            query(&g, &args, out)?;
        }
        Command::Eval(args) => {
            let g = load_graph(cli.triples.as_deref())?;
            let suite = read_suite(BufReader::new(
                File::open(&args.suite).with_context(|| format!("opening {}", args.suite.display()))?,
            ))?;
            let params = QueryParams {
                k_prime: args.k_prime,
                d: args.d,
                r: args.r,
                ..QueryParams::default()
            };
            let rows = run_suite(&Engine::new(&g), &suite, &params)?;
            match &args.report {
                Some(path) => write_report(&rows, BufWriter::new(File::create(path)?))?,
                None => write_report(&rows, &mut *out)?,
            }
        }
        Command::Serve(args) => {
            let g = load_graph(cli.triples.as_deref())?;
            let app = server::router(Arc::new(g));
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                axum::serve(listener, app).await?;
                Ok::<_, anyhow::Error>(())
            })?;
        }
    }
    Ok(())
}

fn query<W: Write>(g: &DataGraph, args: &QueryArgs, out: &mut W) -> anyhow::Result<()> {
    let tuples = args
        .tuples
        .iter()
        .map(|t| parse_tuple(t))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let params = QueryParams {
        k: args.k,
        k_prime: args.k_prime,
        d: args.d,
        r: args.r,
        parallel: !args.sequential,
        trace: args.trace_lattice,
        ..QueryParams::default()
    };
    let engine = Engine::new(g);
    let resolved = engine.resolve(&tuples)?;
    let prepared = engine.prepare(&resolved, &params)?;

    if let Some(path) = &args.dump_neighborhood {
        let mut w = BufWriter::new(File::create(path)?);
        for hood in &prepared.neighborhoods {
            hood.dump(g, &mut w)?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.dump_mqg {
        let mut w = BufWriter::new(File::create(path)?);
        prepared.mqg.dump(g, &mut w)?;
        w.flush()?;
    }

    let outcome = engine.run(prepared, &params)?;
    if args.trace_lattice {
        for event in &outcome.exploration.trace {
            eprintln!("{event}");
        }
    }
    if args.json {
        writeln!(out, "{}", answers_json(&outcome.answers)?)?;
    } else {
        writeln!(out, "rank\tscore\tanswer")?;
        for a in &outcome.answers {
            writeln!(out, "{}\t{:.6}\t{}", a.rank, a.score, a.entities.join(" | "))?;
        }
    }
    Ok(())
}

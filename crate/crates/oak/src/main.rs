use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use oak::api::{resolve_uri, router};
use oak::repo::Repository;
use oak::{load_files, resolve_data_dir, Loaded, DATA_ENV};
use oak_core::explain::{explain_entity, Audience, ExplanationBody, ExplanationForm};
use oak_core::query::{evaluate, parse_sparql, search};
use oak_core::rdf::serialize_turtle;
use oak_core::wrapper::{manifest_seq, parse_manifest};

#[derive(Parser)]
#[command(name = "oak", version, about = "Ontology-backed knowledge maps")]
struct Cli {
    /// Repository directory (overridden by OAK_DATA)
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the JSON API
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Load Turtle documents or manifests into the repository
    Load {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Wrap one manifest and print the resulting Turtle without saving it
    Wrap {
        manifest: PathBuf,
        #[arg(long)]
        seq: Option<u32>,
    },
    /// Keyword search, e.g. "predict soilPH"
    Search { query: String },
    /// Explain an entity
    Explain {
        uri: String,
        #[arg(long, default_value = "manager")]
        audience: String,
        #[arg(long, default_value = "natural")]
        form: String,
    },
    /// Run a SPARQL-subset query over knowledge and ontology
    Query { text: String },
    /// Ontology statistics
    Stats,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let data = resolve_data_dir(cli.data, std::env::var_os(DATA_ENV));
    match run(cli.command, data) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oak: {e}");
            ExitCode::FAILURE
        }
    }
}

type Res = Result<(), Box<dyn std::error::Error>>;

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(command: Command, data: PathBuf) -> Res {
    match command {
        Command::Wrap { manifest, seq } => {
            let repo = Repository::open(&data)?;
            let text = std::fs::read_to_string(&manifest).map_err(|e| format!("{}: {e}", manifest.display()))?;
            let m = parse_manifest(&text).map_err(|e| format!("{}: {e}", manifest.display()))?;
            let s = repo.snapshot();
            let seq = seq.or_else(|| manifest_seq(&text)).unwrap_or(s.next_seq);
            let report = oak_core::wrapper::wrap(&m, &s.ontology, seq)?;
            for step in &report.step_log {
                eprintln!("step {} {}: {} entities", step.step, step.name, step.entities.len());
            }
            print!("{}", report.turtle);
        }
        Command::Load { files } => {
            let repo = Repository::open(&data)?;
            for loaded in load_files(&repo, &files)? {
                match loaded {
                    Loaded::Manifest { file, model, seq } => println!("{model} (seq {seq}) -> {}", file.display()),
                    Loaded::Turtle { file, models } => println!("{}: {}", file.display(), models.join(", ")),
                }
            }
        }
        Command::Search { query } => {
            let s = Repository::open(&data)?.snapshot();
            let hits = search(&s.knowledge, &s.ontology, &query)?;
            if hits.is_empty() {
                eprintln!("no matching items");
            }
            for h in hits {
                println!("{}\t{}", h.iri, h.label);
            }
        }
        Command::Explain { uri, audience, form } => {
            let s = Repository::open(&data)?.snapshot();
            let audience = Audience::parse(&audience).ok_or_else(|| format!("unknown audience `{audience}`"))?;
            let form = ExplanationForm::parse(&form).ok_or_else(|| format!("unknown form `{form}`"))?;
            let iri = resolve_uri(&uri).map_err(|e| e.message)?;
            let e = explain_entity(&s.knowledge, &s.ontology, &iri, audience, form)?;
            match &e.body {
                ExplanationBody::Text(_) => println!("{}", e.text()),
                ExplanationBody::Formal(ts) => {
                    let mut g = oak_core::rdf::Graph::new();
                    g.extend(ts.iter().cloned());
                    print!("{}", serialize_turtle(&g));
                }
                ExplanationBody::Graph(p) => println!("{}", json(p)),
            }
        }
        Command::Query { text } => {
            let s = Repository::open(&data)?.snapshot();
            let p = parse_sparql(&text)?;
            let vars = p.selected();
            println!("{}", vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t"));
            for row in evaluate(&p, &s.graph) {
                let cells: Vec<String> =
                    vars.iter().map(|v| row.get(v).map(|t| t.to_string()).unwrap_or_default()).collect();
                println!("{}", cells.join("\t"));
            }
        }
        Command::Stats => {
            let s = Repository::open(&data)?.snapshot();
            let stats = s.ontology.stats();
            for c in &stats.categories {
                println!("{:<24}{:>4}", c.title, c.count);
            }
            println!("{:<24}{:>4}", "Total", stats.total);
            println!("{:<24}{:>4}", "Structural", stats.structural);
            println!("{:<24}{:>4}", "Knowledge items", s.models().len());
        }
        Command::Serve { bind } => {
            let repo = Arc::new(Repository::open(&data)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind).await?;
                eprintln!("oak: serving {} on http://{}", data.display(), listener.local_addr()?);
                axum::serve(listener, router(repo))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
        }
    }
    Ok(())
}

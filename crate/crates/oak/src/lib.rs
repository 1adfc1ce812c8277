//! Persistence, HTTP service and command-line plumbing around `oak-core`.

pub mod api;
pub mod repo;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use oak_core::rdf::Graph;
use oak_core::wrapper::{manifest_seq, parse_manifest};

use crate::repo::{parse_file, RepoError, Repository};

pub const DATA_ENV: &str = "OAK_DATA";
pub const DEFAULT_DATA_DIR: &str = "data";

/// `OAK_DATA` wins over `--data`, which wins over `./data`.
pub fn resolve_data_dir(flag: Option<PathBuf>, env: Option<OsString>) -> PathBuf {
    match env.filter(|v| !v.is_empty()) {
        Some(v) => PathBuf::from(v),
        None => flag.unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR)),
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum Loaded {
    Manifest { file: PathBuf, model: String, seq: u32 },
    Turtle { file: PathBuf, models: Vec<String> },
}

fn is_manifest(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// Loads manifests (`*.json`) and Turtle documents, in argument order.
/// Turtle files are parsed up front so one bad file aborts the whole batch.
pub fn load_files(repo: &Repository, files: &[PathBuf]) -> Result<Vec<Loaded>, LoadError> {
    let mut out = Vec::new();
    let mut docs: Vec<(PathBuf, Graph)> = Vec::new();
    for file in files.iter().filter(|f| !is_manifest(f)) {
        docs.push((file.clone(), parse_file(file)?));
    }
    for file in files.iter().filter(|f| is_manifest(f)) {
        let text = std::fs::read_to_string(file).map_err(|source| RepoError::Io { path: file.clone(), source })?;
        let m =
            parse_manifest(&text).map_err(|e| LoadError::Manifest { path: file.clone(), message: e.to_string() })?;
        let done = repo.ingest_manifest(&m, manifest_seq(&text))?;
        out.push(Loaded::Manifest { file: done.file, model: done.report.item.iri.to_string(), seq: done.seq });
    }
    for (file, g) in &docs {
        let models = repo.load_documents(std::slice::from_ref(&(file.clone(), g.clone())))?;
        out.push(Loaded::Turtle { file: file.clone(), models: models.iter().map(|m| m.to_string()).collect() });
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error("{}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
}

//! On-disk repository: seed ontology files, one Turtle file per knowledge
//! item, and a small metadata sidecar holding the sequence counter.
//!
//! ```text
//! <data>/ontology/*.ttl
//! <data>/kmaps/<ModelLocalName>.ttl
//! <data>/meta.json            {"next_seq": N}
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use oak_core::kmap::{self, KmapError};
use oak_core::ontology::{load_ontology, Ontology, OntologyError};
use oak_core::rdf::{parse_turtle, serialize_turtle, Graph, Iri, Subject, Term, TurtleError};
use oak_core::wrapper::{ingest, wrap, KnowledgeManifest, WrapError, WrapReport};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Syntax { path: PathBuf, source: TurtleError },
    #[error("{}: {source}", path.display())]
    Meta { path: PathBuf, source: serde_json::Error },
    #[error("{}: no ontology files found", path.display())]
    MissingOntology { path: PathBuf },
    #[error("ontology: {0}")]
    Ontology(#[from] OntologyError),
    #[error("{}: {source}", path.display())]
    Item { path: PathBuf, source: KmapError },
    #[error(transparent)]
    Wrap(#[from] WrapError),
    #[error("`{0}` already exists; choose another sequence number")]
    AlreadyExists(Iri),
    #[error("{}: `{subject}` belongs to no knowledge item in the file", path.display())]
    Orphan { path: PathBuf, subject: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RepoError + '_ {
    move |source| RepoError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Meta {
    next_seq: u32,
}

/// One consistent view of the repository.
#[derive(Debug, Clone)]
pub struct RepositoryState {
    /// AgriKMaps triples only.
    pub knowledge: Graph,
    /// Knowledge plus ontology triples; the target of raw queries.
    pub graph: Graph,
    pub ontology: Ontology,
    pub data_dir: PathBuf,
    pub next_seq: u32,
}

impl RepositoryState {
    pub fn models(&self) -> Vec<Iri> {
        kmap::knowledge_models(&self.knowledge)
    }
}

fn ttl_files(dir: &Path) -> Result<Vec<PathBuf>, RepoError> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == "ttl") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn parse_file(path: &Path) -> Result<Graph, RepoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_turtle(&text, None).map_err(|source| RepoError::Syntax { path: path.to_path_buf(), source })
}

/// Trailing `_NNN` of a minted model IRI.
pub fn minted_seq(model: &Iri) -> Option<u32> {
    let local = model.local_name();
    let digits = &local[local.rfind('_')? + 1..];
    digits.parse().ok()
}

/// Parses every ontology and knowledge file under `data_dir`.
pub fn load_state(data_dir: &Path) -> Result<RepositoryState, RepoError> {
    let onto_dir = data_dir.join("ontology");
    let onto_files = ttl_files(&onto_dir)?;
    if onto_files.is_empty() {
        return Err(RepoError::MissingOntology { path: onto_dir });
    }
    let docs = onto_files.iter().map(|p| parse_file(p)).collect::<Result<Vec<_>, _>>()?;
    let ontology = load_ontology(&docs)?;

    let mut knowledge = Graph::new();
    for path in ttl_files(&data_dir.join("kmaps"))? {
        let g = parse_file(&path)?;
        for model in kmap::knowledge_models(&g) {
            kmap::from_triples(&g, &model).map_err(|source| RepoError::Item { path: path.clone(), source })?;
        }
        knowledge.absorb(&g);
    }

    let meta_path = data_dir.join("meta.json");
    let meta: Meta = match fs::read_to_string(&meta_path) {
        Ok(text) => {
            serde_json::from_str(&text).map_err(|source| RepoError::Meta { path: meta_path.clone(), source })?
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => Meta::default(),
        Err(e) => return Err(RepoError::Io { path: meta_path, source: e }),
    };
    let minted = kmap::knowledge_models(&knowledge).iter().filter_map(minted_seq).max().unwrap_or(0);
    let next_seq = meta.next_seq.max(minted + 1);

    let mut graph = knowledge.clone();
    graph.absorb(ontology.graph());
    Ok(RepositoryState { knowledge, graph, ontology, data_dir: data_dir.to_path_buf(), next_seq })
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), RepoError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// The Turtle document for one item: every triple about its members.
pub fn item_document(knowledge: &Graph, model: &Iri) -> Result<String, KmapError> {
    let item = kmap::from_triples(knowledge, model)?;
    let mut g = Graph::new();
    for member in item.members() {
        g.extend(knowledge.matches(Some(&Term::Iri(member)), None, None).map(|t| t.to_triple()));
    }
    Ok(serialize_turtle(&g))
}

fn item_path(data_dir: &Path, model: &Iri) -> PathBuf {
    data_dir.join("kmaps").join(format!("{}.ttl", model.local_name()))
}

fn save_items(state: &RepositoryState, models: &[Iri]) -> Result<Vec<PathBuf>, RepoError> {
    let dir = state.data_dir.join("kmaps");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut written = Vec::new();
    for model in models {
        let path = item_path(&state.data_dir, model);
        let text =
            item_document(&state.knowledge, model).map_err(|source| RepoError::Item { path: path.clone(), source })?;
        write_atomic(&path, &text)?;
        written.push(path);
    }
    let meta = serde_json::to_string_pretty(&Meta { next_seq: state.next_seq }).expect("meta serializes");
    write_atomic(&state.data_dir.join("meta.json"), &(meta + "\n"))?;
    Ok(written)
}

/// Writes one file per knowledge item plus the metadata sidecar.
pub fn save_state(state: &RepositoryState) -> Result<Vec<PathBuf>, RepoError> {
    save_items(state, &state.models())
}

#[derive(Debug)]
pub struct Ingested {
    pub report: WrapReport,
    pub added: usize,
    pub seq: u32,
    pub file: PathBuf,
}

/// Readers share immutable snapshots; writers serialize through one gate and
/// publish a new snapshot only after the files are on disk.
#[derive(Debug)]
pub struct Repository {
    state: RwLock<Arc<RepositoryState>>,
    writer: Mutex<()>,
}

impl Repository {
    pub fn new(state: RepositoryState) -> Self {
        Repository { state: RwLock::new(Arc::new(state)), writer: Mutex::new(()) }
    }

    pub fn open(data_dir: &Path) -> Result<Self, RepoError> {
        load_state(data_dir).map(Self::new)
    }

    pub fn snapshot(&self) -> Arc<RepositoryState> {
        self.state.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn gate(&self) -> MutexGuard<'_, ()> {
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn publish(&self, next: RepositoryState) {
        *self.state.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
    }

    /// Wraps a manifest, persists the new item and publishes the result.
    pub fn ingest_manifest(&self, manifest: &KnowledgeManifest, seq: Option<u32>) -> Result<Ingested, RepoError> {
        let _gate = self.gate();
        let current = self.snapshot();
        let seq = seq.unwrap_or(current.next_seq);
        let report = wrap(manifest, &current.ontology, seq)?;
        if current.knowledge.has_subject(&Term::Iri(report.item.iri.clone())) {
            return Err(RepoError::AlreadyExists(report.item.iri.clone()));
        }
        let mut next = (*current).clone();
        let added = ingest(&report, &mut next.knowledge);
        ingest(&report, &mut next.graph);
        next.next_seq = next.next_seq.max(seq + 1);
        let file = save_items(&next, std::slice::from_ref(&report.item.iri))?.remove(0);
        self.publish(next);
        Ok(Ingested { report, added, seq, file })
    }

    /// Merges Turtle documents holding knowledge items and persists every
    /// item they touch. Returns the models found.
    pub fn load_documents(&self, docs: &[(PathBuf, Graph)]) -> Result<Vec<Iri>, RepoError> {
        let _gate = self.gate();
        let mut next = (*self.snapshot()).clone();
        let mut touched = BTreeSet::new();
        for (path, g) in docs {
            // only item members are persisted, so anything else would vanish on reload
            let mut members = BTreeSet::new();
            for model in kmap::knowledge_models(g) {
                let item =
                    kmap::from_triples(g, &model).map_err(|source| RepoError::Item { path: path.clone(), source })?;
                members.extend(item.members());
                if let Some(n) = minted_seq(&model) {
                    next.next_seq = next.next_seq.max(n + 1);
                }
                touched.insert(model);
            }
            if let Some(stray) = g.subjects().into_iter().find(|s| !matches!(s, Subject::Iri(i) if members.contains(i)))
            {
                return Err(RepoError::Orphan { path: path.clone(), subject: stray.to_string() });
            }
            next.knowledge.absorb(g);
            next.graph.absorb(g);
        }
        let models: Vec<Iri> = touched.into_iter().collect();
        save_items(&next, &models)?;
        self.publish(next);
        Ok(models)
    }
}

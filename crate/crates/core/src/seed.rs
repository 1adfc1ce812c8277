//! The shipped seed ontology, embedded at build time.

use alloc::vec::Vec;

use crate::ontology::{load_ontology, Ontology};
use crate::rdf::{parse_turtle, Graph};
use crate::wrapper::{ingest, manifest_seq, parse_manifest, wrap, WrapReport};

macro_rules! files {
    ($dir:literal; $($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../../../data/", $dir, "/", $name)))),*]
    };
}

/// `(file name, Turtle text)` for every seed ontology file.
pub const ONTOLOGY_FILES: [(&str, &str); 9] = files!("ontology";
    "core.ttl",
    "agronomic.ttl",
    "agroclimatic.ttl",
    "vegetation.ttl",
    "ecological.ttl",
    "pretrained.ttl",
    "algorithms.ttl",
    "metrics.ttl",
    "transformations.ttl",
);

pub fn ontology_graphs() -> Vec<Graph> {
    ONTOLOGY_FILES
        .iter()
        .map(|(name, text)| parse_turtle(text, None).unwrap_or_else(|e| panic!("seed file {name}: {e}")))
        .collect()
}

/// `(file name, JSON text)` for every seed manifest; each pins its `seq`.
pub const MANIFEST_FILES: [(&str, &str); 5] = files!("manifests";
    "regressor-001.kmf.json",
    "classifier-002.kmf.json",
    "clusterer-003.kmf.json",
    "regressor-004.kmf.json",
    "association-005.kmf.json",
);

/// Wraps every seed manifest against `o`.
pub fn wrapped_items(o: &Ontology) -> Vec<WrapReport> {
    MANIFEST_FILES
        .iter()
        .map(|(name, text)| {
            let m = parse_manifest(text).unwrap_or_else(|e| panic!("seed manifest {name}: {e}"));
            let seq = manifest_seq(text).unwrap_or_else(|| panic!("seed manifest {name} has no seq"));
            wrap(&m, o, seq).unwrap_or_else(|e| panic!("seed manifest {name}: {e}"))
        })
        .collect()
}

/// The seed knowledge repository (AgriKMaps triples only).
pub fn repository(o: &Ontology) -> Graph {
    let mut g = Graph::new();
    for report in wrapped_items(o) {
        ingest(&report, &mut g);
    }
    g
}

/// Loads the seed ontology. The files are fixed, so failure is a build defect.
pub fn ontology() -> Ontology {
    load_ontology(&ontology_graphs()).unwrap_or_else(|e| panic!("seed ontology: {e}"))
}

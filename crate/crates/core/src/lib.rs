//! Knowledge maps for data-mining results, backed by an explanation ontology.
//!
//! Mined results (regressors, classifiers, clusterers, association rules) are
//! wrapped into linked-data triples in the `AgriKMaps` namespace. Every concept,
//! transformation and state they reference is explained by entries of the
//! `AgriComO` ontology. Retrieval for explanations only ever flows from the
//! repository into the ontology.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod explain;
pub mod interval;
pub mod kmap;
pub mod ontology;
pub mod query;
pub mod rdf;
pub mod seed;
pub mod vocab;
pub mod wrapper;

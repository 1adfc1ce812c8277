//! Triples, Turtle and the indexed in-memory store.

mod graph;
mod iso;
pub(crate) mod lexer;
mod term;
mod turtle;

pub use graph::{Graph, IndexOrder, PrefixMap, TripleRef};
pub use lexer::SyntaxError;
pub use term::{BlankNode, Iri, Literal, Subject, Term, TermError, Triple};
pub use turtle::{parse_turtle, parse_turtle_into, serialize_turtle, TurtleError};

pub(crate) use turtle::{write_iri, write_quoted, write_term};

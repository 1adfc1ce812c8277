use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::vocab::{rdf, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("IRI is empty")]
    EmptyIri,
    #[error("IRI `{0}` is not absolute")]
    RelativeIri(String),
    #[error("IRI `{0}` contains a forbidden character")]
    InvalidIriChar(String),
    #[error("invalid blank node label `{0}`")]
    InvalidBlankLabel(String),
    #[error("invalid language tag `{0}`")]
    InvalidLanguage(String),
    #[error("a literal cannot be used as a triple subject")]
    LiteralSubject,
    #[error("only IRIs may be used as predicates")]
    NonIriPredicate,
}

/// `scheme ":"` prefix of an absolute IRI.
pub(crate) fn has_scheme(raw: &str) -> bool {
    match raw.find(':') {
        Some(i) => {
            let scheme = &raw[..i];
            scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && scheme.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        }
        None => false,
    }
}

/// An absolute IRI. Equality is byte equality; no normalization happens.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if value.is_empty() {
            return Err(TermError::EmptyIri);
        }
        if value.chars().any(|c| {
            c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        }) {
            return Err(TermError::InvalidIriChar(value));
        }
        if !has_scheme(&value) {
            return Err(TermError::RelativeIri(value));
        }
        Ok(Iri(value))
    }

    /// Builds an IRI from compile-time constants known to be valid.
    pub(crate) fn from_static(ns: &str, local: &str) -> Self {
        let mut s = String::with_capacity(ns.len() + local.len());
        s.push_str(ns);
        s.push_str(local);
        Iri(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Splits on the last `#`, or the last `/` when there is no fragment.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind('#') {
            Some(i) => &s[i + 1..],
            None => s.rfind('/').map(|i| &s[i + 1..]).unwrap_or(s),
        }
    }

    pub fn namespace(&self) -> &str {
        let local = self.local_name().len();
        &self.0[..self.0.len() - local]
    }

    pub fn in_namespace(&self, ns: &str) -> bool {
        self.0.starts_with(ns) && self.0.len() > ns.len()
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        let mut chars = label.chars();
        let valid = match chars.next() {
            Some(c) if c.is_alphanumeric() || c == '_' => chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-')),
            _ => false,
        };
        if valid {
            Ok(BlankNode(label))
        } else {
            Err(TermError::InvalidBlankLabel(label))
        }
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// A plain `xsd:string` literal.
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: xsd::string(), language: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal { lexical: lexical.into(), datatype, language: None }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        let language = language.into();
        let valid = {
            let mut parts = language.split('-');
            let primary = parts.next().unwrap_or("");
            !primary.is_empty()
                && primary.chars().all(|c| c.is_ascii_alphabetic())
                && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
        };
        if !valid {
            return Err(TermError::InvalidLanguage(language));
        }
        Ok(Literal { lexical: lexical.into(), datatype: rdf::lang_string(), language: Some(language) })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.lexical.trim().parse().ok()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for c in self.lexical.chars() {
            match c {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                '\t' => f.write_str("\\t")?,
                c => fmt::Write::write_char(f, c)?,
            }
        }
        f.write_str("\"")?;
        if let Some(lang) = &self.language {
            write!(f, "@{lang}")
        } else if self.datatype.as_str() != xsd::STRING {
            write!(f, "^^<{}>", self.datatype)
        } else {
            Ok(())
        }
    }
}

/// Any RDF term. Ordering puts IRIs first, then blank nodes, then literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    fn rank(&self) -> u8 {
        match self {
            Term::Iri(_) => 0,
            Term::Blank(_) => 1,
            Term::Literal(_) => 2,
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    /// The string value as SPARQL `STR()` would see it.
    pub fn str_value(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Blank(b) => b.label(),
            Term::Literal(l) => l.lexical(),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Iri(a), Term::Iri(b)) => a.cmp(b),
            (Term::Blank(a), Term::Blank(b)) => a.cmp(b),
            (Term::Literal(a), Term::Literal(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Blank(b) => b.fmt(f),
            Term::Literal(l) => l.fmt(f),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::Blank(b)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

/// A triple subject: an IRI or a blank node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Iri(Iri),
    Blank(BlankNode),
}

impl Subject {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Subject::Iri(iri) => Some(iri),
            Subject::Blank(_) => None,
        }
    }
}

impl From<Iri> for Subject {
    fn from(iri: Iri) -> Self {
        Subject::Iri(iri)
    }
}

impl From<BlankNode> for Subject {
    fn from(b: BlankNode) -> Self {
        Subject::Blank(b)
    }
}

impl From<Subject> for Term {
    fn from(s: Subject) -> Self {
        match s {
            Subject::Iri(iri) => Term::Iri(iri),
            Subject::Blank(b) => Term::Blank(b),
        }
    }
}

impl TryFrom<Term> for Subject {
    type Error = TermError;

    fn try_from(t: Term) -> Result<Self, TermError> {
        match t {
            Term::Iri(iri) => Ok(Subject::Iri(iri)),
            Term::Blank(b) => Ok(Subject::Blank(b)),
            Term::Literal(_) => Err(TermError::LiteralSubject),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Iri(iri) => write!(f, "<{iri}>"),
            Subject::Blank(b) => b.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Subject>, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple { subject: subject.into(), predicate, object: object.into() }
    }

    /// Builds a triple from three arbitrary terms, checking position rules.
    pub fn from_terms(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        let subject = Subject::try_from(subject)?;
        let predicate = match predicate {
            Term::Iri(iri) => iri,
            _ => return Err(TermError::NonIriPredicate),
        };
        Ok(Triple { subject, predicate, object })
    }
}

impl Serialize for Subject {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_requires_scheme_separator() {
        assert!(Iri::new("http://www.ucd.ie/consus/AgriComO#SoilPH").is_ok());
        assert_eq!(Iri::new(""), Err(TermError::EmptyIri));
        assert!(matches!(Iri::new("SoilPH"), Err(TermError::RelativeIri(_))));
        assert!(matches!(Iri::new("http://a b"), Err(TermError::InvalidIriChar(_))));
    }

    #[test]
    fn local_name_and_namespace() {
        let iri = Iri::new("http://www.ucd.ie/consus/AgriKMaps#Regressor_004").unwrap();
        assert_eq!(iri.local_name(), "Regressor_004");
        assert_eq!(iri.namespace(), "http://www.ucd.ie/consus/AgriKMaps#");
        let slash = Iri::new("http://purl.org/dc/elements/1.1/identifier").unwrap();
        assert_eq!(slash.local_name(), "identifier");
    }

    #[test]
    fn language_literal_uses_lang_string() {
        let l = Literal::lang("pH", "en-GB").unwrap();
        assert_eq!(l.datatype().as_str(), rdf::LANG_STRING);
        assert!(Literal::lang("x", "en-").is_err());
    }

    #[test]
    fn literal_subject_rejected() {
        let p = Iri::new("http://example.org/p").unwrap();
        let err = Triple::from_terms(Literal::string("x").into(), p.clone().into(), p.into()).unwrap_err();
        assert_eq!(err, TermError::LiteralSubject);
    }
}

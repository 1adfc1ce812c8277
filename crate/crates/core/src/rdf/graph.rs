use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use super::term::{BlankNode, Iri, Subject, Term, Triple};
use crate::vocab;

type TermId = u32;
type Key = [TermId; 3];

/// Interned terms. Ids are dense and never reused.
#[derive(Debug, Clone, Default)]
struct Dictionary {
    terms: Vec<Term>,
    ids: BTreeMap<Term, TermId>,
}

impl Dictionary {
    fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = self.terms.len() as TermId;
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    fn id(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }
}

/// Prefix bindings, kept sorted by prefix name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixMap {
    bindings: BTreeMap<String, Iri>,
}

impl PrefixMap {
    pub fn empty() -> Self {
        PrefixMap { bindings: BTreeMap::new() }
    }

    pub fn insert(&mut self, prefix: impl Into<String>, namespace: Iri) {
        self.bindings.insert(prefix.into(), namespace);
    }

    pub fn get(&self, prefix: &str) -> Option<&Iri> {
        self.bindings.get(prefix)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Iri)> {
        self.bindings.iter().map(|(p, ns)| (p.as_str(), ns))
    }

    /// Longest-namespace match, returning `(prefix, local)`.
    pub fn compact<'a>(&'a self, iri: &'a Iri) -> Option<(&'a str, &'a str)> {
        self.bindings
            .iter()
            .filter(|(_, ns)| iri.as_str().starts_with(ns.as_str()))
            .max_by_key(|(p, ns)| (ns.as_str().len(), core::cmp::Reverse(p.as_str())))
            .map(|(p, ns)| (p.as_str(), &iri.as_str()[ns.as_str().len()..]))
    }
}

impl Default for PrefixMap {
    fn default() -> Self {
        PrefixMap { bindings: vocab::default_prefixes().into_iter().collect() }
    }
}

/// A borrowed view of one stored triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleRef<'a> {
    pub subject: &'a Term,
    pub predicate: &'a Term,
    pub object: &'a Term,
}

impl TripleRef<'_> {
    pub fn to_triple(self) -> Triple {
        Triple::from_terms(self.subject.clone(), self.predicate.clone(), self.object.clone())
            .expect("stored triples are valid")
    }
}

/// Which ordering answered a pattern; exposed so tests can force each one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOrder {
    Spo,
    Pos,
    Osp,
}

/// An in-memory set of triples with SPO, POS and OSP indexes.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    prefixes: PrefixMap,
    dict: Dictionary,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixMap {
        &mut self.prefixes
    }

    /// Returns `true` if the triple was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let s = self.dict.intern(triple.subject.into());
        let p = self.dict.intern(Term::Iri(triple.predicate));
        let o = self.dict.intern(triple.object);
        if !self.spo.insert([s, p, o]) {
            return false;
        }
        self.pos.insert([p, o, s]);
        self.osp.insert([o, s, p]);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let s = self.dict.id(&triple.subject.clone().into());
        let p = self.dict.id(&Term::Iri(triple.predicate.clone()));
        let o = self.dict.id(&triple.object);
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => self.spo.contains(&[s, p, o]),
            _ => false,
        }
    }

    pub fn extend<I: IntoIterator<Item = Triple>>(&mut self, triples: I) -> usize {
        triples.into_iter().filter(|t| self.insert(t.clone())).count()
    }

    /// Copies every triple of `other` into `self`, renaming blank nodes that
    /// would collide with labels already in use. Returns the number of new triples.
    pub fn absorb(&mut self, other: &Graph) -> usize {
        let blank_labels = |g: &Graph| -> BTreeSet<String> {
            g.dict
                .terms
                .iter()
                .filter_map(|t| match t {
                    Term::Blank(b) => Some(String::from(b.label())),
                    _ => None,
                })
                .collect()
        };
        let mine = blank_labels(self);
        let mut used: BTreeSet<String> = mine.union(&blank_labels(other)).cloned().collect();
        let mut renamed: BTreeMap<String, BlankNode> = BTreeMap::new();
        let mut counter = 0usize;
        for label in blank_labels(other).intersection(&mine) {
            let fresh = loop {
                let candidate = format!("b{counter}");
                counter += 1;
                if used.insert(candidate.clone()) {
                    break candidate;
                }
            };
            renamed.insert(label.clone(), BlankNode::new(fresh).expect("generated label"));
        }
        let rename = |term: &Term| match term {
            Term::Blank(b) => renamed.get(b.label()).cloned().map(Term::Blank).unwrap_or_else(|| term.clone()),
            t => t.clone(),
        };
        let pending: Vec<Triple> = other
            .iter()
            .map(|t| {
                Triple::from_terms(rename(t.subject), t.predicate.clone(), rename(t.object))
                    .expect("valid source triple")
            })
            .collect();
        let added = self.extend(pending);
        for (prefix, ns) in other.prefixes.iter() {
            if self.prefixes.get(prefix).is_none() {
                self.prefixes.insert(prefix, ns.clone());
            }
        }
        added
    }

    pub fn iter(&self) -> impl Iterator<Item = TripleRef<'_>> + '_ {
        self.spo.iter().map(move |&[s, p, o]| self.view(s, p, o))
    }

    pub fn triples(&self) -> Vec<Triple> {
        self.iter().map(TripleRef::to_triple).collect()
    }

    fn view(&self, s: TermId, p: TermId, o: TermId) -> TripleRef<'_> {
        TripleRef { subject: self.dict.term(s), predicate: self.dict.term(p), object: self.dict.term(o) }
    }

    /// The index a pattern with these bound positions is answered from.
    pub fn index_for(s: bool, p: bool, o: bool) -> IndexOrder {
        match (s, p, o) {
            (true, _, false) | (true, true, true) => IndexOrder::Spo,
            (true, false, true) => IndexOrder::Osp,
            (false, true, _) => IndexOrder::Pos,
            (false, false, true) => IndexOrder::Osp,
            (false, false, false) => IndexOrder::Spo,
        }
    }

    /// All triples agreeing with every bound position, in index order.
    pub fn matches<'a>(
        &'a self,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> impl Iterator<Item = TripleRef<'a>> + 'a {
        let order = Self::index_for(s.is_some(), p.is_some(), o.is_some());
        self.matches_with(order, s, p, o)
    }

    /// Like [`Graph::matches`] but answered from a caller-chosen index.
    pub fn matches_with<'a>(
        &'a self,
        order: IndexOrder,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> impl Iterator<Item = TripleRef<'a>> + 'a {
        let lookup = |t: Option<&Term>| match t {
            None => Ok(None),
            Some(t) => self.dict.id(t).map(Some).ok_or(()),
        };
        let ids = match (lookup(s), lookup(p), lookup(o)) {
            (Ok(s), Ok(p), Ok(o)) => Some((s, p, o)),
            _ => None,
        };
        let (set, bound, rotate): (&BTreeSet<Key>, [Option<TermId>; 3], fn(Key) -> Key) = match (order, ids) {
            (_, None) => (&self.spo, [None; 3], |k| k),
            (IndexOrder::Spo, Some((s, p, o))) => (&self.spo, [s, p, o], |k| k),
            (IndexOrder::Pos, Some((s, p, o))) => (&self.pos, [p, o, s], |[p, o, s]| [s, p, o]),
            (IndexOrder::Osp, Some((s, p, o))) => (&self.osp, [o, s, p], |[o, s, p]| [s, p, o]),
        };
        let range = if ids.is_some() { prefix_range(bound) } else { [0, 0, 0]..=[0, 0, 0] };
        let empty = ids.is_none();
        set.range(range)
            .filter(move |key| !empty && key.iter().zip(bound.iter()).all(|(k, b)| b.is_none_or(|b| *k == b)))
            .map(move |&key| {
                let [s, p, o] = rotate(key);
                self.view(s, p, o)
            })
    }

    pub fn count(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> usize {
        self.matches(s, p, o).count()
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(&'a self, subject: &Term, predicate: &Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.matches(Some(subject), Some(&Term::Iri(predicate.clone())), None).map(|t| t.object)
    }

    pub fn object(&self, subject: &Term, predicate: &Iri) -> Option<&Term> {
        self.objects(subject, predicate).next()
    }

    /// Subjects in SPO order, deduplicated.
    pub fn subjects(&self) -> Vec<Subject> {
        let mut seen = BTreeSet::new();
        self.spo
            .iter()
            .filter(|k| seen.insert(k[0]))
            .map(|k| Subject::try_from(self.dict.term(k[0]).clone()).expect("subject position"))
            .collect()
    }

    pub fn has_subject(&self, subject: &Term) -> bool {
        self.matches(Some(subject), None, None).next().is_some()
    }

    pub fn is_type(&self, subject: &Term, class: &Iri) -> bool {
        let triple = Triple::from_terms(subject.clone(), Term::Iri(vocab::rdf::type_()), Term::Iri(class.clone()));
        triple.map(|t| self.contains(&t)).unwrap_or(false)
    }

    /// The triple set, ignoring prefixes and blank-node identity.
    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        super::iso::isomorphic(self, other)
    }

    #[cfg(test)]
    pub(crate) fn index_sizes(&self) -> [usize; 3] {
        [self.spo.len(), self.pos.len(), self.osp.len()]
    }
}

fn prefix_range(bound: [Option<TermId>; 3]) -> RangeInclusive<Key> {
    let mut lo = [0; 3];
    let mut hi = [TermId::MAX; 3];
    for (i, b) in bound.iter().enumerate() {
        match b {
            Some(v) => {
                lo[i] = *v;
                hi[i] = *v;
            }
            None => break,
        }
    }
    lo..=hi
}

impl PartialEq for Graph {
    /// Set equality of triples; prefixes are not compared.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().all(|t| other.contains(&t.to_triple()))
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

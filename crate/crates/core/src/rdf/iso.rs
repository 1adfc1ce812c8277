//! Graph isomorphism up to blank-node renaming.
//!
//! Blank nodes are first partitioned by iterated neighbourhood refinement,
//! computed jointly over both graphs so colours are comparable. A backtracking
//! search then only tries bijections that respect the colouring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::graph::Graph;
use super::term::{BlankNode, Iri, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Itself,
    Blank(u32),
    Ground(Term),
}

type Colours = BTreeMap<BlankNode, u32>;

fn blank_of(t: &Term) -> Option<&BlankNode> {
    match t {
        Term::Blank(b) => Some(b),
        _ => None,
    }
}

fn has_blank(t: &Triple) -> bool {
    matches!(t.subject, super::term::Subject::Blank(_)) || t.object.is_blank()
}

fn blanks(triples: &[Triple]) -> BTreeSet<BlankNode> {
    let mut out = BTreeSet::new();
    for t in triples {
        let s: Term = t.subject.clone().into();
        for term in [&s, &t.object] {
            if let Some(b) = blank_of(term) {
                out.insert(b.clone());
            }
        }
    }
    out
}

fn signature(b: &BlankNode, triples: &[Triple], colours: &Colours) -> Vec<(Node, Iri, Node)> {
    let node = |t: &Term| match blank_of(t) {
        Some(x) if x == b => Node::Itself,
        Some(x) => Node::Blank(colours[x]),
        None => Node::Ground(t.clone()),
    };
    let mut sig: Vec<_> = triples
        .iter()
        .filter_map(|t| {
            let s: Term = t.subject.clone().into();
            let touches = blank_of(&s) == Some(b) || blank_of(&t.object) == Some(b);
            touches.then(|| (node(&s), t.predicate.clone(), node(&t.object)))
        })
        .collect();
    sig.sort();
    sig
}

fn refine(a: &[Triple], b: &[Triple], ca: &mut Colours, cb: &mut Colours) {
    let mut distinct = 1;
    for _ in 0..=ca.len() {
        let keys_a: Vec<_> = ca.keys().map(|x| (x.clone(), (ca[x], signature(x, a, ca)))).collect();
        let keys_b: Vec<_> = cb.keys().map(|x| (x.clone(), (cb[x], signature(x, b, cb)))).collect();
        let mut ids = BTreeMap::new();
        for (_, key) in keys_a.iter().chain(keys_b.iter()) {
            let next = ids.len() as u32;
            ids.entry(key.clone()).or_insert(next);
        }
        for (x, key) in keys_a {
            ca.insert(x, ids[&key]);
        }
        for (x, key) in keys_b {
            cb.insert(x, ids[&key]);
        }
        if ids.len() == distinct {
            break;
        }
        distinct = ids.len();
    }
}

fn map_triple(t: &Triple, mapping: &BTreeMap<BlankNode, BlankNode>) -> Option<Triple> {
    let map = |term: Term| match term {
        Term::Blank(b) => mapping.get(&b).cloned().map(Term::Blank),
        t => Some(t),
    };
    let s = map(t.subject.clone().into())?;
    let o = map(t.object.clone())?;
    Triple::from_terms(s, Term::Iri(t.predicate.clone()), o).ok()
}

fn search(
    order: &[BlankNode],
    depth: usize,
    ca: &Colours,
    cb: &Colours,
    a: &[Triple],
    b_set: &BTreeSet<Triple>,
    mapping: &mut BTreeMap<BlankNode, BlankNode>,
    used: &mut BTreeSet<BlankNode>,
) -> bool {
    // every triple whose blanks are all mapped must already appear in b
    for t in a {
        if let Some(m) = map_triple(t, mapping) {
            if !b_set.contains(&m) {
                return false;
            }
        }
    }
    let Some(x) = order.get(depth) else {
        return true;
    };
    let candidates: Vec<BlankNode> =
        cb.iter().filter(|(y, c)| **c == ca[x] && !used.contains(*y)).map(|(y, _)| y.clone()).collect();
    for y in candidates {
        mapping.insert(x.clone(), y.clone());
        used.insert(y.clone());
        if search(order, depth + 1, ca, cb, a, b_set, mapping, used) {
            return true;
        }
        mapping.remove(x);
        used.remove(&y);
    }
    false
}

pub(crate) fn isomorphic(left: &Graph, right: &Graph) -> bool {
    if left.len() != right.len() {
        return false;
    }
    let (ground_a, a): (Vec<Triple>, Vec<Triple>) = left.triples().into_iter().partition(|t| !has_blank(t));
    let (ground_b, b): (Vec<Triple>, Vec<Triple>) = right.triples().into_iter().partition(|t| !has_blank(t));
    let ground_a: BTreeSet<_> = ground_a.into_iter().collect();
    let ground_b: BTreeSet<_> = ground_b.into_iter().collect();
    if ground_a != ground_b || a.len() != b.len() {
        return false;
    }
    let mut ca: Colours = blanks(&a).into_iter().map(|x| (x, 0)).collect();
    let mut cb: Colours = blanks(&b).into_iter().map(|x| (x, 0)).collect();
    if ca.len() != cb.len() {
        return false;
    }
    refine(&a, &b, &mut ca, &mut cb);
    let histogram = |c: &Colours| {
        let mut h: BTreeMap<u32, usize> = BTreeMap::new();
        for v in c.values() {
            *h.entry(*v).or_default() += 1;
        }
        h
    };
    if histogram(&ca) != histogram(&cb) {
        return false;
    }
    let order: Vec<BlankNode> = ca.keys().cloned().collect();
    let b_set: BTreeSet<Triple> = b.into_iter().collect();
    search(&order, 0, &ca, &cb, &a, &b_set, &mut BTreeMap::new(), &mut BTreeSet::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Literal;
    use crate::vocab::agricomo;

    fn bn(l: &str) -> BlankNode {
        BlankNode::new(l).unwrap()
    }

    #[test]
    fn renamed_blank_nodes_are_isomorphic() {
        let p = agricomo::has_state();
        let q = agricomo::has_value();
        let g1: Graph =
            [Triple::new(bn("a"), p.clone(), bn("b")), Triple::new(bn("b"), q.clone(), Literal::string("1"))]
                .into_iter()
                .collect();
        let g2: Graph =
            [Triple::new(bn("y"), p.clone(), bn("x")), Triple::new(bn("x"), q.clone(), Literal::string("1"))]
                .into_iter()
                .collect();
        assert!(g1.is_isomorphic(&g2));
        let g3: Graph =
            [Triple::new(bn("y"), p, bn("x")), Triple::new(bn("y"), q, Literal::string("1"))].into_iter().collect();
        assert!(!g1.is_isomorphic(&g3));
    }

    #[test]
    fn symmetric_cycles_need_backtracking() {
        let p = agricomo::has_state();
        let cycle = |names: [&str; 4]| -> Graph {
            (0..4).map(|i| Triple::new(bn(names[i]), p.clone(), bn(names[(i + 1) % 4]))).collect()
        };
        assert!(cycle(["a", "b", "c", "d"]).is_isomorphic(&cycle(["w", "z", "y", "x"])));
        let two_loops: Graph = [
            Triple::new(bn("a"), p.clone(), bn("b")),
            Triple::new(bn("b"), p.clone(), bn("a")),
            Triple::new(bn("c"), p.clone(), bn("d")),
            Triple::new(bn("d"), p.clone(), bn("c")),
        ]
        .into_iter()
        .collect();
        assert!(!cycle(["a", "b", "c", "d"]).is_isomorphic(&two_loops));
    }
}

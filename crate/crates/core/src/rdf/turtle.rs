//! A Turtle subset: prefix/base directives, prefixed names, absolute and
//! relative IRIs, `a`, predicate lists, object lists, string/numeric/boolean
//! literals with datatypes or language tags, labelled blank nodes and comments.
//! Collections and `[ ... ]` property lists are rejected.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use super::graph::{Graph, PrefixMap};
use super::lexer::{Kind, Lexer, SyntaxError, Token, Tokens};
use super::term::{has_scheme, BlankNode, Iri, Literal, Subject, Term, TermError, Triple};
use crate::vocab::{rdf, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown prefix `{prefix}` at line {line}, column {column}")]
    UnknownPrefix { prefix: String, line: u32, column: u32 },
    #[error("invalid term at line {line}, column {column}: {source}")]
    InvalidTerm { source: TermError, line: u32, column: u32 },
}

impl TurtleError {
    pub fn line(&self) -> u32 {
        match self {
            TurtleError::Syntax(e) => e.line,
            TurtleError::UnknownPrefix { line, .. } | TurtleError::InvalidTerm { line, .. } => *line,
        }
    }
}

pub fn parse_turtle(text: &str, base: Option<&Iri>) -> Result<Graph, TurtleError> {
    let mut graph = Graph::new();
    parse_turtle_into(&mut graph, text, base)?;
    Ok(graph)
}

/// Parses into an existing graph. Prefixes declared by the document are added
/// to the graph's prefix map; the graph's own bindings are visible to the document.
pub fn parse_turtle_into(graph: &mut Graph, text: &str, base: Option<&Iri>) -> Result<usize, TurtleError> {
    let toks = Lexer::tokenize(text, false)?;
    let mut p =
        Parser { toks: Tokens::new(toks), prefixes: graph.prefixes().clone(), base: base.cloned(), out: Vec::new() };
    while !p.toks.at_eof() {
        p.statement()?;
    }
    for (prefix, ns) in p.prefixes.iter() {
        graph.prefixes_mut().insert(prefix, ns.clone());
    }
    Ok(graph.extend(p.out))
}

struct Parser {
    toks: Tokens,
    prefixes: PrefixMap,
    base: Option<Iri>,
    out: Vec<Triple>,
}

impl Parser {
    fn statement(&mut self) -> Result<(), TurtleError> {
        let tok = self.toks.peek().clone();
        match &tok.kind {
            Kind::Directive(d) if d == "prefix" => {
                self.toks.next();
                self.prefix_decl()?;
                self.toks.expect_punct('.')?;
            }
            Kind::Directive(_) => {
                self.toks.next();
                self.base_decl()?;
                self.toks.expect_punct('.')?;
            }
            Kind::Name(n) if n.eq_ignore_ascii_case("prefix") => {
                self.toks.next();
                self.prefix_decl()?;
            }
            Kind::Name(n) if n.eq_ignore_ascii_case("base") => {
                self.toks.next();
                self.base_decl()?;
            }
            _ => {
                let subject = self.subject()?;
                self.predicate_object_list(&subject)?;
                self.toks.expect_punct('.')?;
            }
        }
        Ok(())
    }

    fn prefix_decl(&mut self) -> Result<(), TurtleError> {
        let tok = self.toks.next();
        let prefix = match tok.kind {
            Kind::PrefixedName { prefix, local } if local.is_empty() => prefix,
            _ => return Err(SyntaxError::expected(&tok, "prefix name such as `ex:`").into()),
        };
        let tok = self.toks.next();
        let iri = match &tok.kind {
            Kind::IriRef(raw) => self.resolve(raw, &tok)?,
            _ => return Err(SyntaxError::expected(&tok, "IRI in angle brackets").into()),
        };
        self.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn base_decl(&mut self) -> Result<(), TurtleError> {
        let tok = self.toks.next();
        match &tok.kind {
            Kind::IriRef(raw) => {
                self.base = Some(self.resolve(raw, &tok)?);
                Ok(())
            }
            _ => Err(SyntaxError::expected(&tok, "IRI in angle brackets").into()),
        }
    }

    fn resolve(&self, raw: &str, tok: &Token) -> Result<Iri, TurtleError> {
        let resolved = match &self.base {
            Some(base) if !has_scheme(raw) => resolve_relative(base, raw),
            _ => raw.to_string(),
        };
        Iri::new(resolved).map_err(|source| TurtleError::InvalidTerm {
            source,
            line: tok.pos.line,
            column: tok.pos.column,
        })
    }

    fn iri(&mut self, tok: &Token) -> Result<Option<Iri>, TurtleError> {
        match &tok.kind {
            Kind::IriRef(raw) => self.resolve(raw, tok).map(Some),
            Kind::PrefixedName { prefix, local } => match self.prefixes.get(prefix) {
                Some(ns) => {
                    let mut s = ns.as_str().to_string();
                    s.push_str(local);
                    Iri::new(s).map(Some).map_err(|source| TurtleError::InvalidTerm {
                        source,
                        line: tok.pos.line,
                        column: tok.pos.column,
                    })
                }
                None => Err(TurtleError::UnknownPrefix {
                    prefix: prefix.clone(),
                    line: tok.pos.line,
                    column: tok.pos.column,
                }),
            },
            _ => Ok(None),
        }
    }

    fn unsupported(tok: &Token) -> Option<TurtleError> {
        match tok.kind {
            Kind::Punct('[') => {
                Some(SyntaxError::at(tok.pos, "anonymous blank node property lists are not supported").into())
            }
            Kind::Punct('(') => Some(SyntaxError::at(tok.pos, "collections are not supported").into()),
            _ => None,
        }
    }

    fn subject(&mut self) -> Result<Subject, TurtleError> {
        let tok = self.toks.next();
        if let Some(iri) = self.iri(&tok)? {
            return Ok(Subject::Iri(iri));
        }
        if let Kind::Blank(label) = &tok.kind {
            return blank(label, &tok).map(Subject::Blank);
        }
        Err(Self::unsupported(&tok)
            .unwrap_or_else(|| SyntaxError::expected(&tok, "subject (IRI or blank node)").into()))
    }

    fn predicate_object_list(&mut self, subject: &Subject) -> Result<(), TurtleError> {
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.object()?;
                self.out.push(Triple { subject: subject.clone(), predicate: predicate.clone(), object });
                if !self.toks.eat_punct(',') {
                    break;
                }
            }
            if !self.toks.eat_punct(';') {
                return Ok(());
            }
            while self.toks.eat_punct(';') {}
            // a trailing `;` before the final `.` is allowed
            if matches!(self.toks.peek().kind, Kind::Punct('.')) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Iri, TurtleError> {
        let tok = self.toks.next();
        if matches!(&tok.kind, Kind::Name(n) if n == "a") {
            return Ok(rdf::type_());
        }
        self.iri(&tok)?.ok_or_else(|| SyntaxError::expected(&tok, "predicate").into())
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let tok = self.toks.next();
        if let Some(iri) = self.iri(&tok)? {
            return Ok(Term::Iri(iri));
        }
        let lit = match &tok.kind {
            Kind::Blank(label) => return blank(label, &tok).map(Term::Blank),
            Kind::Str(s) => {
                let s = s.clone();
                match self.toks.peek().kind.clone() {
                    Kind::LangTag(lang) => {
                        let t = self.toks.next();
                        Literal::lang(s, lang).map_err(|source| TurtleError::InvalidTerm {
                            source,
                            line: t.pos.line,
                            column: t.pos.column,
                        })?
                    }
                    Kind::DoubleCaret => {
                        self.toks.next();
                        let dt_tok = self.toks.next();
                        let dt = self.iri(&dt_tok)?.ok_or_else(|| SyntaxError::expected(&dt_tok, "datatype IRI"))?;
                        Literal::typed(s, dt)
                    }
                    _ => Literal::string(s),
                }
            }
            Kind::Integer(n) => Literal::typed(n.clone(), xsd::integer()),
            Kind::Decimal(n) => Literal::typed(n.clone(), xsd::decimal()),
            Kind::Double(n) => Literal::typed(n.clone(), xsd::double()),
            Kind::Name(n) if n == "true" || n == "false" => Literal::typed(n.clone(), xsd::boolean()),
            _ => {
                return Err(Self::unsupported(&tok)
                    .unwrap_or_else(|| SyntaxError::expected(&tok, "object (IRI, blank node or literal)").into()))
            }
        };
        Ok(Term::Literal(lit))
    }
}

fn blank(label: &str, tok: &Token) -> Result<BlankNode, TurtleError> {
    BlankNode::new(label).map_err(|source| TurtleError::InvalidTerm {
        source,
        line: tok.pos.line,
        column: tok.pos.column,
    })
}

/// Minimal reference resolution: fragment, absolute-path and relative-path forms.
fn resolve_relative(base: &Iri, reference: &str) -> String {
    let b = base.as_str();
    if reference.is_empty() {
        return b.to_string();
    }
    if reference.starts_with('#') {
        let stem = b.split('#').next().unwrap_or(b);
        return format!("{stem}{reference}");
    }
    let authority_end = b.find("://").map(|i| i + 3).and_then(|start| b[start..].find('/').map(|j| start + j));
    if reference.starts_with('/') {
        let root = authority_end.map(|i| &b[..i]).unwrap_or(b);
        return format!("{root}{reference}");
    }
    let stem = b.split(['#', '?']).next().unwrap_or(b);
    match stem.rfind('/') {
        Some(i) if authority_end.is_some_and(|a| i >= a) => format!("{}{reference}", &stem[..=i]),
        _ => format!("{stem}/{reference}"),
    }
}

// ---------------------------------------------------------------------------
// Serialization

fn is_simple_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-'))
        }
        _ => false,
    }
}

fn is_simple_prefix(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-')),
        _ => false,
    }
}

pub(crate) fn write_iri(out: &mut String, iri: &Iri, prefixes: &PrefixMap) {
    if let Some((prefix, local)) = prefixes.compact(iri) {
        if is_simple_prefix(prefix) && is_simple_local(local) {
            let _ = write!(out, "{prefix}:{local}");
            return;
        }
    }
    let _ = write!(out, "<{iri}>");
}

pub(crate) fn write_quoted(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn unsigned(s: &str) -> &str {
    s.strip_prefix(['+', '-']).unwrap_or(s)
}

fn bare_numeric(lex: &str, datatype: &str) -> bool {
    let body = unsigned(lex);
    match datatype.strip_prefix(xsd::NS) {
        Some("integer") => digits(body),
        Some("decimal") => match body.split_once('.') {
            Some((int, frac)) => (int.is_empty() || digits(int)) && digits(frac),
            None => false,
        },
        Some("double") => {
            let Some(i) = body.find(['e', 'E']) else { return false };
            let (mant, exp) = (&body[..i], &body[i + 1..]);
            let mant_ok = match mant.split_once('.') {
                Some((a, b)) => {
                    (digits(a) || a.is_empty()) && (digits(b) || b.is_empty()) && !(a.is_empty() && b.is_empty())
                }
                None => digits(mant),
            };
            mant_ok && digits(unsigned(exp))
        }
        Some("boolean") => lex == "true" || lex == "false",
        _ => false,
    }
}

pub(crate) fn write_term(out: &mut String, term: &Term, prefixes: &PrefixMap) {
    match term {
        Term::Iri(iri) => write_iri(out, iri, prefixes),
        Term::Blank(b) => {
            let _ = write!(out, "{b}");
        }
        Term::Literal(l) => {
            if let Some(lang) = l.language() {
                write_quoted(out, l.lexical());
                let _ = write!(out, "@{lang}");
            } else if l.datatype().as_str() == xsd::STRING {
                write_quoted(out, l.lexical());
            } else if bare_numeric(l.lexical(), l.datatype().as_str()) {
                out.push_str(l.lexical());
            } else {
                write_quoted(out, l.lexical());
                out.push_str("^^");
                write_iri(out, l.datatype(), prefixes);
            }
        }
    }
}

/// Deterministic Turtle: prefix directives sorted by name, then one block per
/// subject (IRIs by absolute form, then blank nodes), `a` first, remaining
/// predicates by IRI, objects in term order.
pub fn serialize_turtle(graph: &Graph) -> String {
    let prefixes = graph.prefixes();
    let mut out = String::new();
    for (prefix, ns) in prefixes.iter() {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }
    let mut blocks: BTreeMap<Term, BTreeMap<(bool, Iri), Vec<Term>>> = BTreeMap::new();
    for t in graph.iter() {
        let predicate = t.predicate.as_iri().expect("predicate is an IRI").clone();
        let not_type = predicate.as_str() != rdf::TYPE;
        blocks.entry(t.subject.clone()).or_default().entry((not_type, predicate)).or_default().push(t.object.clone());
    }
    for (subject, predicates) in blocks {
        out.push('\n');
        write_term(&mut out, &subject, prefixes);
        out.push('\n');
        let n = predicates.len();
        for (i, ((not_type, predicate), mut objects)) in predicates.into_iter().enumerate() {
            objects.sort();
            out.push_str("    ");
            if not_type {
                write_iri(&mut out, &predicate, prefixes);
            } else {
                out.push('a');
            }
            for (j, o) in objects.iter().enumerate() {
                out.push_str(if j == 0 { " " } else { ", " });
                write_term(&mut out, o, prefixes);
            }
            out.push_str(if i + 1 == n { " .\n" } else { " ;\n" });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{agricomo, agrikmaps};

    #[test]
    fn empty_document_is_empty_graph() {
        assert!(parse_turtle("", None).unwrap().is_empty());
        assert!(parse_turtle("  # only a comment\n", None).unwrap().is_empty());
    }

    #[test]
    fn undeclared_prefix_is_reported() {
        let err = parse_turtle("foo:a foo:b foo:c .", None).unwrap_err();
        assert_eq!(err, TurtleError::UnknownPrefix { prefix: "foo".into(), line: 1, column: 1 });
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_turtle("AgriKMaps:a AgriComO:b\n  AgriComO:c AgriComO:d .", None).unwrap_err();
        match err {
            TurtleError::Syntax(e) => {
                assert_eq!((e.line, e.column), (2, 14));
                assert!(e.message.contains("expected `.`"), "{}", e.message);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collections_rejected() {
        assert!(matches!(parse_turtle("AgriKMaps:a AgriComO:b ( 1 2 ) .", None), Err(TurtleError::Syntax(_))));
        assert!(matches!(parse_turtle("[ AgriComO:b 1 ] .", None), Err(TurtleError::Syntax(_))));
    }

    #[test]
    fn literals_and_directives() {
        let doc = r#"
            @prefix ex: <http://example.org/> .
            PREFIX ex2: <http://example.org/two#>
            @base <http://example.org/base/doc> .
            ex:s ex:p "plain", "chat"@fr, "5"^^xsd:integer, 5, -2.50, 1e3, true ;
                 ex2:q <rel>, <#frag>, </root>, _:b1 ;
                 a ex:C ; .
        "#;
        let g = parse_turtle(doc, None).unwrap();
        assert_eq!(g.len(), 11);
        let s = Term::Iri(Iri::new("http://example.org/s").unwrap());
        let q = Iri::new("http://example.org/two#q").unwrap();
        let objs: Vec<String> = g.objects(&s, &q).map(|t| t.to_string()).collect();
        assert!(objs.contains(&"<http://example.org/base/rel>".to_string()), "{objs:?}");
        assert!(objs.contains(&"<http://example.org/base/doc#frag>".to_string()), "{objs:?}");
        assert!(objs.contains(&"<http://example.org/root>".to_string()), "{objs:?}");
        // "5"^^xsd:integer and 5 are the same literal
        let p = Iri::new("http://example.org/p").unwrap();
        assert_eq!(g.objects(&s, &p).count(), 6);
    }

    #[test]
    fn relative_iri_without_base_is_invalid() {
        assert!(matches!(
            parse_turtle("<s> <http://x/p> <o> .", None),
            Err(TurtleError::InvalidTerm { source: TermError::RelativeIri(_), .. })
        ));
        let base = Iri::new("http://example.org/dir/").unwrap();
        let g = parse_turtle("<s> <http://x/p> <o> .", Some(&base)).unwrap();
        assert!(g.has_subject(&Term::Iri(Iri::new("http://example.org/dir/s").unwrap())));
    }

    #[test]
    fn empty_graph_serializes_to_prefixes_only() {
        let text = serialize_turtle(&Graph::new());
        assert!(text.lines().all(|l| l.starts_with("@prefix ")), "{text}");
        assert_eq!(text.lines().count(), 7);
        assert!(text.contains("@prefix AgriComO: <http://www.ucd.ie/consus/AgriComO#> ."));
    }

    #[test]
    fn serialization_groups_and_orders() {
        let m = agrikmaps::term("Regressor_004");
        let g: Graph = [
            Triple::new(m.clone(), agricomo::has_algorithm(), agricomo::term("Algorithm_RF")),
            Triple::new(m.clone(), agricomo::has_algorithm(), agricomo::term("Algorithm_DTR")),
            Triple::new(m.clone(), rdf::type_(), agricomo::regressor()),
            Triple::new(agrikmaps::term("Article_004"), rdf::type_(), agricomo::article()),
        ]
        .into_iter()
        .collect();
        let text = serialize_turtle(&g);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with("@prefix")).collect();
        assert_eq!(
            body,
            [
                "",
                "AgriKMaps:Article_004",
                "    a AgriComO:Article .",
                "",
                "AgriKMaps:Regressor_004",
                "    a AgriComO:Regressor ;",
                "    AgriComO:hasAlgorithm AgriComO:Algorithm_DTR, AgriComO:Algorithm_RF .",
            ]
        );
    }

    #[test]
    fn non_simple_locals_use_full_iris() {
        let g: Graph =
            [Triple::new(agrikmaps::term("has.dot"), agricomo::term("p"), Literal::typed("x y", xsd::integer()))]
                .into_iter()
                .collect();
        let text = serialize_turtle(&g);
        assert!(text.contains("<http://www.ucd.ie/consus/AgriKMaps#has.dot>"), "{text}");
        assert!(text.contains("\"x y\"^^xsd:integer"), "{text}");
        assert_eq!(parse_turtle(&text, None).unwrap(), g);
    }
}

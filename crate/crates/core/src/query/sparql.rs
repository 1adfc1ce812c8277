//! SELECT queries over basic graph patterns with FILTER and LIMIT.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Filter, GraphPattern, PatternTerm, TriplePattern};
use crate::rdf::lexer::{Kind, Lexer, SyntaxError, Token, Tokens};
use crate::rdf::{write_iri, write_quoted, write_term, Iri, Literal, PrefixMap, Term};
use crate::vocab::{rdf, xsd};

struct Parser {
    toks: Tokens,
    prefixes: PrefixMap,
}

/// Parses the query text. The default prefixes (rdf, rdfs, owl, xsd, dc,
/// AgriComO, AgriKMaps) are predeclared.
pub fn parse_sparql(text: &str) -> Result<GraphPattern, SyntaxError> {
    let mut p = Parser { toks: Tokens::new(Lexer::tokenize(text, true)?), prefixes: PrefixMap::default() };
    p.query()
}

impl Parser {
    fn keyword(&mut self, kw: &str) -> Result<Token, SyntaxError> {
        let tok = self.toks.peek().clone();
        if self.toks.eat_keyword(kw) {
            Ok(tok)
        } else {
            Err(SyntaxError::expected(&tok, &format!("`{kw}`")))
        }
    }

    fn query(&mut self) -> Result<GraphPattern, SyntaxError> {
        while self.toks.eat_keyword("PREFIX") {
            let tok = self.toks.next();
            let Kind::PrefixedName { prefix, local } = &tok.kind else {
                return Err(SyntaxError::expected(&tok, "prefix name"));
            };
            if !local.is_empty() {
                return Err(SyntaxError::expected(&tok, "prefix name ending in `:`"));
            }
            let iri_tok = self.toks.next();
            let Kind::IriRef(raw) = &iri_tok.kind else {
                return Err(SyntaxError::expected(&iri_tok, "namespace IRI"));
            };
            let ns = Iri::new(raw.clone()).map_err(|e| SyntaxError::at(iri_tok.pos, e.to_string()))?;
            self.prefixes.insert(prefix.clone(), ns);
        }
        let select_tok = self.keyword("SELECT")?;
        self.toks.eat_keyword("DISTINCT");
        let select = if self.toks.eat_punct('*') {
            None
        } else {
            let mut vars = Vec::new();
            while let Kind::Var(v) = &self.toks.peek().kind {
                vars.push(v.clone());
                self.toks.next();
            }
            if vars.is_empty() {
                return Err(SyntaxError::expected(self.toks.peek(), "variable or `*`"));
            }
            Some(vars)
        };
        self.toks.eat_keyword("WHERE");
        let mut pattern = GraphPattern { select, ..GraphPattern::default() };
        self.group(&mut pattern)?;
        if self.toks.eat_keyword("LIMIT") {
            let tok = self.toks.next();
            let Kind::Integer(n) = &tok.kind else {
                return Err(SyntaxError::expected(&tok, "integer limit"));
            };
            pattern.limit = Some(n.parse().map_err(|_| SyntaxError::expected(&tok, "non-negative integer"))?);
        }
        if !self.toks.at_eof() {
            return Err(SyntaxError::expected(self.toks.peek(), "end of query"));
        }
        pattern.validate().map_err(|e| SyntaxError::at(select_tok.pos, e.to_string()))?;
        Ok(pattern)
    }

    fn group(&mut self, out: &mut GraphPattern) -> Result<(), SyntaxError> {
        self.toks.expect_punct('{')?;
        loop {
            if self.toks.eat_punct('}') {
                return Ok(());
            }
            if self.toks.eat_keyword("FILTER") {
                out.filters.push(self.filter()?);
                self.toks.eat_punct('.');
                continue;
            }
            if self.toks.at_eof() {
                return Err(SyntaxError::expected(self.toks.peek(), "`}`"));
            }
            let subject = self.term()?;
            loop {
                let predicate = self.verb()?;
                loop {
                    let object = self.term()?;
                    out.patterns.push(TriplePattern::new(subject.clone(), predicate.clone(), object));
                    if !self.toks.eat_punct(',') {
                        break;
                    }
                }
                if !self.toks.eat_punct(';') {
                    break;
                }
                while self.toks.eat_punct(';') {}
                if matches!(self.toks.peek().kind, Kind::Punct('.' | '}')) {
                    break;
                }
            }
            if !self.toks.eat_punct('.') && self.toks.peek().kind != Kind::Punct('}') {
                return Err(SyntaxError::expected(self.toks.peek(), "`.` or `}`"));
            }
        }
    }

    fn filter(&mut self) -> Result<Filter, SyntaxError> {
        self.toks.expect_punct('(')?;
        let f = if self.toks.eat_keyword("CONTAINS") {
            self.toks.expect_punct('(')?;
            let var = if self.toks.eat_keyword("STR") {
                self.toks.expect_punct('(')?;
                let v = self.var()?;
                self.toks.expect_punct(')')?;
                v
            } else {
                self.var()?
            };
            self.toks.expect_punct(',')?;
            let tok = self.toks.next();
            let Kind::Str(needle) = tok.kind else {
                return Err(SyntaxError::expected(&tok, "string literal"));
            };
            self.toks.expect_punct(')')?;
            Filter::Contains { var, needle }
        } else {
            let var = self.var()?;
            self.toks.expect_punct('=')?;
            Filter::Equals { var, value: self.term()? }
        };
        self.toks.expect_punct(')')?;
        Ok(f)
    }

    fn var(&mut self) -> Result<String, SyntaxError> {
        let tok = self.toks.next();
        match tok.kind {
            Kind::Var(v) => Ok(v),
            _ => Err(SyntaxError::expected(&tok, "variable")),
        }
    }

    fn verb(&mut self) -> Result<PatternTerm, SyntaxError> {
        if let Kind::Name(n) = &self.toks.peek().kind {
            if n == "a" {
                self.toks.next();
                return Ok(PatternTerm::iri(rdf::type_()));
            }
        }
        self.term()
    }

    fn iri(&self, tok: &Token) -> Result<Option<Iri>, SyntaxError> {
        let raw = match &tok.kind {
            Kind::IriRef(raw) => raw.clone(),
            Kind::PrefixedName { prefix, local } => {
                let ns = self
                    .prefixes
                    .get(prefix)
                    .ok_or_else(|| SyntaxError::at(tok.pos, format!("unknown prefix `{prefix}:`")))?;
                format!("{}{local}", ns.as_str())
            }
            _ => return Ok(None),
        };
        Iri::new(raw).map(Some).map_err(|e| SyntaxError::at(tok.pos, e.to_string()))
    }

    fn term(&mut self) -> Result<PatternTerm, SyntaxError> {
        let tok = self.toks.next();
        if let Some(iri) = self.iri(&tok)? {
            return Ok(PatternTerm::iri(iri));
        }
        let lit = match &tok.kind {
            Kind::Var(v) => return Ok(PatternTerm::Var(v.clone())),
            Kind::Str(s) => match self.toks.peek().kind.clone() {
                Kind::LangTag(lang) => {
                    let t = self.toks.next();
                    Literal::lang(s.clone(), lang).map_err(|e| SyntaxError::at(t.pos, e.to_string()))?
                }
                Kind::DoubleCaret => {
                    self.toks.next();
                    let dt_tok = self.toks.next();
                    let dt = self.iri(&dt_tok)?.ok_or_else(|| SyntaxError::expected(&dt_tok, "datatype IRI"))?;
                    Literal::typed(s.clone(), dt)
                }
                _ => Literal::string(s.clone()),
            },
            Kind::Integer(n) => Literal::typed(n.clone(), xsd::integer()),
            Kind::Decimal(n) => Literal::typed(n.clone(), xsd::decimal()),
            Kind::Double(n) => Literal::typed(n.clone(), xsd::double()),
            Kind::Name(n) if n == "true" || n == "false" => Literal::typed(n.clone(), xsd::boolean()),
            Kind::Blank(_) => {
                return Err(SyntaxError::at(tok.pos, "blank nodes are not supported in queries; use a variable"))
            }
            _ => return Err(SyntaxError::expected(&tok, "variable, IRI or literal")),
        };
        Ok(PatternTerm::Term(Term::Literal(lit)))
    }
}

fn write_pattern_term(out: &mut String, t: &PatternTerm, prefixes: &PrefixMap) {
    match t {
        PatternTerm::Var(v) => {
            out.push('?');
            out.push_str(v);
        }
        PatternTerm::Term(t) => write_term(out, t, prefixes),
    }
}

/// Renders a pattern as query text that [`parse_sparql`] reads back.
pub fn to_sparql(p: &GraphPattern) -> String {
    let prefixes = PrefixMap::default();
    let mut out = String::new();
    for (prefix, ns) in prefixes.iter() {
        out.push_str(&format!("PREFIX {prefix}: "));
        write_iri(&mut out, ns, &PrefixMap::empty());
        out.push('\n');
    }
    out.push_str("SELECT");
    match &p.select {
        None => out.push_str(" *"),
        Some(vars) => vars.iter().for_each(|v| out.push_str(&format!(" ?{v}"))),
    }
    out.push_str(" WHERE {\n");
    for t in &p.patterns {
        out.push_str("    ");
        for (i, pos) in t.positions().into_iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if i == 1 && *pos == PatternTerm::iri(rdf::type_()) {
                out.push('a');
            } else {
                write_pattern_term(&mut out, pos, &prefixes);
            }
        }
        out.push_str(" .\n");
    }
    for f in &p.filters {
        match f {
            Filter::Contains { var, needle } => {
                out.push_str(&format!("    FILTER(CONTAINS(STR(?{var}), "));
                write_quoted(&mut out, needle);
                out.push_str("))\n");
            }
            Filter::Equals { var, value } => {
                out.push_str(&format!("    FILTER(?{var} = "));
                write_pattern_term(&mut out, value, &prefixes);
                out.push_str(")\n");
            }
        }
    }
    out.push('}');
    if let Some(n) = p.limit {
        out.push_str(&format!(" LIMIT {n}"));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmap::{fixtures, to_triples};
    use crate::query::evaluate;
    use crate::rdf::Graph;
    use crate::vocab::{agricomo, agrikmaps};

    #[test]
    fn two_pattern_query() {
        let p = parse_sparql("SELECT ?m WHERE { ?m AgriComO:predicts ?t . ?t rdf:type AgriComO:SoilPH }").unwrap();
        assert_eq!(p.patterns.len(), 2);
        assert_eq!(p.selected(), ["m"]);
        let g: Graph = to_triples(&fixtures::regressor_004()).unwrap().into_iter().collect();
        let sols = evaluate(&p, &g);
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0]["m"], Term::Iri(agrikmaps::term("Regressor_004")));
    }

    #[test]
    fn empty_where_gives_one_empty_row() {
        let p = parse_sparql("SELECT * WHERE { }").unwrap();
        assert!(p.patterns.is_empty());
        assert_eq!(evaluate(&p, &Graph::new()).len(), 1);
    }

    #[test]
    fn missing_brace_is_a_syntax_error() {
        let err = parse_sparql("SELECT ?m WHERE { ?m a AgriComO:Regressor").unwrap_err();
        assert_eq!((err.line, err.column), (1, 42));
    }

    #[test]
    fn abbreviations_filters_and_limit() {
        let q = r#"PREFIX ex: <http://example.org/>
            SELECT DISTINCT ?m ?l WHERE {
                ?m a AgriComO:Regressor , AgriComO:KnowledgeModel ;
                   rdfs:label ?l ;
                   AgriComO:hasAlgorithm ex:x .
                FILTER(CONTAINS(STR(?l), "004"))
                FILTER(?m = AgriKMaps:Regressor_004)
            } LIMIT 5"#;
        let p = parse_sparql(q).unwrap();
        assert_eq!(p.patterns.len(), 4);
        assert_eq!(p.filters.len(), 2);
        assert_eq!(p.limit, Some(5));
        assert_eq!(p.patterns[3].object, PatternTerm::iri(Iri::new("http://example.org/x").unwrap()));
        assert_eq!(parse_sparql(&to_sparql(&p)).unwrap(), p);
    }

    #[test]
    fn errors() {
        assert!(parse_sparql("SELECT ?z WHERE { ?m a ?t }").is_err());
        assert!(parse_sparql("SELECT ?m WHERE { ?m foo:bar ?t }").unwrap_err().message.contains("foo"));
        assert!(parse_sparql("SELECT ?m WHERE { _:b a ?m }").is_err());
        assert!(parse_sparql("SELECT WHERE { ?m a ?t }").is_err());
        let p = parse_sparql("SELECT * WHERE { ?m a AgriComO:Regressor ; }").unwrap();
        assert_eq!(p.patterns[0].object, PatternTerm::iri(agricomo::regressor()));
    }
}

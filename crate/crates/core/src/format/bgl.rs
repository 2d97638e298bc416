//! BGL, the belief-graph authoring language.
//!
//! ```text
//! document   := { statement } ;
//! statement  := node_decl | edge_decl ;
//! node_decl  := "belief" IDENT "{" "text" ":" STRING ["," "cred" ":" NUMBER] ["," "conf" ":" NUMBER] "}" ;
//! edge_decl  := IDENT arrow IDENT ["[" "w" "=" NUMBER "]"] ;
//! arrow      := "->" (* support *) | "~>" (* qualification *) | "-|" (* contradiction *) ;
//! IDENT      := letter { letter | digit | "_" } ;
//! ```
//!
//! `#` starts a comment running to the end of the line. Strings are
//! double-quoted and accept the escapes `\"`, `\\`, `\n`, `\t`, `\r` and
//! `\u{XXXX}`. Numbers are decimal with optional sign, fraction and exponent.
//! Missing `cred`/`conf` default to 0.5 and a missing weight to 1.0; each
//! default is reported as a warning.
//!
//! Keywords are contextual: `belief` only opens a declaration when followed
//! by an identifier, so `belief` remains usable as a node id.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Location, ParseReport, Warning, DEFAULT_SCORE, DEFAULT_WEIGHT};
use crate::error::{Error, Result};
use crate::model::{BeliefNode, BeliefSystem, Edge, EdgeKind, Item, NodeId};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Arrow(EdgeKind),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::Num(n) => format!("number {n}"),
            Tok::Arrow(EdgeKind::Support) => "`->`".into(),
            Tok::Arrow(EdgeKind::Qualification) => "`~>`".into(),
            Tok::Arrow(EdgeKind::Contradiction) => "`-|`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, expected: &str, found: String) -> Error {
        Error::Syntax {
            line: pos.line,
            column: pos.column,
            expected: expected.into(),
            found,
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, Pos)>> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '#' {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let pos = self.pos();
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, pos));
                return Ok(out);
            };
            let tok = match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                '~' => match self.bump() {
                    Some('>') => Tok::Arrow(EdgeKind::Qualification),
                    other => return Err(self.error(pos, "`~>`", found_char(other))),
                },
                '-' => match self.chars.peek() {
                    Some('>') => {
                        self.bump();
                        Tok::Arrow(EdgeKind::Support)
                    }
                    Some('|') => {
                        self.bump();
                        Tok::Arrow(EdgeKind::Contradiction)
                    }
                    _ => self.number(pos, '-')?,
                },
                '"' => self.string(pos)?,
                c if c.is_ascii_digit() || c == '+' || c == '.' => self.number(pos, c)?,
                c if c.is_ascii_alphabetic() => {
                    let mut s = String::from(c);
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            s.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(s)
                }
                other => return Err(self.error(pos, "a token", format!("`{other}`"))),
            };
            out.push((tok, pos));
        }
    }

    fn number(&mut self, pos: Pos, first: char) -> Result<Tok> {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            let after_exp = matches!(s.chars().last(), Some('e' | 'E'));
            if c.is_ascii_digit()
                || c == '.'
                || c == 'e'
                || c == 'E'
                || ((c == '+' || c == '-') && after_exp)
            {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let valid = {
            let digits = s.trim_start_matches(['+', '-']);
            digits.starts_with(|c: char| c.is_ascii_digit())
                || digits.starts_with('.') && digits[1..].starts_with(|c: char| c.is_ascii_digit())
        };
        match s.parse::<f64>() {
            Ok(v) if valid && v.is_finite() => Ok(Tok::Num(v)),
            _ => Err(self.error(pos, "a number", format!("`{s}`"))),
        }
    }

    fn string(&mut self, pos: Pos) -> Result<Tok> {
        let mut s = String::new();
        loop {
            let here = self.pos();
            match self.bump() {
                None => return Err(self.error(pos, "closing `\"`", "end of input".into())),
                Some('"') => return Ok(Tok::Str(s)),
                Some('\\') => match self.bump() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('u') => s.push(self.unicode_escape(here)?),
                    other => return Err(self.error(here, "an escape sequence", found_char(other))),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn unicode_escape(&mut self, pos: Pos) -> Result<char> {
        let bad = |lx: &Self| lx.error(pos, "`\\u{XXXX}`", "malformed escape".into());
        if self.bump() != Some('{') {
            return Err(bad(self));
        }
        let mut hex = String::new();
        loop {
            match self.bump() {
                Some('}') => break,
                Some(c) if c.is_ascii_hexdigit() && hex.len() < 6 => hex.push(c),
                _ => return Err(bad(self)),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| bad(self))
    }
}

fn found_char(c: Option<char>) -> String {
    c.map_or_else(|| "end of input".into(), |c| format!("`{c}`"))
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    nodes: Vec<BeliefNode>,
    node_pos: Vec<Pos>,
    edges: Vec<Edge>,
    edge_pos: Vec<Pos>,
    warnings: Vec<(Pos, String)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        let pos = self.pos();
        Err(Error::Syntax {
            line: pos.line,
            column: pos.column,
            expected: expected.into(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Pos> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.fail(expected)
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.fail(&format!("`{kw}`")),
        }
    }

    fn ident(&mut self) -> Result<(NodeId, Pos)> {
        match self.peek() {
            Tok::Ident(_) => match self.next() {
                (Tok::Ident(s), pos) => Ok((NodeId::new(s)?, pos)),
                _ => unreachable!(),
            },
            _ => self.fail("an identifier"),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek() {
            &Tok::Num(v) => {
                self.next();
                Ok(v)
            }
            _ => self.fail("a number"),
        }
    }

    fn document(&mut self) -> Result<()> {
        loop {
            match (self.peek(), self.peek2()) {
                (Tok::Eof, _) => return Ok(()),
                (Tok::Ident(kw), Tok::Ident(_)) if kw == "belief" => self.node_decl()?,
                (Tok::Ident(_), _) => self.edge_decl()?,
                _ => return self.fail("`belief` or an edge declaration"),
            }
        }
    }

    fn node_decl(&mut self) -> Result<()> {
        let start = self.pos();
        self.keyword("belief")?;
        let (id, _) = self.ident()?;
        self.expect(Tok::LBrace, "`{`")?;
        self.keyword("text")?;
        self.expect(Tok::Colon, "`:`")?;
        let content = match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.next();
                s
            }
            _ => return self.fail("a string"),
        };
        let mut cred = None;
        let mut conf = None;
        if *self.peek() == Tok::Comma && matches!(self.peek2(), Tok::Ident(k) if k == "cred") {
            self.next();
            self.keyword("cred")?;
            self.expect(Tok::Colon, "`:`")?;
            cred = Some(self.number()?);
        }
        if *self.peek() == Tok::Comma {
            self.next();
            self.keyword("conf")?;
            self.expect(Tok::Colon, "`:`")?;
            conf = Some(self.number()?);
        }
        self.expect(
            Tok::RBrace,
            if conf.is_some() { "`}`" } else { "`,` or `}`" },
        )?;

        for (field, value) in [("cred", cred), ("conf", conf)] {
            if value.is_none() {
                self.warnings.push((
                    start,
                    format!("belief `{id}`: {field} not given, defaulted to {DEFAULT_SCORE}"),
                ));
            }
        }
        self.nodes.push(BeliefNode::new(
            id,
            content,
            cred.unwrap_or(DEFAULT_SCORE),
            conf.unwrap_or(DEFAULT_SCORE),
        ));
        self.node_pos.push(start);
        Ok(())
    }

    fn edge_decl(&mut self) -> Result<()> {
        let (source, start) = self.ident()?;
        let kind = match self.peek() {
            &Tok::Arrow(k) => {
                self.next();
                k
            }
            _ => return self.fail("`->`, `~>` or `-|`"),
        };
        let (target, _) = self.ident()?;
        let weight = if *self.peek() == Tok::LBracket {
            self.next();
            self.keyword("w")?;
            self.expect(Tok::Eq, "`=`")?;
            let w = self.number()?;
            self.expect(Tok::RBracket, "`]`")?;
            Some(w)
        } else {
            None
        };
        if weight.is_none() {
            self.warnings.push((
                start,
                format!(
                    "edge {source} {} {target}: weight not given, defaulted to {DEFAULT_WEIGHT}",
                    arrow(kind)
                ),
            ));
        }
        self.edges.push(Edge::new(
            source,
            target,
            kind,
            weight.unwrap_or(DEFAULT_WEIGHT),
        ));
        self.edge_pos.push(start);
        Ok(())
    }
}

fn arrow(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Support => "->",
        EdgeKind::Qualification => "~>",
        EdgeKind::Contradiction => "-|",
    }
}

/// Parses a BGL document and validates the resulting system.
///
/// Validation errors come back wrapped in [`Error::At`] with the position of
/// the offending declaration (for edges, the position of the source id).
pub fn parse_bgl(text: &str) -> Result<ParseReport> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        toks,
        at: 0,
        nodes: Vec::new(),
        node_pos: Vec::new(),
        edges: Vec::new(),
        edge_pos: Vec::new(),
        warnings: Vec::new(),
    };
    p.document()?;
    let Parser {
        nodes,
        node_pos,
        edges,
        edge_pos,
        warnings,
        ..
    } = p;
    let system =
        BeliefSystem::build_located(nodes, edges, BTreeMap::new()).map_err(|(e, item)| {
            let pos = match item {
                Item::Node(i) => node_pos[i],
                Item::Edge(i) => edge_pos[i],
            };
            Error::At {
                line: pos.line,
                column: pos.column,
                source: Box::new(e),
            }
        })?;
    // statements are parsed in order, so warnings already follow the source
    Ok(ParseReport {
        system,
        warnings: warnings
            .into_iter()
            .map(|(pos, message)| Warning {
                location: Location::Text {
                    line: pos.line,
                    column: pos.column,
                },
                message,
            })
            .collect(),
    })
}

/// Whether `s` is a valid BGL identifier.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders a system as BGL with every score and weight spelled out, so that
/// parsing the output yields an equal system with no warnings.
///
/// BGL has no metadata syntax; metadata is written as leading comments and
/// is not read back. Fails when a node id is not a BGL identifier.
pub fn render_bgl(sys: &BeliefSystem) -> Result<String> {
    let mut out = String::new();
    for (k, v) in sys.metadata() {
        let _ = writeln!(out, "# {k}: {}", v.replace('\n', " "));
    }
    for n in sys.nodes() {
        if !is_ident(n.id.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "node id `{}` is not a valid BGL identifier",
                n.id
            )));
        }
        let _ = writeln!(
            out,
            "belief {} {{ text: {}, cred: {}, conf: {} }}",
            n.id,
            escape(&n.content),
            n.cred,
            n.conf
        );
    }
    for e in sys.edges() {
        let _ = writeln!(
            out,
            "{} {} {} [w={}]",
            e.source,
            arrow(e.kind),
            e.target,
            e.weight
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ScoreField;

    #[test]
    fn single_declaration() {
        let r = parse_bgl("belief a { text: \"x\", cred: 0.9, conf: 0.2 }").unwrap();
        assert_eq!(r.system.node_count(), 1);
        assert_eq!(r.system.edge_count(), 0);
        assert!(r.warnings.is_empty());
        let n = &r.system.nodes()[0];
        assert_eq!((n.content.as_str(), n.cred, n.conf), ("x", 0.9, 0.2));
    }

    #[test]
    fn defaults_are_warned() {
        let r = parse_bgl("belief a {text:\"x\"} belief b {text:\"y\"} a -| b").unwrap();
        assert_eq!(r.system.node_count(), 2);
        let e = &r.system.edges()[0];
        assert_eq!((e.kind, e.weight), (EdgeKind::Contradiction, 1.0));
        // cred + conf for both nodes, plus the weight
        assert_eq!(r.warnings.len(), 5);
        assert!(r.warnings[4].message.contains("weight"));
        assert_eq!(
            r.warnings[4].location,
            Location::Text {
                line: 1,
                column: 41
            }
        );
        assert!(r
            .system
            .nodes()
            .iter()
            .all(|n| n.cred == 0.5 && n.conf == 0.5));
    }

    #[test]
    fn dangling_edge_reports_source_position() {
        let err = parse_bgl("a -> b").unwrap_err();
        assert_eq!(err.position(), Some((1, 1)));
        assert!(matches!(err.root(), Error::DanglingEdgeEndpoint { .. }));

        let err = parse_bgl("belief a {text:\"\"}\n\n  a -> b [w=2]").unwrap_err();
        assert_eq!(err.position(), Some((3, 3)));
    }

    #[test]
    fn validation_errors_carry_positions() {
        let err = parse_bgl("belief a {text:\"\", cred: 1.5}").unwrap_err();
        assert!(matches!(
            err.root(),
            Error::ScoreOutOfRange {
                field: ScoreField::Cred,
                ..
            }
        ));
        assert_eq!(err.position(), Some((1, 1)));

        let err = parse_bgl("belief a {text:\"\"}\nbelief a {text:\"\"}").unwrap_err();
        assert!(matches!(err.root(), Error::DuplicateNodeId(_)));
        assert_eq!(err.position(), Some((2, 1)));

        let err = parse_bgl("belief a {text:\"\"}\na -> a").unwrap_err();
        assert!(matches!(err.root(), Error::SelfLoop(_)));

        let err = parse_bgl("belief a {text:\"\"} belief b {text:\"\"}\na -> b [w=0]").unwrap_err();
        assert!(matches!(err.root(), Error::NonPositiveWeight { .. }));
    }

    #[test]
    fn arrows_and_comments() {
        let src = "# header\nbelief a { text: \"A\" } # trailing\nbelief b { text: \"B\", conf: 0.1 }\nbelief c { text: \"C\", cred: 0.3 }\na -> b [w=2.5]\nb ~> c [w=1]\nc -| a [w=1e-1]\n";
        let r = parse_bgl(src).unwrap();
        let kinds: Vec<_> = r
            .system
            .edges()
            .iter()
            .map(|e| (e.kind, e.weight))
            .collect();
        assert_eq!(
            kinds,
            [
                (EdgeKind::Support, 2.5),
                (EdgeKind::Qualification, 1.0),
                (EdgeKind::Contradiction, 0.1)
            ]
        );
        let b = r.system.node(&NodeId::new("b").unwrap()).unwrap();
        assert_eq!((b.cred, b.conf), (0.5, 0.1));
        let c = r.system.node(&NodeId::new("c").unwrap()).unwrap();
        assert_eq!((c.cred, c.conf), (0.3, 0.5));
        // a: cred, conf; b: cred; c: conf
        assert_eq!(r.warnings.len(), 4);
        let lines: Vec<_> = r
            .warnings
            .iter()
            .map(|w| match w.location {
                Location::Text { line, .. } => line,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(lines, [2, 2, 3, 4]);
    }

    #[test]
    fn belief_is_usable_as_an_id() {
        let r = parse_bgl("belief belief {text:\"b\"} belief x {text:\"x\"} belief -> x [w=1]")
            .unwrap();
        assert_eq!(r.system.edge_count(), 1);
    }

    #[test]
    fn syntax_errors() {
        let cases = [
            ("belief a { text \"x\" }", (1, 17), "`:`"),
            ("belief a { cred: 0.5 }", (1, 12), "`text`"),
            (
                "belief a { text: \"x\", conf: 0.1, cred: 0.5 }",
                (1, 32),
                "`}`",
            ),
            ("a => b", (1, 4), "a token"),
            ("a -> b [weight=2]", (1, 9), "`w`"),
            ("belief a { text: \"unterminated }", (1, 18), "closing `\"`"),
            ("{", (1, 1), "`belief` or an edge declaration"),
            ("a -> 3", (1, 6), "an identifier"),
        ];
        for (src, pos, expected) in cases {
            match parse_bgl(src) {
                Err(Error::Syntax {
                    line,
                    column,
                    expected: e,
                    ..
                }) => {
                    assert_eq!((line, column), pos, "{src}");
                    assert_eq!(e, expected, "{src}");
                }
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn string_escapes_round_trip() {
        let content = "quote \" slash \\ tab \t nl \n bell \u{7} é";
        let sys = crate::model::build_system(
            vec![BeliefNode::new(
                NodeId::new("a").unwrap(),
                content,
                0.25,
                1.0,
            )],
            vec![],
        )
        .unwrap();
        let text = render_bgl(&sys).unwrap();
        let back = parse_bgl(&text).unwrap();
        assert_eq!(back.system, sys);
        assert!(back.warnings.is_empty());
    }

    #[test]
    fn render_rejects_non_identifier_ids() {
        let sys = crate::model::build_system(
            vec![BeliefNode::new(
                NodeId::new("has space").unwrap(),
                "",
                0.5,
                0.5,
            )],
            vec![],
        )
        .unwrap();
        assert!(matches!(render_bgl(&sys), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn empty_document() {
        let r = parse_bgl("  # nothing\n").unwrap();
        assert!(r.system.is_empty());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn identifier_rule() {
        assert!(is_ident("a_1"));
        assert!(!is_ident("_a"));
        assert!(!is_ident("1a"));
        assert!(!is_ident(""));
        assert!(!is_ident("a-b"));
    }
}

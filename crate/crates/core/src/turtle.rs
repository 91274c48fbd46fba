//! A Turtle subset reader.
//!
//! Supported: `@prefix` / `PREFIX` declarations, `<absolute-iri>`, prefixed
//! names, the `a` keyword, predicate lists (`;`), object lists (`,`), quoted
//! strings (short and long, single and double quoted) with an optional
//! `^^datatype`, bare integers, decimals, doubles and booleans, and `#`
//! comments. Blank nodes, collections, base IRIs and language tags are
//! rejected with a positioned error.

use indexmap::IndexMap;
use thiserror::Error;

use crate::term::{is_absolute_iri, vocab, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub kind: SyntaxErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxErrorKind {
    #[error("undeclared prefix {0:?}")]
    UndeclaredPrefix(String),
    #[error("relative IRI <{0}>")]
    RelativeIri(String),
    #[error("unsupported syntax: {0}")]
    Unsupported(&'static str),
    #[error("expected {expected}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
    },
    #[error("invalid escape sequence")]
    BadEscape,
    #[error("unterminated {0}")]
    Unterminated(&'static str),
}

/// Prefix label (without the colon) to namespace IRI.
pub type Prefixes = IndexMap<String, String>;

/// Parsed document: statements in source order plus the prefixes declared.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub triples: Vec<Triple>,
    pub prefixes: Prefixes,
}

pub fn parse(text: &str) -> Result<Document, SyntaxError> {
    parse_with_prefixes(text, Prefixes::new())
}

/// Parses with a set of prefixes already in scope.
pub fn parse_with_prefixes(text: &str, prefixes: Prefixes) -> Result<Document, SyntaxError> {
    let mut p = Parser::new(text, prefixes, false);
    let mut triples = Vec::new();
    loop {
        p.skip_ws();
        if p.at_end() {
            break;
        }
        if p.try_directive()? {
            continue;
        }
        p.statement(&mut triples)?;
    }
    Ok(Document {
        triples,
        prefixes: p.prefixes,
    })
}

/// Parses a whitespace-separated sequence of query terms: the Turtle term
/// syntax plus `?name` variables and bare local names, which resolve against
/// the empty prefix. Triple patterns in a conjunction are separated by `.`.
pub fn parse_query(text: &str, prefixes: &Prefixes) -> Result<Vec<[Term; 3]>, SyntaxError> {
    let mut p = Parser::new(text, prefixes.clone(), true);
    let mut out = Vec::new();
    loop {
        p.skip_ws();
        if p.at_end() {
            break;
        }
        let s = p.term(TermPos::Subject)?;
        p.skip_ws();
        let pr = p.term(TermPos::Predicate)?;
        p.skip_ws();
        let o = p.term(TermPos::Object)?;
        out.push([s, pr, o]);
        p.skip_ws();
        if p.peek() == Some('.') {
            p.bump();
        } else if !p.at_end() {
            return Err(p.unexpected("'.' or end of query"));
        }
    }
    if out.is_empty() {
        return Err(p.error(SyntaxErrorKind::Unexpected {
            expected: "a triple pattern",
            found: "end of input".into(),
        }));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum TermPos {
    Subject,
    Predicate,
    Object,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
    prefixes: Prefixes,
    query_mode: bool,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, prefixes: Prefixes, query_mode: bool) -> Self {
        Parser {
            src,
            pos: 0,
            line: 1,
            column: 1,
            prefixes,
            query_mode,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, kind: SyntaxErrorKind) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.column,
            kind,
        }
    }

    fn error_at(&self, line: usize, column: usize, kind: SyntaxErrorKind) -> SyntaxError {
        SyntaxError { line, column, kind }
    }

    fn unexpected(&self, expected: &'static str) -> SyntaxError {
        let found = match self.peek() {
            Some(c) => format!("{c:?}"),
            None => "end of input".to_string(),
        };
        self.error(SyntaxErrorKind::Unexpected { expected, found })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn keyword_ci(&self, kw: &str) -> bool {
        let rest = self.rest();
        rest.len() >= kw.len()
            && rest[..kw.len()].eq_ignore_ascii_case(kw)
            && rest[kw.len()..]
                .chars()
                .next()
                .is_none_or(|c| c.is_whitespace())
    }

    fn try_directive(&mut self) -> Result<bool, SyntaxError> {
        let sparql_style = self.keyword_ci("PREFIX");
        if self.rest().starts_with("@prefix") || sparql_style {
            let len = if sparql_style { 6 } else { 7 };
            for _ in 0..len {
                self.bump();
            }
            self.skip_ws();
            let label = self.prefix_label()?;
            self.expect(':', "':' after prefix label")?;
            self.skip_ws();
            let iri = self.iri_ref()?;
            self.prefixes.insert(label, iri);
            if !sparql_style {
                self.expect('.', "'.' after prefix declaration")?;
            }
            return Ok(true);
        }
        if self.rest().starts_with("@base") || self.keyword_ci("BASE") {
            return Err(self.error(SyntaxErrorKind::Unsupported("base IRI declarations")));
        }
        Ok(false)
    }

    fn prefix_label(&mut self) -> Result<String, SyntaxError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn statement(&mut self, out: &mut Vec<Triple>) -> Result<(), SyntaxError> {
        let subject = self.term(TermPos::Subject)?;
        loop {
            self.skip_ws();
            let predicate = self.term(TermPos::Predicate)?;
            loop {
                self.skip_ws();
                let object = self.term(TermPos::Object)?;
                let triple = Triple::new(subject.clone(), predicate.clone(), object)
                    .expect("parser yields well-shaped triples");
                out.push(triple);
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.bump();
                } else {
                    break;
                }
            }
            self.skip_ws();
            if self.peek() == Some(';') {
                // Repeated and trailing semicolons are legal.
                while self.peek() == Some(';') {
                    self.bump();
                    self.skip_ws();
                }
                if self.peek() == Some('.') {
                    break;
                }
            } else {
                break;
            }
        }
        self.expect('.', "'.' at end of statement")
    }

    fn term(&mut self, pos: TermPos) -> Result<Term, SyntaxError> {
        let (line, column) = (self.line, self.column);
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.unexpected("a term")),
        };
        let term = match c {
            '<' => Term::Iri(self.iri_ref()?),
            '_' if self.peek_nth(1) == Some(':') => {
                return Err(self.error(SyntaxErrorKind::Unsupported("blank nodes")))
            }
            '[' => return Err(self.error(SyntaxErrorKind::Unsupported("blank nodes"))),
            '(' => return Err(self.error(SyntaxErrorKind::Unsupported("collections"))),
            '"' | '\'' => self.literal()?,
            '?' if self.query_mode => {
                self.bump();
                let name = self.name_chars();
                if name.is_empty() {
                    return Err(self.unexpected("a variable name"));
                }
                Term::Var(name)
            }
            c if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.numeric()?,
            _ => self.name_or_keyword(pos)?,
        };
        if pos != TermPos::Object && matches!(term, Term::Literal { .. }) {
            return Err(self.error_at(
                line,
                column,
                SyntaxErrorKind::Unexpected {
                    expected: "an IRI",
                    found: "a literal".into(),
                },
            ));
        }
        Ok(term)
    }

    fn name_chars(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                self.bump();
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn iri_ref(&mut self) -> Result<String, SyntaxError> {
        let (line, column) = (self.line, self.column);
        if self.peek() != Some('<') {
            return Err(self.unexpected("'<'"));
        }
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => iri.push(self.unicode_escape()?),
                Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                    return Err(self.error_at(line, column, SyntaxErrorKind::Unterminated("IRI")))
                }
                Some(c) => iri.push(c),
                None => {
                    return Err(self.error_at(line, column, SyntaxErrorKind::Unterminated("IRI")))
                }
            }
        }
        if !is_absolute_iri(&iri) {
            return Err(self.error_at(line, column, SyntaxErrorKind::RelativeIri(iri)));
        }
        Ok(iri)
    }

    fn unicode_escape(&mut self) -> Result<char, SyntaxError> {
        let digits = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error(SyntaxErrorKind::BadEscape)),
        };
        let mut code = 0u32;
        for _ in 0..digits {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error(SyntaxErrorKind::BadEscape))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.error(SyntaxErrorKind::BadEscape))
    }

    fn name_or_keyword(&mut self, pos: TermPos) -> Result<Term, SyntaxError> {
        let (line, column) = (self.line, self.column);
        let start = self.pos;
        let prefix = self.prefix_label()?;
        if self.peek() != Some(':') {
            // Not a prefixed name: keywords or (in queries) a bare local name.
            match prefix.as_str() {
                "a" if pos == TermPos::Predicate => {
                    return Ok(Term::Iri(vocab::RDF_TYPE.to_string()))
                }
                "true" | "false" if pos == TermPos::Object => {
                    return Ok(Term::literal(prefix, vocab::XSD_BOOLEAN))
                }
                "" => return Err(self.unexpected("a term")),
                _ if self.query_mode => {
                    let local = prefix.trim_end_matches('.');
                    let namespace = match self.prefixes.get("") {
                        Some(ns) => ns.clone(),
                        None => {
                            return Err(self.error_at(
                                line,
                                column,
                                SyntaxErrorKind::UndeclaredPrefix(String::new()),
                            ))
                        }
                    };
                    // Give back any trailing dots; they terminate the pattern.
                    self.rewind_to(start, line, column);
                    for _ in 0..local.chars().count() {
                        self.bump();
                    }
                    return Ok(Term::Iri(format!("{namespace}{local}")));
                }
                _ => {
                    return Err(self.error_at(
                        line,
                        column,
                        SyntaxErrorKind::Unexpected {
                            expected: "an IRI, prefixed name or literal",
                            found: format!("{prefix:?}"),
                        },
                    ))
                }
            }
        }
        if prefix.ends_with('.') {
            return Err(self.error_at(
                line,
                column,
                SyntaxErrorKind::Unexpected {
                    expected: "a prefix label",
                    found: format!("{prefix:?}"),
                },
            ));
        }
        self.bump(); // ':'
        let local = self.local_name()?;
        let namespace = self.prefixes.get(&prefix).ok_or_else(|| {
            self.error_at(
                line,
                column,
                SyntaxErrorKind::UndeclaredPrefix(prefix.clone()),
            )
        })?;
        let iri = format!("{namespace}{local}");
        if !is_absolute_iri(&iri) {
            return Err(self.error_at(line, column, SyntaxErrorKind::RelativeIri(iri)));
        }
        Ok(Term::Iri(iri))
    }

    fn rewind_to(&mut self, pos: usize, line: usize, column: usize) {
        self.pos = pos;
        self.line = line;
        self.column = column;
    }

    fn local_name(&mut self) -> Result<String, SyntaxError> {
        let mut local = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | ':') => {
                    local.push(c);
                    self.bump();
                }
                // A dot belongs to the name only when followed by a name char.
                Some('.')
                    if self
                        .peek_nth(1)
                        .is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-' | ':')) =>
                {
                    local.push('.');
                    self.bump();
                }
                Some('%') => {
                    self.bump();
                    local.push('%');
                    for _ in 0..2 {
                        match self.bump() {
                            Some(h) if h.is_ascii_hexdigit() => local.push(h),
                            _ => return Err(self.error(SyntaxErrorKind::BadEscape)),
                        }
                    }
                }
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return Err(self.error(SyntaxErrorKind::BadEscape)),
                    }
                }
                _ => break,
            }
        }
        Ok(local)
    }

    fn literal(&mut self) -> Result<Term, SyntaxError> {
        let (line, column) = (self.line, self.column);
        let quote = self.bump().expect("caller checked quote");
        let long = self.peek() == Some(quote) && self.peek_nth(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut lexical = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.error_at(line, column, SyntaxErrorKind::Unterminated("string")));
            };
            if c == quote {
                if !long {
                    break;
                }
                if self.peek() == Some(quote) && self.peek_nth(1) == Some(quote) {
                    self.bump();
                    self.bump();
                    break;
                }
                lexical.push(c);
                continue;
            }
            match c {
                '\\' => {
                    let esc = match self.peek() {
                        Some('t') => '\t',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') | Some('U') => {
                            lexical.push(self.unicode_escape()?);
                            continue;
                        }
                        _ => return Err(self.error(SyntaxErrorKind::BadEscape)),
                    };
                    self.bump();
                    lexical.push(esc);
                }
                '\n' | '\r' if !long => {
                    return Err(self.error_at(
                        line,
                        column,
                        SyntaxErrorKind::Unterminated("string"),
                    ))
                }
                c => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => Err(self.error(SyntaxErrorKind::Unsupported("language tags"))),
            Some('^') if self.peek_nth(1) == Some('^') => {
                self.bump();
                self.bump();
                let datatype = match self.peek() {
                    Some('<') => self.iri_ref()?,
                    _ => match self.name_or_keyword(TermPos::Subject)? {
                        Term::Iri(i) => i,
                        _ => return Err(self.unexpected("a datatype IRI")),
                    },
                };
                Ok(Term::literal(lexical, datatype))
            }
            _ => Ok(Term::string(lexical)),
        }
    }

    fn numeric(&mut self) -> Result<Term, SyntaxError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+') | Some('-')) {
            self.bump();
        }
        let mut int_digits = 0;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            int_digits += 1;
        }
        let mut frac_digits = 0;
        let mut has_dot = false;
        if self.peek() == Some('.') && self.peek_nth(1).is_some_and(|c| c.is_ascii_digit()) {
            has_dot = true;
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                frac_digits += 1;
            }
        }
        if int_digits + frac_digits == 0 {
            return Err(self.unexpected("a number"));
        }
        let mut has_exp = false;
        if matches!(self.peek(), Some('e') | Some('E')) {
            has_exp = true;
            self.bump();
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.bump();
            }
            let mut exp_digits = 0;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(self.unexpected("exponent digits"));
            }
        }
        let lexical = &self.src[start..self.pos];
        let datatype = if has_exp {
            vocab::XSD_DOUBLE
        } else if has_dot {
            vocab::XSD_DECIMAL
        } else {
            vocab::XSD_INTEGER
        };
        Ok(Term::literal(lexical, datatype))
    }
}

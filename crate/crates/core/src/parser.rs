//! Concrete ASCII syntax for process terms and game declarations.
//!
//! | operator                        | ASCII   | precedence | assoc |
//! |---------------------------------|---------|------------|-------|
//! | sequential composition `·`      | `.`     | tightest   | right |
//! | alternative composition `+`     | `+`     | middle     | left  |
//! | opponent's alternative `‡`      | `$`     | middle     | left  |
//! | playing operator `⊓`            | `&`     | loosest    | left  |
//!
//! Atoms are identifiers (`[A-Za-z][A-Za-z0-9_]*`) and the reserved word
//! `delta`. `#` starts a comment that runs to the end of the line.

use std::fmt;

use thiserror::Error;

use crate::term::{is_identifier, ActionLabel, GameDeclaration, ProcessTerm, Role, DEADLOCK_KEYWORD};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Dot,
    Plus,
    Dollar,
    Amp,
    LParen,
    RParen,
    Comma,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Dot => "`.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Dollar => "`$`".into(),
            Tok::Amp => "`&`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(src: &str) -> Result<(Vec<Token>, SourceSpan), ParseError> {
    let mut tokens = Vec::new();
    // position of the last non-blank character, used for end-of-input errors
    let mut last = SourceSpan { line: 1, column: 1, length: 1 };
    for (line_idx, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = SourceSpan { line: line_idx + 1, column: i + 1, length: 1 };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            last = span;
            let single = match c {
                '.' => Some(Tok::Dot),
                '+' => Some(Tok::Plus),
                '$' => Some(Tok::Dollar),
                '&' => Some(Tok::Amp),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                _ => None,
            };
            if let Some(tok) = single {
                tokens.push(Token { tok, span });
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let span = SourceSpan { length: i - start, ..span };
                last = SourceSpan { column: i, length: 1, ..span };
                tokens.push(Token { tok: Tok::Ident(word), span });
                continue;
            }
            return Err(ParseError { span, message: format!("unexpected character `{c}`"), expected: Vec::new() });
        }
    }
    Ok((tokens, last))
}

const ATOM_START: [&str; 3] = ["identifier", "`delta`", "`(`"];

struct TermParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: SourceSpan,
}

impl TermParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn error_here(&self, message: String, expected: &[&str]) -> ParseError {
        let span = self.tokens.get(self.pos).map(|t| t.span).unwrap_or(self.end);
        ParseError { span, message, expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let message = match self.peek() {
            Some(t) => format!("unexpected {}", t.describe()),
            None => "unexpected end of input".to_string(),
        };
        self.error_here(message, expected)
    }

    fn play(&mut self) -> Result<ProcessTerm, ParseError> {
        let mut acc = self.choice()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            acc = ProcessTerm::play(acc, self.choice()?);
        }
        Ok(acc)
    }

    fn choice(&mut self) -> Result<ProcessTerm, ParseError> {
        let mut acc = self.seq()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = ProcessTerm::alt(acc, self.seq()?);
                }
                Some(Tok::Dollar) => {
                    self.pos += 1;
                    acc = ProcessTerm::opp_alt(acc, self.seq()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn seq(&mut self) -> Result<ProcessTerm, ParseError> {
        let head = self.atom()?;
        if self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            Ok(ProcessTerm::seq(head, self.seq()?))
        } else {
            Ok(head)
        }
    }

    fn atom(&mut self) -> Result<ProcessTerm, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(word)) => {
                self.pos += 1;
                if word == DEADLOCK_KEYWORD {
                    Ok(ProcessTerm::Deadlock)
                } else {
                    // the lexer only produces identifiers
                    Ok(ProcessTerm::Action(ActionLabel::new(&word).expect("lexed identifier")))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.play()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.unexpected(&["`)`", "`.`", "`+`", "`$`", "`&`"]));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.unexpected(&ATOM_START)),
        }
    }
}

/// Parses a single term.
pub fn parse_term(src: &str) -> Result<ProcessTerm, ParseError> {
    let (tokens, end) = lex(src)?;
    let mut p = TermParser { tokens: &tokens, pos: 0, end };
    let term = p.play()?;
    if p.pos < tokens.len() {
        return Err(p.unexpected(&["`.`", "`+`", "`$`", "`&`", "end of input"]));
    }
    Ok(term)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Play,
    Choice,
    Seq,
    Atom,
}

fn prec(t: &ProcessTerm) -> Prec {
    match t {
        ProcessTerm::Play(..) => Prec::Play,
        ProcessTerm::Alt(..) | ProcessTerm::OppAlt(..) => Prec::Choice,
        ProcessTerm::Seq(..) => Prec::Seq,
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => Prec::Atom,
    }
}

struct Glyphs {
    seq: &'static str,
    alt: &'static str,
    opp: &'static str,
    play: &'static str,
    deadlock: &'static str,
}

const ASCII: Glyphs = Glyphs { seq: " . ", alt: " + ", opp: " $ ", play: " & ", deadlock: DEADLOCK_KEYWORD };
const UNICODE: Glyphs = Glyphs { seq: "·", alt: " + ", opp: " ‡ ", play: " ⊓ ", deadlock: "δ" };

fn write_term(t: &ProcessTerm, min: Prec, g: &Glyphs, out: &mut String) {
    let parens = prec(t) < min;
    if parens {
        out.push('(');
    }
    match t {
        ProcessTerm::Action(a) => out.push_str(a.as_str()),
        ProcessTerm::Deadlock => out.push_str(g.deadlock),
        ProcessTerm::Seq(l, r) => {
            write_term(l, Prec::Atom, g, out);
            out.push_str(g.seq);
            write_term(r, Prec::Seq, g, out);
        }
        ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) => {
            write_term(l, Prec::Choice, g, out);
            out.push_str(if matches!(t, ProcessTerm::Alt(..)) { g.alt } else { g.opp });
            write_term(r, Prec::Seq, g, out);
        }
        ProcessTerm::Play(l, r) => {
            write_term(l, Prec::Play, g, out);
            out.push_str(g.play);
            write_term(r, Prec::Choice, g, out);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Prints a term with the fewest parentheses that still parse back to the
/// same tree.
pub fn print_term(t: &ProcessTerm) -> String {
    let mut out = String::new();
    write_term(t, Prec::Play, &ASCII, &mut out);
    out
}

/// Prints a term with the mathematical glyphs (`·`, `‡`, `⊓`, `δ`).
pub fn print_term_unicode(t: &ProcessTerm) -> String {
    let mut out = String::new();
    write_term(t, Prec::Play, &UNICODE, &mut out);
    out
}

fn decl_error(span: SourceSpan, message: impl Into<String>, expected: &[&str]) -> ParseError {
    ParseError { span, message: message.into(), expected: expected.iter().map(|s| s.to_string()).collect() }
}

/// Splits `ident (, ident)*` and checks it consumes the whole slice.
fn ident_list(tokens: &[Token], after: SourceSpan) -> Result<Vec<(&str, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        match tokens.get(i) {
            Some(Token { tok: Tok::Ident(w), span }) => out.push((w.as_str(), *span)),
            Some(t) => return Err(decl_error(t.span, format!("unexpected {}", t.tok.describe()), &["identifier"])),
            None => {
                let span = out.last().map(|(_, s)| *s).unwrap_or(after);
                return Err(decl_error(span, "missing name at end of line", &["identifier"]));
            }
        }
        i += 1;
        match tokens.get(i) {
            None => return Ok(out),
            Some(Token { tok: Tok::Comma, .. }) => i += 1,
            Some(t) => {
                return Err(decl_error(t.span, format!("unexpected {}", t.tok.describe()), &["`,`", "end of line"]))
            }
        }
    }
}

fn make_role(name: &str, span: SourceSpan) -> Result<Role, ParseError> {
    Role::new(name).map_err(|e| decl_error(span, e.to_string(), &["identifier"]))
}

/// Parses a game declaration:
///
/// ```text
/// players P, O
/// owner O: submit, cancel
/// owner P: start, write, store
/// ```
pub fn parse_game_decl(src: &str) -> Result<GameDeclaration, ParseError> {
    let (tokens, end) = lex(src)?;
    let mut lines: Vec<Vec<Token>> = Vec::new();
    for tok in tokens {
        match lines.last_mut() {
            Some(line) if line[0].span.line == tok.span.line => line.push(tok),
            _ => lines.push(vec![tok]),
        }
    }

    let mut decl: Option<GameDeclaration> = None;
    for line in &lines {
        let head = &line[0];
        let Tok::Ident(keyword) = &head.tok else {
            return Err(decl_error(
                head.span,
                format!("unexpected {}", head.tok.describe()),
                &["`players`", "`owner`"],
            ));
        };
        match keyword.as_str() {
            "players" => {
                if decl.is_some() {
                    return Err(decl_error(head.span, "duplicate `players` header", &["`owner`"]));
                }
                let names = ident_list(&line[1..], head.span)?;
                let mut roles = Vec::new();
                for (name, span) in &names {
                    let role = make_role(name, *span)?;
                    if roles.contains(&role) {
                        return Err(decl_error(*span, format!("player `{name}` is listed twice"), &[]));
                    }
                    roles.push(role);
                }
                let span = names.last().map(|(_, s)| *s).unwrap_or(head.span);
                decl = Some(GameDeclaration::new(roles).map_err(|e| decl_error(span, e.to_string(), &[]))?);
            }
            "owner" => {
                let Some(g) = decl.as_mut() else {
                    return Err(decl_error(head.span, "`owner` line before the `players` header", &["`players`"]));
                };
                let (role_name, role_span) = match line.get(1) {
                    Some(Token { tok: Tok::Ident(w), span }) => (w.as_str(), *span),
                    Some(t) => {
                        return Err(decl_error(t.span, format!("unexpected {}", t.tok.describe()), &["role name"]))
                    }
                    None => return Err(decl_error(head.span, "missing role name", &["role name"])),
                };
                let role = make_role(role_name, role_span)?;
                if !g.has_player(&role) {
                    return Err(decl_error(role_span, format!("role `{role_name}` is not a declared player"), &[]));
                }
                match line.get(2) {
                    Some(Token { tok: Tok::Colon, .. }) => {}
                    Some(t) => return Err(decl_error(t.span, format!("unexpected {}", t.tok.describe()), &["`:`"])),
                    None => return Err(decl_error(role_span, "missing `:` after role", &["`:`"])),
                }
                for (name, span) in ident_list(&line[3..], line[2].span)? {
                    let label =
                        ActionLabel::new(name).map_err(|e| decl_error(span, e.to_string(), &["action label"]))?;
                    g.assign(label, role.clone()).map_err(|e| decl_error(span, e.to_string(), &[]))?;
                }
            }
            other => {
                let msg = if is_identifier(other) {
                    format!("unknown directive `{other}`")
                } else {
                    format!("unexpected `{other}`")
                };
                return Err(decl_error(head.span, msg, &["`players`", "`owner`"]));
            }
        }
    }
    decl.ok_or_else(|| decl_error(end, "missing `players` header", &["`players`"]))
}

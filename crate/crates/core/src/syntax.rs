//! Text formats: nested systems (`.njs`) and fixpoint definitions (`.lfp`).
//!
//! ```text
//! system kk {
//!   r <- p, q.
//!   ~r <- ~p.
//!   ~r <- ~q.
//!   system wf { #complete
//!     p <- ~q, r.
//!     q <- q.
//!   }
//! }
//! ```
//!
//! `#complete` asks for the rules of the negated heads to be derived by
//! complementation. Other `#` comments run to the end of the line.
//!
//! ```text
//! lfp { p <- q | r. q <- p. u <- s. gfp { r <- p. s <- t2 | q. t2 <- s. } }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::branches::EvalKind;
use crate::error::{Error, Result};
use crate::facts::{is_identifier, Fact, Name};
use crate::fixpoint::{FixpointDefinition, Formula, Polarity};
use crate::frames::{complementation, DEFAULT_BODY_CAP, Rule};
use crate::justify::System;
use crate::nested::{NestedSystem, Provenance};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    Comma,
    Dot,
    Open,
    Close,
    LParen,
    RParen,
    Tilde,
    Bang,
    Amp,
    Bar,
    Complete,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Arrow => "`<-`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Open => "`{`".into(),
            Tok::Close => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Complete => "`#complete`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (li + 1, i + 1);
            let mut push = |tok: Tok| out.push(Spanned { tok, line, column });
            match c {
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                '#' => {
                    let rest: String = chars[i..].iter().collect();
                    if rest.starts_with("#complete") && !rest[9..].starts_with(|c: char| c.is_alphanumeric()) {
                        push(Tok::Complete);
                        i += 9;
                        continue;
                    }
                    break;
                }
                '<' if chars.get(i + 1) == Some(&'-') => {
                    push(Tok::Arrow);
                    i += 2;
                    continue;
                }
                ',' => push(Tok::Comma),
                '.' => push(Tok::Dot),
                '{' => push(Tok::Open),
                '}' => push(Tok::Close),
                '(' => push(Tok::LParen),
                ')' => push(Tok::RParen),
                '~' => push(Tok::Tilde),
                '!' => push(Tok::Bang),
                '&' => push(Tok::Amp),
                '|' => push(Tok::Bar),
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                        i += 1;
                    }
                    push(Tok::Ident(chars[start..i].iter().collect()));
                    continue;
                }
                other => {
                    return Err(Error::Syntax {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Parser> {
        let lines = text.lines().count().max(1);
        let last = text.lines().last().map_or(0, |l| l.chars().count());
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            end: (lines, last + 1),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.column))
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn found(&self) -> String {
        self.peek().map_or("end of input".into(), Tok::describe)
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", tok.describe(), self.found()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected an identifier, found {}", self.found())),
        }
    }

    fn fact(&mut self) -> Result<Fact> {
        let negated = self.peek() == Some(&Tok::Tilde);
        if negated {
            self.pos += 1;
        }
        let at = self.here();
        let name = self.ident()?;
        let text = if negated { format!("~{name}") } else { name };
        Fact::parse(&text).map_err(|e| Error::Syntax {
            line: at.0,
            column: at.1,
            message: e.to_string(),
        })
    }

    /// `head <- b1, ..., bn .`
    fn rule(&mut self) -> Result<Rule> {
        let at = self.here();
        let head = self.fact()?;
        self.expect(Tok::Arrow)?;
        if self.peek() == Some(&Tok::Dot) {
            return self.error(format!("rule for `{head}` has an empty body"));
        }
        let mut body = vec![self.fact()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            body.push(self.fact()?);
        }
        self.expect(Tok::Dot)?;
        Rule::new(head, body).map_err(|e| Error::Syntax {
            line: at.0,
            column: at.1,
            message: e.to_string(),
        })
    }

    fn system(&mut self) -> Result<NestedSystem> {
        let at = self.here();
        let kw = self.ident()?;
        if kw != "system" {
            return Err(Error::Syntax {
                line: at.0,
                column: at.1,
                message: format!("expected `system`, found `{kw}`"),
            });
        }
        let at = self.here();
        let ev = self.ident()?;
        let evaluation = EvalKind::parse(&ev).ok_or_else(|| Error::Syntax {
            line: at.0,
            column: at.1,
            message: format!("unknown branch evaluation `{ev}` (expected sp, kk, wf, cwf or st)"),
        })?;
        self.expect(Tok::Open)?;
        let mut complete = false;
        let mut rules = Vec::new();
        let mut children = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Close) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Complete) => {
                    self.pos += 1;
                    complete = true;
                }
                Some(Tok::Ident(s)) if s == "system" => children.push(self.system()?),
                Some(_) => rules.push(self.rule()?),
                None => return self.error("unclosed `{`"),
            }
        }
        let rules = if complete {
            complementation(&rules.into_iter().collect(), DEFAULT_BODY_CAP).map_err(|e| Error::Syntax {
                line: at.0,
                column: at.1,
                message: format!("#complete: {e}"),
            })?
        } else {
            rules.into_iter().collect()
        };
        Ok(NestedSystem::assemble(evaluation, rules, children))
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return self.error(format!("unexpected {} after the top-level block", self.found()));
        }
        Ok(())
    }

    fn definition(&mut self) -> Result<FixpointDefinition> {
        let at = self.here();
        let kw = self.ident()?;
        let polarity = match kw.as_str() {
            "lfp" => Polarity::Least,
            "gfp" => Polarity::Greatest,
            other => {
                return Err(Error::Syntax {
                    line: at.0,
                    column: at.1,
                    message: format!("expected `lfp` or `gfp`, found `{other}`"),
                })
            }
        };
        self.expect(Tok::Open)?;
        let mut rules: Vec<(Name, Formula)> = Vec::new();
        let mut children = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Close) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(s)) if s == "lfp" || s == "gfp" => children.push(self.definition()?),
                Some(_) => {
                    let at = self.here();
                    let head = self.atom_name()?;
                    if rules.iter().any(|(h, _)| *h == head) {
                        return Err(Error::Syntax {
                            line: at.0,
                            column: at.1,
                            message: format!("`{head}` is defined twice"),
                        });
                    }
                    self.expect(Tok::Arrow)?;
                    let phi = self.disjunction()?;
                    self.expect(Tok::Dot)?;
                    rules.push((head, phi));
                }
                None => return self.error("unclosed `{`"),
            }
        }
        FixpointDefinition::new(polarity, rules, children)
    }

    fn atom_name(&mut self) -> Result<Name> {
        let at = self.here();
        let s = self.ident()?;
        if !is_identifier(&s) || s == "true" || s == "false" || s == "lfp" || s == "gfp" {
            return Err(Error::Syntax {
                line: at.0,
                column: at.1,
                message: format!("`{s}` cannot name an atom"),
            });
        }
        Ok(Name::intern(&s))
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut xs = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            xs.push(self.conjunction()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Formula::Or(xs) })
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut xs = vec![self.literal()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            xs.push(self.literal()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Formula::And(xs) })
    }

    fn literal(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                if !matches!(self.peek(), Some(Tok::Ident(_))) {
                    return self.error("negation applies to atoms only");
                }
                Ok(Formula::Not(self.atom_name()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let phi = self.disjunction()?;
                self.expect(Tok::RParen)?;
                Ok(phi)
            }
            Some(Tok::Ident(s)) if s == "true" || s == "false" => {
                let b = s == "true";
                self.pos += 1;
                Ok(Formula::Const(b))
            }
            _ => Ok(Formula::Atom(self.atom_name()?)),
        }
    }
}

/// Parses and validates a nested system.
pub fn parse_system(text: &str) -> Result<NestedSystem> {
    let mut p = Parser::new(text)?;
    let ns = p.system()?;
    p.finish()?;
    let report = crate::nested::validate_nested(&ns);
    if !report.is_valid() {
        return Err(Error::Invalid {
            what: "nested system",
            violations: report.violations.iter().map(|v| v.to_string()).collect(),
        });
    }
    Ok(ns)
}

/// Parses a single rule list (`h <- a. ...`) into a set of rules.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.rule()?);
    }
    Ok(out)
}

pub fn parse_definition(text: &str) -> Result<FixpointDefinition> {
    let mut p = Parser::new(text)?;
    let d = p.definition()?;
    p.finish()?;
    let problems = d.validate();
    if !problems.is_empty() {
        return Err(Error::Invalid {
            what: "fixpoint definition",
            violations: problems,
        });
    }
    Ok(d)
}

/// Prints a nested system in the `.njs` grammar.
pub fn print_system(ns: &NestedSystem) -> String {
    let mut out = String::new();
    print_block(ns, 0, &mut out);
    out
}

fn print_block(ns: &NestedSystem, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    let _ = writeln!(out, "{pad}system {} {{", ns.evaluation);
    for r in &ns.rules {
        let _ = writeln!(out, "{pad}  {r}.");
    }
    for c in &ns.children {
        print_block(c, indent + 1, out);
    }
    let _ = writeln!(out, "{pad}}}");
}

/// Prints a flat system as a single block, with `# from:` lines for rules
/// that have a recorded origin.
pub fn print_flat(system: &System, provenance: Option<&BTreeMap<Rule, Provenance>>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system {} {{", system.evaluation);
    for r in &system.frame.rules {
        if let Some(p) = provenance.and_then(|m| m.get(r)) {
            match p {
                Provenance::Original => {}
                Provenance::Flattened { child, .. } => {
                    let _ = writeln!(out, "  # from: flattening of child {child}");
                }
                Provenance::Unfolded { source, choices } => {
                    let picks: Vec<String> = choices.iter().map(|(_, r)| r.to_string()).collect();
                    let _ = writeln!(out, "  # from: {source} unfolded with {}", picks.join("; "));
                }
            }
        }
        let _ = writeln!(out, "  {r}.");
    }
    out.push_str("}\n");
    out
}

//! Text syntax for counterfactual queries.
//!
//! ```text
//! query   := "P" "(" events ( "|" events )? ")"
//! events  := event ( "," event )*
//! event   := term "=" value
//! term    := NAME ( "[" entry ( "," entry )* "]" )?
//! entry   := NAME "=" ( term | value )
//! ```
//!
//! An entry's right-hand side is read as a nested term when it names the
//! entry's own variable and is followed by `[`, or when it is a variable
//! name that is not a value of the entry's domain. For example
//! `P(Y[X=1, M=M[X=0]] = 1 | X = 0)`.

use crate::ctf::{CtfTerm, NestedEvent, Subscript};
use crate::engine::Query;
use crate::error::{Error, Result};
use crate::graph::CausalDiagram;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '.' | '-' | '+')
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
        } else if c.is_whitespace() {
            chars.next();
            column += 1;
        } else if "()[],=|".contains(c) {
            chars.next();
            column += 1;
            out.push(Token {
                tok: Tok::Punct(c),
                line: l,
                column: col,
            });
        } else if is_word_char(c) {
            let mut w = String::new();
            while let Some(&d) = chars.peek() {
                if !is_word_char(d) {
                    break;
                }
                w.push(d);
                chars.next();
                column += 1;
            }
            out.push(Token {
                tok: Tok::Word(w),
                line: l,
                column: col,
            });
        } else {
            return Err(Error::Parse {
                line: l,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    g: &'a CausalDiagram,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, at: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: at.line,
            column: at.column,
            message: message.into(),
        })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            self.fail(
                &t,
                format!("expected `{c}`, found {}", Self::describe(&t.tok)),
            )
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Word(w) => Ok((w.clone(), t.clone())),
            other => self.fail(
                &t,
                format!("expected {what}, found {}", Self::describe(other)),
            ),
        }
    }

    fn variable(&mut self) -> Result<String> {
        let (name, t) = self.word("a variable name")?;
        if !self.g.contains(&name) {
            return self.fail(&t, format!("unknown variable `{name}`"));
        }
        Ok(name)
    }

    fn value(&mut self, var: &str) -> Result<Value> {
        let (label, t) = self.word("a value")?;
        let domain = self.g.domain(var)?;
        if !domain.contains(&label) {
            return self.fail(
                &t,
                format!(
                    "`{label}` is not in the domain of `{var}` ({})",
                    domain.join(", ")
                ),
            );
        }
        Ok(Value::Const(label))
    }

    fn query(&mut self) -> Result<Query> {
        let (p, t) = self.word("`P`")?;
        if p != "P" {
            return self.fail(&t, format!("expected `P`, found `{p}`"));
        }
        self.expect('(')?;
        let outcome = self.events()?;
        let mut conditioning = Vec::new();
        if self.peek().tok == Tok::Punct('|') {
            self.next();
            conditioning = self.events()?;
        }
        self.expect(')')?;
        let t = self.next();
        if t.tok != Tok::End {
            return self.fail(
                &t,
                format!("unexpected {} after the query", Self::describe(&t.tok)),
            );
        }
        Ok(Query::new(outcome).given(conditioning))
    }

    fn events(&mut self) -> Result<Vec<NestedEvent>> {
        let mut out = vec![self.event()?];
        while self.peek().tok == Tok::Punct(',') {
            self.next();
            out.push(self.event()?);
        }
        Ok(out)
    }

    fn event(&mut self) -> Result<NestedEvent> {
        let term = self.term()?;
        self.expect('=')?;
        let value = self.value(&term.base)?;
        Ok(NestedEvent { term, value })
    }

    fn term(&mut self) -> Result<CtfTerm> {
        let base = self.variable()?;
        let mut term = CtfTerm::new(&base);
        if self.peek().tok != Tok::Punct('[') {
            return Ok(term);
        }
        self.next();
        loop {
            let key_tok = self.peek().clone();
            let key = self.variable()?;
            if term.interventions.contains_key(&key) {
                return self.fail(&key_tok, format!("`{key}` is intervened twice"));
            }
            self.expect('=')?;
            let rhs = self.peek().clone();
            let nested = match &rhs.tok {
                Tok::Word(w) => {
                    let bracket =
                        self.toks.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::Punct('['));
                    let is_value = self.g.domain(&key)?.contains(w);
                    self.g.contains(w) && ((w == &key && bracket) || !is_value)
                }
                _ => false,
            };
            let sub = if nested {
                let inner = self.term()?;
                if inner.base != key {
                    return self.fail(
                        &rhs,
                        format!(
                            "`{key}` can only be set to a response of `{key}`, not `{}`",
                            inner.base
                        ),
                    );
                }
                Subscript::Nested(inner)
            } else {
                Subscript::Value(self.value(&key)?)
            };
            term.interventions.insert(key, sub);
            let t = self.next();
            match &t.tok {
                Tok::Punct(',') => continue,
                Tok::Punct(']') => break,
                other => {
                    return self.fail(
                        &t,
                        format!("expected `,` or `]`, found {}", Self::describe(other)),
                    )
                }
            }
        }
        Ok(term)
    }
}

/// Parses a query, checking variables and values against `g`.
pub fn parse_query(text: &str, g: &CausalDiagram) -> Result<Query> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        g,
    };
    p.query()
}

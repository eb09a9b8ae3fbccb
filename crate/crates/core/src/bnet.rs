//! Reader and writer for the `.bnet` text format.
//!
//! ```text
//! # comment
//! targets, factors
//! x1, 1
//! x2, x1
//! x3, (!x1 & x2) | x3
//! ```
//!
//! Operators are `!` (tightest), `&` and `|` (loosest), with the keyword
//! aliases `NOT`, `AND`, `OR` in any case. Component order is the order in
//! which targets are declared; it fixes bit positions in configuration strings.

use std::collections::HashMap;

use crate::error::{usage, Error, Result};
use crate::model::{BooleanNetwork, Configuration, Expr};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    LParen,
    RParen,
}

struct Lexed {
    token: Token,
    column: usize,
}

fn lex(text: &str, line: usize, offset: usize) -> Result<Vec<Lexed>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        let column = offset + pos + 1;
        let single = match c {
            b' ' | b'\t' | b'\r' => {
                pos += 1;
                continue;
            }
            b'!' => Some(Token::Not),
            b'&' => Some(Token::And),
            b'|' => Some(Token::Or),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(token) = single {
            out.push(Lexed { token, column });
            pos += 1;
            continue;
        }
        if c.is_ascii_alphanumeric() || c == b'_' {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            let word = &text[start..pos];
            let token = match word {
                "0" => Token::Const(false),
                "1" => Token::Const(true),
                w if w.as_bytes()[0].is_ascii_digit() => {
                    return Err(Error::Syntax {
                        line,
                        column,
                        message: format!("invalid identifier `{w}`"),
                    })
                }
                w if w.eq_ignore_ascii_case("and") => Token::And,
                w if w.eq_ignore_ascii_case("or") => Token::Or,
                w if w.eq_ignore_ascii_case("not") => Token::Not,
                w => Token::Ident(w.to_string()),
            };
            out.push(Lexed { token, column });
            continue;
        }
        let ch = text[pos..].chars().next().unwrap();
        return Err(Error::Syntax {
            line,
            column,
            message: format!("unexpected character `{ch}`"),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Lexed>,
    pos: usize,
    line: usize,
    end_column: usize,
    names: &'a HashMap<String, usize>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.token)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.column).unwrap_or(self.end_column)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        })
    }

    fn parse_or(&mut self) -> Result<Expr> {
        let mut ops = vec![self.parse_and()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            ops.push(self.parse_and()?);
        }
        Ok(Expr::or(ops))
    }

    fn parse_and(&mut self) -> Result<Expr> {
        let mut ops = vec![self.parse_unary()?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            ops.push(self.parse_unary()?);
        }
        Ok(Expr::and(ops))
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Expr::not(self.parse_unary()?))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.parse_or()?;
                if self.peek() != Some(&Token::RParen) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Token::Const(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Token::Ident(name)) => match self.names.get(&name) {
                Some(&i) => {
                    self.pos += 1;
                    Ok(Expr::Var(i))
                }
                None => Err(Error::UndeclaredVariable { name, line: self.line }),
            },
            Some(t) => self.error(format!("unexpected token {t:?}")),
            None => self.error("unexpected end of expression"),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_keyword(s: &str) -> bool {
    ["and", "or", "not"].iter().any(|k| s.eq_ignore_ascii_case(k))
}

/// Parse a model in `.bnet` format.
pub fn parse_bnet(text: &str) -> Result<BooleanNetwork> {
    struct Rule<'t> {
        line: usize,
        rhs: &'t str,
        rhs_offset: usize,
    }
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rules = Vec::new();
    let mut header_allowed = true;

    for (k, raw) in text.split('\n').enumerate() {
        let line = k + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = content.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(comma) = content.find(',') else {
            return Err(Error::Syntax {
                line,
                column: content.len() + 1,
                message: "expected `NAME, EXPRESSION`".into(),
            });
        };
        let target = content[..comma].trim();
        let rhs = &content[comma + 1..];
        if header_allowed && target.eq_ignore_ascii_case("targets") && rhs.trim().eq_ignore_ascii_case("factors") {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        if !is_identifier(target) || is_keyword(target) {
            let column = content.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;
            return Err(Error::Syntax {
                line,
                column,
                message: format!("invalid target name `{target}`"),
            });
        }
        if index.contains_key(target) {
            return Err(Error::DuplicateTarget {
                name: target.to_string(),
                line,
            });
        }
        index.insert(target.to_string(), names.len());
        names.push(target.to_string());
        rules.push(Rule {
            line,
            rhs,
            rhs_offset: comma + 1,
        });
    }
    if names.is_empty() {
        return Err(Error::EmptyModel);
    }

    let mut functions = Vec::with_capacity(rules.len());
    for rule in &rules {
        let tokens = lex(rule.rhs, rule.line, rule.rhs_offset)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            line: rule.line,
            end_column: rule.rhs_offset + rule.rhs.trim_end().len() + 1,
            names: &index,
        };
        let expr = parser.parse_or()?;
        if parser.pos != parser.tokens.len() {
            return parser.error("unexpected trailing input");
        }
        functions.push(expr);
    }
    BooleanNetwork::new(names, functions)
}

fn write_expr(e: &Expr, names: &[String], out: &mut String) {
    // parenthesise any n-ary child so the tree shape survives a round trip
    fn child(e: &Expr, names: &[String], out: &mut String) {
        if matches!(e, Expr::And(_) | Expr::Or(_)) {
            out.push('(');
            write_expr(e, names, out);
            out.push(')');
        } else {
            write_expr(e, names, out);
        }
    }
    match e {
        Expr::Const(v) => out.push(if *v { '1' } else { '0' }),
        Expr::Var(i) => out.push_str(&names[*i]),
        Expr::Not(inner) => {
            out.push('!');
            child(inner, names, out);
        }
        Expr::And(es) | Expr::Or(es) => {
            let op = if matches!(e, Expr::And(_)) { " & " } else { " | " };
            for (k, c) in es.iter().enumerate() {
                if k > 0 {
                    out.push_str(op);
                }
                child(c, names, out);
            }
        }
    }
}

/// Render one local function with component names.
pub fn format_expr(e: &Expr, names: &[String]) -> String {
    let mut s = String::new();
    write_expr(e, names, &mut s);
    s
}

/// Write a network back in `.bnet` format.
pub fn serialize_bnet(network: &BooleanNetwork) -> String {
    let mut out = String::from("targets, factors\n");
    for (i, name) in network.names().iter().enumerate() {
        out.push_str(name);
        out.push_str(", ");
        write_expr(network.function(i), network.names(), &mut out);
        out.push('\n');
    }
    out
}

/// Parse an initial configuration: either a bitstring in component order or
/// `NAME=0|1` assignments, comma separated, covering every component.
pub fn parse_configuration(text: &str, network: &BooleanNetwork) -> Result<Configuration> {
    let text = text.trim();
    let n = network.len();
    if !text.contains('=') {
        if text.len() != n {
            return usage(format!(
                "configuration `{text}` has length {}, expected {n}",
                text.len()
            ));
        }
        return Configuration::from_bitstring(text);
    }
    let mut x = Configuration::zeros(n);
    let mut assigned = vec![false; n];
    for part in text.split(',') {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected NAME=0|1, got `{}`", part.trim())))?;
        let name = name.trim();
        let i = network
            .index_of(name)
            .ok_or_else(|| Error::Usage(format!("unknown component `{name}`")))?;
        let v = match value.trim() {
            "0" => false,
            "1" => true,
            other => return usage(format!("non-binary value `{other}` for `{name}`")),
        };
        if assigned[i] {
            return usage(format!("component `{name}` assigned twice"));
        }
        assigned[i] = true;
        x.set(i, v);
    }
    if let Some(missing) = assigned.iter().position(|a| !a) {
        return usage(format!(
            "component `{}` missing from configuration",
            network.name(missing)
        ));
    }
    Ok(x)
}

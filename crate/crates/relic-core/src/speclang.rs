//! Parser and printer for the `.rlc` system description language.
//!
//! ```text
//! system vehicle domain real {
//!   param B: real;
//!   component CNTRL {
//!     in TargetSpeed: real;
//!     var e: real;
//!     out u: real;
//!     guarantee u = 0.2*e + 0.2*prev(e, 0.0);
//!     initially u[0] = 0.0;
//!   }
//!   connect CNTRL.u -> THROT.ActuatorInput;
//!   external TargetSpeed, ActualSpeed;
//!   postulate (TargetSpeed = prev(TargetSpeed, 1.0)) => ActualSpeed < 1.0;
//! }
//! ```
//!
//! Expressions support arithmetic over ports (products need one constant
//! side), comparisons, boolean connectives, `prev(e, init)`, and explicit
//! offsets `x[k-2]` (guarantees) or `x[0]` (initially clauses).

use std::fmt;

use crate::ast::{Expr, VarIndex};
use crate::error::Error;
use crate::formula::{CompareOp, Sort};
use crate::model::{
    desugar_prev, AtomicInitialCondition, Connection, Diagnostic, Direction, Port, Postulate,
    SystemModel,
};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortPath {
    pub component: Option<String>,
    pub port: String,
}

impl fmt::Display for PortPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.component {
            Some(c) => write!(f, "{c}.{}", self.port),
            None => write!(f, "{}", self.port),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub direction: Direction,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecl {
    pub name: String,
    pub ports: Vec<PortDecl>,
    pub locals: Vec<(String, Sort)>,
    pub guarantees: Vec<Expr>,
    pub initials: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDocument {
    pub name: String,
    pub domain: Sort,
    pub params: Vec<(String, Sort)>,
    pub components: Vec<ComponentDecl>,
    pub connects: Vec<(PortPath, PortPath)>,
    pub externals: Vec<PortPath>,
    pub postulates: Vec<Expr>,
}

pub fn parse(text: &str) -> Result<SpecDocument, ParseError> {
    Parser::new(text)?.document()
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(r) => write!(f, "number {r}"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, u32, u32)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, u32, u32)>, ParseError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let (tl, tc) = (line, col);
        let bump = |n: usize, line: &mut u32, col: &mut u32| {
            for k in 0..n {
                if bytes[i + k] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
            }
        };
        if c.is_whitespace() {
            bump(1, &mut line, &mut col);
            i += 1;
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&'/') {
            while i < bytes.len() && bytes[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
                col += 1;
            }
            out.push((Tok::Ident(bytes[start..i].iter().collect()), tl, tc));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
                col += 1;
            }
            if i < bytes.len()
                && bytes[i] == '.'
                && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                i += 1;
                col += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
            }
            let textnum: String = bytes[start..i].iter().collect();
            let r = Rational::parse_decimal(&textnum).ok_or(ParseError {
                line: tl,
                col: tc,
                message: format!("bad numeric literal `{textnum}`"),
            })?;
            out.push((Tok::Num(r), tl, tc));
            continue;
        }
        let two: String = bytes[i..(i + 2).min(bytes.len())].iter().collect();
        let three: String = bytes[i..(i + 3).min(bytes.len())].iter().collect();
        let punct = if three == "<=>" {
            Some("<=>")
        } else {
            match two.as_str() {
                "->" => Some("->"),
                "=>" => Some("=>"),
                "!=" => Some("!="),
                "<=" => Some("<="),
                ">=" => Some(">="),
                _ => None,
            }
        };
        if let Some(p) = punct {
            bump(p.len(), &mut line, &mut col);
            i += p.len();
            out.push((Tok::Punct(p), tl, tc));
            continue;
        }
        let single = match c {
            '{' => "{",
            '}' => "}",
            '(' => "(",
            ')' => ")",
            '[' => "[",
            ']' => "]",
            ';' => ";",
            ':' => ":",
            ',' => ",",
            '.' => ".",
            '=' => "=",
            '<' => "<",
            '>' => ">",
            '+' => "+",
            '-' => "-",
            '*' => "*",
            _ => {
                return Err(ParseError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        bump(1, &mut line, &mut col);
        i += 1;
        out.push((Tok::Punct(single), tl, tc));
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (u32, u32) {
        let (_, l, c) = &self.toks[self.pos];
        (*l, *c)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.peek() == &Tok::Punct(p) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => self.fail(format!("expected `{kw}`, found {other}")),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.fail(format!("expected identifier, found {other}")),
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let name = self.ident()?;
        match name.as_str() {
            "real" => Ok(Sort::Real),
            "int" => Ok(Sort::Int),
            "bool" => Ok(Sort::Bool),
            other => self.fail(format!("expected a sort, found `{other}`")),
        }
    }

    fn document(&mut self) -> Result<SpecDocument, ParseError> {
        self.expect_kw("system")?;
        let name = self.ident()?;
        self.expect_kw("domain")?;
        let domain = match self.sort()? {
            Sort::Bool => return self.fail("system domain must be real or int"),
            s => s,
        };
        self.expect_punct("{")?;
        let mut doc = SpecDocument {
            name,
            domain,
            params: Vec::new(),
            components: Vec::new(),
            connects: Vec::new(),
            externals: Vec::new(),
            postulates: Vec::new(),
        };
        loop {
            if self.peek() == &Tok::Punct("}") {
                self.bump();
                break;
            }
            if self.at_kw("param") {
                self.bump();
                let n = self.ident()?;
                self.expect_punct(":")?;
                let s = self.sort()?;
                self.expect_punct(";")?;
                doc.params.push((n, s));
            } else if self.at_kw("component") {
                doc.components.push(self.component()?);
            } else if self.at_kw("connect") {
                self.bump();
                let from = self.port_path()?;
                self.expect_punct("->")?;
                let to = self.port_path()?;
                self.expect_punct(";")?;
                doc.connects.push((from, to));
            } else if self.at_kw("external") {
                self.bump();
                loop {
                    doc.externals.push(self.port_path()?);
                    if self.peek() == &Tok::Punct(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect_punct(";")?;
            } else if self.at_kw("postulate") {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(";")?;
                doc.postulates.push(e);
            } else {
                return self.fail(format!(
                    "expected `param`, `component`, `connect`, `external`, or `postulate`, found {}",
                    self.peek()
                ));
            }
        }
        if self.peek() != &Tok::Eof {
            return self.fail(format!("trailing input: {}", self.peek()));
        }
        Ok(doc)
    }

    fn component(&mut self) -> Result<ComponentDecl, ParseError> {
        self.expect_kw("component")?;
        let name = self.ident()?;
        self.expect_punct("{")?;
        let mut decl = ComponentDecl {
            name,
            ports: Vec::new(),
            locals: Vec::new(),
            guarantees: Vec::new(),
            initials: Vec::new(),
        };
        loop {
            if self.peek() == &Tok::Punct("}") {
                self.bump();
                break;
            }
            if self.at_kw("in") || self.at_kw("out") {
                let dir = if self.at_kw("in") {
                    Direction::In
                } else {
                    Direction::Out
                };
                self.bump();
                let n = self.ident()?;
                self.expect_punct(":")?;
                let s = self.sort()?;
                self.expect_punct(";")?;
                decl.ports.push(PortDecl {
                    name: n,
                    direction: dir,
                    sort: s,
                });
            } else if self.at_kw("var") {
                self.bump();
                let n = self.ident()?;
                self.expect_punct(":")?;
                let s = self.sort()?;
                self.expect_punct(";")?;
                decl.locals.push((n, s));
            } else if self.at_kw("guarantee") {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(";")?;
                decl.guarantees.push(e);
            } else if self.at_kw("initially") {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(";")?;
                decl.initials.push(e);
            } else {
                return self.fail(format!(
                    "expected `in`, `out`, `var`, `guarantee`, or `initially`, found {}",
                    self.peek()
                ));
            }
        }
        Ok(decl)
    }

    fn port_path(&mut self) -> Result<PortPath, ParseError> {
        let first = self.ident()?;
        if self.peek() == &Tok::Punct(".") {
            self.bump();
            let port = self.ident()?;
            Ok(PortPath {
                component: Some(first),
                port,
            })
        } else {
            Ok(PortPath {
                component: None,
                port: first,
            })
        }
    }

    // expression grammar: iff < implies < or < and < not < cmp < add < mul < unary
    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.iff_expr()
    }

    fn iff_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.implies_expr()?;
        while self.peek() == &Tok::Punct("<=>") {
            self.bump();
            let rhs = self.implies_expr()?;
            lhs = Expr::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implies_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or_expr()?;
        if self.peek() == &Tok::Punct("=>") {
            self.bump();
            let rhs = self.implies_expr()?; // right associative
            Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.at_kw("or") {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.at_kw("and") {
            self.bump();
            let rhs = self.not_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.at_kw("not") {
            self.bump();
            let e = self.not_expr()?;
            Ok(Expr::Not(Box::new(e)))
        } else {
            self.cmp_expr()
        }
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Punct("=") => Some(CompareOp::Eq),
            Tok::Punct("!=") => Some(CompareOp::Ne),
            Tok::Punct("<") => Some(CompareOp::Lt),
            Tok::Punct("<=") => Some(CompareOp::Le),
            Tok::Punct(">") => Some(CompareOp::Gt),
            Tok::Punct(">=") => Some(CompareOp::Ge),
            _ => None,
        };
        match op {
            None => Ok(lhs),
            Some(op) => {
                self.bump();
                let rhs = self.add_expr()?;
                Ok(Expr::Cmp(Box::new(lhs), op, Box::new(rhs)))
            }
        }
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            match self.peek() {
                Tok::Punct("+") => {
                    self.bump();
                    let rhs = self.mul_expr()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Punct("-") => {
                    self.bump();
                    let rhs = self.mul_expr()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        while self.peek() == &Tok::Punct("*") {
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Punct("-") {
            self.bump();
            let e = self.unary_expr()?;
            return Ok(Expr::Neg(Box::new(e)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Expr::Num(r))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => return Ok(Expr::Bool(true)),
                    "false" => return Ok(Expr::Bool(false)),
                    "prev" => {
                        self.expect_punct("(")?;
                        let e = self.expr()?;
                        self.expect_punct(",")?;
                        let init = self.expr()?;
                        self.expect_punct(")")?;
                        return Ok(Expr::Prev(Box::new(e), Box::new(init)));
                    }
                    _ => {}
                }
                if self.peek() == &Tok::Punct("[") {
                    self.bump();
                    let idx = self.var_index()?;
                    self.expect_punct("]")?;
                    Ok(Expr::Var(name, idx))
                } else {
                    Ok(Expr::Var(name, VarIndex::Current))
                }
            }
            other => self.fail(format!("expected an expression, found {other}")),
        }
    }

    fn var_index(&mut self) -> Result<VarIndex, ParseError> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "k" => {
                self.bump();
                match self.peek() {
                    Tok::Punct("-") | Tok::Punct("+") => {
                        let negative = self.peek() == &Tok::Punct("-");
                        self.bump();
                        match self.bump() {
                            Tok::Num(r) if r.is_integer() => {
                                let n = r.to_i64().ok_or_else(|| ParseError {
                                    line: 0,
                                    col: 0,
                                    message: "offset too large".into(),
                                })?;
                                Ok(VarIndex::Rel(if negative { -n } else { n }))
                            }
                            other => self.fail(format!("expected an offset, found {other}")),
                        }
                    }
                    _ => Ok(VarIndex::Rel(0)),
                }
            }
            Tok::Num(r) if r.is_integer() && !r.is_negative() => {
                self.bump();
                Ok(VarIndex::Abs(r.to_i64().unwrap() as u64))
            }
            other => self.fail(format!(
                "expected `k`, `k-N`, or a step number, found {other}"
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// printing (canonical form; parse . print . parse is the identity)
// ---------------------------------------------------------------------------

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {} domain {} {{", self.name, self.domain)?;
        for (n, s) in &self.params {
            writeln!(f, "  param {n}: {s};")?;
        }
        for c in &self.components {
            writeln!(f, "  component {} {{", c.name)?;
            for p in &c.ports {
                writeln!(f, "    {} {}: {};", p.direction, p.name, p.sort)?;
            }
            for (n, s) in &c.locals {
                writeln!(f, "    var {n}: {s};")?;
            }
            for g in &c.guarantees {
                writeln!(f, "    guarantee {g};")?;
            }
            for i in &c.initials {
                writeln!(f, "    initially {i};")?;
            }
            writeln!(f, "  }}")?;
        }
        for (from, to) in &self.connects {
            writeln!(f, "  connect {from} -> {to};")?;
        }
        if !self.externals.is_empty() {
            let names: Vec<String> = self.externals.iter().map(|p| p.to_string()).collect();
            writeln!(f, "  external {};", names.join(", "))?;
        }
        for p in &self.postulates {
            writeln!(f, "  postulate {p};")?;
        }
        write!(f, "}}")
    }
}

// ---------------------------------------------------------------------------
// lowering to the system model
// ---------------------------------------------------------------------------

impl SpecDocument {
    /// Lowers the document to a validated [`SystemModel`] and its desugared
    /// postulates. All problems are reported as diagnostics.
    pub fn lower(&self) -> Result<(SystemModel, Vec<Postulate>), Vec<Diagnostic>> {
        let mut model = SystemModel {
            name: self.name.clone(),
            domain: self.domain,
            ..Default::default()
        };
        let mut diags = Vec::new();

        for c in &self.components {
            model.components.push(c.name.clone());
            for p in &c.ports {
                model.ports.push(Port {
                    component: c.name.clone(),
                    name: p.name.clone(),
                    direction: p.direction,
                    sort: p.sort,
                });
            }
            for (n, s) in &c.locals {
                model.locals.push((c.name.clone(), n.clone(), *s));
            }
        }
        model.params = self.params.clone();

        let env = model.sort_env();
        let lower_err = |e: Error, what: String| Diagnostic {
            rule: "LOWERING",
            message: format!("{what}: {e}"),
        };
        for c in &self.components {
            for g in &c.guarantees {
                match desugar_prev(&c.name, g, &env) {
                    Ok((prop, inits)) => {
                        model.properties.push(prop);
                        model.initials.extend(inits);
                    }
                    Err(e) => diags.push(lower_err(e, format!("guarantee of {}", c.name))),
                }
            }
            for i in &c.initials {
                match crate::ast::lower_initially(i, &env) {
                    Ok(body) => model.initials.push(AtomicInitialCondition {
                        owner: c.name.clone(),
                        body,
                    }),
                    Err(e) => diags.push(lower_err(e, format!("initially of {}", c.name))),
                }
            }
        }

        for (from, to) in &self.connects {
            let (Some(fp), Some(tp)) = (self.resolve(&model, from), self.resolve(&model, to))
            else {
                diags.push(Diagnostic {
                    rule: "UNDECLARED",
                    message: format!("connection {from} -> {to} names an unknown port"),
                });
                continue;
            };
            model.connections.push(Connection { from: fp, to: tp });
        }

        for e in &self.externals {
            match self.resolve(&model, e) {
                Some(p) => {
                    model.externals.insert(p.name);
                }
                None if model.params.iter().any(|(n, _)| n == &e.port) => {
                    model.externals.insert(e.port.clone());
                }
                None => diags.push(Diagnostic {
                    rule: "EXTERNAL_UNKNOWN",
                    message: format!("external `{e}` is not a declared port"),
                }),
            }
        }
        // params are implicitly external
        for (n, _) in &model.params {
            model.externals.insert(n.clone());
        }

        let mut postulates = Vec::new();
        for p in &self.postulates {
            match Postulate::from_expr(p, &env) {
                Ok(post) => {
                    for v in post.whole.rel.free_vars() {
                        if !model.externals.contains(&v.name) {
                            diags.push(Diagnostic {
                                rule: "POSTULATE_SCOPE",
                                message: format!(
                                    "postulate mentions `{}`, which is not external",
                                    v.name
                                ),
                            });
                        }
                    }
                    postulates.push(post);
                }
                Err(e) => diags.push(lower_err(e, "postulate".into())),
            }
        }

        diags.extend(model.validate());
        if diags.is_empty() {
            Ok((model, postulates))
        } else {
            Err(diags)
        }
    }

    fn resolve(&self, model: &SystemModel, path: &PortPath) -> Option<Port> {
        match &path.component {
            Some(c) => model.port(c, &path.port).cloned(),
            None => {
                let mut hits = model.ports.iter().filter(|p| p.name == path.port);
                let first = hits.next()?;
                if hits.next().is_some() {
                    None
                } else {
                    Some(first.clone())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUFFERS: &str = r#"
// two identical manufacturing stages in cascade
system buffers domain real {
  param B: real;
  component M1 {
    in in1: real;
    out out1: real;
    guarantee in1 - out1 < B;
  }
  component M2 {
    in in2: real;
    out out2: real;
    guarantee in2 - out2 < B;
  }
  connect M1.out1 -> M2.in2;
  external in1, out2;
  postulate in1 - out2 < 2*B;
}
"#;

    #[test]
    fn parses_and_lowers_buffers() {
        let doc = parse(BUFFERS).unwrap();
        assert_eq!(doc.components.len(), 2);
        let (model, postulates) = doc.lower().unwrap();
        assert_eq!(model.properties.len(), 2);
        assert_eq!(model.connections.len(), 1);
        assert_eq!(postulates.len(), 1);
        assert_eq!(model.internal_names().len(), 2); // out1, in2
        assert_eq!(model.order_bound(), 0);
    }

    #[test]
    fn round_trips_through_printing() {
        let doc = parse(BUFFERS).unwrap();
        let printed = doc.to_string();
        let again = parse(&printed).unwrap_or_else(|e| panic!("reparse failed: {e}\n{printed}"));
        assert_eq!(doc, again);
    }

    #[test]
    fn undeclared_port_in_guarantee_is_reported() {
        let text = r#"
system broken domain real {
  component A {
    in x: real;
    guarantee y > 0;
  }
}
"#;
        let doc = parse(text).unwrap();
        let err = doc.lower().unwrap_err();
        assert!(err
            .iter()
            .any(|d| d.rule == "LOWERING" && d.message.contains("`y`")));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse("system x domain real { component }").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("identifier"));
    }

    #[test]
    fn prev_and_offsets_parse() {
        let text = r#"
system d domain real {
  component C {
    in u: real;
    out y: real;
    guarantee y = prev(u, 1.0);
    initially y[0] = 1.0;
  }
  external u, y;
  postulate y[k] = u[k-1];
}
"#;
        let doc = parse(text).unwrap();
        let (model, postulates) = doc.lower().unwrap();
        assert_eq!(model.properties[0].order, 1);
        // prev generates one init, the explicit initially adds another
        assert_eq!(model.initials.len(), 2);
        assert_eq!(postulates[0].whole.order, 1);
    }

    #[test]
    fn dotted_and_bare_externals() {
        let text = r#"
system d domain real {
  component C {
    in u: real;
    out y: real;
    guarantee y = u;
  }
  external C.u, y;
}
"#;
        let (model, _) = parse(text).unwrap().lower().unwrap();
        assert!(model.externals.contains("u"));
        assert!(model.externals.contains("y"));
    }
}

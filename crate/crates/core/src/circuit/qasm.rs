// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! OpenQASM 2.0 subset reader and writer.
//!
//! Accepted: the `OPENQASM 2.0;` header, `include`, exactly one `qreg`, any
//! number of `creg`s, `opaque` declarations, `barrier` (ignored), `measure`
//! (ignored with a warning) and gate statements for the kinds in
//! [`GateKind`]. `g1q`/`g2q` name the opaque generic gates emitted by the
//! writer.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, GateKind, VirtualQubit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported gate `{name}` at {line}:{col}")]
    UnsupportedGate { name: String, line: usize, col: usize },
    #[error("{arity}-qubit gate unsupported: `{name}` at {line}:{col} (decompose to one- and two-qubit gates first)")]
    TooManyQubits { name: String, arity: usize, line: usize, col: usize },
    #[error("multiple quantum registers unsupported: second qreg `{name}` at {line}:{col}")]
    MultipleRegisters { name: String, line: usize, col: usize },
    #[error("invalid gate at {line}:{col}: {msg}")]
    InvalidGate { line: usize, col: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Int(u64),
    Str(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, col: &mut usize, n: usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(&mut i, &mut col, 1);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if real {
                Tok::Num(s.parse().map_err(|_| syntax(tl, tc, format!("bad number `{s}`")))?)
            } else {
                Tok::Int(s.parse().map_err(|_| syntax(tl, tc, format!("bad integer `{s}`")))?)
            };
            out.push(Token { tok, line: tl, col: tc });
        } else if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(syntax(tl, tc, "unterminated string".into()));
            }
            let s: String = chars[start..i].iter().collect();
            i += 1;
            col += s.chars().count() + 2;
            out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let p: &'static str = if two == "->" {
                "->"
            } else {
                match c {
                    ';' => ";",
                    ',' => ",",
                    '[' => "[",
                    ']' => "]",
                    '(' => "(",
                    ')' => ")",
                    '{' => "{",
                    '}' => "}",
                    '+' => "+",
                    '-' => "-",
                    '*' => "*",
                    '/' => "/",
                    '^' => "^",
                    _ => return Err(syntax(tl, tc, format!("unexpected character `{c}`"))),
                }
            };
            advance(&mut i, &mut col, p.len());
            out.push(Token { tok: Tok::Punct(p), line: tl, col: tc });
        }
    }
    Ok(out)
}

fn syntax(line: usize, col: usize, msg: String) -> QasmError {
    QasmError::Syntax { line, col, msg }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.col))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, QasmError> {
        let (line, col) = self.here();
        Err(syntax(line, col, msg.into()))
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(q), .. }) if *q == p)
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), QasmError> {
        if self.is_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{p}`"))
        }
    }

    fn expect_ident(&mut self) -> Result<String, QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn expect_int(&mut self) -> Result<u64, QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Int(v), .. }) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected integer"),
        }
    }

    fn skip_to_semicolon(&mut self) -> Result<(), QasmError> {
        while let Some(t) = self.next() {
            if t.tok == Tok::Punct(";") {
                return Ok(());
            }
        }
        self.err("expected `;`")
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.is_punct("+") {
                self.pos += 1;
                v += self.term()?;
            } else if self.is_punct("-") {
                self.pos += 1;
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            if self.is_punct("*") {
                self.pos += 1;
                v *= self.unary()?;
            } else if self.is_punct("/") {
                self.pos += 1;
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.is_punct("-") {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.is_punct("+") {
            self.pos += 1;
            return self.unary();
        }
        let base = self.atom()?;
        if self.is_punct("^") {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(base.powf(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        let (line, col) = self.here();
        match self.next().map(|t| t.tok) {
            Some(Tok::Num(v)) => Ok(v),
            Some(Tok::Int(v)) => Ok(v as f64),
            Some(Tok::Ident(s)) if s == "pi" => Ok(std::f64::consts::PI),
            Some(Tok::Ident(f)) if matches!(f.as_str(), "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt") => {
                self.expect_punct("(")?;
                let v = self.expr()?;
                self.expect_punct(")")?;
                Ok(match f.as_str() {
                    "sin" => v.sin(),
                    "cos" => v.cos(),
                    "tan" => v.tan(),
                    "exp" => v.exp(),
                    "ln" => v.ln(),
                    _ => v.sqrt(),
                })
            }
            Some(Tok::Punct("(")) => {
                let v = self.expr()?;
                self.expect_punct(")")?;
                Ok(v)
            }
            _ => Err(syntax(line, col, "expected expression".into())),
        }
    }
}

struct Register {
    name: String,
    size: u32,
}

/// Parses the supported OpenQASM 2.0 subset into a [`Circuit`].
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    let eof = toks.last().map_or((1, 1), |t| (t.line, t.col + 1));
    let mut p = Parser { toks, pos: 0, eof };

    match p.next() {
        Some(Token { tok: Tok::Ident(s), .. }) if s == "OPENQASM" => {}
        _ => return Err(syntax(1, 1, "expected `OPENQASM 2.0;` header".into())),
    }
    match p.next().map(|t| t.tok) {
        Some(Tok::Num(v)) if (2.0..3.0).contains(&v) => {}
        _ => return Err(syntax(1, 1, "only OpenQASM 2.x is supported".into())),
    }
    p.expect_punct(";")?;

    let mut qreg: Option<Register> = None;
    let mut circuit: Option<Circuit> = None;
    let mut ignored_measures = 0usize;

    while let Some(tok) = p.peek().cloned() {
        let Tok::Ident(word) = &tok.tok else {
            return p.err("expected statement");
        };
        let (line, col) = (tok.line, tok.col);
        match word.as_str() {
            "include" => {
                p.pos += 1;
                match p.next().map(|t| t.tok) {
                    Some(Tok::Str(_)) => {}
                    _ => return Err(syntax(line, col, "expected file name after include".into())),
                }
                p.expect_punct(";")?;
            }
            "qreg" => {
                p.pos += 1;
                let name = p.expect_ident()?;
                if qreg.is_some() {
                    return Err(QasmError::MultipleRegisters { name, line, col });
                }
                p.expect_punct("[")?;
                let size = p.expect_int()?;
                p.expect_punct("]")?;
                p.expect_punct(";")?;
                let size = u32::try_from(size).map_err(|_| syntax(line, col, "register too large".into()))?;
                circuit = Some(Circuit::new(size));
                qreg = Some(Register { name, size });
            }
            "creg" | "barrier" | "opaque" => {
                p.pos += 1;
                p.skip_to_semicolon()?;
            }
            "measure" => {
                p.pos += 1;
                ignored_measures += 1;
                p.skip_to_semicolon()?;
            }
            "gate" => {
                return Err(syntax(line, col, "gate definitions are not supported".into()));
            }
            "if" | "reset" => {
                return Err(syntax(line, col, format!("`{word}` is not supported")));
            }
            _ => {
                let name = word.clone();
                p.pos += 1;
                let mut params = Vec::new();
                if p.is_punct("(") {
                    p.pos += 1;
                    if !p.is_punct(")") {
                        params.push(p.expr()?);
                        while p.is_punct(",") {
                            p.pos += 1;
                            params.push(p.expr()?);
                        }
                    }
                    p.expect_punct(")")?;
                }
                let mut args = Vec::new();
                loop {
                    let (al, ac) = p.here();
                    let reg = p.expect_ident()?;
                    if !p.is_punct("[") {
                        return Err(syntax(al, ac, "register broadcast is not supported; index each qubit".into()));
                    }
                    p.pos += 1;
                    let idx = p.expect_int()?;
                    p.expect_punct("]")?;
                    args.push((reg, idx, al, ac));
                    if p.is_punct(",") {
                        p.pos += 1;
                    } else {
                        break;
                    }
                }
                p.expect_punct(";")?;

                if args.len() >= 3 {
                    return Err(QasmError::TooManyQubits { name, arity: args.len(), line, col });
                }
                let Some(kind) = GateKind::from_qasm_name(&name) else {
                    return Err(QasmError::UnsupportedGate { name, line, col });
                };
                let (Some(reg), Some(c)) = (qreg.as_ref(), circuit.as_mut()) else {
                    return Err(syntax(line, col, "gate before qreg declaration".into()));
                };
                let mut qubits = Vec::with_capacity(2);
                for (rname, idx, al, ac) in args {
                    if rname != reg.name {
                        return Err(syntax(al, ac, format!("unknown register `{rname}`")));
                    }
                    if idx >= reg.size as u64 {
                        return Err(syntax(al, ac, format!("index {idx} out of range for `{rname}[{}]`", reg.size)));
                    }
                    qubits.push(VirtualQubit(idx as u32));
                }
                c.push(kind, &qubits, &params)
                    .map_err(|e| QasmError::InvalidGate { line, col, msg: e.to_string() })?;
            }
        }
    }

    if ignored_measures > 0 {
        log::warn!("ignored {ignored_measures} measurement(s)");
    }
    Ok(circuit.unwrap_or_default())
}

/// Writes `c` in the subset accepted by [`parse_qasm`]. Output is byte
/// deterministic; angles use the shortest representation that round-trips.
pub fn serialize_qasm(c: &Circuit) -> String {
    let mut out = String::with_capacity(32 + c.len() * 16);
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let uses = |k: GateKind| c.gates().iter().any(|g| g.kind() == k);
    if uses(GateKind::Generic1q) {
        out.push_str("opaque g1q a;\n");
    }
    if uses(GateKind::Generic2q) {
        out.push_str("opaque g2q a,b;\n");
    }
    let _ = writeln!(out, "qreg q[{}];", c.num_qubits());
    for g in c.gates() {
        out.push_str(g.kind().qasm_name());
        if let [theta] = g.params() {
            let _ = write!(out, "({theta:?})");
        }
        for (i, q) in g.qubits().iter().enumerate() {
            out.push(if i == 0 { ' ' } else { ',' });
            let _ = write!(out, "q[{}]", q.0);
        }
        out.push_str(";\n");
    }
    out
}

//! Reader for MATPOWER `.m` case files.
//!
//! Understands the struct-literal subset (`mpc.baseMVA = ...;`,
//! `mpc.bus = [ ... ];`, `mpc.branch = [ ... ];`, `mpc.gen = [ ... ];`, `%`
//! comments, `...` continuations) plus the element-wise post-processing that
//! the MATPOWER distribution feeders use to convert Ohms to p.u. and kW to MW:
//!
//! ```text
//! [PQ, PV, REF, NONE, BUS_I, ...] = idx_bus;
//! Vbase = mpc.bus(1, BASE_KV) * 1e3;
//! mpc.branch(:, [BR_R BR_X]) = mpc.branch(:, [BR_R BR_X]) / (Vbase^2 / Sbase);
//! mpc.bus(:, QD) = mpc.bus(:, PD) * sin(acos(pf));
//! ```
//!
//! Statements run in file order against the raw tables. Anything else is
//! rejected with the line number rather than silently skipped.

use std::collections::HashMap;

use thiserror::Error;

use super::{BranchRecord, BusId, BusRecord, NetworkCase, ValidationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported statement `{statement}`")]
    Unsupported { line: usize, statement: String },
    #[error("line {line}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, name: String },
    #[error("line {line}: row has {found} columns, expected {expected}")]
    RaggedRow { line: usize, found: usize, expected: usize },
    #[error("line {line}: mpc.{table} is empty")]
    EmptyTable { line: usize, table: String },
    #[error("line {line}: mpc.{table} needs at least {required} columns, found {found}")]
    TooFewColumns { line: usize, table: String, required: usize, found: usize },
    #[error("line {line}: {what} must be a positive integer, got {value}")]
    BadInteger { line: usize, what: &'static str, value: f64 },
    #[error("missing mpc.{0}")]
    Missing(&'static str),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::Unsupported { line, .. }
            | ParseError::UnknownIdentifier { line, .. }
            | ParseError::RaggedRow { line, .. }
            | ParseError::EmptyTable { line, .. }
            | ParseError::TooFewColumns { line, .. }
            | ParseError::BadInteger { line, .. } => Some(*line),
            ParseError::Missing(_) | ParseError::Invalid(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParseOptions {
    /// Overrides the slack voltage magnitude read from the file.
    pub slack_voltage_pu: Option<f64>,
}

impl ParseOptions {
    /// Slack pinned at [`super::REFERENCE_SLACK_VOLTAGE_PU`].
    pub fn reference_profile() -> Self {
        ParseOptions { slack_voltage_pu: Some(super::REFERENCE_SLACK_VOLTAGE_PU) }
    }
}

pub fn parse_matpower_case(text: &str) -> Result<NetworkCase, ParseError> {
    parse_matpower_case_with(text, &ParseOptions::default())
}

pub fn parse_matpower_case_with(
    text: &str,
    opts: &ParseOptions,
) -> Result<NetworkCase, ParseError> {
    let tokens = lex(text)?;
    let mut interp = Interpreter::new(text, tokens);
    interp.run()?;
    let case = interp.into_case(opts)?;
    case.validate()?;
    Ok(case)
}

// column positions, 0-based
const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const PD: usize = 2;
const QD: usize = 3;
const GS: usize = 4;
const BS: usize = 5;
const VM: usize = 7;
const BASE_KV: usize = 9;
const BUS_MIN_COLS: usize = 10;
const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_R: usize = 2;
const BR_X: usize = 3;
const BR_STATUS: usize = 10;
const BRANCH_MIN_COLS: usize = 11;
const GEN_BUS: usize = 0;
const VG: usize = 5;
const GEN_STATUS: usize = 7;
const REF: f64 = 3.0;

const IDX_BRCH: &[&str] = &[
    "F_BUS", "T_BUS", "BR_R", "BR_X", "BR_B", "RATE_A", "RATE_B", "RATE_C", "TAP", "SHIFT",
    "BR_STATUS", "PF", "QF", "PT", "QT", "MU_SF", "MU_ST", "ANGMIN", "ANGMAX", "MU_ANGMIN",
    "MU_ANGMAX",
];
const IDX_GEN: &[&str] = &[
    "GEN_BUS", "PG", "QG", "QMAX", "QMIN", "VG", "MBASE", "GEN_STATUS", "PMAX", "PMIN", "PC1",
    "PC2", "QC1MIN", "QC1MAX", "QC2MIN", "QC2MAX", "RAMP_AGC", "RAMP_10", "RAMP_30", "RAMP_Q",
    "APF", "MU_PMAX", "MU_PMIN", "MU_QMAX", "MU_QMIN",
];

/// Values returned by the MATPOWER index functions, in output order.
fn index_function(name: &str) -> Option<Vec<f64>> {
    match name {
        // bus types PQ..NONE = 1..4, then column numbers 1..17
        "idx_bus" => Some((1..=4).chain(1..=17).map(f64::from).collect()),
        "idx_brch" => Some((1..=IDX_BRCH.len() as u32).map(f64::from).collect()),
        "idx_gen" => Some((1..=IDX_GEN.len() as u32).map(f64::from).collect()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Str(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Semi,
    Newline,
    Dot,
    Colon,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    DotStar,
    DotSlash,
    DotCaret,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<Token> = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let syntax = |line, message: String| ParseError::Syntax { line, message };

    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                out.push(Token { tok: Tok::Newline, line });
                line += 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => i += 1,
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '.' if chars.get(i + 1) == Some(&'.') && chars.get(i + 2) == Some(&'.') => {
                // continuation: drop the rest of the line including the newline
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                if i < chars.len() {
                    i += 1;
                    line += 1;
                }
            }
            '\'' => {
                let prev_is_value = matches!(
                    out.last().map(|t| &t.tok),
                    Some(Tok::Ident(_) | Tok::Num(_) | Tok::RParen | Tok::RBracket)
                );
                if prev_is_value {
                    return Err(syntax(line, "transpose is not supported".into()));
                }
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j] != '\'' && chars[j] != '\n' {
                    j += 1;
                }
                if j >= chars.len() || chars[j] != '\'' {
                    return Err(syntax(line, "unterminated string".into()));
                }
                out.push(Token { tok: Tok::Str(chars[start..j].iter().collect()), line });
                i = j + 1;
            }
            '0'..='9' => {
                let (v, n) = lex_number(&chars[i..]).ok_or_else(|| syntax(line, "bad number".into()))?;
                out.push(Token { tok: Tok::Num(v), line });
                i += n;
            }
            '.' if chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) => {
                let (v, n) = lex_number(&chars[i..]).ok_or_else(|| syntax(line, "bad number".into()))?;
                out.push(Token { tok: Tok::Num(v), line });
                i += n;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line });
            }
            _ => {
                let (tok, n) = match (c, chars.get(i + 1)) {
                    ('.', Some('*')) => (Tok::DotStar, 2),
                    ('.', Some('/')) => (Tok::DotSlash, 2),
                    ('.', Some('^')) => (Tok::DotCaret, 2),
                    ('.', _) => (Tok::Dot, 1),
                    ('[', _) => (Tok::LBracket, 1),
                    (']', _) => (Tok::RBracket, 1),
                    ('(', _) => (Tok::LParen, 1),
                    (')', _) => (Tok::RParen, 1),
                    (',', _) => (Tok::Comma, 1),
                    (';', _) => (Tok::Semi, 1),
                    (':', _) => (Tok::Colon, 1),
                    ('=', Some('=')) => return Err(syntax(line, "comparison is not supported".into())),
                    ('=', _) => (Tok::Assign, 1),
                    ('+', _) => (Tok::Plus, 1),
                    ('-', _) => (Tok::Minus, 1),
                    ('*', _) => (Tok::Star, 1),
                    ('/', _) => (Tok::Slash, 1),
                    ('^', _) => (Tok::Caret, 1),
                    _ => return Err(syntax(line, format!("unexpected character `{c}`"))),
                };
                out.push(Token { tok, line });
                i += n;
            }
        }
    }
    Ok(out)
}

/// Lexes `12`, `12.5`, `.5`, `1.`, `1e-3`. Returns value and chars consumed.
fn lex_number(s: &[char]) -> Option<(f64, usize)> {
    let mut n = 0;
    while n < s.len() && s[n].is_ascii_digit() {
        n += 1;
    }
    if n < s.len() && s[n] == '.' && !matches!(s.get(n + 1), Some('*' | '/' | '^' | '.')) {
        n += 1;
        while n < s.len() && s[n].is_ascii_digit() {
            n += 1;
        }
    }
    if n < s.len() && (s[n] == 'e' || s[n] == 'E') {
        let mut m = n + 1;
        if m < s.len() && (s[m] == '+' || s[m] == '-') {
            m += 1;
        }
        if m < s.len() && s[m].is_ascii_digit() {
            while m < s.len() && s[m].is_ascii_digit() {
                m += 1;
            }
            n = m;
        }
    }
    let text: String = s[..n].iter().collect();
    text.parse().ok().map(|v| (v, n))
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(f64),
    /// Row-major.
    Matrix { rows: usize, cols: usize, data: Vec<f64> },
}

impl Value {
    fn normalize(self) -> Value {
        match self {
            Value::Matrix { rows: 1, cols: 1, data } => Value::Scalar(data[0]),
            v => v,
        }
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Value {
        match self {
            Value::Scalar(x) => Value::Scalar(f(x)),
            Value::Matrix { rows, cols, data } => {
                Value::Matrix { rows, cols, data: data.into_iter().map(f).collect() }
            }
        }
    }

    fn elementwise(self, rhs: Value, f: impl Fn(f64, f64) -> f64) -> Result<Value, String> {
        Ok(match (self, rhs) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(f(a, b)),
            (Value::Scalar(a), m @ Value::Matrix { .. }) => m.map(|b| f(a, b)),
            (m @ Value::Matrix { .. }, Value::Scalar(b)) => m.map(|a| f(a, b)),
            (
                Value::Matrix { rows, cols, data },
                Value::Matrix { rows: r2, cols: c2, data: d2 },
            ) => {
                if rows != r2 || cols != c2 {
                    return Err(format!("shape mismatch {rows}x{cols} vs {r2}x{c2}"));
                }
                let data = data.into_iter().zip(d2).map(|(a, b)| f(a, b)).collect();
                Value::Matrix { rows, cols, data }
            }
        })
    }

    fn is_scalar(&self) -> bool {
        matches!(self, Value::Scalar(_))
    }

    /// Flattens into a list of numbers (scalars and vectors used as indices).
    fn into_list(self) -> Vec<f64> {
        match self {
            Value::Scalar(x) => vec![x],
            Value::Matrix { data, .. } => data,
        }
    }
}

#[derive(Debug, Clone)]
struct Table {
    line: usize,
    cols: usize,
    rows: Vec<Vec<f64>>,
    row_lines: Vec<usize>,
}

enum Selector {
    All,
    List(Vec<usize>),
}

impl Selector {
    fn resolve(&self, len: usize) -> Vec<usize> {
        match self {
            Selector::All => (0..len).collect(),
            Selector::List(v) => v.clone(),
        }
    }
}

struct Interpreter<'a> {
    source: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    name: Option<String>,
    base_mva: Option<(usize, f64)>,
    tables: HashMap<String, Table>,
    vars: HashMap<String, Value>,
}

impl<'a> Interpreter<'a> {
    fn new(source: &'a str, tokens: Vec<Token>) -> Self {
        let mut vars = HashMap::new();
        vars.insert("pi".to_string(), Value::Scalar(std::f64::consts::PI));
        vars.insert("Inf".to_string(), Value::Scalar(f64::INFINITY));
        Interpreter {
            source,
            tokens,
            pos: 0,
            name: None,
            base_mva: None,
            tables: HashMap::new(),
            vars,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map_or(1, |t| t.line)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line(), message: message.into() }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    fn unsupported(&self, line: usize) -> ParseError {
        let statement = self
            .source
            .lines()
            .nth(line.saturating_sub(1))
            .unwrap_or("")
            .trim()
            .to_string();
        ParseError::Unsupported { line, statement }
    }

    fn end_statement(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(Tok::Semi | Tok::Newline | Tok::Comma) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.syntax(format!("unexpected `{t:?}` after statement"))),
        }
    }

    fn skip_to_newline(&mut self) {
        while !matches!(self.peek(), None | Some(Tok::Newline)) {
            self.pos += 1;
        }
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while let Some(tok) = self.peek().cloned() {
            let line = self.line();
            match tok {
                Tok::Newline | Tok::Semi | Tok::Comma => self.pos += 1,
                Tok::Ident(ref id) if id == "function" => {
                    let start = self.pos;
                    self.skip_to_newline();
                    self.name = self.tokens[start..self.pos].iter().rev().find_map(|t| match &t.tok {
                        Tok::Ident(s) if s != "function" => Some(s.clone()),
                        _ => None,
                    });
                }
                Tok::LBracket => self.destructure(line)?,
                Tok::Ident(ref id) if id == "mpc" => self.mpc_statement(line)?,
                Tok::Ident(id) => {
                    if self.peek_at(1) != Some(&Tok::Assign) {
                        return Err(self.unsupported(line));
                    }
                    self.pos += 2;
                    let v = self.expr()?.normalize();
                    self.vars.insert(id, v);
                    self.end_statement()?;
                }
                _ => return Err(self.unsupported(line)),
            }
        }
        Ok(())
    }

    /// `[A, B, C] = idx_bus;`
    fn destructure(&mut self, line: usize) -> Result<(), ParseError> {
        self.pos += 1;
        let mut names = Vec::new();
        loop {
            match self.next() {
                Some(Tok::Ident(s)) => names.push(s),
                Some(Tok::Comma | Tok::Newline) => {}
                Some(Tok::RBracket) => break,
                _ => return Err(self.unsupported(line)),
            }
        }
        self.expect(Tok::Assign, "`=`")?;
        let func = match self.next() {
            Some(Tok::Ident(s)) => s,
            _ => return Err(self.unsupported(line)),
        };
        let values = index_function(&func)
            .ok_or(ParseError::UnknownIdentifier { line, name: func.clone() })?;
        if names.len() > values.len() {
            return Err(ParseError::Syntax {
                line,
                message: format!("{func} returns {} values, {} requested", values.len(), names.len()),
            });
        }
        for (name, v) in names.into_iter().zip(values) {
            self.vars.insert(name, Value::Scalar(v));
        }
        self.end_statement()
    }

    fn mpc_statement(&mut self, line: usize) -> Result<(), ParseError> {
        self.pos += 1;
        self.expect(Tok::Dot, "`.` after mpc")?;
        let field = match self.next() {
            Some(Tok::Ident(s)) => s,
            _ => return Err(self.syntax("expected field name after `mpc.`")),
        };
        match self.peek() {
            Some(Tok::Assign) => {
                self.pos += 1;
                match self.peek() {
                    Some(Tok::LBracket) => {
                        let table = self.matrix_literal(&field)?;
                        self.tables.insert(field, table);
                    }
                    Some(Tok::Str(_)) => {
                        self.pos += 1;
                    }
                    _ => {
                        let v = self.expr()?.normalize();
                        match (field.as_str(), v) {
                            ("baseMVA", Value::Scalar(x)) => self.base_mva = Some((line, x)),
                            _ => return Err(self.unsupported(line)),
                        }
                    }
                }
                self.end_statement()
            }
            Some(Tok::LParen) => {
                let (rows, cols) = self.selectors()?;
                self.expect(Tok::Assign, "`=`")?;
                let v = self.expr()?.normalize();
                self.assign_columns(line, &field, rows, cols, v)?;
                self.end_statement()
            }
            _ => Err(self.unsupported(line)),
        }
    }

    fn matrix_literal(&mut self, table: &str) -> Result<Table, ParseError> {
        let line = self.line();
        self.pos += 1;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut row_lines = Vec::new();
        let mut current: Vec<f64> = Vec::new();
        let mut current_line = line;
        let mut cols: Option<usize> = None;
        let mut finish_row = |row: &mut Vec<f64>, row_line: usize, rows: &mut Vec<Vec<f64>>| {
            if row.is_empty() {
                return Ok(());
            }
            let expected = *cols.get_or_insert(row.len());
            if row.len() != expected {
                return Err(ParseError::RaggedRow { line: row_line, found: row.len(), expected });
            }
            rows.push(std::mem::take(row));
            row_lines.push(row_line);
            Ok(())
        };
        loop {
            let tok_line = self.line();
            match self.next() {
                Some(Tok::RBracket) => {
                    finish_row(&mut current, current_line, &mut rows)?;
                    break;
                }
                Some(Tok::Semi | Tok::Newline) => finish_row(&mut current, current_line, &mut rows)?,
                Some(Tok::Comma) => {}
                Some(t @ (Tok::Num(_) | Tok::Minus | Tok::Plus | Tok::Ident(_))) => {
                    if current.is_empty() {
                        current_line = tok_line;
                    }
                    let negative = t == Tok::Minus;
                    let t = if matches!(t, Tok::Minus | Tok::Plus) { self.next() } else { Some(t) };
                    let v = match t {
                        Some(Tok::Num(v)) => v,
                        Some(Tok::Ident(s)) if s == "Inf" => f64::INFINITY,
                        Some(Tok::Ident(s)) if s == "NaN" => f64::NAN,
                        _ => {
                            return Err(ParseError::Syntax {
                                line: tok_line,
                                message: format!("non-numeric entry in mpc.{table}"),
                            })
                        }
                    };
                    current.push(if negative { -v } else { v });
                }
                None => {
                    return Err(ParseError::Syntax {
                        line,
                        message: format!("unterminated matrix for mpc.{table}"),
                    })
                }
                Some(_) => {
                    return Err(ParseError::Syntax {
                        line: tok_line,
                        message: format!("non-numeric entry in mpc.{table}"),
                    })
                }
            }
        }
        Ok(Table { line, cols: cols.unwrap_or(0), rows, row_lines })
    }

    /// `(rows, cols)` index pair after a table name.
    fn selectors(&mut self) -> Result<(Selector, Selector), ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let rows = self.selector()?;
        self.expect(Tok::Comma, "`,` between indices")?;
        let cols = self.selector()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok((rows, cols))
    }

    fn selector(&mut self) -> Result<Selector, ParseError> {
        if self.peek() == Some(&Tok::Colon) {
            self.pos += 1;
            return Ok(Selector::All);
        }
        let line = self.line();
        let list = self.expr()?.into_list();
        let mut out = Vec::with_capacity(list.len());
        for v in list {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(ParseError::BadInteger { line, what: "index", value: v });
            }
            out.push(v as usize - 1);
        }
        Ok(Selector::List(out))
    }

    fn table(&self, line: usize, name: &str) -> Result<&Table, ParseError> {
        self.tables
            .get(name)
            .ok_or_else(|| ParseError::UnknownIdentifier { line, name: format!("mpc.{name}") })
    }

    fn read_table(
        &self,
        line: usize,
        name: &str,
        rows: Selector,
        cols: Selector,
    ) -> Result<Value, ParseError> {
        let t = self.table(line, name)?;
        let rows = rows.resolve(t.rows.len());
        let cols = cols.resolve(t.cols);
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in &rows {
            for &c in &cols {
                let v = t.rows.get(r).and_then(|row| row.get(c)).ok_or_else(|| ParseError::Syntax {
                    line,
                    message: format!("index ({}, {}) out of range for mpc.{name}", r + 1, c + 1),
                })?;
                data.push(*v);
            }
        }
        Ok(Value::Matrix { rows: rows.len(), cols: cols.len(), data }.normalize())
    }

    fn assign_columns(
        &mut self,
        line: usize,
        name: &str,
        rows: Selector,
        cols: Selector,
        value: Value,
    ) -> Result<(), ParseError> {
        let t = self.table(line, name)?;
        let rows = rows.resolve(t.rows.len());
        let cols = cols.resolve(t.cols);
        if let Some(&c) = cols.iter().find(|&&c| c >= t.cols) {
            return Err(ParseError::Syntax {
                line,
                message: format!("column {} out of range for mpc.{name}", c + 1),
            });
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= t.rows.len()) {
            return Err(ParseError::Syntax {
                line,
                message: format!("row {} out of range for mpc.{name}", r + 1),
            });
        }
        if let Value::Matrix { rows: vr, cols: vc, .. } = &value {
            if *vr != rows.len() || *vc != cols.len() {
                return Err(ParseError::Syntax {
                    line,
                    message: format!(
                        "cannot assign {vr}x{vc} value to {}x{} selection",
                        rows.len(),
                        cols.len()
                    ),
                });
            }
        }
        let t = self.tables.get_mut(name).expect("checked above");
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                t.rows[r][c] = match &value {
                    Value::Scalar(x) => *x,
                    Value::Matrix { cols: vc, data, .. } => data[i * vc + j],
                };
            }
        }
        Ok(())
    }

    // expression grammar, MATLAB precedence:
    //   expr  := term (('+'|'-') term)*
    //   term  := unary (('*'|'/'|'.*'|'./') unary)*
    //   unary := ('-'|'+') unary | power
    //   power := primary (('^'|'.^') ('-'|'+')* primary)*
    fn expr(&mut self) -> Result<Value, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => |a: f64, b: f64| a + b,
                Some(Tok::Minus) => |a: f64, b: f64| a - b,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = lhs.elementwise(rhs, op).map_err(|m| self.syntax(m))?;
        }
    }

    fn term(&mut self) -> Result<Value, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let tok = match self.peek() {
                Some(t @ (Tok::Star | Tok::Slash | Tok::DotStar | Tok::DotSlash)) => t.clone(),
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            let matrix_op = matches!(tok, Tok::Star | Tok::Slash);
            if matrix_op && !lhs.is_scalar() && !rhs.is_scalar() {
                return Err(self.syntax("matrix product/division is not supported; use .* or ./"));
            }
            if tok == Tok::Slash && !rhs.is_scalar() {
                return Err(self.syntax("division by a matrix is not supported"));
            }
            let divide = matches!(tok, Tok::Slash | Tok::DotSlash);
            lhs = lhs
                .elementwise(rhs, |a, b| if divide { a / b } else { a * b })
                .map_err(|m| self.syntax(m))?;
        }
    }

    fn unary(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.map(|x| -x))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value, ParseError> {
        let mut base = self.primary()?;
        while let Some(t @ (Tok::Caret | Tok::DotCaret)) = self.peek().cloned() {
            self.pos += 1;
            let mut negate = false;
            while let Some(s @ (Tok::Minus | Tok::Plus)) = self.peek().cloned() {
                negate ^= s == Tok::Minus;
                self.pos += 1;
            }
            let mut exp = self.primary()?;
            if negate {
                exp = exp.map(|x| -x);
            }
            if t == Tok::Caret && !(base.is_scalar() && exp.is_scalar()) {
                return Err(self.syntax("matrix power is not supported; use .^"));
            }
            base = base.elementwise(exp, f64::powf).map_err(|m| self.syntax(m))?;
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Value, ParseError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Num(v)) => Ok(Value::Scalar(v)),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(v)
            }
            Some(Tok::LBracket) => {
                let mut items = Vec::new();
                loop {
                    match self.peek() {
                        Some(Tok::RBracket) => {
                            self.pos += 1;
                            break;
                        }
                        Some(Tok::Comma) => self.pos += 1,
                        None => return Err(self.syntax("unterminated `[`")),
                        _ => items.extend(self.expr()?.into_list()),
                    }
                }
                let cols = items.len();
                Ok(Value::Matrix { rows: 1, cols, data: items }.normalize())
            }
            Some(Tok::Ident(id)) if id == "mpc" => {
                self.expect(Tok::Dot, "`.` after mpc")?;
                let field = match self.next() {
                    Some(Tok::Ident(s)) => s,
                    _ => return Err(self.syntax("expected field name after `mpc.`")),
                };
                if field == "baseMVA" {
                    return self
                        .base_mva
                        .map(|(_, v)| Value::Scalar(v))
                        .ok_or(ParseError::UnknownIdentifier { line, name: "mpc.baseMVA".into() });
                }
                let (rows, cols) = if self.peek() == Some(&Tok::LParen) {
                    self.selectors()?
                } else {
                    (Selector::All, Selector::All)
                };
                self.read_table(line, &field, rows, cols)
            }
            Some(Tok::Ident(id)) if self.peek() == Some(&Tok::LParen) => {
                let f: fn(f64) -> f64 = match id.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "asin" => f64::asin,
                    "acos" => f64::acos,
                    "atan" => f64::atan,
                    "sqrt" => f64::sqrt,
                    "abs" => f64::abs,
                    "exp" => f64::exp,
                    _ => return Err(ParseError::UnknownIdentifier { line, name: id }),
                };
                self.pos += 1;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(arg.map(f))
            }
            Some(Tok::Ident(id)) => self
                .vars
                .get(&id)
                .cloned()
                .ok_or(ParseError::UnknownIdentifier { line, name: id }),
            _ => Err(ParseError::Syntax { line, message: "expected expression".into() }),
        }
    }

    fn into_case(self, opts: &ParseOptions) -> Result<NetworkCase, ParseError> {
        let (_, base_mva) = self.base_mva.ok_or(ParseError::Missing("baseMVA"))?;
        if !(base_mva.is_finite() && base_mva > 0.0) {
            return Err(ValidationError::BaseMva(base_mva).into());
        }
        let bus_t = self.tables.get("bus").ok_or(ParseError::Missing("bus"))?;
        let branch_t = self.tables.get("branch").ok_or(ParseError::Missing("branch"))?;
        check_columns("bus", bus_t, BUS_MIN_COLS, false)?;
        check_columns("branch", branch_t, BRANCH_MIN_COLS, true)?;

        let mut buses = Vec::with_capacity(bus_t.rows.len());
        let mut slacks = Vec::new();
        for (row, &line) in bus_t.rows.iter().zip(&bus_t.row_lines) {
            let id = bus_id(row[BUS_I], line, "bus id")?;
            if row[BUS_TYPE] == REF {
                slacks.push((id, row[VM]));
            }
            buses.push(BusRecord {
                id,
                p_load: row[PD] / base_mva,
                q_load: row[QD] / base_mva,
                g_shunt: row[GS] / base_mva,
                b_shunt: row[BS] / base_mva,
                base_kv: row[BASE_KV],
            });
        }
        let (slack_bus_id, slack_vm) = match slacks.as_slice() {
            [] => return Err(ValidationError::NoSlack.into()),
            [one] => *one,
            many => {
                return Err(ValidationError::MultipleSlack(many.iter().map(|s| s.0).collect()).into())
            }
        };

        let mut branches = Vec::with_capacity(branch_t.rows.len());
        for (row, &line) in branch_t.rows.iter().zip(&branch_t.row_lines) {
            branches.push(BranchRecord {
                from_bus: bus_id(row[F_BUS], line, "from bus")?,
                to_bus: bus_id(row[T_BUS], line, "to bus")?,
                r: row[BR_R],
                x: row[BR_X],
                in_service: row[BR_STATUS] > 0.0,
            });
        }

        // MATPOWER takes the slack setpoint from an in-service generator if present
        let gen_vg = self.tables.get("gen").and_then(|g| {
            g.rows.iter().find_map(|row| {
                let at_slack = row.get(GEN_BUS) == Some(&f64::from(slack_bus_id.0));
                let on = row.get(GEN_STATUS).is_some_and(|s| *s > 0.0);
                if at_slack && on {
                    row.get(VG).copied()
                } else {
                    None
                }
            })
        });
        let slack_voltage_pu = opts.slack_voltage_pu.or(gen_vg).unwrap_or(slack_vm);

        Ok(NetworkCase {
            name: self.name,
            base_mva,
            buses,
            branches,
            slack_bus_id,
            slack_voltage_pu,
        })
    }
}

fn check_columns(name: &str, t: &Table, required: usize, allow_empty: bool) -> Result<(), ParseError> {
    if t.rows.is_empty() {
        if allow_empty {
            return Ok(());
        }
        return Err(ParseError::EmptyTable { line: t.line, table: name.into() });
    }
    if t.cols < required {
        return Err(ParseError::TooFewColumns {
            line: t.line,
            table: name.into(),
            required,
            found: t.cols,
        });
    }
    Ok(())
}

fn bus_id(v: f64, line: usize, what: &'static str) -> Result<BusId, ParseError> {
    if v.fract() != 0.0 || v < 1.0 || v > f64::from(u32::MAX) {
        return Err(ParseError::BadInteger { line, what, value: v });
    }
    Ok(BusId(v as u32))
}

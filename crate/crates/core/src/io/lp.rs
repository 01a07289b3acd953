//! LP-format export and the matching reader.
//!
//! Sections are `Minimize`, `Subject To`, `Bounds`, `Binaries`,
//! `Generals` and `End`. Every variable gets a line in `Bounds`, in model
//! order, so the reader recovers the variable list exactly. Coefficients
//! are exact decimals; a row (or the objective) holding a value with a
//! non-terminating expansion is multiplied through by the least common
//! multiple of its denominators and preceded by a `\ fctp-scale: N`
//! comment that the reader undoes.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::formulations::{Formulation, Model, ModelBuilder, RowSense, VarKind};
use crate::rational::{self, Rational};

const WIDTH: usize = 78;

/// Factor that turns every value into a terminating decimal, or one if
/// they already are.
pub(crate) fn row_scale<'a>(values: impl IntoIterator<Item = &'a Rational> + Clone) -> BigInt {
    if values.clone().into_iter().all(rational::is_terminating) {
        BigInt::one()
    } else {
        rational::denominator_lcm(values)
    }
}

pub(crate) fn decimal(r: &Rational) -> String {
    rational::to_decimal(r).expect("value was scaled to a terminating decimal")
}

struct Wrapper {
    out: String,
    line: String,
}

impl Wrapper {
    fn new() -> Self {
        Wrapper { out: String::new(), line: String::new() }
    }

    fn start(&mut self, head: &str) {
        self.line = format!(" {head}");
    }

    fn push(&mut self, token: &str) {
        if self.line.len() + 1 + token.len() > WIDTH && !self.line.trim().is_empty() {
            self.out.push_str(&self.line);
            self.out.push('\n');
            self.line = String::from("  ");
            self.line.push_str(token);
        } else {
            self.line.push(' ');
            self.line.push_str(token);
        }
    }

    fn end(&mut self) {
        self.out.push_str(&self.line);
        self.out.push('\n');
        self.line.clear();
    }
}

fn write_terms(w: &mut Wrapper, model: &Model, terms: &[(usize, Rational)], scale: &Rational) {
    if terms.is_empty() {
        // keeps the row syntactically valid; the reader drops zero terms
        if let Some(v) = model.variables().first() {
            w.push("0");
            w.push(&v.name);
        }
        return;
    }
    for (pos, (idx, coef)) in terms.iter().enumerate() {
        let c = if scale.is_one() { coef.clone() } else { coef * scale };
        let sign = if c.is_negative() { "-" } else { "+" };
        if pos > 0 || c.is_negative() {
            w.push(sign);
        }
        let abs = c.abs();
        if !abs.is_one() {
            w.push(&decimal(&abs));
        }
        w.push(&model.variables()[*idx].name);
    }
}

fn bound_text(r: &Rational, name: &str) -> Result<String> {
    rational::to_decimal(r)
        .ok_or_else(|| Error::InexactBound(format!("{name}: {} has no finite decimal form", rational::to_text(r))))
}

pub fn model_to_lp(model: &Model) -> Result<String> {
    let mut out = String::new();
    if let Some(f) = model.metadata.formulation {
        writeln!(out, "\\ fctp-formulation: {f}").unwrap();
    }
    if !model.metadata.fingerprint.is_empty() {
        writeln!(out, "\\ fctp-fingerprint: {}", model.metadata.fingerprint).unwrap();
    }
    out.push_str("Minimize\n");
    let scale = row_scale(model.objective().iter().map(|(_, c)| c));
    if !scale.is_one() {
        writeln!(out, "\\ fctp-scale: {scale}").unwrap();
    }
    let mut w = Wrapper::new();
    w.start("obj:");
    write_terms(&mut w, model, model.objective(), &Rational::from_integer(scale));
    w.end();
    out.push_str(&w.out);

    out.push_str("Subject To\n");
    for row in model.constraints() {
        let scale = row_scale(row.terms.iter().map(|(_, c)| c).chain(std::iter::once(&row.rhs)));
        if !scale.is_one() {
            writeln!(out, "\\ fctp-scale: {scale}").unwrap();
        }
        let scale = Rational::from_integer(scale);
        let mut w = Wrapper::new();
        w.start(&format!("{}:", row.name));
        write_terms(&mut w, model, &row.terms, &scale);
        w.push(row.sense.symbol());
        w.push(&decimal(&if scale.is_one() { row.rhs.clone() } else { &row.rhs * &scale }));
        w.end();
        out.push_str(&w.out);
    }

    out.push_str("Bounds\n");
    for v in model.variables() {
        let line = match (&v.lower, &v.upper) {
            (None, None) => format!(" {} free", v.name),
            (Some(lo), None) => format!(" {} >= {}", v.name, bound_text(lo, &v.name)?),
            (None, Some(hi)) => format!(" -inf <= {} <= {}", v.name, bound_text(hi, &v.name)?),
            (Some(lo), Some(hi)) => {
                format!(" {} <= {} <= {}", bound_text(lo, &v.name)?, v.name, bound_text(hi, &v.name)?)
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    for (kind, header) in [(VarKind::Binary, "Binaries"), (VarKind::Integer, "Generals")] {
        let names: Vec<&str> = model.variables().iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if names.is_empty() {
            continue;
        }
        out.push_str(header);
        out.push('\n');
        let mut w = Wrapper::new();
        w.start(names[0]);
        for name in &names[1..] {
            w.push(name);
        }
        w.end();
        out.push_str(&w.out);
    }
    out.push_str("End\n");
    Ok(out)
}

pub fn write_model_lp(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_lp(model)?)?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    End,
}

struct Token {
    text: String,
    line: usize,
}

struct Statement {
    tokens: Vec<Token>,
    scale: Option<BigInt>,
}

fn lp_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { location: format!("line {line}"), message: message.into() }
}

fn number(tok: &Token) -> Result<Rational> {
    rational::parse(&tok.text).ok_or_else(|| lp_err(tok.line, format!("`{}` is not a number", tok.text)))
}

fn is_number(text: &str) -> bool {
    text.trim_start_matches(['+', '-']).starts_with(|c: char| c.is_ascii_digit() || c == '.')
}

fn sense_of(text: &str) -> Option<RowSense> {
    match text {
        "<=" | "=<" | "<" => Some(RowSense::Le),
        ">=" | "=>" | ">" => Some(RowSense::Ge),
        "=" => Some(RowSense::Eq),
        _ => None,
    }
}

/// Parses `[+|-] [coef] name ...` up to the end of `tokens`.
fn parse_terms(tokens: &[Token]) -> Result<Vec<(String, Rational)>> {
    let mut terms = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut coef = Rational::one();
        if tokens[i].text == "+" || tokens[i].text == "-" {
            if tokens[i].text == "-" {
                coef = -coef;
            }
            i += 1;
        }
        let tok = tokens.get(i).ok_or_else(|| lp_err(tokens[i - 1].line, "dangling sign"))?;
        if is_number(&tok.text) {
            coef *= number(tok)?;
            i += 1;
        }
        let name = tokens.get(i).ok_or_else(|| lp_err(tok.line, "coefficient without a variable"))?;
        if is_number(&name.text) || sense_of(&name.text).is_some() {
            return Err(lp_err(name.line, format!("expected a variable name, found `{}`", name.text)));
        }
        terms.push((name.text.clone(), coef));
        i += 1;
    }
    Ok(terms)
}

/// Reads the LP dialect written by [`model_to_lp`]. Variables are declared
/// by their `Bounds` lines; rows may only mention declared variables.
pub fn model_from_lp(text: &str) -> Result<Model> {
    let mut formulation = None;
    let mut fingerprint = String::new();
    let mut section = Section::Header;
    let mut objective: Vec<Statement> = Vec::new();
    let mut rows: Vec<Statement> = Vec::new();
    let mut bounds: Vec<(usize, String)> = Vec::new();
    let mut binaries: Vec<Token> = Vec::new();
    let mut generals: Vec<Token> = Vec::new();
    let mut pending_scale: Option<BigInt> = None;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if let Some(comment) = raw.trim_start().strip_prefix('\\') {
            let comment = comment.trim();
            if let Some(tag) = comment.strip_prefix("fctp-formulation:") {
                formulation = Some(tag.trim().parse::<Formulation>()?);
            } else if let Some(fp) = comment.strip_prefix("fctp-fingerprint:") {
                fingerprint = fp.trim().to_owned();
            } else if let Some(s) = comment.strip_prefix("fctp-scale:") {
                let s: BigInt = s.trim().parse().map_err(|_| lp_err(line_no, "bad scale factor"))?;
                pending_scale = Some(s);
            }
            continue;
        }
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let header = match trimmed.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "subject to" | "st" | "s.t." => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" => Some(Section::Binaries),
            "generals" | "general" => Some(Section::Generals),
            "end" => Some(Section::End),
            "maximize" | "maximise" | "max" => return Err(lp_err(line_no, "only minimisation is supported")),
            _ => None,
        };
        if let Some(h) = header {
            section = h;
            continue;
        }
        let continuation = raw.starts_with("  ");
        let tokens = trimmed.split_whitespace().map(|t| Token { text: t.to_owned(), line: line_no });
        match section {
            Section::Header | Section::End => return Err(lp_err(line_no, "text outside a section")),
            Section::Objective | Section::Rows => {
                let list = if section == Section::Objective { &mut objective } else { &mut rows };
                if continuation && !list.is_empty() {
                    list.last_mut().unwrap().tokens.extend(tokens);
                } else {
                    list.push(Statement { tokens: tokens.collect(), scale: pending_scale.take() });
                }
            }
            Section::Bounds => bounds.push((line_no, trimmed.to_owned())),
            Section::Binaries => binaries.extend(tokens),
            Section::Generals => generals.extend(tokens),
        }
    }
    if section != Section::End {
        return Err(lp_err(text.lines().count(), "missing End"));
    }

    let mut kinds = std::collections::HashMap::new();
    for (list, kind) in [(&binaries, VarKind::Binary), (&generals, VarKind::Integer)] {
        for tok in list {
            if kinds.insert(tok.text.as_str(), (kind, tok.line)).is_some() {
                return Err(lp_err(tok.line, format!("`{}` declared integral twice", tok.text)));
            }
        }
    }
    let mut b = ModelBuilder::new();
    for (line_no, text) in &bounds {
        let t: Vec<&str> = text.split_whitespace().collect();
        let num = |s: &str| rational::parse(s).ok_or_else(|| lp_err(*line_no, format!("`{s}` is not a number")));
        let (name, lo, hi) = match t.as_slice() {
            [name, "free"] => (*name, None, None),
            [name, ">=", lo] => (*name, Some(num(lo)?), None),
            ["-inf", "<=", name, "<=", hi] => (*name, None, Some(num(hi)?)),
            [lo, "<=", name, "<=", hi] => (*name, Some(num(lo)?), Some(num(hi)?)),
            _ => return Err(lp_err(*line_no, format!("unsupported bound `{text}`"))),
        };
        let kind = kinds.remove(name).map_or(VarKind::Continuous, |(k, _)| k);
        b.add_var(name, lo, hi, kind)?;
    }
    if let Some((name, (_, line))) = kinds.into_iter().min_by_key(|(_, (_, line))| *line) {
        return Err(lp_err(line, format!("`{name}` has no bound line")));
    }

    let resolve = |b: &ModelBuilder, terms: Vec<(String, Rational)>, scale: &Rational, line: usize| {
        terms
            .into_iter()
            .map(|(name, c)| {
                b.var(&name)
                    .map(|idx| (idx, if scale.is_one() { c } else { c / scale }))
                    .map_err(|_| lp_err(line, format!("undeclared variable `{name}`")))
            })
            .collect::<Result<Vec<_>>>()
    };
    let scale_of = |s: &Statement| Rational::from_integer(s.scale.clone().unwrap_or_else(BigInt::one));

    match objective.as_slice() {
        [] => {}
        [stmt] => {
            let first = stmt.tokens.first().ok_or_else(|| lp_err(0, "empty objective"))?;
            let body = if first.text.ends_with(':') { &stmt.tokens[1..] } else { &stmt.tokens[..] };
            let terms = resolve(&b, parse_terms(body)?, &scale_of(stmt), first.line)?;
            b.set_objective(terms);
        }
        [_, second, ..] => return Err(lp_err(second.tokens[0].line, "objective split over several statements")),
    }
    for stmt in &rows {
        let line = stmt.tokens[0].line;
        let name = stmt.tokens[0]
            .text
            .strip_suffix(':')
            .filter(|s| !s.is_empty())
            .ok_or_else(|| lp_err(line, "rows must start with `name:`"))?;
        let body = &stmt.tokens[1..];
        let at = body
            .iter()
            .position(|t| sense_of(&t.text).is_some())
            .ok_or_else(|| lp_err(line, format!("row `{name}` has no sense")))?;
        if at + 2 != body.len() {
            return Err(lp_err(line, format!("row `{name}` must end in `sense rhs`")));
        }
        let scale = scale_of(stmt);
        let terms = resolve(&b, parse_terms(&body[..at])?, &scale, line)?;
        let rhs = number(&body[at + 1])?;
        let rhs = if scale.is_one() { rhs } else { rhs / &scale };
        b.add_row(name, terms, sense_of(&body[at].text).unwrap(), rhs);
    }
    b.set_formulation(formulation, fingerprint);
    Ok(b.finish())
}

pub fn read_model_lp(path: &Path) -> Result<Model> {
    model_from_lp(&std::fs::read_to_string(path)?)
}

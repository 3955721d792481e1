//! Plain-text system documents.
//!
//! ```text
//! blockred-system 1
//! # comments run to the end of the line
//! representation state_space
//! name first-order lag
//! n 1
//! m 1
//! p 1
//! matrix A 1 1
//! -1
//! matrix B 1 1
//! 1
//! matrix C 1 1
//! 1
//! ```
//!
//! `state_space` documents carry `A`, `B`, `C` and optionally `D`.
//! `right_mfd` documents carry the denominator `D0..Dr` (`D0` may be omitted
//! for a monic denominator), the numerator `N0..Nq` leading-first and
//! optionally the feedthrough `F`. `block_diagonal` documents carry
//! `R1 B1 C1 … Rr Br Cr` and optionally `F`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;

use crate::error::Error;
use crate::matpoly::MatrixPolynomial;
use crate::sysrep::{BlockDiagonalRealization, RightMfd, StateSpace, Subsystem};

const MAGIC: &str = "blockred-system";
const VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A parse failure or a well-formed document whose content is inconsistent.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    StateSpace,
    RightMfd,
    BlockDiagonal,
}

impl Representation {
    pub fn tag(self) -> &'static str {
        match self {
            Representation::StateSpace => "state_space",
            Representation::RightMfd => "right_mfd",
            Representation::BlockDiagonal => "block_diagonal",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "state_space" => Some(Representation::StateSpace),
            "right_mfd" => Some(Representation::RightMfd),
            "block_diagonal" => Some(Representation::BlockDiagonal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemModel {
    StateSpace(StateSpace),
    RightMfd(RightMfd),
    BlockDiagonal(BlockDiagonalRealization),
}

impl SystemModel {
    pub fn representation(&self) -> Representation {
        match self {
            SystemModel::StateSpace(_) => Representation::StateSpace,
            SystemModel::RightMfd(_) => Representation::RightMfd,
            SystemModel::BlockDiagonal(_) => Representation::BlockDiagonal,
        }
    }

    /// A state-space realization (block controller form for fractions).
    pub fn to_state_space(&self) -> crate::Result<StateSpace> {
        match self {
            SystemModel::StateSpace(s) => Ok(s.clone()),
            SystemModel::RightMfd(f) => crate::sysrep::controller_canonical(f),
            SystemModel::BlockDiagonal(bd) => Ok(crate::sysrep::recompose(bd)),
        }
    }

    pub fn as_transfer(&self) -> &dyn crate::sysrep::TransferFunction {
        match self {
            SystemModel::StateSpace(s) => s,
            SystemModel::RightMfd(f) => f,
            SystemModel::BlockDiagonal(bd) => bd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDocument {
    pub name: Option<String>,
    pub description: Option<String>,
    pub model: SystemModel,
}

impl SystemDocument {
    pub fn new(model: SystemModel) -> Self {
        Self { name: None, description: None, model }
    }
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

fn strip_comment(s: &str) -> &str {
    match s.find('#') {
        Some(i) => &s[..i],
        None => s,
    }
}

/// Whitespace-separated tokens with 1-based columns.
fn tokens(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(b) = start.take() {
                out.push((b, &s[b..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push((b, &s[b..]));
    }
    out.into_iter().map(|(b, t)| (s[..b].chars().count() + 1, t)).collect()
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let all: Vec<&str> = text.lines().collect();
        let lines = all
            .iter()
            .enumerate()
            .filter(|(_, l)| !strip_comment(l).trim().is_empty())
            .map(|(i, l)| (i + 1, strip_comment(l)))
            .collect();
        Self { lines, pos: 0, last_line: all.len().max(1) }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.lines.get(self.pos).copied();
        self.pos += 1;
        item
    }
}

fn parse_usize(line: usize, col: usize, tok: &str, what: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>().map_err(|_| err(line, col, format!("expected a non-negative integer for {what}, found '{tok}'")))
}

fn parse_number(line: usize, col: usize, tok: &str) -> Result<f64, ParseError> {
    let v: f64 = tok.parse().map_err(|_| err(line, col, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(err(line, col, format!("non-finite number '{tok}'")));
    }
    Ok(v)
}

struct Raw {
    representation: Option<(usize, Representation)>,
    name: Option<String>,
    description: Option<String>,
    dims: BTreeMap<String, (usize, usize)>,
    matrices: BTreeMap<String, (usize, DMatrix<f64>)>,
}

fn parse_raw(text: &str) -> Result<Raw, ParseError> {
    let mut cur = Cursor::new(text);
    let (line, first) = cur.next().ok_or_else(|| err(1, 1, format!("empty document, expected '{MAGIC} {VERSION}'")))?;
    let toks = tokens(first);
    if toks.len() != 2 || toks[0].1 != MAGIC {
        return Err(err(line, toks.first().map_or(1, |t| t.0), format!("expected '{MAGIC} {VERSION}'")));
    }
    if toks[1].1 != VERSION {
        return Err(err(line, toks[1].0, format!("unsupported version '{}'", toks[1].1)));
    }
    let mut raw = Raw { representation: None, name: None, description: None, dims: BTreeMap::new(), matrices: BTreeMap::new() };
    while let Some((line, content)) = cur.next() {
        let toks = tokens(content);
        let (col, key) = toks[0];
        match key {
            "representation" => {
                let (vc, v) = *toks.get(1).ok_or_else(|| err(line, col + key.len(), "missing representation tag"))?;
                let rep = Representation::from_tag(v).ok_or_else(|| err(line, vc, format!("unknown representation '{v}'")))?;
                if toks.len() > 2 {
                    return Err(err(line, toks[2].0, "unexpected token"));
                }
                raw.representation = Some((line, rep));
            }
            "name" | "description" => {
                let rest = content.trim_start()[key.len()..].trim().to_string();
                if key == "name" {
                    raw.name = Some(rest);
                } else {
                    raw.description = Some(rest);
                }
            }
            "n" | "m" | "p" | "r" => {
                let (vc, v) = *toks.get(1).ok_or_else(|| err(line, col + 1, format!("missing value for '{key}'")))?;
                if toks.len() > 2 {
                    return Err(err(line, toks[2].0, "unexpected token"));
                }
                raw.dims.insert(key.to_string(), (line, parse_usize(line, vc, v, key)?));
            }
            "matrix" => {
                if toks.len() != 4 {
                    return Err(err(line, col, "expected 'matrix NAME ROWS COLS'"));
                }
                let name = toks[1].1.to_string();
                let rows = parse_usize(line, toks[2].0, toks[2].1, "rows")?;
                let cols = parse_usize(line, toks[3].0, toks[3].1, "columns")?;
                if raw.matrices.contains_key(&name) {
                    return Err(err(line, toks[1].0, format!("duplicate matrix '{name}'")));
                }
                let mut data = Vec::with_capacity(rows * cols);
                // rows of an empty matrix are not written
                let stored = if cols == 0 { 0 } else { rows };
                for i in 0..stored {
                    let (rl, rc) = cur
                        .next()
                        .ok_or_else(|| err(cur.last_line, 1, format!("unexpected end of document: matrix '{name}' needs {rows} rows, found {i}")))?;
                    let nums = tokens(rc);
                    if nums.len() != cols {
                        let c = nums.get(cols).map_or(rc.chars().count() + 1, |t| t.0);
                        return Err(err(rl, c, format!("matrix '{name}' row {} has {} entries, expected {cols}", i + 1, nums.len())));
                    }
                    for (c, t) in nums {
                        data.push(parse_number(rl, c, t)?);
                    }
                }
                raw.matrices.insert(name, (line, DMatrix::from_row_slice(rows, cols, &data)));
            }
            other => return Err(err(line, col, format!("unknown keyword '{other}'"))),
        }
    }
    Ok(raw)
}

fn take(raw: &mut Raw, name: &str) -> Result<DMatrix<f64>, Error> {
    raw.matrices.remove(name).map(|(_, m)| m).ok_or_else(|| Error::InvalidInput(format!("missing matrix '{name}'")))
}

fn check_dim(raw: &Raw, key: &str, actual: usize) -> Result<(), Error> {
    match raw.dims.get(key) {
        Some(&(line, declared)) if declared != actual => Err(Error::DimensionMismatch(format!(
            "header declares {key}={declared} (line {line}) but the payload implies {key}={actual}"
        ))),
        _ => Ok(()),
    }
}

fn declared(raw: &Raw, key: &str) -> Result<usize, Error> {
    raw.dims.get(key).map(|d| d.1).ok_or_else(|| Error::InvalidInput(format!("missing header '{key}'")))
}

fn build(mut raw: Raw) -> Result<SystemModel, Error> {
    let rep = raw.representation.map(|r| r.1).ok_or_else(|| Error::InvalidInput("missing 'representation'".into()))?;
    let model = match rep {
        Representation::StateSpace => {
            let n = declared(&raw, "n")?;
            let m = declared(&raw, "m")?;
            let p = declared(&raw, "p")?;
            let a = take(&mut raw, "A")?;
            let b = take(&mut raw, "B")?;
            let c = take(&mut raw, "C")?;
            let d = raw.matrices.remove("D").map(|x| x.1).unwrap_or_else(|| DMatrix::zeros(c.nrows(), b.ncols()));
            for (what, mat, want) in [("A", &a, (n, n)), ("B", &b, (n, m)), ("C", &c, (p, n)), ("D", &d, (p, m))] {
                if mat.shape() != want {
                    return Err(Error::DimensionMismatch(format!(
                        "{what} is {}x{}, header implies {}x{}",
                        mat.nrows(),
                        mat.ncols(),
                        want.0,
                        want.1
                    )));
                }
            }
            SystemModel::StateSpace(StateSpace::new(a, b, c, d)?)
        }
        Representation::RightMfd => {
            let r = declared(&raw, "r")?;
            let m = declared(&raw, "m")?;
            let p = declared(&raw, "p")?;
            let mut den = Vec::with_capacity(r + 1);
            den.push(raw.matrices.remove("D0").map(|x| x.1).unwrap_or_else(|| DMatrix::identity(m, m)));
            for i in 1..=r {
                den.push(take(&mut raw, &format!("D{i}"))?);
            }
            let mut num = Vec::new();
            while let Some((_, mat)) = raw.matrices.remove(&format!("N{}", num.len())) {
                num.push(mat);
            }
            if num.is_empty() {
                return Err(Error::InvalidInput("missing matrix 'N0'".into()));
            }
            let f = raw.matrices.remove("F").map(|x| x.1).unwrap_or_else(|| DMatrix::zeros(p, m));
            for (i, d) in den.iter().enumerate() {
                if d.shape() != (m, m) {
                    return Err(Error::DimensionMismatch(format!("D{i} is {}x{}, header implies {m}x{m}", d.nrows(), d.ncols())));
                }
            }
            for (i, x) in num.iter().enumerate() {
                if x.shape() != (p, m) {
                    return Err(Error::DimensionMismatch(format!("N{i} is {}x{}, header implies {p}x{m}", x.nrows(), x.ncols())));
                }
            }
            let fraction = RightMfd::new(MatrixPolynomial::new(num)?, MatrixPolynomial::new(den)?, f)?;
            check_dim(&raw, "n", fraction.order())?;
            SystemModel::RightMfd(fraction)
        }
        Representation::BlockDiagonal => {
            let r = declared(&raw, "r")?;
            let m = declared(&raw, "m")?;
            let p = declared(&raw, "p")?;
            let mut blocks = Vec::with_capacity(r);
            for i in 1..=r {
                blocks.push(Subsystem {
                    r: take(&mut raw, &format!("R{i}"))?,
                    b: take(&mut raw, &format!("B{i}"))?,
                    c: take(&mut raw, &format!("C{i}"))?,
                });
            }
            let f = raw.matrices.remove("F").map(|x| x.1).unwrap_or_else(|| DMatrix::zeros(p, m));
            let bd = BlockDiagonalRealization::new(blocks, f)?;
            check_dim(&raw, "n", bd.order())?;
            SystemModel::BlockDiagonal(bd)
        }
    };
    if let Some((name, (line, _))) = raw.matrices.iter().next() {
        return Err(Error::InvalidInput(format!("matrix '{name}' (line {line}) does not belong to a {} document", rep.tag())));
    }
    Ok(model)
}

pub fn parse(text: &str) -> Result<SystemDocument, DocumentError> {
    let raw = parse_raw(text)?;
    let name = raw.name.clone();
    let description = raw.description.clone();
    let model = build(raw)?;
    Ok(SystemDocument { name, description, model })
}

/// Shortest round-trip decimal, switching to exponent form for very large
/// or very small magnitudes.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "matrix {name} {} {}", m.nrows(), m.ncols());
    if m.ncols() == 0 {
        return;
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_number(m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn write(doc: &SystemDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "representation {}", doc.model.representation().tag());
    if let Some(name) = &doc.name {
        let _ = writeln!(out, "name {}", name.replace('\n', " "));
    }
    if let Some(d) = &doc.description {
        let _ = writeln!(out, "description {}", d.replace('\n', " "));
    }
    match &doc.model {
        SystemModel::StateSpace(s) => {
            let _ = writeln!(out, "n {}\nm {}\np {}", s.order(), s.inputs(), s.outputs());
            write_matrix(&mut out, "A", s.a());
            write_matrix(&mut out, "B", s.b());
            write_matrix(&mut out, "C", s.c());
            write_matrix(&mut out, "D", s.d());
        }
        SystemModel::RightMfd(f) => {
            let _ = writeln!(out, "n {}\nm {}\np {}\nr {}", f.order(), f.inputs(), f.outputs(), f.den().degree());
            for i in 1..=f.den().degree() {
                write_matrix(&mut out, &format!("D{i}"), f.den().coeff(i));
            }
            for (i, c) in f.num().coeffs().iter().enumerate() {
                write_matrix(&mut out, &format!("N{i}"), c);
            }
            write_matrix(&mut out, "F", f.feedthrough());
        }
        SystemModel::BlockDiagonal(bd) => {
            let f = bd.feedthrough();
            let _ = writeln!(out, "n {}\nm {}\np {}\nr {}", bd.order(), f.ncols(), f.nrows(), bd.blocks().len());
            for (i, blk) in bd.blocks().iter().enumerate() {
                write_matrix(&mut out, &format!("R{}", i + 1), &blk.r);
                write_matrix(&mut out, &format!("B{}", i + 1), &blk.b);
                write_matrix(&mut out, &format!("C{}", i + 1), &blk.c);
            }
            write_matrix(&mut out, "F", f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAG: &str = "blockred-system 1\nrepresentation state_space\nname lag\nn 1\nm 1\np 1\nmatrix A 1 1\n-1\nmatrix B 1 1\n1\nmatrix C 1 1\n1 # output\n";

    #[test]
    fn parse_and_round_trip() {
        let doc = parse(LAG).unwrap();
        assert_eq!(doc.name.as_deref(), Some("lag"));
        let again = parse(&write(&doc)).unwrap();
        assert_eq!(doc, again);
        assert_eq!(write(&again), write(&doc));
    }

    #[test]
    fn truncated_is_a_parse_error() {
        let cut = &LAG[..LAG.len() - 12];
        match parse(cut) {
            Err(DocumentError::Parse(e)) => assert!(e.message.contains("end of document"), "{e}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_number_position() {
        let text = LAG.replace("\n-1\n", "\n-1x\n");
        match parse(&text) {
            Err(DocumentError::Parse(e)) => assert_eq!((e.line, e.column), (8, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_b_rows_is_invalid() {
        let text = LAG.replace("matrix B 1 1\n1\n", "matrix B 2 1\n1\n1\n");
        assert!(matches!(parse(&text), Err(DocumentError::Invalid(Error::DimensionMismatch(_)))));
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(7648.0), "7648");
        assert_eq!(format_number(-0.1), "-0.1");
        assert_eq!(format_number(1e-20), "1e-20");
        assert_eq!(format_number(-0.0), "0");
    }
}

//! Text inputs: state files, family specs, sweep grids and numeric expressions.
//!
//! Every parser here returns [`Error::Parse`] (or a validation error) on bad
//! input and never panics; the fuzz targets hold them to that.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Family, FamilySpec};
use crate::qstate::{DensityMatrix, Mat4, PauliRepresentation, C64};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexEntry {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliFile {
    pub a: [f64; 3],
    pub b: [f64; 3],
    #[serde(rename = "T")]
    pub t: [[f64; 3]; 3],
}

/// On-disk state description; exactly one key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateFile {
    Rho(Vec<Vec<ComplexEntry>>),
    Pauli(PauliFile),
    Family(FamilySpec),
}

/// A validated state plus the family it came from, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedState {
    pub density: DensityMatrix,
    pub family: Option<Family>,
}

impl StateFile {
    pub fn load(&self, tol: &Tolerances) -> Result<LoadedState> {
        match self {
            StateFile::Rho(rows) => {
                if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                    return Err(Error::Parse("rho must be a 4x4 array of {re, im}".into()));
                }
                let m = Mat4::from_fn(|i, j| C64::new(rows[i][j].re, rows[i][j].im));
                if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::Parse("rho has non-finite entries".into()));
                }
                Ok(LoadedState {
                    density: DensityMatrix::validate(m, tol)?,
                    family: None,
                })
            }
            StateFile::Pauli(p) => {
                let flat = p.a.iter().chain(&p.b).chain(p.t.iter().flatten());
                if flat.into_iter().any(|x| !x.is_finite()) {
                    return Err(Error::Parse("pauli coefficients must be finite".into()));
                }
                let rep = PauliRepresentation {
                    a: p.a.into(),
                    b: p.b.into(),
                    t: nalgebra::Matrix3::from_fn(|i, j| p.t[i][j]),
                };
                Ok(LoadedState {
                    density: crate::qstate::from_pauli(&rep, tol)?,
                    family: None,
                })
            }
            StateFile::Family(spec) => {
                let family = Family::from_spec(spec)?;
                Ok(LoadedState {
                    density: family.density(tol)?,
                    family: Some(family),
                })
            }
        }
    }
}

pub fn parse_state_json(text: &str) -> Result<StateFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))
}

/// Parse `name,key=value,...`; values may be expressions such as `pi/6`.
pub fn parse_family_spec(text: &str) -> Result<FamilySpec> {
    let mut parts = text.split(',');
    let name = parts.next().unwrap_or("").trim();
    if name.is_empty() {
        return Err(Error::Parse("family spec needs a name".into()));
    }
    let mut spec = FamilySpec::new(&name.to_ascii_lowercase());
    for part in parts {
        let (key, value) = parse_assignment(part)?;
        if spec.params.contains_key(&key) {
            return Err(Error::Parse(format!("parameter `{key}` given twice")));
        }
        spec = spec.with(&key, value);
    }
    Ok(spec)
}

/// Parse `key=expression`.
pub fn parse_assignment(text: &str) -> Result<(String, f64)> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected key=value, got `{}`", text.trim())))?;
    let key = key.trim().to_ascii_lowercase();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Parse(format!("bad parameter name `{key}`")));
    }
    Ok((key, parse_expr(value)?))
}

pub const MAX_GRID_POINTS: usize = 1_000_000;

/// One swept parameter: `key=lo:hi:step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step * (1.0 + 1e-9)).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// lo + i step for every point not past hi (up to rounding).
    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.lo + i as f64 * self.step)
            .collect()
    }
}

pub fn parse_grid_spec(text: &str) -> Result<GridSpec> {
    let (key, range) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected key=lo:hi:step, got `{}`", text.trim())))?;
    let key = key.trim().to_ascii_lowercase();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Parse(format!("bad grid parameter name `{key}`")));
    }
    let fields: Vec<&str> = range.split(':').collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!("grid `{key}` needs lo:hi:step")));
    }
    let lo = parse_expr(fields[0])?;
    let hi = parse_expr(fields[1])?;
    let step = parse_expr(fields[2])?;
    if !(step > 0.0) {
        return Err(Error::Parse(format!("grid `{key}` step must be positive")));
    }
    if hi < lo {
        return Err(Error::Parse(format!("grid `{key}` has hi < lo")));
    }
    let count = (hi - lo) / step;
    if !count.is_finite() || count >= MAX_GRID_POINTS as f64 {
        return Err(Error::Parse(format!(
            "grid `{key}` has more than {MAX_GRID_POINTS} points"
        )));
    }
    Ok(GridSpec { key, lo, hi, step })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Star,
    Slash,
    Plus,
    Minus,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent only when digits follow, so `2e` stays "2 * e" territory and fails
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let v: f64 = lit
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number `{lit}`")))?;
                tokens.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let word: String = chars[start..i]
                    .iter()
                    .collect::<String>()
                    .to_ascii_lowercase();
                let v = match word.as_str() {
                    "pi" => std::f64::consts::PI,
                    "tau" => std::f64::consts::TAU,
                    "e" => std::f64::consts::E,
                    _ => return Err(Error::Parse(format!("unknown constant `{word}`"))),
                };
                tokens.push(Token::Num(v));
            }
            other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

/// Evaluate a product/quotient of numbers and the constants pi, tau, e,
/// with an optional leading sign, e.g. `-3*pi/4` or `1e-3`.
pub fn parse_expr(text: &str) -> Result<f64> {
    let tokens = tokenize(text)?;
    let mut it = tokens.into_iter().peekable();
    let mut sign = 1.0;
    match it.peek() {
        Some(Token::Minus) => {
            sign = -1.0;
            it.next();
        }
        Some(Token::Plus) => {
            it.next();
        }
        _ => {}
    }
    let mut value = match it.next() {
        Some(Token::Num(v)) => v,
        _ => {
            return Err(Error::Parse(format!(
                "expected a number in `{}`",
                text.trim()
            )))
        }
    };
    while let Some(op) = it.next() {
        let rhs = match it.next() {
            Some(Token::Num(v)) => v,
            _ => {
                return Err(Error::Parse(format!(
                    "dangling operator in `{}`",
                    text.trim()
                )))
            }
        };
        match op {
            Token::Star => value *= rhs,
            Token::Slash => value /= rhs,
            _ => {
                return Err(Error::Parse(format!(
                    "unsupported operator in `{}`",
                    text.trim()
                )))
            }
        }
    }
    let value = sign * value;
    if !value.is_finite() {
        return Err(Error::Parse(format!("`{}` is not finite", text.trim())));
    }
    Ok(value)
}

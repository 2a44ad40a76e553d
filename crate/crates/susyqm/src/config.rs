//! Flat key = value run configuration.
//!
//! One key per line, `#` starts a comment, repeated `seed = eps,nu`
//! lines build the seed list in file order. Numbers are kept as their
//! original decimal strings next to the parsed values so manifests can
//! echo the input byte for byte.

use std::path::PathBuf;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::schrodinger::NuParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Design,
    Verify,
    Algebra,
    Coherent,
    Repro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Iterative,
    Real2,
    Confluent,
    Complex2,
}

#[derive(Debug, Clone)]
pub struct SeedSpec {
    pub eps: Complex64,
    pub nu: NuParam,
    /// original "eps,nu" text for manifest echo
    pub raw: String,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub method: Option<Method>,
    pub seeds: Vec<SeedSpec>,
    pub grid: (f64, f64, usize),
    pub w0: Option<f64>,
    pub x0: f64,
    pub mode: Option<String>,
    pub w: Option<f64>,
    pub out: Option<PathBuf>,
    pub case: Option<String>,
    pub tol: Option<f64>,
    /// every key/value pair in file order, untouched
    pub raw_pairs: Vec<(String, String)>,
}

impl RunConfig {
    /// The input lines as parsed, for deterministic manifests.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.raw_pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// "a", "a+bi", "-bi", "i" and exponent forms of each.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(v) = s.parse::<f64>() {
        return Some(Complex64::new(v, 0.0));
    }
    let body = s.strip_suffix(['i', 'I'])?;
    // split at the sign of the imaginary part, skipping exponent signs
    // and a leading sign
    let bytes = body.as_bytes();
    let mut split = None;
    for pos in (1..bytes.len()).rev() {
        if (bytes[pos] == b'+' || bytes[pos] == b'-')
            && bytes[pos - 1] != b'e'
            && bytes[pos - 1] != b'E'
        {
            split = Some(pos);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(pos) => (&body[..pos], &body[pos..]),
        None => ("", body),
    };
    let re = if re_str.is_empty() { 0.0 } else { re_str.parse::<f64>().ok()? };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

fn parse_nu(s: &str) -> Option<NuParam> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Some(NuParam::Infinite);
    }
    parse_complex(t).map(NuParam::Finite)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::ParseError { line, msg: msg.into() }
}

fn invalid(field: &str, msg: impl Into<String>) -> Error {
    Error::ValidationError { field: field.into(), msg: msg.into() }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("{key} wants a decimal number, got '{v}'")))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    if text.trim().is_empty() {
        return Err(parse_err(0, "empty configuration"));
    }
    let mut command = None;
    let mut method = None;
    let mut seeds = Vec::new();
    let mut grid = None;
    let mut w0 = None;
    let mut x0 = 0.0;
    let mut mode = None;
    let mut w = None;
    let mut out = None;
    let mut case = None;
    let mut tol = None;
    let mut raw_pairs = Vec::new();

    for (idx, full_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match full_line.find('#') {
            Some(p) => &full_line[..p],
            None => full_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(lineno, format!("expected key = value, got '{line}'")))?;
        let key = key.trim();
        let value = value.trim();
        raw_pairs.push((key.to_string(), value.to_string()));
        match key {
            "command" => {
                command = Some(match value {
                    "design" => Command::Design,
                    "verify" => Command::Verify,
                    "algebra" => Command::Algebra,
                    "coherent" => Command::Coherent,
                    "repro" => Command::Repro,
                    other => return Err(invalid("command", format!("unknown command '{other}'"))),
                });
            }
            "method" => {
                method = Some(match value {
                    "iterative" => Method::Iterative,
                    "real2" => Method::Real2,
                    "confluent" => Method::Confluent,
                    "complex2" => Method::Complex2,
                    other => return Err(invalid("method", format!("unknown method '{other}'"))),
                });
            }
            "seed" => {
                let (e, n) = value.split_once(',').ok_or_else(|| {
                    parse_err(lineno, format!("seed wants 'eps,nu', got '{value}'"))
                })?;
                let eps = parse_complex(e)
                    .ok_or_else(|| parse_err(lineno, format!("bad seed energy '{e}'")))?;
                let nu = parse_nu(n)
                    .ok_or_else(|| parse_err(lineno, format!("bad seed nu '{n}'")))?;
                seeds.push(SeedSpec { eps, nu, raw: value.to_string() });
            }
            "grid" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(parse_err(lineno, "grid wants 'xmin,xmax,n'"));
                }
                let xmin = parse_f64(lineno, "grid", parts[0])?;
                let xmax = parse_f64(lineno, "grid", parts[1])?;
                let n: usize = parts[2]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad grid size '{}'", parts[2])))?;
                grid = Some((xmin, xmax, n));
            }
            "w0" => w0 = Some(parse_f64(lineno, "w0", value)?),
            "x0" => x0 = parse_f64(lineno, "x0", value)?,
            "mode" => mode = Some(value.to_string()),
            "w" => w = Some(parse_f64(lineno, "w", value)?),
            "out" => out = Some(PathBuf::from(value)),
            "case" => case = Some(value.to_string()),
            "tol" => tol = Some(parse_f64(lineno, "tol", value)?),
            other => return Err(parse_err(lineno, format!("unknown key '{other}'"))),
        }
    }

    let command = command.ok_or_else(|| invalid("command", "no command line"))?;
    let grid = grid.unwrap_or(match command {
        Command::Verify => (-12.0, 12.0, 4801),
        _ => (-8.0, 8.0, 3201),
    });
    if !(grid.0 < grid.1) || grid.2 < 9 {
        return Err(invalid("grid", format!("unusable grid {grid:?}")));
    }
    if command == Command::Design {
        if seeds.is_empty() {
            return Err(invalid("seed", "design runs need at least one seed"));
        }
        match method {
            None => return Err(invalid("method", "design runs need a method")),
            Some(Method::Real2) if seeds.len() != 2 => {
                return Err(invalid("seed", "real2 takes exactly two seeds"));
            }
            Some(Method::Confluent) => {
                if seeds.len() != 1 {
                    return Err(invalid("seed", "confluent takes exactly one seed"));
                }
                if w0.is_none() {
                    return Err(invalid("w0", "confluent needs w0"));
                }
            }
            Some(Method::Complex2) if seeds.len() != 1 => {
                return Err(invalid("seed", "complex2 takes exactly one seed"));
            }
            _ => {}
        }
    }
    if let Some(m) = &mode {
        if m != "natural" && m != "linearized" {
            return Err(invalid("mode", format!("unknown ladder mode '{m}'")));
        }
        if m == "linearized" && w.is_none() {
            return Err(invalid("w", "linearized mode needs w"));
        }
    }

    Ok(RunConfig {
        command,
        method,
        seeds,
        grid,
        w0,
        x0,
        mode,
        w,
        out,
        case,
        tol,
        raw_pairs,
    })
}

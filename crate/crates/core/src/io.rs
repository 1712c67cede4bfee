//! Text frame files.
//!
//! ```text
//! telet-frame v1 field=complex d=2 N=3
//! # comments start with '#'
//! 1.0000000000000000e0:0.0000000000000000e0,0.0000000000000000e0:0.0000000000000000e0
//! ...
//! ```
//!
//! One line per column, `d` comma-separated entries. Complex entries are
//! written `re:im`; real frames must not contain a `:` part.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Result, TeletError};
use crate::frame::{Field, Frame};

const MAGIC: &str = "telet-frame";
const VERSION: &str = "v1";

pub fn format_frame(frame: &Frame) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{MAGIC} {VERSION} field={} d={} N={}",
        frame.field(),
        frame.d(),
        frame.n()
    );
    for col in frame.columns() {
        for (k, z) in col.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            match frame.field() {
                Field::Real => {
                    let _ = write!(out, "{:.16e}", z.re);
                }
                Field::Complex => {
                    let _ = write!(out, "{:.16e}:{:.16e}", z.re, z.im);
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_frame(frame))?;
    Ok(())
}

pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    parse_frame(&fs::read_to_string(path)?)
}

fn parse_err(line: usize, msg: impl Into<String>) -> TeletError {
    TeletError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(Field, usize, usize)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(parse_err(line_no, format!("expected `{MAGIC}` header")));
    }
    if parts.next() != Some(VERSION) {
        return Err(parse_err(
            line_no,
            format!("unsupported version, expected {VERSION}"),
        ));
    }
    let (mut field, mut d, mut n) = (None, None, None);
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, format!("malformed header token `{kv}`")))?;
        let num = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad integer `{v}` for `{k}`")))
        };
        match k {
            "field" => {
                field = Some(
                    v.parse::<Field>()
                        .map_err(|e| parse_err(line_no, e.to_string()))?,
                )
            }
            "d" => d = Some(num(v)?),
            "N" => n = Some(num(v)?),
            _ => return Err(parse_err(line_no, format!("unknown header key `{k}`"))),
        }
    }
    match (field, d, n) {
        (Some(f), Some(d), Some(n)) => {
            if d == 0 || n < d {
                return Err(parse_err(
                    line_no,
                    format!("invalid dimensions d={d}, N={n}"),
                ));
            }
            Ok((f, d, n))
        }
        _ => Err(parse_err(line_no, "header needs field, d and N")),
    }
}

fn parse_real(line_no: usize, s: &str) -> Result<f64> {
    let v = s
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line_no, format!("bad number `{}`", s.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line_no, "non-finite entry"));
    }
    Ok(v)
}

pub fn parse_frame(text: &str) -> Result<Frame> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty frame file"))?;
    let (field, d, n) = parse_header(hline, header)?;
    let mut data = Vec::with_capacity(d * n);
    let mut cols = 0;
    for (line_no, line) in lines {
        if cols == n {
            return Err(parse_err(line_no, format!("more than N={n} columns")));
        }
        let entries: Vec<&str> = line.split(',').collect();
        if entries.len() != d {
            return Err(parse_err(
                line_no,
                format!("expected {d} entries, found {}", entries.len()),
            ));
        }
        for e in entries {
            let z = match e.split_once(':') {
                Some((re, im)) => {
                    if field == Field::Real {
                        return Err(parse_err(line_no, "imaginary part in a real frame"));
                    }
                    Complex64::new(parse_real(line_no, re)?, parse_real(line_no, im)?)
                }
                None => Complex64::new(parse_real(line_no, e)?, 0.0),
            };
            data.push(z);
        }
        cols += 1;
    }
    if cols != n {
        return Err(parse_err(
            hline,
            format!("header declares N={n} but found {cols} columns"),
        ));
    }
    // unit columns are kept bit for bit, anything else is rescaled
    match Frame::new(field, d, n, data.clone()) {
        Err(TeletError::NotUnitNorm { .. }) => Frame::normalized(field, d, n, data),
        other => other,
    }
}

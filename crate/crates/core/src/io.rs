//! Plain-text formats: vectors, sampled curves, and the CSV tables the CLI emits.

use std::fmt::Write;

use crate::applications::{CurveGrid, ServiceBounds};
use crate::error::{Error, Result};
use crate::tropical::{BoundaryPoint, Line2D, LineKind, TentacleLabel};
use crate::vector::RealVector;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let x: f64 = token
        .parse()
        .map_err(|_| parse_error(line, format!("`{token}` is not a number")))?;
    if !x.is_finite() {
        return Err(parse_error(line, format!("`{token}` is not finite")));
    }
    Ok(x)
}

/// Content lines with comments removed, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Numbers separated by commas and/or whitespace; `#` starts a comment.
pub fn parse_vector(text: &str) -> Result<RealVector> {
    let mut entries = Vec::new();
    for (line, content) in content_lines(text) {
        for token in content.split(|c: char| c == ',' || c.is_whitespace()) {
            if !token.is_empty() {
                entries.push(parse_number(token, line)?);
            }
        }
    }
    RealVector::new(entries)
}

/// One entry per line, in a form [`parse_vector`] reads back exactly.
pub fn format_vector(v: &RealVector) -> String {
    let mut out = String::new();
    for x in v.entries() {
        writeln!(out, "{x}").unwrap();
    }
    out
}

/// Two-column CSV `T,value`; the header line is optional.
pub fn parse_curve_grid(text: &str) -> Result<CurveGrid> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (index, (line, content)) in content_lines(text).enumerate() {
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_error(
                line,
                format!("expected 2 comma-separated fields, found {}", fields.len()),
            ));
        }
        if index == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        times.push(parse_number(fields[0], line)?);
        values.push(parse_number(fields[1], line)?);
    }
    CurveGrid::new(times, values)
}

pub fn format_curve_grid(grid: &CurveGrid) -> String {
    let mut out = String::from("T,value\n");
    for (t, v) in grid.times().iter().zip(grid.values()) {
        writeln!(out, "{t},{v}").unwrap();
    }
    out
}

pub fn format_service_bounds(bounds: &ServiceBounds) -> String {
    let mut out = String::from("T,lower,upper,lower_error,upper_error\n");
    for k in 0..bounds.lower.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            bounds.lower.times()[k],
            bounds.lower.values()[k],
            bounds.upper.values()[k],
            bounds.lower_errors[k],
            bounds.upper_errors[k]
        )
        .unwrap();
    }
    out
}

pub fn format_boundary(points: &[BoundaryPoint]) -> String {
    let mut out = String::from("u,s\n");
    for p in points {
        writeln!(out, "{},{}", p.u, p.s).unwrap();
    }
    out
}

pub fn format_lines(lines: &[Line2D]) -> String {
    let mut out = String::from("kind,slope,intercept,label\n");
    for l in lines {
        let kind = match l.kind {
            LineKind::SlopeIntercept => "slope_intercept",
            LineKind::Vertical => "vertical",
        };
        let label = match l.label {
            TentacleLabel::MaxTentacle => "max_tentacle",
            TentacleLabel::MinTentacle => "min_tentacle",
        };
        writeln!(out, "{kind},{},{},{label}", l.slope, l.intercept).unwrap();
    }
    out
}

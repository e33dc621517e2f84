//! Delimited text input for observations, CSV output for data and grids.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::DensityGrid;

/// Tokens treated as a missing value.
pub const DEFAULT_MISSING: [&str; 5] = ["", "NA", "NaN", "nan", "?"];

/// A row dropped because of missing or short fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRow {
    /// One-based line number in the input.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ParsedData {
    pub dataset: Dataset,
    pub header: Option<Vec<String>>,
    pub skipped: Vec<SkippedRow>,
}

/// How to read a delimited file.
#[derive(Debug, Clone, Default)]
pub struct ReadOptions {
    /// Columns to keep, by header name or one-based index. All when empty.
    pub columns: Vec<String>,
    /// Extra tokens that mark a missing value (e.g. `-200`).
    pub missing_markers: Vec<String>,
}

fn split_line(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else if line.contains(';') {
        line.split(';').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn is_comment_or_blank(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parses one observation per line, comma/semicolon/whitespace separated,
/// with an optional header line. Rows with missing or short fields are
/// skipped and reported by line number; anything else unparsable is an error.
pub fn parse_delimited(text: &str, options: &ReadOptions, context: &str) -> Result<ParsedData> {
    let mut missing: Vec<&str> = DEFAULT_MISSING.to_vec();
    missing.extend(options.missing_markers.iter().map(String::as_str));

    let mut lines = text.lines().enumerate().filter(|(_, l)| !is_comment_or_blank(l)).peekable();
    let header = match lines.peek() {
        Some((_, first)) => {
            let fields = split_line(first);
            if fields.iter().any(|f| !missing.contains(f) && f.parse::<f64>().is_err()) {
                let h = fields.iter().map(|s| s.to_string()).collect();
                lines.next();
                Some(h)
            } else {
                None
            }
        }
        None => None,
    };

    let selected: Option<Vec<usize>> = if options.columns.is_empty() {
        None
    } else {
        Some(
            options
                .columns
                .iter()
                .map(|c| resolve_column(c, header.as_deref(), context))
                .collect::<Result<_>>()?,
        )
    };

    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut d = None;
    let mut skipped = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields = split_line(line);
        let expected = *width.get_or_insert(fields.len());
        if fields.len() < expected {
            skipped.push(SkippedRow {
                line: line_no,
                reason: format!("{} of {expected} fields", fields.len()),
            });
            continue;
        }
        if fields.len() > expected {
            return Err(Error::Parse {
                context: context.into(),
                message: format!("line {line_no}: {} fields, expected {expected}", fields.len()),
            });
        }
        let picked: Vec<&str> = match &selected {
            Some(cols) => cols.iter().map(|&c| fields.get(c).copied().unwrap_or("")).collect(),
            None => fields,
        };
        if let Some(pos) = picked.iter().position(|f| missing.contains(f)) {
            skipped.push(SkippedRow {
                line: line_no,
                reason: format!("missing value in column {}", pos + 1),
            });
            continue;
        }
        let mut row = Vec::with_capacity(picked.len());
        for f in &picked {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                context: context.into(),
                message: format!("line {line_no}: `{f}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    context: context.into(),
                    message: format!("line {line_no}: non-finite value `{f}`"),
                });
            }
            row.push(v);
        }
        d.get_or_insert(row.len());
        values.extend(row);
    }
    let d = d.or(selected.as_ref().map(Vec::len)).or(width).ok_or_else(|| Error::Parse {
        context: context.into(),
        message: "no observations".into(),
    })?;
    Ok(ParsedData {
        dataset: Dataset::new(d, values)?,
        header,
        skipped,
    })
}

fn resolve_column(spec: &str, header: Option<&[String]>, context: &str) -> Result<usize> {
    if let Some(h) = header {
        if let Some(i) = h.iter().position(|name| name == spec) {
            return Ok(i);
        }
    }
    match spec.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i - 1),
        _ => Err(Error::Parse {
            context: context.into(),
            message: format!("unknown column `{spec}`"),
        }),
    }
}

pub fn read_delimited(path: &Path, options: &ReadOptions) -> Result<ParsedData> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_delimited(&text, options, &path.display().to_string())
}

/// Comma-separated, header `y1,...,yd`, values in round-trip precision.
pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = String::new();
    out.push_str(&(1..=data.d()).map(|j| format!("y{j}")).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in data.rows() {
        out.push_str(&row.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Grid CSV: coordinates `x1..xd`, then one column per named value series.
pub fn grid_to_csv(grid: &DensityGrid, extra: &[(&str, &[f64])]) -> String {
    let d = grid.lattice().dim();
    let mut out = String::new();
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.push("density".into());
    header.extend(extra.iter().map(|(name, _)| name.to_string()));
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, v) in grid.values().iter().enumerate() {
        let mut fields: Vec<String> = grid.lattice().point(i).iter().map(|x| format!("{x:e}")).collect();
        fields.push(format!("{v:e}"));
        for (_, series) in extra {
            fields.push(format!("{:e}", series[i]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents).map_err(|e| Error::io(path, e))
}

//! Plain-text serialization for paths and partition sequences.
//!
//! Path CSV: header `t,base,dl,dr`, one row per time, where `base` is the
//! continuous part and `dl`/`dr` the left and right jump parts at that time
//! (0 when absent). Jump times always appear in the time column, so a file
//! round-trips to the identical path. Partition text: one time per line,
//! levels separated by a blank line, coarsest level first.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! f64 exactly and keeps repeated runs byte-identical.

use crate::error::Error;
use crate::paths::{Jump, NestedPartitionSequence, RegulatedPath};
use crate::Result;
use std::fmt::Write as _;

/// 17 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a path in the CSV format. Interior jump times off the grid are
/// inserted, with the base interpolated there, so every jump has a row.
pub fn path_to_csv(path: &RegulatedPath) -> String {
    let jump_times: Vec<f64> = path.jumps().iter().map(|j| j.time).collect();
    let dense = path
        .with_grid_refined(&jump_times)
        .expect("refining a valid path with its own jump times cannot fail");
    let mut out = String::from("t,base,dl,dr\n");
    let jumps = dense.jumps();
    for (i, &t) in dense.grid().iter().enumerate() {
        let (dl, dr) = match jumps.binary_search_by(|j| j.time.total_cmp(&t)) {
            Ok(k) => (jumps[k].left, jumps[k].right),
            Err(_) => (0.0, 0.0),
        };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_float(t),
            format_float(dense.base_values()[i]),
            format_float(dl),
            format_float(dr)
        );
    }
    out
}

fn parse_field(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad float {s:?}"),
    })
}

/// Parses the CSV format back into a path.
pub fn path_from_csv(text: &str) -> Result<RegulatedPath> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((n, l)) => break (n, l),
            None => {
                return Err(Error::Parse { line: 1, msg: "empty path file".into() });
            }
        }
    };
    let normalized: String = header.1.split(',').map(|f| f.trim()).collect::<Vec<_>>().join(",");
    if normalized != "t,base,dl,dr" {
        return Err(Error::Parse {
            line: header.0 + 1,
            msg: format!("expected header t,base,dl,dr, found {:?}", header.1.trim()),
        });
    }
    let mut grid = Vec::new();
    let mut base = Vec::new();
    let mut jumps = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let t = parse_field(fields[0], line)?;
        let b = parse_field(fields[1], line)?;
        let dl = parse_field(fields[2], line)?;
        let dr = parse_field(fields[3], line)?;
        grid.push(t);
        base.push(b);
        if dl != 0.0 || dr != 0.0 {
            jumps.push(Jump::new(t, dl, dr));
        }
    }
    RegulatedPath::new(grid, base, jumps)
}

/// Renders a partition sequence: one time per line, blank line between levels.
pub fn partition_to_text(seq: &NestedPartitionSequence) -> String {
    let mut out = String::new();
    for (m, level) in seq.levels().iter().enumerate() {
        if m > 0 {
            out.push('\n');
        }
        for &t in level {
            out.push_str(&format_float(t));
            out.push('\n');
        }
    }
    out
}

/// Parses the partition text format.
pub fn partition_from_text(text: &str) -> Result<NestedPartitionSequence> {
    let mut levels: Vec<Vec<f64>> = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            if !current.is_empty() {
                levels.push(std::mem::take(&mut current));
            }
            continue;
        }
        current.push(parse_field(trimmed, line)?);
    }
    if !current.is_empty() {
        levels.push(current);
    }
    if levels.is_empty() {
        return Err(Error::Parse { line: 1, msg: "empty partition file".into() });
    }
    NestedPartitionSequence::from_levels(levels)
}

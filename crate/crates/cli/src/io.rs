//! File formats: CSV designs with `NA` for missing cells, single-column
//! response files, edge-list graphs, coefficient lists.

use std::fs;
use std::io::Write;
use std::path::Path;

use missreg::{ImputedMatrix, MaskedMatrix, SparsityGraph};
use nalgebra::DVector;

use crate::error::CliError;

/// The only missing-value marker.
pub const NA: &str = "NA";

/// A design as read from disk. Raw tokens are kept so observed cells can be
/// written back byte for byte.
#[derive(Debug, Clone)]
pub struct DesignCsv {
    pub header: Vec<String>,
    pub tokens: Vec<Vec<String>>,
    pub matrix: MaskedMatrix,
}

fn unreadable(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::UnreadableInput(format!("{}: {msg}", path.display()))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, CliError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| unreadable(path, e))
}

fn parse_cell(path: &Path, token: &str, row: usize, col: usize) -> Result<Option<f64>, CliError> {
    let t = token.trim();
    if t == NA {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(unreadable(
            path,
            format!(
                "row {}, column {}: '{token}' is neither a finite number nor {NA}",
                row + 1,
                col + 1
            ),
        )),
    }
}

/// Read a design with a header row. Cells are numbers or `NA`; an empty cell
/// is an error.
pub fn read_design(path: &Path) -> Result<DesignCsv, CliError> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| unreadable(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut tokens = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| unreadable(path, e))?;
        let mut row = Vec::with_capacity(rec.len());
        for (j, tok) in rec.iter().enumerate() {
            row.push(parse_cell(path, tok, i, j)?);
        }
        tokens.push(rec.iter().map(str::to_owned).collect());
        rows.push(row);
    }
    if rows.is_empty() || header.is_empty() {
        return Err(unreadable(path, "no data rows"));
    }
    let matrix = MaskedMatrix::from_rows(&rows)?;
    Ok(DesignCsv {
        header,
        tokens,
        matrix,
    })
}

/// Read a complete design; any `NA` is reported as a missing entry.
pub fn read_dense_design(path: &Path) -> Result<ImputedMatrix, CliError> {
    let csv = read_design(path)?;
    let z = &csv.matrix;
    for i in 0..z.nrows() {
        for j in 0..z.ncols() {
            if !z.is_observed(i, j) {
                return Err(missreg::Error::MissingEntry { row: i, col: j }.into());
            }
        }
    }
    let data = nalgebra::DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| z.observed(i, j).unwrap_or(0.0));
    Ok(ImputedMatrix::complete(data)?)
}

/// Read a one-column response file with a header.
pub fn read_response(path: &Path) -> Result<DVector<f64>, CliError> {
    let mut rdr = reader(path)?;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| unreadable(path, e))?;
        if rec.len() != 1 {
            return Err(unreadable(
                path,
                format!("row {}: expected one column, found {}", i + 1, rec.len()),
            ));
        }
        match parse_cell(path, &rec[0], i, 0)? {
            Some(v) => values.push(v),
            None => {
                return Err(unreadable(
                    path,
                    format!("row {}: response may not be {NA}", i + 1),
                ))
            }
        }
    }
    if values.is_empty() {
        return Err(unreadable(path, "no data rows"));
    }
    Ok(DVector::from_vec(values))
}

/// Default column names `x0, x1, ...`.
pub fn column_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

/// Write a masked matrix, `NA` for missing cells. `{}` on `f64` prints the
/// shortest string that parses back to the same value.
pub fn write_masked(path: &Path, z: &MaskedMatrix, header: &[String]) -> Result<(), CliError> {
    write_rows(path, header, z.nrows(), |i, j| match z.observed(i, j) {
        Some(v) => v.to_string(),
        None => NA.to_owned(),
    })
}

/// Write an imputed design. Cells observed in `source` keep their original
/// token; imputed cells are formatted fresh.
pub fn write_imputed(path: &Path, source: &DesignCsv, imputed: &ImputedMatrix) -> Result<(), CliError> {
    let data = imputed.data();
    write_rows(path, &source.header, data.nrows(), |i, j| {
        if source.matrix.is_observed(i, j) {
            source.tokens[i][j].clone()
        } else {
            data[(i, j)].to_string()
        }
    })
}

fn write_rows(
    path: &Path,
    header: &[String],
    n: usize,
    cell: impl Fn(usize, usize) -> String,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for i in 0..n {
        let row: Vec<String> = (0..header.len()).map(|j| cell(i, j)).collect();
        w.write_record(&row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_response(path: &Path, y: &DVector<f64>) -> Result<(), CliError> {
    let mut out = String::from("y\n");
    for v in y.iter() {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn write_coefficients(path: &Path, beta: &DVector<f64>) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    for v in beta.iter() {
        writeln!(f, "{v}").map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

/// `p=<count>` followed by one `i j` line per edge, 0-based. Blank lines and
/// lines starting with `#` are skipped.
pub fn read_graph(path: &Path) -> Result<SparsityGraph, CliError> {
    let text = fs::read_to_string(path).map_err(|e| unreadable(path, e))?;
    parse_graph(&text).map_err(|m| unreadable(path, m))
}

pub fn parse_graph(text: &str) -> Result<SparsityGraph, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, head) = lines.next().ok_or("empty graph file")?;
    let p: usize = head
        .strip_prefix("p=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| format!("expected header 'p=<count>', found '{head}'"))?;
    let mut edges = Vec::new();
    for (k, line) in lines {
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
            _ => return Err(format!("line {k}: expected 'i j', found '{line}'")),
        }
    }
    SparsityGraph::from_edges(p, edges).map_err(|e| e.to_string())
}

pub fn format_graph(graph: &SparsityGraph) -> String {
    let mut out = format!("p={}\n", graph.p());
    for (a, b) in graph.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

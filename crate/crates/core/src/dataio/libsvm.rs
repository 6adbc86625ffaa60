//! LIBSVM text format: `<label> <index>:<value> ...` with 1-based indices.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use super::{CsrMatrix, Dataset, Features};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parse LIBSVM text. `#` starts a comment. Labels in `{0, 1}` or `{1, 2}`
/// are mapped to `{−1, +1}`. The dimension is the largest index seen unless
/// `dim` is given.
pub fn parse_libsvm<R: BufRead>(reader: R, dim: Option<usize>, provenance: &str) -> Result<Dataset> {
    let mut raw_labels: Vec<(f64, usize)> = Vec::new();
    let mut m = CsrMatrix { indptr: vec![0], ..Default::default() };
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let label: f64 = label.parse().map_err(|_| parse_err(lineno, format!("unparsable label '{label}'")))?;
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| parse_err(lineno, format!("malformed token '{tok}'")))?;
            let idx: usize = idx.parse().map_err(|_| parse_err(lineno, format!("unparsable index in '{tok}'")))?;
            let val: f64 = val.parse().map_err(|_| parse_err(lineno, format!("unparsable value in '{tok}'")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(lineno, "non-increasing index"));
            }
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value in '{tok}'")));
            }
            last = idx;
            m.indices.push(idx - 1);
            m.values.push(val);
        }
        max_index = max_index.max(last);
        m.indptr.push(m.indices.len());
        raw_labels.push((label, lineno));
    }
    m.ncols = match dim {
        Some(d) if d < max_index => {
            return Err(Error::InvalidArgument(format!("dimension {d} is smaller than the largest index {max_index}")))
        }
        Some(d) => d,
        None => max_index,
    };
    let labels = normalize_labels(&raw_labels)?;
    Ok(Dataset { labels, features: Features::Sparse(m), provenance: provenance.to_string() })
}

fn normalize_labels(raw: &[(f64, usize)]) -> Result<Vec<f64>> {
    let within = |set: &[f64]| raw.iter().all(|(l, _)| set.contains(l));
    let map: fn(f64) -> f64 = if within(&[-1.0, 1.0]) {
        |l| l
    } else if within(&[0.0, 1.0]) {
        |l| if l == 0.0 { -1.0 } else { 1.0 }
    } else if within(&[1.0, 2.0]) {
        |l| if l == 1.0 { -1.0 } else { 1.0 }
    } else {
        let (l, line) = raw.iter().find(|(l, _)| ![-1.0, 0.0, 1.0, 2.0].contains(l)).copied().unwrap_or(raw[0]);
        return Err(parse_err(line, format!("label {l} is outside the supported binary schemes")));
    };
    Ok(raw.iter().map(|(l, _)| map(*l)).collect())
}

/// Read a LIBSVM file; `.gz` files are decompressed.
pub fn load_libsvm(path: &Path, dim: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::DataMissing(path.display().to_string()),
        _ => Error::Io(e),
    })?;
    let name = path.display().to_string();
    if path.extension().is_some_and(|e| e == "gz") {
        parse_libsvm(BufReader::new(GzDecoder::new(file)), dim, &name)
    } else {
        parse_libsvm(BufReader::new(file), dim, &name)
    }
}

/// Write explicit (nonzero) entries; values use shortest round-trip form.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    let csr = ds.features.to_csr();
    for i in 0..ds.n() {
        write!(w, "{}", if ds.labels[i] > 0.0 { "+1" } else { "-1" })?;
        for (j, v) in csr.row(i) {
            write!(w, " {}:{}", j + 1, v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

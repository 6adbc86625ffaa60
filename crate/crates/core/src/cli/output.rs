//! CSV emission. Floats use Rust's shortest round-trip formatting, so equal
//! runs give equal bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::ialm::{SolveResult, TraceRecord};

pub const TRACE_HEADER: &str = "outer_k,inner_t,data_passes,pres,dres,al_value,beta,y_norm,wall_ms";
pub const SUMMARY_HEADER: &str =
    "trial,seed,status,pres,dres,data_passes,outer_iterations,inner_iterations,oracle_calls,original_pres,wall_ms";
pub const SCALING_HEADER: &str = "eps,oracle_total,outer_iterations,pres,dres,fitted_slope";

pub fn write_trace<W: Write>(mut w: W, trace: &[TraceRecord]) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.outer_k, r.inner_t, r.data_passes, r.pres, r.dres, r.al_value, r.beta, r.y_norm, r.wall_ms
        )?;
    }
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_trace(&mut w, trace)?;
    w.flush()?;
    Ok(())
}

/// `<stem>.trial<i>.<ext>` next to `path`.
pub fn trial_path(path: &Path, trial: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.trial{trial}.{}", ext.to_string_lossy()),
        None => format!("{stem}.trial{trial}"),
    };
    path.with_file_name(name)
}

/// One row of the summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub trial: usize,
    pub seed: u64,
    pub status: String,
    pub pres: f64,
    pub dres: f64,
    pub data_passes: f64,
    pub outer_iterations: usize,
    pub inner_iterations: u64,
    pub oracle_calls: u64,
    pub original_pres: Option<f64>,
    pub wall_ms: u64,
}

impl RunSummary {
    pub fn new(trial: usize, seed: u64, r: &SolveResult, wall_ms: u64) -> Self {
        Self {
            trial,
            seed,
            status: r.status.as_str().to_string(),
            pres: r.pres,
            dres: r.dres,
            data_passes: r.data_passes,
            outer_iterations: r.outer_iterations,
            inner_iterations: r.inner_iterations,
            oracle_calls: r.oracle_calls,
            original_pres: r.original_pres,
            wall_ms,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.seed,
            self.status,
            self.pres,
            self.dres,
            self.data_passes,
            self.outer_iterations,
            self.inner_iterations,
            self.oracle_calls,
            self.original_pres.map_or(String::new(), |v| v.to_string()),
            self.wall_ms
        )
    }
}

pub fn write_summary<W: Write>(mut w: W, rows: &[RunSummary]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Human-readable table of `rows`.
pub fn summary_table(rows: &[RunSummary]) -> String {
    let mut s = format!(
        "{:>5} {:>20} {:>10} {:>11} {:>11} {:>9} {:>6} {:>9}\n",
        "trial", "seed", "status", "pres", "dres", "#data", "outer", "wall_ms"
    );
    for r in rows {
        s += &format!(
            "{:>5} {:>20} {:>10} {:>11.3e} {:>11.3e} {:>9.3} {:>6} {:>9}\n",
            r.trial, r.seed, r.status, r.pres, r.dres, r.data_passes, r.outer_iterations, r.wall_ms
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_paths() {
        assert_eq!(trial_path(Path::new("out/trace.csv"), 3), PathBuf::from("out/trace.trial3.csv"));
        assert_eq!(trial_path(Path::new("trace"), 0), PathBuf::from("trace.trial0"));
    }

    #[test]
    fn trace_header_and_rows() {
        let r = TraceRecord {
            outer_k: 1,
            inner_t: 50,
            data_passes: 0.5,
            pres: 1e-3,
            dres: 0.25,
            al_value: -1.0,
            beta: 2.0,
            y_norm: 0.0,
            wall_ms: 7,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &[r]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{TRACE_HEADER}\n1,50,0.5,0.001,0.25,-1,2,0,7\n"));
    }
}

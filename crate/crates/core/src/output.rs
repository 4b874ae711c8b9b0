//! Number formatting and sweep-table emission.
//!
//! A sweep writes `<name>.csv`, optionally `<name>.gp` (a gnuplot script that
//! reads only the CSV) and always `<name>.provenance.json`. The timestamp
//! lives only in the sidecar so the CSV is byte-stable across runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sweep::SweepTable;

/// Format a float with 17 significant digits, `NaN`/`inf` spelled out.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Plot,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s.trim() {
            "csv" => Some(Format::Csv),
            "plot" | "gnuplot" | "plot-script" => Some(Format::Plot),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("the sweep has no quantities to write")]
    EmptyQuantities,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serializing provenance: {0}")]
    Json(#[from] serde_json::Error),
}

fn write(path: &Path, text: &str) -> Result<(), OutputError> {
    std::fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// gnuplot program for `table`, reading `csv_name` from the script's
/// directory.
pub fn plot_script(table: &SweepTable, csv_name: &str) -> String {
    let spec = &table.provenance.spec;
    let n_axes = spec.axes.len();
    // quantity columns start after the axes and the n_b column
    let first_q = n_axes + 1;
    let mut s = String::new();
    let _ = writeln!(s, "# {} sweep; run with: gnuplot -p {}.gp", spec.name, spec.name);
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile missing 'NaN'");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "data = {}", quote(csv_name));
    match n_axes {
        1 => {
            let axis = &spec.axes[0];
            if axis.is_log() {
                let _ = writeln!(s, "set logscale x");
            }
            let _ = writeln!(s, "set xlabel {}", quote(&axis.path));
            let parts: Vec<String> = (first_q..table.columns.len())
                .map(|c| {
                    format!(
                        "data skip 1 using 1:{} with lines title {}",
                        c + 1,
                        quote(&table.columns[c])
                    )
                })
                .collect();
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        _ => {
            let (outer, inner) = (&spec.axes[0], &spec.axes[1]);
            let (m, n) = (inner.len(), outer.len());
            if n <= 8 {
                // a family of curves, one per outer value
                if inner.is_log() {
                    let _ = writeln!(s, "set logscale x");
                }
                let _ = writeln!(s, "set xlabel {}", quote(&inner.path));
                let _ = writeln!(s, "set ylabel {}", quote(&table.columns[first_q]));
                let _ = writeln!(
                    s,
                    "plot for [i=0:{}] data skip 1 every ::(i*{m})::(i*{m}+{}) using 2:{} with lines title sprintf('{} block %d', i)",
                    n - 1,
                    m - 1,
                    first_q + 1,
                    outer.path
                );
            } else {
                let _ = writeln!(s, "set view map");
                let _ = writeln!(s, "set xlabel {}", quote(&outer.path));
                let _ = writeln!(s, "set ylabel {}", quote(&inner.path));
                let _ = writeln!(s, "set cblabel {}", quote(&table.columns[first_q]));
                let _ = writeln!(
                    s,
                    "splot data skip 1 using 1:2:{} with points pointtype 5 pointsize 0.5 palette notitle",
                    first_q + 1
                );
            }
        }
    }
    s
}

/// Write the requested files for `table` into `dir` and return their paths.
pub fn emit_outputs(table: &SweepTable, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, OutputError> {
    if table.provenance.spec.quantities.is_empty() {
        return Err(OutputError::EmptyQuantities);
    }
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let name = &table.provenance.spec.name;
    let csv_name = format!("{name}.csv");
    let mut written = Vec::new();
    if formats.contains(&Format::Csv) {
        let path = dir.join(&csv_name);
        write(&path, &table.to_csv())?;
        written.push(path);
    }
    if formats.contains(&Format::Plot) {
        let path = dir.join(format!("{name}.gp"));
        write(&path, &plot_script(table, &csv_name))?;
        written.push(path);
    }
    let path = dir.join(format!("{name}.provenance.json"));
    write(&path, &serde_json::to_string_pretty(&table.provenance)?)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn non_finite() {
        assert_eq!(fmt_float(f64::NAN), "NaN");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
    }

    #[test]
    fn format_names() {
        assert_eq!(Format::parse("csv"), Some(Format::Csv));
        assert_eq!(Format::parse("plot"), Some(Format::Plot));
        assert_eq!(Format::parse("png"), None);
    }
}

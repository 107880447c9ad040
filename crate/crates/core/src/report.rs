//! CSV output shared by all reports.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// `<dir>/<experiment>_<tag>_<value>.csv`.
pub fn report_path(dir: &Path, experiment: &str, tag: &str, value: f64) -> PathBuf {
    dir.join(format!("{experiment}_{tag}_{value}.csv"))
}

pub(crate) fn write_rows<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Implemented by every report with a fixed CSV layout.
pub trait CsvReport {
    fn write_csv<W: Write>(&self, w: W) -> Result<()>;

    fn save_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.write_csv(File::create(path)?)
    }
}

pub(crate) fn num(x: f64) -> String {
    x.to_string()
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

//! CSV emission and the one CSV reader the tool needs.
//!
//! All floats are written with 17 significant digits (`{:.16e}`), enough
//! to round-trip an f64 exactly; the decimal separator is always '.'.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Full-precision float cell.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV file with a header row, written cell-by-cell.
pub struct Csv {
    out: BufWriter<File>,
}

impl Csv {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a spectrum CSV with (at least) columns `k` and `e_k`, as written
/// by this tool or produced synthetically, returning the two columns.
pub fn read_spectrum_csv(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read spectrum file {}", path.display()))?;
    let mut lines = text.lines();
    let header = match lines.next() {
        Some(h) => h,
        None => bail!("spectrum file {} is empty", path.display()),
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let k_col = names.iter().position(|&n| n == "k");
    let e_col = names.iter().position(|&n| n == "e_k");
    let (k_col, e_col) = match (k_col, e_col) {
        (Some(a), Some(b)) => (a, b),
        _ => bail!(
            "spectrum file {} must have 'k' and 'e_k' columns, found: {header}",
            path.display()
        ),
    };
    let mut ks = Vec::new();
    let mut es = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() <= k_col.max(e_col) {
            bail!("line {} of {} is too short", i + 2, path.display());
        }
        let k: usize = cells[k_col]
            .parse()
            .with_context(|| format!("bad shell index on line {}", i + 2))?;
        let e: f64 = cells[e_col]
            .parse()
            .with_context(|| format!("bad energy value on line {}", i + 2))?;
        ks.push(k);
        es.push(e);
    }
    if ks.is_empty() {
        bail!("spectrum file {} has no data rows", path.display());
    }
    Ok((ks, es))
}

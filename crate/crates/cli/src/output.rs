use std::io::Write;
use std::path::{Path, PathBuf};

use rallyshap::forecast::{load_model, Model};
use rallyshap::rally::Rally;
use rallyshap::synthdata::load_csv;
use serde::Serialize;

use crate::error::{io_err, CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))
}

fn require_file(path: &Path) -> CliResult<()> {
    std::fs::metadata(path).map(|_| ()).map_err(io_err(format!("reading {}", path.display())))
}

pub fn read_dataset(path: &Path) -> CliResult<Vec<Rally>> {
    require_file(path)?;
    let rallies = load_csv(path)?;
    if rallies.is_empty() {
        return Err(rallyshap::Error::EmptyDataset.into());
    }
    Ok(rallies)
}

pub fn read_model(path: &Path) -> CliResult<Model> {
    require_file(path)?;
    Ok(load_model(path)?)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<PathBuf> {
    std::fs::write(path, text).map_err(io_err(format!("writing {}", path.display())))?;
    Ok(path.to_path_buf())
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> CliResult<PathBuf> {
    let file = std::fs::File::create(path).map_err(io_err(format!("writing {}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(io_err(format!("writing {}", path.display())))?;
    }
    w.flush().map_err(io_err(format!("writing {}", path.display())))?;
    Ok(path.to_path_buf())
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(CliError::from))
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<PathBuf> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(format!("writing {}", path.display())))?;
    Ok(path.to_path_buf())
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Left-aligned plain-text table.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

pub fn num(x: f64) -> String {
    format!("{x:.6}")
}

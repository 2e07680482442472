//! Report files: built in memory, written once at the end of a command.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Default)]
pub struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
    }

    /// RFC 4180 table.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        for r in rows {
            w.write_record(r).expect("in-memory write");
        }
        self.files.insert(name.to_string(), w.into_inner().expect("in-memory flush"));
    }

    /// Two whitespace-separated columns for plotting.
    pub fn dat(&mut self, name: &str, comment: &str, points: &[(f64, f64)]) {
        let mut s = format!("# {comment}\n");
        for (x, y) in points {
            s.push_str(&format!("{} {}\n", num(*x), num(*y)));
        }
        self.files.insert(name.to_string(), s.into_bytes());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    /// Writes every file via a temporary sibling and a rename.
    pub fn write_all(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            {
                let mut f = fs::File::create(&tmp)?;
                f.write_all(bytes)?;
                f.sync_all()?;
            }
            fs::rename(&tmp, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Shortest round-trip representation; `NaN`/`inf` spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        x.to_string()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

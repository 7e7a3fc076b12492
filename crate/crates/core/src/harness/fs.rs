//! File access for the CLI, with a log of every path opened.
//!
//! Commands go through [`AuditedFs`] so tests can assert which files a
//! command touched, for example that recovery never reads ground truth
//! unless asked to.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{io, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
}

#[derive(Debug, Default)]
pub struct AuditedFs {
    log: Mutex<Vec<(Access, PathBuf)>>,
}

impl AuditedFs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every access so far, in order.
    pub fn accesses(&self) -> Vec<(Access, PathBuf)> {
        self.log.lock().unwrap().clone()
    }

    pub fn opened_for_read(&self) -> Vec<PathBuf> {
        self.accesses()
            .into_iter()
            .filter(|(a, _)| *a == Access::Read)
            .map(|(_, p)| p)
            .collect()
    }

    fn record(&self, access: Access, path: &Path) {
        self.log.lock().unwrap().push((access, path.to_path_buf()));
    }

    pub fn open(&self, path: &Path) -> Result<BufReader<File>> {
        self.record(Access::Read, path);
        File::open(path)
            .map(BufReader::new)
            .map_err(|e| Error::io(path, e))
    }

    pub fn create(&self, path: &Path) -> Result<BufWriter<File>> {
        self.record(Access::Write, path);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        File::create(path)
            .map(BufWriter::new)
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_to_string(&self, path: &Path) -> Result<String> {
        let mut s = String::new();
        self.open(path)?
            .read_to_string(&mut s)
            .map_err(|e| Error::io(path, e))?;
        Ok(s)
    }

    pub fn read_json<T: DeserializeOwned>(&self, path: &Path) -> Result<T> {
        let text = self.read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn write_json<T: Serialize>(&self, path: &Path, value: &T) -> Result<()> {
        let mut w = self.create(path)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_string(&self, path: &Path, text: &str) -> Result<()> {
        let mut w = self.create(path)?;
        w.write_all(text.as_bytes())
            .map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a graph; `.sgrb` files are binary, anything else is text.
    pub fn read_graph(&self, path: &Path) -> Result<Graph> {
        let reader = self.open(path)?;
        if is_binary(path) {
            io::read_binary(reader, path)
        } else {
            io::read_text(reader, path)
        }
    }

    pub fn write_graph(&self, path: &Path, g: &Graph) -> Result<()> {
        let writer = self.create(path)?;
        if is_binary(path) {
            io::write_binary(g, writer)
        } else {
            io::write_text(g, writer)
        }
        .map_err(|e| Error::io(path, e))
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "sgrb")
}

/// `<dir>/<name>.truth.json`.
pub fn truth_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.truth.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs_reads_and_writes() {
        let dir = tempfile::tempdir().unwrap();
        let fs = AuditedFs::new();
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let text = dir.path().join("g.txt");
        let bin = dir.path().join("sub/g.sgrb");
        fs.write_graph(&text, &g).unwrap();
        fs.write_graph(&bin, &g).unwrap();
        assert_eq!(fs.read_graph(&text).unwrap(), g);
        assert_eq!(fs.read_graph(&bin).unwrap(), g);
        assert_eq!(fs.opened_for_read(), vec![text.clone(), bin.clone()]);
        assert_eq!(fs.accesses().len(), 4);
        assert!(fs.read_graph(&dir.path().join("missing.txt")).is_err());
    }
}

//! Completed-instance journal that lets long runs resume.
//!
//! The journal sits next to the CSV as `<out>.journal`, one instance id per
//! line, appended after the instance's rows are flushed.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub struct Journal {
    path: PathBuf,
    done: HashSet<String>,
    file: File,
}

pub fn journal_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".journal");
    PathBuf::from(s)
}

impl Journal {
    /// Opens the journal for `out`; without `resume` it starts empty.
    pub fn open(out: &Path, resume: bool) -> Result<Journal> {
        let path = journal_path(out);
        let mut done = HashSet::new();
        if resume && path.exists() {
            let f = File::open(&path).map_err(|e| CliError::io(&path, e))?;
            for line in BufReader::new(f).lines() {
                let line = line.map_err(|e| CliError::io(&path, e))?;
                if !line.is_empty() {
                    done.insert(line);
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(resume)
            .write(true)
            .truncate(!resume)
            .open(&path)
            .map_err(|e| CliError::io(&path, e))?;
        Ok(Journal { path, done, file })
    }

    pub fn is_done(&self, id: &str) -> bool {
        self.done.contains(id)
    }

    pub fn len(&self) -> usize {
        self.done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.done.is_empty()
    }

    pub fn mark(&mut self, id: &str) -> Result<()> {
        writeln!(self.file, "{id}")
            .and_then(|_| self.file.flush())
            .map_err(|e| CliError::io(&self.path, e))?;
        self.done.insert(id.to_string());
        Ok(())
    }
}

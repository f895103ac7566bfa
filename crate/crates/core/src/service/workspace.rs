use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::evaluation::ExpertRating;
use crate::model::{load_workbook_bytes, LoadError, Workbook};
use crate::policy::{AnalysisRun, Scenario};

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error(transparent)]
    Io(#[from] io::Error),
    /// A stored document no longer parses.
    #[error("stored document {path} is corrupt: {detail}")]
    Corrupt { path: PathBuf, detail: String },
    #[error(transparent)]
    Workbook(#[from] LoadError),
    #[error("invalid id {0:?}")]
    InvalidId(String),
}

/// Replaces every character outside `[A-Za-z0-9._-]` with `-` and strips
/// leading dots, so the result is safe as a single path component.
pub fn slugify(text: &str) -> String {
    let slug: String = text
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' })
        .collect();
    slug.trim_start_matches('.').to_string()
}

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 200 && slugify(id) == id
}

/// Weak content tag for optimistic concurrency on stored documents.
pub fn etag(bytes: &[u8]) -> String {
    format!("\"{}\"", hex::encode(&Sha256::digest(bytes)[..8]))
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never observe a partial document.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// On-disk state of the service: `scenarios/`, `workbooks/`, `runs/` and
/// `ratings/` below one root, all plain JSON except uploaded workbooks.
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<(T, Vec<u8>)>, WorkspaceError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let value = serde_json::from_slice(&bytes).map_err(|e| WorkspaceError::Corrupt {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    Ok(Some((value, bytes)))
}

fn list_stems(dir: &Path, extension: &str) -> io::Result<Vec<String>> {
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(extension) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

impl Workspace {
    /// Opens a workspace, creating its directories if needed.
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        for sub in ["scenarios", "workbooks", "runs", "ratings"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn file(&self, dir: &str, id: &str) -> Result<PathBuf, WorkspaceError> {
        if !is_valid_id(id) {
            return Err(WorkspaceError::InvalidId(id.to_string()));
        }
        Ok(self.root.join(dir).join(format!("{id}.json")))
    }

    /// The scenario and its entity tag.
    pub fn read_scenario(&self, id: &str) -> Result<Option<(Scenario, String)>, WorkspaceError> {
        Ok(read_json(&self.file("scenarios", id)?)?.map(|(s, bytes)| (s, etag(&bytes))))
    }

    /// Stores the scenario and returns its new entity tag.
    pub fn write_scenario(&self, id: &str, scenario: &Scenario) -> Result<String, WorkspaceError> {
        let bytes = scenario.to_json_pretty().into_bytes();
        write_atomic(&self.file("scenarios", id)?, &bytes)?;
        Ok(etag(&bytes))
    }

    pub fn delete_scenario(&self, id: &str) -> Result<bool, WorkspaceError> {
        match fs::remove_file(self.file("scenarios", id)?) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(false),
            Err(e) => Err(e.into()),
        }
    }

    pub fn list_scenarios(&self) -> Result<Vec<(String, Scenario)>, WorkspaceError> {
        let mut out = Vec::new();
        for id in list_stems(&self.root.join("scenarios"), "json")? {
            if let Some((s, _)) = self.read_scenario(&id)? {
                out.push((id, s));
            }
        }
        Ok(out)
    }

    /// Decodes and stores an uploaded workbook. The id is the slug of the
    /// id the loader assigns (the fixture's own id or the file name); a
    /// later upload with the same id replaces the earlier one.
    pub fn store_workbook(&self, filename: &str, bytes: &[u8]) -> Result<Workbook, WorkspaceError> {
        let filename = slugify(filename);
        if filename.is_empty() {
            return Err(WorkspaceError::InvalidId(filename));
        }
        let mut book = load_workbook_bytes(bytes, &filename, None)?;
        let id = slugify(&book.id);
        if !is_valid_id(&id) {
            return Err(WorkspaceError::InvalidId(book.id));
        }
        let dir = self.root.join("workbooks").join(&id);
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join(&filename), bytes)?;
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.file_name().and_then(|n| n.to_str()) != Some(filename.as_str()) {
                let _ = fs::remove_file(path);
            }
        }
        book.id = id;
        Ok(book)
    }

    pub fn load_workbook(&self, id: &str) -> Result<Option<Workbook>, WorkspaceError> {
        if !is_valid_id(id) {
            return Err(WorkspaceError::InvalidId(id.to_string()));
        }
        let dir = self.root.join("workbooks").join(id);
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        for entry in entries {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
                continue;
            };
            if name.starts_with('.') {
                continue;
            }
            let mut book = load_workbook_bytes(&fs::read(&path)?, &name, None)?;
            book.id = id.to_string();
            return Ok(Some(book));
        }
        Ok(None)
    }

    pub fn list_workbooks(&self) -> Result<Vec<String>, WorkspaceError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join("workbooks"))? {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn write_run(&self, run: &AnalysisRun) -> Result<(), WorkspaceError> {
        let bytes = serde_json::to_vec_pretty(run).expect("run serializes");
        write_atomic(&self.file("runs", &run.run_id)?, &bytes)?;
        Ok(())
    }

    pub fn read_run(&self, id: &str) -> Result<Option<AnalysisRun>, WorkspaceError> {
        Ok(read_json(&self.file("runs", id)?)?.map(|(r, _)| r))
    }

    pub fn list_runs(&self) -> Result<Vec<String>, WorkspaceError> {
        Ok(list_stems(&self.root.join("runs"), "json")?)
    }

    pub fn write_ratings(&self, workbook_id: &str, ratings: &[ExpertRating]) -> Result<(), WorkspaceError> {
        let bytes = serde_json::to_vec_pretty(ratings).expect("ratings serialize");
        write_atomic(&self.file("ratings", workbook_id)?, &bytes)?;
        Ok(())
    }

    pub fn read_ratings(&self, workbook_id: &str) -> Result<Option<Vec<ExpertRating>>, WorkspaceError> {
        Ok(read_json(&self.file("ratings", workbook_id)?)?.map(|(r, _)| r))
    }
}

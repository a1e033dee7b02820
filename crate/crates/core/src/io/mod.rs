//! Text formats: terms, corpora, automata, pictures, transform parameters
//! and predicate models.

mod corpus;
mod files;
mod text;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::term::TypeError;

pub use corpus::{
    parse_corpus, read_corpus, scene_template, write_corpus, write_corpus_text, CollageCorpus, CollageRecord, Corpus,
    SceneCorpus,
};
pub use files::{
    parse_dfa, parse_models, parse_params, parse_picture, transforms_of, write_dfa, write_models, write_params,
    write_picture,
};
pub use text::parse_term;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: {source}")]
    Type {
        line: usize,
        #[source]
        source: TypeError,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Nonblank lines that are not `#` comments, numbered from 1.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

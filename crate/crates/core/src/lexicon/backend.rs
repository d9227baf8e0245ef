use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure to obtain a translation for one word.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("translation service unavailable: {0}")]
    Unavailable(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Source of word translations.
///
/// `Ok(None)` means the backend has no translation for the word. The
/// returned text is raw: it may be a phrase.
pub trait TranslationBackend {
    fn translate(&mut self, word: &str) -> Result<Option<String>, BackendError>;

    /// Whether a translation for `word` can be produced without a billable
    /// request.
    fn is_cached(&self, _word: &str) -> bool {
        false
    }
}

impl<B: TranslationBackend + ?Sized> TranslationBackend for Box<B> {
    fn translate(&mut self, word: &str) -> Result<Option<String>, BackendError> {
        (**self).translate(word)
    }

    fn is_cached(&self, word: &str) -> bool {
        (**self).is_cached(word)
    }
}

/// In-memory lookup table.
#[derive(Clone, Debug, Default)]
pub struct StaticTable {
    entries: HashMap<String, String>,
}

impl StaticTable {
    pub fn new<S: Into<String>, T: Into<String>>(entries: impl IntoIterator<Item = (S, T)>) -> Self {
        StaticTable {
            entries: entries.into_iter().map(|(s, t)| (s.into(), t.into())).collect(),
        }
    }

    /// Reads `source<TAB>translation` lines. Translations may contain
    /// spaces. Later lines override earlier ones.
    pub fn read<R: BufRead>(r: R) -> io::Result<Self> {
        let mut entries = HashMap::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (s, t) = line.split_once('\t').ok_or_else(|| {
                io::Error::new(io::ErrorKind::InvalidData, format!("line {}: missing tab", i + 1))
            })?;
            entries.insert(s.to_owned(), t.to_owned());
        }
        Ok(StaticTable { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TranslationBackend for StaticTable {
    fn translate(&mut self, word: &str) -> Result<Option<String>, BackendError> {
        Ok(self.entries.get(word).cloned())
    }
}

/// Append-only on-disk cache in front of another backend.
///
/// Each answered lookup becomes one `source<TAB>translation` line; a word
/// the backend has no translation for is stored with an empty translation.
/// Backend errors are not cached.
pub struct CachedBackend<B> {
    inner: B,
    path: PathBuf,
    memo: HashMap<String, Option<String>>,
}

impl<B: TranslationBackend> CachedBackend<B> {
    pub fn open(inner: B, path: impl Into<PathBuf>) -> io::Result<Self> {
        let path = path.into();
        let mut memo = HashMap::new();
        match File::open(&path) {
            Ok(f) => {
                for line in BufReader::new(f).lines() {
                    let line = line?;
                    // a torn final line from an interrupted append has no tab
                    if let Some((s, t)) = line.split_once('\t') {
                        let t = (!t.is_empty()).then(|| t.to_owned());
                        memo.insert(s.to_owned(), t);
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(CachedBackend { inner, path, memo })
    }

    pub fn cached_len(&self) -> usize {
        self.memo.len()
    }

    pub fn into_inner(self) -> B {
        self.inner
    }

    fn append(&self, word: &str, translation: Option<&str>) -> io::Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{word}\t{}", translation.unwrap_or(""))
    }
}

impl<B: TranslationBackend> TranslationBackend for CachedBackend<B> {
    fn translate(&mut self, word: &str) -> Result<Option<String>, BackendError> {
        if let Some(hit) = self.memo.get(word) {
            return Ok(hit.clone());
        }
        let answer = self.inner.translate(word)?;
        // tabs or newlines would corrupt the cache line
        let answer = answer.map(|t| t.replace(['\t', '\n', '\r'], " "));
        self.append(word, answer.as_deref())?;
        self.memo.insert(word.to_owned(), answer.clone());
        Ok(answer)
    }

    fn is_cached(&self, word: &str) -> bool {
        self.memo.contains_key(word)
    }
}

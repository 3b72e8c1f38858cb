//! Paths: dot-separated sequences of keys and 0-based array indices.

use std::fmt;

/// One path step: an object key or an array index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathSeg {
    Key(String),
    Index(usize),
}

/// A path into a d-value.  The empty path is valid and denotes the value
/// itself.  Surface syntax writes paths dot-separated; a segment consisting
/// solely of ASCII digits is an index ("albums.0" is the first album).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    segments: Vec<PathSeg>,
}

impl Path {
    pub fn empty() -> Path {
        Path { segments: Vec::new() }
    }

    pub fn from_segments(segments: Vec<PathSeg>) -> Path {
        Path { segments }
    }

    /// A single-key path.
    pub fn key(k: impl Into<String>) -> Path {
        Path { segments: vec![PathSeg::Key(k.into())] }
    }

    /// Parses dot notation.  Empty input is the empty path; empty segments
    /// (leading/trailing/double dots) are rejected.
    pub fn parse(text: &str) -> Result<Path, String> {
        if text.is_empty() {
            return Ok(Path::empty());
        }
        let mut segments = Vec::new();
        for part in text.split('.') {
            if part.is_empty() {
                return Err(format!("empty path segment in {text:?}"));
            }
            if part.bytes().all(|b| b.is_ascii_digit()) {
                let idx: usize = part
                    .parse()
                    .map_err(|_| format!("index segment out of range in {text:?}"))?;
                segments.push(PathSeg::Index(idx));
            } else {
                segments.push(PathSeg::Key(part.to_string()));
            }
        }
        Ok(Path { segments })
    }

    pub fn segments(&self) -> &[PathSeg] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_index_free(&self) -> bool {
        self.segments.iter().all(|s| matches!(s, PathSeg::Key(_)))
    }

    /// The first segment's key, if the path starts with a key.
    pub fn head_key(&self) -> Option<&str> {
        match self.segments.first() {
            Some(PathSeg::Key(k)) => Some(k),
            _ => None,
        }
    }

    /// The path without its first segment.
    pub fn tail(&self) -> Path {
        Path { segments: self.segments.iter().skip(1).cloned().collect() }
    }

    /// `self` followed by `rest`.
    pub fn join(&self, rest: &Path) -> Path {
        let mut segments = self.segments.clone();
        segments.extend(rest.segments.iter().cloned());
        Path { segments }
    }

    /// Prefix test; every path is a prefix of itself and ε of everything.
    pub fn is_prefix_of(&self, other: &Path) -> bool {
        self.segments.len() <= other.segments.len()
            && self.segments == other.segments[..self.segments.len()]
    }

    /// All prefixes, from ε to the path itself.
    pub fn prefixes(&self) -> Vec<Path> {
        (0..=self.segments.len())
            .map(|n| Path { segments: self.segments[..n].to_vec() })
            .collect()
    }

    /// Compatibility with a set of paths: none of them is a prefix or an
    /// extension of `self`.  Extension membership is the inverse prefix
    /// test, so no infinite set is materialized.
    pub fn is_compatible_with<'a>(&self, paths: impl IntoIterator<Item = &'a Path>) -> bool {
        paths
            .into_iter()
            .all(|q| !q.is_prefix_of(self) && !self.is_prefix_of(q))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.is_empty() {
            return f.write_str("ε");
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match seg {
                PathSeg::Key(k) => f.write_str(k)?,
                PathSeg::Index(n) => write!(f, "{n}")?,
            }
        }
        Ok(())
    }
}

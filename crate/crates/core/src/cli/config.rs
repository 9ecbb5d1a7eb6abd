//! Flat `key = value` config files and run manifests.
//!
//! A manifest is written in the same format, so it can be passed back with
//! `--config` to repeat a run. Lines starting with `#` are comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Display};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    /// Value and 1-based line of each key.
    entries: BTreeMap<String, (String, u64)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: None,
                line: Some(line_no),
                message,
            };
            let Some((k, v)) = line.split_once('=') else {
                return Err(err(format!("expected `key = value`, found {line:?}")));
            };
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            if entries.insert(key.clone(), (v.trim().to_string(), line_no)).is_some() {
                return Err(err(format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { path: None, entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| e.with_path(path))?;
        cfg.path = Some(path.to_path_buf());
        Ok(cfg)
    }

    fn parse_error(&self, key: &str, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.entries.get(key).map(|e| e.1),
            message,
        }
    }
}

/// Comma-separated list value, e.g. `100,200`. Empty means no entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(List(Vec::new()));
        }
        s.split(',')
            .map(|p| p.trim().parse::<T>().map_err(|e| format!("bad list entry {p:?}: {e}")))
            .collect::<std::result::Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Merges flags, config file entries and defaults, recording every
/// effective value for the manifest.
pub struct Resolver<'a> {
    file: Option<&'a ConfigFile>,
    seen: BTreeSet<String>,
    values: Vec<(String, String)>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: Option<&'a ConfigFile>) -> Self {
        Self {
            file,
            seen: BTreeSet::new(),
            values: Vec::new(),
        }
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let Some(file) = self.file else { return Ok(None) };
        match file.entries.get(key) {
            None => Ok(None),
            Some((v, _)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| file.parse_error(key, format!("bad value {v:?} for {key}: {e}"))),
        }
    }

    fn record<T: Display>(&mut self, key: &str, value: &T) {
        self.seen.insert(key.to_string());
        self.values.push((key.to_string(), value.to_string()));
    }

    /// Flag, then file entry, then `default`.
    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Like [`get`](Self::get) without a default: a missing value is a usage
    /// error naming the flag.
    pub fn require<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self
                .from_file(key)?
                .ok_or_else(|| Error::InvalidConfig(format!("missing required --{key}")))?,
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Optional value without a default; recorded only when present.
    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        self.seen.insert(key.to_string());
        if let Some(v) = &v {
            self.values.push((key.to_string(), v.to_string()));
        }
        Ok(v)
    }

    /// Rejects file keys the command never asked for and returns the
    /// effective values in resolution order.
    pub fn finish(self) -> Result<Vec<(String, String)>> {
        if let Some(file) = self.file {
            if let Some(key) = file.entries.keys().find(|k| !self.seen.contains(*k)) {
                return Err(file.parse_error(key, format!("unknown key {key:?}")));
            }
        }
        Ok(self.values)
    }
}

/// A run manifest: the command, result comments and every effective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub comments: Vec<(String, String)>,
    pub values: Vec<(String, String)>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = format!("# acan {} run manifest\n", self.command);
        for (k, v) in &self.comments {
            s += &format!("# {k} = {v}\n");
        }
        for (k, v) in &self.values {
            s += &format!("{k} = {v}\n");
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

/// `<out>.manifest` next to a command's main output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

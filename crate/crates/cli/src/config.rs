//! `key=value` config files, run manifests and flag/config resolution.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parsed `key=value` lines in file order. Repeated keys are kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: Vec<(String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r').trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config: line {}: expected key=value", i + 1))?;
            let k = k.trim();
            if k.is_empty() {
                bail!("config: line {}: empty key", i + 1);
            }
            entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("config: cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("config: in {}", path.display()))
    }

    /// Last value for `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }
}

/// Merges flags over an optional config file for one command. Flags win.
pub struct Resolver {
    command: &'static str,
    config: Option<Config>,
    known: BTreeSet<String>,
}

impl Resolver {
    pub fn new(command: &'static str, config_path: Option<&Path>) -> Result<Self> {
        let config = config_path.map(Config::load).transpose()?;
        if let Some(cfg) = &config {
            if let Some(c) = cfg.get("command") {
                if c != command {
                    bail!("config: file was written by `{c}`, not `{command}`");
                }
            }
        }
        Ok(Self {
            command,
            config,
            known: BTreeSet::new(),
        })
    }

    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.known.insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.as_ref().and_then(|c| c.get(key)) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("{}: config key {key}: {e}", self.command)),
            None => Ok(None),
        }
    }

    pub fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt(key, flag)?
            .ok_or_else(|| anyhow!("{}: missing required --{key}", self.command))
    }

    /// Repeatable flag: flags replace the config's list entirely.
    pub fn list(&mut self, key: &str, flags: Vec<PathBuf>) -> Vec<PathBuf> {
        self.known.insert(key.to_string());
        if !flags.is_empty() {
            return flags;
        }
        self.config
            .as_ref()
            .map(|c| c.get_all(key).into_iter().map(PathBuf::from).collect())
            .unwrap_or_default()
    }

    /// Rejects config keys no flag consumed. Manifest bookkeeping keys
    /// (`command`, `tool_version`, `input.*`, `result.*`) are allowed.
    pub fn finish(&self) -> Result<()> {
        let Some(cfg) = &self.config else {
            return Ok(());
        };
        for k in cfg.keys() {
            let bookkeeping = k == "command"
                || k == "tool_version"
                || k.starts_with("input.")
                || k.starts_with("result.");
            if !bookkeeping && !self.known.contains(k) {
                bail!("{}: unknown config key {k:?}", self.command);
            }
        }
        Ok(())
    }

    /// Warns when an input's digest differs from the one the config recorded.
    pub fn check_digest(&self, name: &str, digest: &str) {
        let key = format!("input.{name}.sha256");
        if let Some(recorded) = self.config.as_ref().and_then(|c| c.get(&key)) {
            if recorded != digest {
                eprintln!(
                    "warning: {}: input {name} differs from the recorded run (sha256 {recorded} vs {digest})",
                    self.command
                );
            }
        }
    }
}

/// Ordered `key=value` record written next to a command's primary output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self {
            entries: Vec::new(),
        };
        m.push("command", command);
        m.push("tool_version", TOOL_VERSION);
        m
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn path(&mut self, key: &str, p: &Path) {
        self.push(key, p.display());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Writes to `<primary>.manifest` and returns that path.
    pub fn write_next_to(&self, primary: &Path) -> Result<PathBuf> {
        let path = manifest_path(primary);
        write_atomic(&path, self.render().as_bytes())?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_skips_comments_and_keeps_repeats() {
        let c = Config::parse("# hi\na=1\n\nb = two words \na=3\r\n").unwrap();
        assert_eq!(c.get("a"), Some("3"));
        assert_eq!(c.get("b"), Some("two words"));
        assert_eq!(c.get_all("a"), vec!["1", "3"]);
        assert!(Config::parse("novalue\n").is_err());
        assert!(Config::parse("=x\n").is_err());
    }

    #[test]
    fn value_may_contain_equals() {
        let c = Config::parse("path=a=b\n").unwrap();
        assert_eq!(c.get("path"), Some("a=b"));
    }

    #[test]
    fn manifest_round_trips_through_config() {
        let mut m = Manifest::new("train");
        m.push("alpha", 0.1);
        m.push("epsilon", 1e-10);
        let c = Config::parse(&m.render()).unwrap();
        assert_eq!(c.get("command"), Some("train"));
        assert_eq!(c.get("alpha").unwrap().parse::<f64>().unwrap(), 0.1);
        assert_eq!(c.get("epsilon").unwrap().parse::<f64>().unwrap(), 1e-10);
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("out/t.csv")),
            PathBuf::from("out/t.csv.manifest")
        );
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}

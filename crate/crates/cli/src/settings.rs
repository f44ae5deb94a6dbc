use crate::CliError;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Values from an optional `key = value` file. Flags win over the file and
/// the file wins over built-in defaults.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            file.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { file })
    }

    fn raw(&self, flag: Option<&str>, key: &str) -> Option<String> {
        flag.map(str::to_string).or_else(|| self.file.get(key).cloned())
    }

    /// Flag, then file, then `default`.
    pub fn get<T: FromStr>(&self, flag: Option<&str>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn opt<T: FromStr>(&self, flag: Option<&str>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(flag, key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("--{key} {v:?}: {e}"))))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, flag: Option<&str>, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(flag, key)?.ok_or_else(|| CliError::Usage(format!("missing --{key}")))
    }

    /// Comma-separated list; empty when absent.
    pub fn list<T: FromStr>(&self, flag: Option<&str>, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(flag, key) {
            None => Ok(Vec::new()),
            Some(v) => parse_list(&v).map_err(|e| CliError::Usage(format!("--{key}: {e}"))),
        }
    }

    pub fn list_or<T: FromStr>(&self, flag: Option<&str>, key: &str, default: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(flag, key) {
            None => parse_list(default).map_err(CliError::Usage),
            Some(_) => self.list(flag, key),
        }
    }

    /// A switch set by the flag or by `key = true` in the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        self.get(None, key, false)
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

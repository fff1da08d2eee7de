//! Layered settings: a flat `key = value` file, then command-line flags,
//! then `DEFEMBED_<KEY>` environment variables, each overriding the last.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const ENV_PREFIX: &str = "DEFEMBED_";

#[derive(Clone, Debug, Default)]
pub struct Layers {
    file: BTreeMap<String, String>,
    env: BTreeMap<String, String>,
}

/// Parses `key = value` lines. Blank lines and `#` comments are ignored;
/// keys are case-insensitive and may use `-` or `_`.
pub fn parse_file(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{origin}:{}: expected `key = value`", i + 1);
        };
        let key = normalize_key(key.trim());
        if key.is_empty() {
            bail!("{origin}:{}: empty key", i + 1);
        }
        if out.insert(key.clone(), value.trim().to_owned()).is_some() {
            bail!("{origin}:{}: duplicate key `{key}`", i + 1);
        }
    }
    Ok(out)
}

fn normalize_key(key: &str) -> String {
    key.to_ascii_lowercase().replace('-', "_")
}

impl Layers {
    /// Reads the optional config file and the process environment.
    pub fn load(config: Option<&Path>) -> Result<Self> {
        let env: Vec<(String, String)> = std::env::vars().collect();
        let file = match config {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?,
            None => String::new(),
        };
        let origin = config.map(|p| p.display().to_string()).unwrap_or_default();
        Layers::from_parts(&file, &origin, env)
    }

    pub fn from_parts(
        file_text: &str,
        origin: &str,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let env = env
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|k| (normalize_key(k), v)))
            .collect();
        Ok(Layers {
            file: parse_file(file_text, origin)?,
            env,
        })
    }

    /// The raw winning value for `key` and where it came from.
    fn raw(&self, key: &str, flag: Option<String>) -> Option<(String, String)> {
        if let Some(v) = self.env.get(key) {
            return Some((v.clone(), format!("{ENV_PREFIX}{}", key.to_ascii_uppercase())));
        }
        if let Some(v) = flag {
            return Some((v, format!("--{}", key.replace('_', "-"))));
        }
        self.file
            .get(key)
            .map(|v| (v.clone(), format!("config key `{key}`")))
    }

    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + ToString,
        T::Err: Display,
    {
        match self.raw(key, flag.map(|f| f.to_string())) {
            None => Ok(None),
            Some((v, src)) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("{src}: invalid value `{v}`: {e}")),
        }
    }

    pub fn get_or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + ToString,
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + ToString,
        T::Err: Display,
    {
        self.get(key, flag)?.with_context(|| {
            format!(
                "missing `{key}`: pass --{} or set it in the config file or {ENV_PREFIX}{}",
                key.replace('_', "-"),
                key.to_ascii_uppercase()
            )
        })
    }

    /// Comma-separated list; an explicit empty value clears it.
    pub fn list(&self, key: &str, flag: Vec<String>) -> Vec<String> {
        let flag = (!flag.is_empty()).then(|| flag.join(","));
        match self.raw(key, flag) {
            None => Vec::new(),
            Some((v, _)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect(),
        }
    }
}

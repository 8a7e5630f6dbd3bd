//! Flat `key=value` configuration files. Every key mirrors a CLI flag of
//! the same name; flags win over file values.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, Default)]
pub struct FileConfig(pub BTreeMap<String, String>);

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                );
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|s| s.as_str())
    }
}

/// Parse `RE,IM` into a complex number.
pub fn parse_complex(s: &str) -> Result<num_complex::Complex64> {
    let (re, im) = s
        .split_once(',')
        .with_context(|| format!("expected RE,IM; got {s:?}"))?;
    Ok(num_complex::Complex64::new(
        re.trim().parse().context("real part")?,
        im.trim().parse().context("imaginary part")?,
    ))
}

/// Parse `a,b` into an ordered pair.
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .with_context(|| format!("expected MIN,MAX; got {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

/// Parse `NxM` grid dimensions.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("expected NxM; got {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

/// Parse a comma-separated integer list.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(Into::into))
        .collect()
}

/// Parse `NAME=VAL` tolerance overrides.
pub fn parse_tol(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .with_context(|| format!("expected NAME=VAL; got {s:?}"))?;
    Ok((name.trim().to_string(), value.trim().parse()?))
}

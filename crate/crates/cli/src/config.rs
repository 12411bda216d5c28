//! Flat `key = value` configuration files with `[section]` headers.
//!
//! Keys before the first header belong to the unnamed section `""`. `#` and
//! `;` start a comment at the beginning of a line or after whitespace. Every key must be consumed by the command; a
//! leftover key is reported as unknown.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct Config {
    /// `(section, key) -> (line, value)`.
    entries: BTreeMap<(String, String), (usize, String)>,
    used: std::cell::RefCell<std::collections::BTreeSet<(String, String)>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Usage(format!("config line {}: unterminated section header", i + 1)))?;
                section = name.trim().to_owned();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            let key = (section.clone(), k.trim().to_owned());
            if entries.insert(key, (i + 1, v.trim().to_owned())).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key {}", i + 1, field(&section, k.trim()))));
            }
        }
        Ok(Self { entries, used: Default::default() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))?;
        Self::parse(&text)
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        let k = (section.to_owned(), key.to_owned());
        let v = self.entries.get(&k)?;
        self.used.borrow_mut().insert(k);
        Some(v.1.as_str())
    }

    /// Parsed value or `default`; a malformed value names its field.
    pub fn get<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, CliError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                let line = self.entries[&(section.to_owned(), key.to_owned())].0;
                CliError::Usage(format!("config line {line}: invalid value {v:?} for {}", field(section, key)))
            }),
        }
    }

    pub fn invalid(&self, section: &str, key: &str, why: &str) -> CliError {
        CliError::Usage(format!("config field {}: {why}", field(section, key)))
    }

    /// Fails on the first key no command read.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some(((s, k), (line, _))) => Err(CliError::Usage(format!("config line {line}: unknown field {}", field(s, k)))),
            None => Ok(()),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut prev_space = true;
    for (i, ch) in line.char_indices() {
        if prev_space && (ch == '#' || ch == ';') {
            return &line[..i];
        }
        prev_space = ch.is_whitespace();
    }
    line
}

fn field(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_owned()
    } else {
        format!("{section}.{key}")
    }
}

/// `a:b:step` (inclusive), a comma list, or a single value.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || b < a {
            return Err(format!("bad range {text:?}"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + step * i as f64).collect());
    }
    text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
}

/// `a-b` (inclusive), a comma list, or a mix of both.
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("not an integer: {s:?}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if b < a {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_unknown_keys() {
        let c = Config::parse("seed = 3\n# c\n[game]\nruns=10\n; x\nbogus = 1\n").unwrap();
        assert_eq!(c.get::<u64>("", "seed", 0).unwrap(), 3);
        assert_eq!(c.get::<u64>("game", "runs", 0).unwrap(), 10);
        assert_eq!(c.get::<u64>("game", "missing", 7).unwrap(), 7);
        let err = c.finish().unwrap_err().to_string();
        assert!(err.contains("game.bogus"), "{err}");
    }

    #[test]
    fn inline_comments() {
        let c = Config::parse("[grid]   # sweep\nt0 = 60,90 # seconds\nlabel = a#b\n").unwrap();
        assert_eq!(c.raw("grid", "t0"), Some("60,90"));
        assert_eq!(c.raw("grid", "label"), Some("a#b"));
    }

    #[test]
    fn bad_value_names_field() {
        let c = Config::parse("[machine]\nsampling_rate = fast\n").unwrap();
        let err = c.get::<f64>("machine", "sampling_rate", 1.0).unwrap_err().to_string();
        assert!(err.contains("machine.sampling_rate"), "{err}");
        assert!(Config::parse("[x\n").is_err());
        assert!(Config::parse("a=1\na=2\n").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_f64_list("60:180:15").unwrap().len(), 9);
        assert_eq!(parse_f64_list("30:300:10").unwrap().len(), 28);
        assert_eq!(parse_f64_list("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_u64_list("1-3,8").unwrap(), vec![1, 2, 3, 8]);
        assert!(parse_u64_list("3-1").is_err());
    }
}

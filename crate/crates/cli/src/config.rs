//! Experiment configuration: UTF-8 `key = value` lines grouped under
//! `[section]` headers. Complex values are written as `re,im` pairs and
//! lists are whitespace-separated. Errors carry the offending line number.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

/// One `[section]` worth of keys.
#[derive(Debug, Default)]
pub struct Section {
    name: String,
    entries: BTreeMap<String, (String, usize)>,
}

impl Section {
    pub fn name(&self) -> &str {
        &self.name
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, line)| (v.as_str(), *line))
    }

    pub fn str(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key)
            .map(|(v, _)| v)
            .ok_or_else(|| err(0, format!("[{}] is missing key '{key}'", self.name)))
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).map_or(default, |(v, _)| v)
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let (raw, line) = self
            .get(key)
            .ok_or_else(|| err(0, format!("[{}] is missing key '{key}'", self.name)))?;
        raw.parse()
            .map_err(|_| err(line, format!("'{raw}' is not a number for key '{key}'")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((raw, line)) => raw
                .parse()
                .map_err(|_| err(line, format!("'{raw}' is not an integer for key '{key}'"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(("true", _)) => Ok(true),
            Some(("false", _)) => Ok(false),
            Some((raw, line)) => Err(err(line, format!("'{raw}' is not true/false for '{key}'"))),
        }
    }

    pub fn complex(&self, key: &str) -> Result<Complex64, ConfigError> {
        let (raw, line) = self
            .get(key)
            .ok_or_else(|| err(0, format!("[{}] is missing key '{key}'", self.name)))?;
        parse_complex(raw, line)
    }

    pub fn complex_or(&self, key: &str, default: Complex64) -> Result<Complex64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.complex(key),
        }
    }

    /// Whitespace-separated list of `re,im` pairs.
    pub fn complex_list(&self, key: &str) -> Result<Vec<Complex64>, ConfigError> {
        let (raw, line) = self
            .get(key)
            .ok_or_else(|| err(0, format!("[{}] is missing key '{key}'", self.name)))?;
        raw.split_whitespace()
            .map(|item| parse_complex(item, line))
            .collect()
    }

    /// Whitespace-separated list of reals.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let (raw, line) = self
            .get(key)
            .ok_or_else(|| err(0, format!("[{}] is missing key '{key}'", self.name)))?;
        raw.split_whitespace()
            .map(|item| {
                item.parse()
                    .map_err(|_| err(line, format!("'{item}' is not a number in '{key}'")))
            })
            .collect()
    }
}

fn parse_complex(raw: &str, line: usize) -> Result<Complex64, ConfigError> {
    let (re, im) = raw
        .split_once(',')
        .ok_or_else(|| err(line, format!("'{raw}' is not a re,im pair")))?;
    let re = re
        .trim()
        .parse()
        .map_err(|_| err(line, format!("bad real part in '{raw}'")))?;
    let im = im
        .trim()
        .parse()
        .map_err(|_| err(line, format!("bad imaginary part in '{raw}'")))?;
    Ok(Complex64::new(re, im))
}

#[derive(Debug, Default)]
pub struct Config {
    sections: Vec<Section>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(stripped) = line.strip_prefix('[') {
                let name = stripped
                    .strip_suffix(']')
                    .ok_or_else(|| err(line_no, "unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(err(line_no, "empty section name"));
                }
                config.sections.push(Section {
                    name: name.to_string(),
                    entries: BTreeMap::new(),
                });
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, "expected 'key = value'"))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(err(line_no, "empty key"));
            }
            let section = config
                .sections
                .last_mut()
                .ok_or_else(|| err(line_no, "key outside any [section]"))?;
            if section
                .entries
                .insert(key.clone(), (value.trim().to_string(), line_no))
                .is_some()
            {
                return Err(err(line_no, format!("duplicate key '{key}'")));
            }
        }
        Ok(config)
    }

    pub fn section(&self, name: &str) -> Result<&Section, ConfigError> {
        self.sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| err(0, format!("missing [{name}] section")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_values() {
        let text = "# comment\n[figure]\nfamily = example2-approx\ngamma = 1,0\ntaus = 0,0 0.5,0\nn_theta = 8\n";
        let config = Config::parse(text).unwrap();
        let s = config.section("figure").unwrap();
        assert_eq!(s.str("family").unwrap(), "example2-approx");
        assert_eq!(s.complex("gamma").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(s.complex_list("taus").unwrap().len(), 2);
        assert_eq!(s.usize_or("n_theta", 0).unwrap(), 8);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "[flow]\nz0 = nonsense\n";
        let config = Config::parse(text).unwrap();
        let e = config.section("flow").unwrap().complex("z0").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn rejects_keys_outside_sections() {
        let e = Config::parse("stray = 1\n").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn rejects_duplicates() {
        let e = Config::parse("[a]\nx = 1\nx = 2\n").unwrap_err();
        assert_eq!(e.line, 3);
    }
}

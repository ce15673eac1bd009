//! Flat key-value configuration files with `[section]` headers.
//!
//! Values are numbers, space-separated number lists, or double-quoted
//! expression strings in the model grammar. Unknown sections and keys are
//! errors, reported with a `section.key` path.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use effact::model::ModelSpec;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub mass_expr: String,
    pub potential_expr: String,
    pub hbar: f64,
    pub domain: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub struct GridConfig {
    pub horizon: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct BumpConfig {
    pub x0: f64,
    pub amplitude: f64,
    pub scales: Vec<f64>,
    /// Optional per-scale amplitudes (same length as `scales`); when absent
    /// every scale uses `amplitude`.
    pub amplitudes: Option<Vec<f64>>,
}

impl BumpConfig {
    pub fn amplitude_for(&self, index: usize) -> f64 {
        match &self.amplitudes {
            Some(list) => list[index],
            None => self.amplitude,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitConfig {
    pub x0: f64,
    pub xdot0: f64,
}

#[derive(Debug, Clone)]
pub struct MapConfig {
    /// Forward map expression; the symbol `x` stands for the new coordinate.
    pub expr: String,
    pub y_lo: f64,
    pub y_hi: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub sweep: Option<SweepConfig>,
    pub bump: Option<BumpConfig>,
    pub orbit: Option<OrbitConfig>,
    pub map: Option<MapConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let sections = split_sections(text)?;
        let mut known = vec!["model", "grid", "sweep", "bump", "orbit", "map"];
        for name in sections.keys() {
            if !known.contains(&name.as_str()) {
                return err(format!("unknown section [{name}]"));
            }
        }
        known.clear();

        let model = {
            let s = sections
                .get("model")
                .ok_or_else(|| ConfigError("missing [model] section".into()))?;
            check_keys("model", s, &["mass", "potential", "hbar", "domain_lo", "domain_hi"])?;
            ModelConfig {
                mass_expr: get_expr(s, "model", "mass")?,
                potential_expr: get_expr(s, "model", "potential")?,
                hbar: get_number(s, "model", "hbar")?,
                domain: (
                    get_number(s, "model", "domain_lo")?,
                    get_number(s, "model", "domain_hi")?,
                ),
            }
        };

        let grid = {
            let s = sections
                .get("grid")
                .ok_or_else(|| ConfigError("missing [grid] section".into()))?;
            check_keys("grid", s, &["horizon", "points"])?;
            let points = get_number(s, "grid", "points")?;
            if points.fract() != 0.0 || points < 16.0 {
                return err(format!("grid.points: need an integer >= 16, got {points}"));
            }
            GridConfig { horizon: get_number(s, "grid", "horizon")?, points: points as usize }
        };

        let sweep = match sections.get("sweep") {
            None => None,
            Some(s) => {
                check_keys("sweep", s, &["lo", "hi", "samples"])?;
                let samples = get_number(s, "sweep", "samples")?;
                if samples.fract() != 0.0 || samples < 2.0 {
                    return err(format!("sweep.samples: need an integer >= 2, got {samples}"));
                }
                Some(SweepConfig {
                    lo: get_number(s, "sweep", "lo")?,
                    hi: get_number(s, "sweep", "hi")?,
                    samples: samples as usize,
                })
            }
        };

        let bump = match sections.get("bump") {
            None => None,
            Some(s) => {
                check_keys("bump", s, &["x0", "amplitude", "scales", "amplitudes"])?;
                let scales = get_list(s, "bump", "scales")?;
                if scales.is_empty() {
                    return err("bump.scales: need at least one value");
                }
                let amplitudes = match s.get("amplitudes") {
                    None => None,
                    Some(_) => {
                        let list = get_list(s, "bump", "amplitudes")?;
                        if list.len() != scales.len() {
                            return err(format!(
                                "bump.amplitudes: {} values do not match {} scales",
                                list.len(),
                                scales.len()
                            ));
                        }
                        Some(list)
                    }
                };
                Some(BumpConfig {
                    x0: get_number(s, "bump", "x0")?,
                    amplitude: get_number(s, "bump", "amplitude")?,
                    scales,
                    amplitudes,
                })
            }
        };

        let orbit = match sections.get("orbit") {
            None => None,
            Some(s) => {
                check_keys("orbit", s, &["x0", "xdot0"])?;
                Some(OrbitConfig {
                    x0: get_number(s, "orbit", "x0")?,
                    xdot0: get_number(s, "orbit", "xdot0")?,
                })
            }
        };

        let map = match sections.get("map") {
            None => None,
            Some(s) => {
                check_keys("map", s, &["expr", "y_lo", "y_hi", "samples"])?;
                let samples = match s.get("samples") {
                    None => 257.0,
                    Some(_) => get_number(s, "map", "samples")?,
                };
                if samples.fract() != 0.0 || samples < 2.0 {
                    return err(format!("map.samples: need an integer >= 2, got {samples}"));
                }
                Some(MapConfig {
                    expr: get_expr(s, "map", "expr")?,
                    y_lo: get_number(s, "map", "y_lo")?,
                    y_hi: get_number(s, "map", "y_hi")?,
                    samples: samples as usize,
                })
            }
        };

        Ok(RunConfig { model, grid, sweep, bump, orbit, map })
    }

    /// Build the model, with optional command-line overrides applied first.
    pub fn build_spec(
        &self,
        hbar_override: Option<f64>,
    ) -> Result<ModelSpec, effact::Error> {
        let hbar = hbar_override.unwrap_or(self.model.hbar);
        ModelSpec::parse(
            &self.model.mass_expr,
            &self.model.potential_expr,
            hbar,
            self.model.domain,
        )
    }
}

type Section = BTreeMap<String, String>;

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return err(format!("line {}: malformed section header `{raw}`", lineno + 1));
            };
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return err(format!("line {}: duplicate section [{name}]", lineno + 1));
            }
            sections.insert(name.clone(), Section::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1));
        };
        let Some(section) = &current else {
            return err(format!("line {}: `{raw}` appears before any [section]", lineno + 1));
        };
        let key = key.trim().to_string();
        let entry = sections.get_mut(section).expect("section exists");
        if entry.contains_key(&key) {
            return err(format!("line {}: duplicate key {section}.{key}", lineno + 1));
        }
        entry.insert(key, value.trim().to_string());
    }
    Ok(sections)
}

fn strip_comment(line: &str) -> &str {
    // '#' starts a comment unless inside a quoted string
    let mut in_string = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

fn check_keys(section: &str, entries: &Section, allowed: &[&str]) -> Result<(), ConfigError> {
    for key in entries.keys() {
        if !allowed.contains(&key.as_str()) {
            return err(format!("unknown key {section}.{key}"));
        }
    }
    Ok(())
}

fn get_raw<'a>(entries: &'a Section, section: &str, key: &str) -> Result<&'a str, ConfigError> {
    entries
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| ConfigError(format!("missing {section}.{key}")))
}

fn get_number(entries: &Section, section: &str, key: &str) -> Result<f64, ConfigError> {
    let raw = get_raw(entries, section, key)?;
    raw.parse::<f64>()
        .map_err(|_| ConfigError(format!("{section}.{key}: `{raw}` is not a number")))
}

fn get_list(entries: &Section, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
    let raw = get_raw(entries, section, key)?;
    raw.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| ConfigError(format!("{section}.{key}: `{tok}` is not a number")))
        })
        .collect()
}

fn get_expr(entries: &Section, section: &str, key: &str) -> Result<String, ConfigError> {
    let raw = get_raw(entries, section, key)?;
    let trimmed = raw.trim();
    let Some(inner) = trimmed.strip_prefix('"').and_then(|s| s.strip_suffix('"')) else {
        return err(format!("{section}.{key}: expression must be double-quoted, got `{raw}`"));
    };
    Ok(inner.to_string())
}

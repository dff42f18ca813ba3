//! Sectioned `key = value` manifests describing one complex object.
//!
//! ```text
//! # comment
//! [object]
//! name = Sample image
//! date = 2001-06-15
//! source = Local
//!
//! [subdocument]
//! location = scissors.bmp
//! keywords = scissors, black, white
//! ```

use thiserror::Error;

use crate::extract::{MediaKind, SourceSpec, SourceType, ViewMode};
use crate::model::IsoDate;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("manifest line {line}: {message}")]
pub struct ManifestError {
    /// 1-based; 0 for problems with the manifest as a whole.
    pub line: usize,
    pub message: String,
}

fn error<T>(line: usize, message: impl Into<String>) -> Result<T, ManifestError> {
    Err(ManifestError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub name: String,
    pub date: IsoDate,
    pub source: String,
    pub subdocuments: Vec<SourceSpec>,
}

const OBJECT_KEYS: &[&str] = &["name", "date", "source"];
const SUBDOCUMENT_KEYS: &[&str] = &[
    "location",
    "type",
    "language",
    "keywords",
    "view_mode",
    "query",
    "duration",
    "speed",
    "kind",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionKind {
    Object,
    Subdocument,
}

struct Section {
    kind: SectionKind,
    line: usize,
    entries: Vec<(usize, String, String)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(line, _, v)| (*line, v.as_str()))
    }

    /// A value that is present and non-empty.
    fn value(&self, key: &str) -> Option<(usize, &str)> {
        self.get(key).filter(|(_, v)| !v.is_empty())
    }

    fn required(&self, key: &str) -> Result<(usize, &str), ManifestError> {
        match self.value(key) {
            Some(found) => Ok(found),
            None => error(self.line, format!("missing required key {key:?}")),
        }
    }
}

pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut sections: Vec<Section> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with('[') {
            let kind = match trimmed {
                "[object]" => SectionKind::Object,
                "[subdocument]" => SectionKind::Subdocument,
                _ => return error(line, format!("unknown section {trimmed}")),
            };
            sections.push(Section {
                kind,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return error(line, "expected `key = value`");
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = sections.last_mut() else {
            return error(line, "entry outside of any section");
        };
        let allowed = match section.kind {
            SectionKind::Object => OBJECT_KEYS,
            SectionKind::Subdocument => SUBDOCUMENT_KEYS,
        };
        if !allowed.contains(&key) {
            return error(line, format!("unknown key {key:?}"));
        }
        if section.get(key).is_some() {
            return error(line, format!("key {key:?} given twice"));
        }
        section
            .entries
            .push((line, key.to_string(), value.to_string()));
    }

    let mut objects = sections.iter().filter(|s| s.kind == SectionKind::Object);
    let object = match (objects.next(), objects.next()) {
        (Some(o), None) => o,
        (None, _) => return error(0, "missing [object] section"),
        (Some(_), Some(second)) => {
            return error(second.line, "only one [object] section is allowed")
        }
    };
    let (_, name) = object.required("name")?;
    let (date_line, date) = object.required("date")?;
    let date = IsoDate::parse(date)
        .or_else(|_| error(date_line, format!("date must be YYYY-MM-DD, got {date:?}")))?;
    let (_, source) = object.required("source")?;

    let subdocuments = sections
        .iter()
        .filter(|s| s.kind == SectionKind::Subdocument)
        .map(source_spec)
        .collect::<Result<Vec<_>, _>>()?;
    if subdocuments.is_empty() {
        return error(0, "at least one [subdocument] section is required");
    }
    Ok(Manifest {
        name: name.to_string(),
        date,
        source: source.to_string(),
        subdocuments,
    })
}

fn parsed<T: std::str::FromStr<Err = String>>(
    section: &Section,
    key: &str,
) -> Result<Option<T>, ManifestError> {
    match section.value(key) {
        None => Ok(None),
        Some((line, v)) => v.parse().map(Some).or_else(|e| error(line, e)),
    }
}

fn number(section: &Section, key: &str) -> Result<Option<(usize, f64)>, ManifestError> {
    match section.value(key) {
        None => Ok(None),
        Some((line, v)) => match v.parse::<f64>() {
            Ok(n) if n.is_finite() => Ok(Some((line, n))),
            _ => error(line, format!("{key} must be a number, got {v:?}")),
        },
    }
}

fn source_spec(section: &Section) -> Result<SourceSpec, ManifestError> {
    let (_, location) = section.required("location")?;
    let mut declared_type: SourceType = parsed(section, "type")?.unwrap_or_default();
    let kind: Option<MediaKind> = parsed(section, "kind")?;
    if let Some(k) = kind {
        match declared_type {
            SourceType::Auto => declared_type = SourceType::Temporal,
            SourceType::Temporal => {}
            other => {
                return error(
                    section.get("kind").map_or(section.line, |(l, _)| l),
                    format!("kind = {k:?} needs type temporal, not {other}"),
                )
            }
        }
    }

    let duration = number(section, "duration")?;
    let speed = number(section, "speed")?;
    for (key, value) in [("duration", duration), ("speed", speed)] {
        if let Some((line, _)) = value {
            if kind != Some(MediaKind::Video) {
                return error(line, format!("{key} is only read for kind = video"));
            }
        }
    }
    if let Some((line, d)) = duration {
        if d < 0.0 {
            return error(line, "duration must not be negative");
        }
    }
    if let Some((line, s)) = speed {
        if s <= 0.0 {
            return error(line, "speed must be positive");
        }
    }

    let mut keywords: Vec<String> = Vec::new();
    if let Some((line, list)) = section.value("keywords") {
        for kw in list.split(',').map(str::trim).filter(|k| !k.is_empty()) {
            if keywords.iter().any(|k| k == kw) {
                return error(line, format!("duplicate keyword {kw:?}"));
            }
            keywords.push(kw.to_string());
        }
    }

    Ok(SourceSpec {
        location: location.to_string(),
        declared_type,
        language: section.value("language").map(|(_, v)| v.to_string()),
        keywords,
        view_mode: parsed::<ViewMode>(section, "view_mode")?.unwrap_or_default(),
        query: section.value("query").map(|(_, v)| v.to_string()),
        kind,
        duration: duration.map(|(_, d)| d),
        speed: speed.map(|(_, s)| s),
    })
}

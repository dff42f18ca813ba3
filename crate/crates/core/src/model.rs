//! Complex objects and their subdocument variants.

use std::fmt;
use std::str::FromStr;

use base64::Engine;
use thiserror::Error;

use crate::emit::ValueBinding;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("{path}: {description}")]
    InvariantViolation { path: String, description: String },
    #[error("{0:?} is not a YYYY-MM-DD calendar date")]
    InvalidDate(String),
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
}

fn violation(path: impl Into<String>, description: impl Into<String>) -> ModelError {
    ModelError::InvariantViolation {
        path: path.into(),
        description: description.into(),
    }
}

/// A calendar date in `YYYY-MM-DD` form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoDate(String);

impl IsoDate {
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        if is_iso_date(s) {
            Ok(Self(s.to_string()))
        } else {
            Err(ModelError::InvalidDate(s.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for IsoDate {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for IsoDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Whether `s` is exactly `YYYY-MM-DD` and names a real day of the
/// proleptic Gregorian calendar.
pub fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    let digits = |r: std::ops::Range<usize>| -> Option<u32> {
        let part = &s[r];
        part.bytes()
            .all(|c| c.is_ascii_digit())
            .then(|| part.parse().ok())?
    };
    let (Some(year), Some(month), Some(day)) = (digits(0..4), digits(5..7), digits(8..10)) else {
        return false;
    };
    let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    let days = match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if leap => 29,
        2 => 28,
        _ => return false,
    };
    (1..=days).contains(&day)
}

/// Byte count, rendered as `<n> Bytes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ByteSize(pub u64);

impl fmt::Display for ByteSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Bytes", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexObject {
    pub name: String,
    pub date: IsoDate,
    pub source: String,
    pub subdocuments: Vec<Subdocument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subdocument {
    pub doc_name: String,
    pub doc_type: String,
    pub size: ByteSize,
    pub location: String,
    pub language: Option<String>,
    pub keywords: Vec<String>,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Text(TextPayload),
    View(RelationalView),
    Image(ImagePayload),
    Temporal(TemporalPayload),
}

impl Payload {
    /// Short label of the variant, e.g. `tagged-text` or `image`.
    pub fn kind_label(&self) -> &'static str {
        match self {
            Payload::Text(t) => match t.body {
                TextBody::Plain(_) => "plain-text",
                TextBody::Tagged { .. } => "tagged-text",
            },
            Payload::View(_) => "relational-view",
            Payload::Image(_) => "image",
            Payload::Temporal(t) => match t.kind {
                TemporalKind::Sound(_) => "sound",
                TemporalKind::Video(_) => "video",
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextPayload {
    pub nb_char: u64,
    pub nb_lines: u64,
    pub body: TextBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextBody {
    Plain(String),
    Tagged { content: String, links: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Integer,
    Real,
    Date,
    Text,
    Blob,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Integer => "integer",
            Domain::Real => "real",
            Domain::Date => "date",
            Domain::Text => "text",
            Domain::Blob => "blob",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "integer" => Ok(Domain::Integer),
            "real" => Ok(Domain::Real),
            "date" => Ok(Domain::Date),
            "text" => Ok(Domain::Text),
            "blob" => Ok(Domain::Blob),
            _ => Err(ModelError::UnknownDomain(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub domain: Domain,
}

impl Attribute {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        Self {
            name: name.into(),
            domain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub att_name_ref: String,
    pub value: Option<String>,
}

impl Cell {
    pub fn new(att_name_ref: impl Into<String>, value: Option<String>) -> Self {
        Self {
            att_name_ref: att_name_ref.into(),
            value,
        }
    }

    /// A blob cell; the bytes are carried base-64 encoded.
    pub fn blob(att_name_ref: impl Into<String>, bytes: &[u8]) -> Self {
        Self::new(
            att_name_ref,
            Some(base64::engine::general_purpose::STANDARD.encode(bytes)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple {
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalView {
    pub query: Option<String>,
    pub attributes: Vec<Attribute>,
    pub tuples: Vec<Tuple>,
}

/// A tuple cell whose reference names no attribute of its view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingReference {
    pub tuple: usize,
    pub att_name_ref: String,
}

pub fn check_referential_integrity(view: &RelationalView) -> Vec<DanglingReference> {
    let mut out = Vec::new();
    for (i, tuple) in view.tuples.iter().enumerate() {
        for cell in &tuple.cells {
            if !view.attributes.iter().any(|a| a.name == cell.att_name_ref) {
                out.push(DanglingReference {
                    tuple: i,
                    att_name_ref: cell.att_name_ref.clone(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ImagePayload {
    pub compression: Option<String>,
    pub format: Option<String>,
    /// Dots per inch.
    pub resolution: Option<u32>,
    /// Height in pixels.
    pub length: Option<u32>,
    pub width: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPayload {
    /// Seconds.
    pub duration: Option<f64>,
    /// Hz for sound, frames per second for video.
    pub speed: Option<f64>,
    pub kind: TemporalKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemporalKind {
    Sound(Option<String>),
    Video(Option<String>),
}

impl ComplexObject {
    pub fn check(&self) -> Result<(), ModelError> {
        if self.name.is_empty() {
            return Err(violation("name", "must not be empty"));
        }
        if self.source.is_empty() {
            return Err(violation("source", "must not be empty"));
        }
        if self.subdocuments.is_empty() {
            return Err(violation(
                "subdocuments",
                "at least one subdocument is required",
            ));
        }
        for (i, sub) in self.subdocuments.iter().enumerate() {
            sub.check(&format!("subdocuments[{i}]"))?;
        }
        Ok(())
    }

    /// Maps the object onto element names of the canonical grammar.
    pub fn to_binding(&self) -> Result<ValueBinding, ModelError> {
        self.check()?;
        let mut children = vec![
            ValueBinding::value("OBJ_NAME", &self.name),
            ValueBinding::value("DATE", self.date.as_str()),
            ValueBinding::value("SOURCE", &self.source),
        ];
        children.extend(self.subdocuments.iter().map(Subdocument::binding));
        Ok(ValueBinding::children("COMPLEX_OBJECT", children))
    }
}

impl Subdocument {
    fn check(&self, path: &str) -> Result<(), ModelError> {
        for (field, value) in [
            ("doc_name", &self.doc_name),
            ("doc_type", &self.doc_type),
            ("location", &self.location),
        ] {
            if value.is_empty() {
                return Err(violation(format!("{path}.{field}"), "must not be empty"));
            }
        }
        for (i, kw) in self.keywords.iter().enumerate() {
            if kw.is_empty() {
                return Err(violation(format!("{path}.keywords[{i}]"), "empty keyword"));
            }
            if self.keywords[..i].contains(kw) {
                return Err(violation(
                    format!("{path}.keywords[{i}]"),
                    format!("duplicate keyword {kw:?}"),
                ));
            }
        }
        match &self.payload {
            Payload::Text(t) => t.check(&format!("{path}.text")),
            Payload::View(v) => v.check(&format!("{path}.view")),
            Payload::Image(img) => img.check(&format!("{path}.image")),
            Payload::Temporal(t) => t.check(&format!("{path}.temporal")),
        }
    }

    fn binding(&self) -> ValueBinding {
        let mut children = vec![
            ValueBinding::value("DOC_NAME", &self.doc_name),
            ValueBinding::value("TYPE", &self.doc_type),
            ValueBinding::value("SIZE", self.size.to_string()),
            ValueBinding::value("LOCATION", &self.location),
        ];
        if let Some(lang) = &self.language {
            children.push(ValueBinding::value("LANGUAGE", lang));
        }
        children.extend(
            self.keywords
                .iter()
                .map(|k| ValueBinding::value("KEYWORD", k)),
        );
        children.push(match &self.payload {
            Payload::Text(t) => t.binding(),
            Payload::View(v) => v.binding(),
            Payload::Image(img) => img.binding(),
            Payload::Temporal(t) => t.binding(),
        });
        ValueBinding::children("SUBDOCUMENT", children)
    }
}

impl TextPayload {
    fn check(&self, path: &str) -> Result<(), ModelError> {
        if self.nb_lines > self.nb_char + 1 {
            return Err(violation(path, "more lines than characters"));
        }
        if let TextBody::Tagged { links, .. } = &self.body {
            if let Some(i) = links.iter().position(String::is_empty) {
                return Err(violation(format!("{path}.links[{i}]"), "empty link"));
            }
        }
        Ok(())
    }

    fn binding(&self) -> ValueBinding {
        let body = match &self.body {
            TextBody::Plain(content) => ValueBinding::value("PLAIN_TEXT", content),
            TextBody::Tagged { content, links } => {
                let mut children = vec![ValueBinding::value("CONTENT", content)];
                children.extend(links.iter().map(|l| ValueBinding::value("LINK", l)));
                ValueBinding::children("TAGGED_TEXT", children)
            }
        };
        ValueBinding::children(
            "TEXT",
            vec![
                ValueBinding::value("NB_CHAR", self.nb_char.to_string()),
                ValueBinding::value("NB_LINES", self.nb_lines.to_string()),
                body,
            ],
        )
    }
}

impl RelationalView {
    fn check(&self, path: &str) -> Result<(), ModelError> {
        if self.attributes.is_empty() {
            return Err(violation(
                format!("{path}.attributes"),
                "at least one attribute is required",
            ));
        }
        for (i, a) in self.attributes.iter().enumerate() {
            if self.attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(violation(
                    format!("{path}.attributes[{i}]"),
                    format!("duplicate attribute {:?}", a.name),
                ));
            }
        }
        if let Some(d) = check_referential_integrity(self).first() {
            return Err(violation(
                format!("{path}.tuples[{}]", d.tuple),
                format!("{:?} names no attribute", d.att_name_ref),
            ));
        }
        for (t, tuple) in self.tuples.iter().enumerate() {
            if tuple.cells.is_empty() {
                return Err(violation(format!("{path}.tuples[{t}]"), "empty tuple"));
            }
            let mut last = None;
            for cell in &tuple.cells {
                let index = self
                    .attributes
                    .iter()
                    .position(|a| a.name == cell.att_name_ref)
                    .expect("integrity checked above");
                if last.is_some_and(|l| index <= l) {
                    return Err(violation(
                        format!("{path}.tuples[{t}]"),
                        "cells must follow attribute order without repeats",
                    ));
                }
                last = Some(index);
            }
        }
        Ok(())
    }

    fn binding(&self) -> ValueBinding {
        let mut children = Vec::new();
        if let Some(q) = &self.query {
            children.push(ValueBinding::value("QUERY", q));
        }
        for a in &self.attributes {
            children.push(ValueBinding::children(
                "ATTRIBUTE",
                vec![
                    ValueBinding::value("ATT_NAME", &a.name),
                    ValueBinding::value("DOMAIN", a.domain.as_str()),
                ],
            ));
        }
        for t in &self.tuples {
            let mut cells = Vec::with_capacity(t.cells.len() * 2);
            for c in &t.cells {
                cells.push(ValueBinding::value("ATT_NAME_REF", &c.att_name_ref));
                cells.push(ValueBinding::optional("VALUE", c.value.clone()));
            }
            children.push(ValueBinding::children("TUPLE", cells));
        }
        ValueBinding::children("RELATIONAL_VIEW", children)
    }
}

impl ImagePayload {
    fn check(&self, path: &str) -> Result<(), ModelError> {
        if self.length == Some(0) || self.width == Some(0) {
            return Err(violation(path, "pixel dimensions must be at least 1"));
        }
        if self.resolution == Some(0) {
            return Err(violation(path, "resolution must be positive"));
        }
        Ok(())
    }

    fn binding(&self) -> ValueBinding {
        let num = |v: Option<u32>| v.map(|n| n.to_string());
        ValueBinding::children(
            "IMAGE",
            vec![
                ValueBinding::optional("COMPRESSION", self.compression.clone()),
                ValueBinding::optional("FORMAT", self.format.clone()),
                ValueBinding::optional("RESOLUTION", self.resolution.map(|r| format!("{r} dpi"))),
                ValueBinding::optional("LENGTH", num(self.length)),
                ValueBinding::optional("WIDTH", num(self.width)),
            ],
        )
    }
}

impl TemporalPayload {
    fn check(&self, path: &str) -> Result<(), ModelError> {
        if self.duration.is_some_and(|d| !(d.is_finite() && d >= 0.0)) {
            return Err(violation(
                path,
                "duration must be a non-negative number of seconds",
            ));
        }
        if self.speed.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
            return Err(violation(path, "speed must be positive"));
        }
        Ok(())
    }

    fn binding(&self) -> ValueBinding {
        let (unit, kind) = match &self.kind {
            TemporalKind::Sound(d) => ("Hz", ValueBinding::optional("SOUND", d.clone())),
            TemporalKind::Video(d) => ("fps", ValueBinding::optional("VIDEO", d.clone())),
        };
        ValueBinding::children(
            "TEMPORAL",
            vec![
                ValueBinding::optional("DURATION", self.duration.map(|d| format!("{d:.3} s"))),
                ValueBinding::optional("SPEED", self.speed.map(|s| format!("{s} {unit}"))),
                kind,
            ],
        )
    }
}

//! Building subdocuments from raw source bytes.
//!
//! Every extractor is a pure function of its input bytes, so sources can be
//! processed concurrently.

mod image;
mod temporal;
mod text;
mod view;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use image::{extract_image, ppm_to_dpi, BMP_MAGIC, PNG_SIGNATURE};
pub use temporal::{extract_temporal, is_wave};
pub use text::{count_text, extract_plain_text, extract_tagged_text};
pub use view::{extract_view, infer_domain, render_view_csv, ViewMode};

use crate::model::{ByteSize, Payload, Subdocument, TemporalKind, TemporalPayload};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("cannot recognize the content of {0}")]
    UnrecognizedSource(String),
    #[error("invalid UTF-8 at byte {offset}")]
    DecodeError { offset: usize },
    #[error("no markup tags found")]
    NotTagged,
    #[error("view has no header row")]
    NoHeader,
    #[error("data row {row} has {got} cells, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("attribute {0} appears twice in the header")]
    DuplicateAttribute(String),
    #[error("header cell {column} is empty")]
    EmptyAttributeName { column: usize },
    #[error("malformed delimited text: {0}")]
    Csv(String),
    #[error("header is truncated")]
    TruncatedHeader,
    #[error("unsupported image format")]
    UnsupportedImageFormat,
    #[error("not a RIFF/WAVE file")]
    UnsupportedAudioFormat,
    #[error("missing {0:?} chunk")]
    MissingChunk(String),
    #[error("unsupported codec (format tag {0}), only PCM is read")]
    UnsupportedCodec(u16),
    #[error("{0} must not be zero")]
    InvalidField(&'static str),
}

/// Declared kind of a source; `Auto` is resolved by [`sniff_type`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceType {
    #[default]
    Auto,
    Text,
    Tagged,
    View,
    Image,
    Temporal,
}

impl FromStr for SourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "text" => Ok(Self::Text),
            "tagged" => Ok(Self::Tagged),
            "view" => Ok(Self::View),
            "image" => Ok(Self::Image),
            "temporal" => Ok(Self::Temporal),
            _ => Err(format!(
                "type must be one of auto, text, tagged, view, image, temporal; got {s:?}"
            )),
        }
    }
}

impl fmt::Display for SourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Auto => "auto",
            Self::Text => "text",
            Self::Tagged => "tagged",
            Self::View => "view",
            Self::Image => "image",
            Self::Temporal => "temporal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediaKind {
    Sound,
    Video,
}

impl FromStr for MediaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sound" => Ok(Self::Sound),
            "video" => Ok(Self::Video),
            _ => Err(format!("kind must be sound or video, got {s:?}")),
        }
    }
}

/// Description of one source to integrate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceSpec {
    pub location: String,
    pub declared_type: SourceType,
    pub language: Option<String>,
    pub keywords: Vec<String>,
    pub view_mode: ViewMode,
    pub query: Option<String>,
    /// Temporal media kind; video is never parsed and takes its fields from
    /// `duration` and `speed`.
    pub kind: Option<MediaKind>,
    pub duration: Option<f64>,
    pub speed: Option<f64>,
}

impl SourceSpec {
    pub fn new(location: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            ..Default::default()
        }
    }
}

/// Last path segment of a file path or URL, without query or fragment.
pub fn basename(location: &str) -> &str {
    let trimmed = location
        .split(['?', '#'])
        .next()
        .unwrap_or(location)
        .trim_end_matches(['/', '\\']);
    let name = trimmed.rsplit(['/', '\\']).next().unwrap_or(trimmed);
    if name.is_empty() || name.ends_with(':') {
        location
    } else {
        name
    }
}

fn extension(location: &str) -> Option<String> {
    let name = basename(location);
    let (_, ext) = name.rsplit_once('.')?;
    Some(ext.to_ascii_lowercase())
}

/// Resolves the source type from magic numbers, then the extension, then
/// UTF-8 decodability.
pub fn sniff_type(bytes: &[u8], location: &str) -> Result<SourceType, ExtractError> {
    if bytes.starts_with(BMP_MAGIC) || bytes.starts_with(PNG_SIGNATURE) {
        return Ok(SourceType::Image);
    }
    if is_wave(bytes) {
        return Ok(SourceType::Temporal);
    }
    let by_extension = match extension(location).as_deref() {
        Some("html" | "htm" | "xml" | "sgml") => Some(SourceType::Tagged),
        Some("csv") => Some(SourceType::View),
        Some("txt") => Some(SourceType::Text),
        _ => None,
    };
    if let Some(t) = by_extension {
        return Ok(t);
    }
    if std::str::from_utf8(bytes).is_ok() {
        Ok(SourceType::Text)
    } else {
        Err(ExtractError::UnrecognizedSource(location.to_string()))
    }
}

fn tagged_label(location: &str) -> &'static str {
    match extension(location).as_deref() {
        Some("html" | "htm") => "HTML",
        Some("xml") => "XML",
        _ => "SGML",
    }
}

pub fn build_subdocument(spec: &SourceSpec, bytes: &[u8]) -> Result<Subdocument, ExtractError> {
    let resolved = match spec.declared_type {
        SourceType::Auto => sniff_type(bytes, &spec.location)?,
        declared => declared,
    };
    let name = basename(&spec.location);
    let (doc_type, payload) = match resolved {
        SourceType::Auto | SourceType::Text => ("Text", Payload::Text(extract_plain_text(bytes)?)),
        SourceType::Tagged => match extract_tagged_text(bytes) {
            Ok(t) => (tagged_label(&spec.location), Payload::Text(t)),
            Err(ExtractError::NotTagged) => ("Text", Payload::Text(extract_plain_text(bytes)?)),
            Err(e) => return Err(e),
        },
        SourceType::View => (
            "View",
            Payload::View(extract_view(bytes, spec.view_mode, spec.query.as_deref())?),
        ),
        SourceType::Image => ("Image", Payload::Image(extract_image(bytes)?)),
        SourceType::Temporal => match spec.kind {
            Some(MediaKind::Video) => (
                "Video",
                Payload::Temporal(TemporalPayload {
                    duration: spec.duration,
                    speed: spec.speed,
                    kind: TemporalKind::Video(Some(name.to_string())),
                }),
            ),
            _ => (
                "Sound",
                Payload::Temporal(extract_temporal(bytes, Some(name))?),
            ),
        },
    };
    Ok(Subdocument {
        doc_name: name.to_string(),
        doc_type: doc_type.to_string(),
        size: ByteSize(bytes.len() as u64),
        location: spec.location.clone(),
        language: spec.language.clone(),
        keywords: spec.keywords.clone(),
        payload,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TextBody, TextPayload};

    #[test]
    fn sniffing() {
        assert_eq!(sniff_type(b"BM\0\0", "x.bin"), Ok(SourceType::Image));
        assert_eq!(sniff_type(PNG_SIGNATURE, "x"), Ok(SourceType::Image));
        assert_eq!(
            sniff_type(b"RIFF\0\0\0\0WAVE", "x.dat"),
            Ok(SourceType::Temporal)
        );
        assert_eq!(sniff_type(b"id,name\n", "a.csv"), Ok(SourceType::View));
        assert_eq!(sniff_type(b"<p>", "a.HTM"), Ok(SourceType::Tagged));
        assert_eq!(sniff_type(b"hello", "notes"), Ok(SourceType::Text));
        assert_eq!(
            sniff_type(&[0xff, 0xfe, 0x00, 0x9f], "x.bin"),
            Err(ExtractError::UnrecognizedSource("x.bin".into()))
        );
    }

    #[test]
    fn basenames() {
        assert_eq!(basename("dir/scissors.bmp"), "scissors.bmp");
        assert_eq!(basename("C:\\data\\a.txt"), "a.txt");
        assert_eq!(
            basename("https://example.org/news/page.html?id=3"),
            "page.html"
        );
        assert_eq!(basename("https://example.org/"), "example.org");
        assert_eq!(basename("plain"), "plain");
    }

    #[test]
    fn empty_text_source() {
        let sub = build_subdocument(&SourceSpec::new("empty.txt"), b"").unwrap();
        assert_eq!(sub.doc_type, "Text");
        assert_eq!(sub.size, ByteSize(0));
        assert_eq!(
            sub.payload,
            Payload::Text(TextPayload {
                nb_char: 0,
                nb_lines: 0,
                body: TextBody::Plain(String::new())
            })
        );
    }

    #[test]
    fn untagged_markup_file_falls_back_to_plain() {
        let sub = build_subdocument(&SourceSpec::new("a.html"), b"just words").unwrap();
        assert_eq!(sub.doc_type, "Text");
        assert_eq!(sub.payload.kind_label(), "plain-text");
    }

    #[test]
    fn video_is_manifest_supplied() {
        let spec = SourceSpec {
            declared_type: SourceType::Temporal,
            kind: Some(MediaKind::Video),
            duration: Some(12.5),
            speed: Some(25.0),
            ..SourceSpec::new("clips/intro.mp4")
        };
        let sub = build_subdocument(&spec, b"\x00\x00\x00\x18ftypmp42").unwrap();
        assert_eq!(sub.doc_type, "Video");
        assert_eq!(
            sub.payload,
            Payload::Temporal(TemporalPayload {
                duration: Some(12.5),
                speed: Some(25.0),
                kind: TemporalKind::Video(Some("intro.mp4".into()))
            })
        );
    }
}

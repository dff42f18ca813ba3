//! Generators, oracles and fixture builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mlfd::model::{
    Attribute, ByteSize, Cell, Domain, ImagePayload, IsoDate, Payload, RelationalView,
    TemporalKind, TemporalPayload, TextBody, TextPayload, Tuple,
};
use mlfd::{
    BindingPayload, Cardinality, ComplexObject, ContentModel, DtdTable, Subdocument, ValueBinding,
};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

// ---------------------------------------------------------------------------
// Oracles

/// Characters and lines counted without the library: CRLF is one break, a
/// final line without a terminator still counts.
pub fn count_oracle(text: &str) -> (u64, u64) {
    let normalized: Vec<char> = {
        let mut out = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '\r' && chars.peek() == Some(&'\n') {
                continue;
            }
            out.push(c);
        }
        out
    };
    let breaks = normalized.iter().filter(|&&c| c == '\n').count() as u64;
    let lines = match normalized.last() {
        None => 0,
        Some('\n') => breaks,
        Some(_) => breaks + 1,
    };
    (normalized.len() as u64, lines)
}

fn escape_oracle(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Recursive emitter used to cross-check the frame-stack implementation.
/// Assumes the binding is already in content-model order.
pub fn reference_emit(table: &DtdTable, binding: &ValueBinding, system_id: &str) -> String {
    fn walk(b: &ValueBinding, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let e = &b.element;
        match &b.payload {
            BindingPayload::Value(v) => {
                let body = match v.as_deref() {
                    None => String::new(),
                    Some(v) if e == "CONTENT" => {
                        let mut parts = v.split("]]>");
                        let mut s = format!("<![CDATA[{}", parts.next().unwrap_or(""));
                        for p in parts {
                            s.push_str("]]]]><![CDATA[>");
                            s.push_str(p);
                        }
                        s + "]]>"
                    }
                    Some(v) => escape_oracle(v),
                };
                out.push_str(&format!("{pad}<{e}>{body}</{e}>\n"));
            }
            BindingPayload::Children(children) => {
                out.push_str(&format!("{pad}<{e}>\n"));
                for c in children {
                    walk(c, depth + 1, out);
                }
                out.push_str(&format!("{pad}</{e}>\n"));
            }
        }
    }
    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE {} SYSTEM \"{system_id}\">\n",
        table.root()
    );
    walk(binding, 0, &mut out);
    out
}

type Words = BTreeSet<Vec<String>>;

fn concat(a: &Words, b: &Words, max: usize) -> Words {
    let mut out = Words::new();
    for x in a {
        for y in b {
            if x.len() + y.len() <= max {
                out.insert(x.iter().chain(y).cloned().collect());
            }
        }
    }
    out
}

/// Every child sequence of length at most `max` that `model` generates,
/// by direct expansion of the expression.
pub fn expand(model: &ContentModel, max: usize) -> Words {
    let body: Words = match model {
        ContentModel::Text(_) => [Vec::new()].into(),
        ContentModel::Ref(name, _) => [vec![name.clone()]].into(),
        ContentModel::Sequence(items, _) => items.iter().fold([Vec::new()].into(), |acc, item| {
            concat(&acc, &expand(item, max), max)
        }),
        ContentModel::Choice(items, _) => items.iter().flat_map(|i| expand(i, max)).collect(),
    };
    let star = |base: &Words| {
        let mut all: Words = [Vec::new()].into();
        loop {
            let next: Words = all.union(&concat(&all, base, max)).cloned().collect();
            if next.len() == all.len() {
                return all;
            }
            all = next;
        }
    };
    match model.cardinality() {
        Cardinality::ExactlyOne => body,
        Cardinality::Optional => body.into_iter().chain([Vec::new()]).collect(),
        Cardinality::ZeroOrMore => star(&body),
        Cardinality::OneOrMore => concat(&body, &star(&body), max),
    }
}

// ---------------------------------------------------------------------------
// Binary fixtures

/// A BMP with a 40-byte info header; pixel data is zero-filled.
pub fn bmp(
    width: i32,
    height: i32,
    bits: u16,
    compression: u32,
    ppm: i32,
    palette: u32,
) -> Vec<u8> {
    let row = (width.unsigned_abs() as usize * bits as usize).div_ceil(32) * 4;
    let pixels = row * height.unsigned_abs() as usize;
    let offset = 14 + 40 + 4 * palette as usize;
    let mut b = Vec::with_capacity(offset + pixels);
    b.extend_from_slice(b"BM");
    b.extend_from_slice(&((offset + pixels) as u32).to_le_bytes());
    b.extend_from_slice(&[0; 4]);
    b.extend_from_slice(&(offset as u32).to_le_bytes());
    b.extend_from_slice(&40u32.to_le_bytes());
    b.extend_from_slice(&width.to_le_bytes());
    b.extend_from_slice(&height.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&bits.to_le_bytes());
    b.extend_from_slice(&compression.to_le_bytes());
    b.extend_from_slice(&(pixels as u32).to_le_bytes());
    b.extend_from_slice(&ppm.to_le_bytes());
    b.extend_from_slice(&ppm.to_le_bytes());
    b.extend_from_slice(&palette.to_le_bytes());
    b.extend_from_slice(&0u32.to_le_bytes());
    b.resize(offset + pixels, 0);
    b
}

/// A PCM WAV file with `data_len` zero bytes of samples.
pub fn wav(rate: u32, channels: u16, bits: u16, data_len: usize) -> Vec<u8> {
    let block = channels * bits / 8;
    let mut b = Vec::new();
    b.extend_from_slice(b"RIFF");
    b.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    b.extend_from_slice(b"WAVEfmt ");
    b.extend_from_slice(&16u32.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&channels.to_le_bytes());
    b.extend_from_slice(&rate.to_le_bytes());
    b.extend_from_slice(&(rate * u32::from(block)).to_le_bytes());
    b.extend_from_slice(&block.to_le_bytes());
    b.extend_from_slice(&bits.to_le_bytes());
    b.extend_from_slice(b"data");
    b.extend_from_slice(&(data_len as u32).to_le_bytes());
    b.resize(b.len() + data_len, 0);
    b
}

fn png_chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    // CRC is not checked by the reader.
    out.extend_from_slice(&[0; 4]);
}

/// PNG header chunks only; `phys` is (pixels per unit, unit specifier).
pub fn png(width: u32, height: u32, phys: Option<(u32, u8)>) -> Vec<u8> {
    let mut b = vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];
    let mut ihdr = Vec::new();
    ihdr.extend_from_slice(&width.to_be_bytes());
    ihdr.extend_from_slice(&height.to_be_bytes());
    ihdr.extend_from_slice(&[8, 2, 0, 0, 0]);
    png_chunk(&mut b, b"IHDR", &ihdr);
    if let Some((ppu, unit)) = phys {
        let mut p = Vec::new();
        p.extend_from_slice(&ppu.to_be_bytes());
        p.extend_from_slice(&ppu.to_be_bytes());
        p.push(unit);
        png_chunk(&mut b, b"pHYs", &p);
    }
    png_chunk(&mut b, b"IDAT", &[0; 4]);
    png_chunk(&mut b, b"IEND", &[]);
    b
}

// ---------------------------------------------------------------------------
// Strategies

/// Short non-empty token with markup-significant characters mixed in.
pub fn word() -> impl Strategy<Value = String> {
    "[A-Za-z0-9][A-Za-z0-9 _.&<>'\"é-]{0,10}"
}

/// Free text for bodies, including line breaks and CDATA terminators.
pub fn free_text() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[ -~\né\t]{0,60}",
        1 => "[a-z]{0,5}\\]\\]>[a-z<&]{0,5}",
    ]
}

pub fn iso_date() -> impl Strategy<Value = IsoDate> {
    (1900u32..2100, 1u32..=12, 1u32..=28)
        .prop_map(|(y, m, d)| IsoDate::parse(&format!("{y:04}-{m:02}-{d:02}")).unwrap())
}

fn text_payload() -> impl Strategy<Value = TextPayload> {
    let body = prop_oneof![
        free_text().prop_map(TextBody::Plain),
        (
            free_text(),
            prop::collection::vec("[a-z0-9/.:#?=&]{1,12}", 0..4)
        )
            .prop_map(|(content, links)| TextBody::Tagged { content, links }),
    ];
    body.prop_map(|body| {
        let content = match &body {
            TextBody::Plain(c) | TextBody::Tagged { content: c, .. } => c,
        };
        let (nb_char, nb_lines) = count_oracle(content);
        TextPayload {
            nb_char,
            nb_lines,
            body,
        }
    })
}

fn domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        Just(Domain::Integer),
        Just(Domain::Real),
        Just(Domain::Date),
        Just(Domain::Text),
        Just(Domain::Blob),
    ]
}

fn view_payload() -> impl Strategy<Value = RelationalView> {
    let attributes =
        prop::collection::btree_set("[a-z][a-z0-9_]{0,6}", 1..5).prop_flat_map(|names| {
            let n = names.len();
            (
                Just(names.into_iter().collect::<Vec<_>>()),
                prop::collection::vec(domain(), n),
            )
        });
    (
        prop::option::of(word()),
        attributes,
        prop::collection::vec(
            prop::collection::vec((any::<bool>(), prop::option::of(word())), 5),
            0..4,
        ),
    )
        .prop_map(|(query, (names, domains), rows)| {
            let attributes: Vec<Attribute> = names
                .iter()
                .zip(domains)
                .map(|(n, d)| Attribute::new(n.clone(), d))
                .collect();
            let tuples = rows
                .into_iter()
                .map(|row| {
                    let mut cells: Vec<Cell> = names
                        .iter()
                        .zip(&row)
                        .filter(|(_, (keep, _))| *keep)
                        .map(|(n, (_, v))| Cell::new(n.clone(), v.clone()))
                        .collect();
                    if cells.is_empty() {
                        cells.push(Cell::new(names[0].clone(), row[0].1.clone()));
                    }
                    Tuple { cells }
                })
                .collect();
            RelationalView {
                query,
                attributes,
                tuples,
            }
        })
}

fn image_payload() -> impl Strategy<Value = ImagePayload> {
    (
        prop::option::of(prop_oneof![Just("None".to_string()), "[0-9]{1,2}"]),
        prop::option::of(prop_oneof![
            Just("Bitmap".to_string()),
            Just("PNG".to_string())
        ]),
        prop::option::of(1u32..1200),
        prop::option::of(1u32..5000),
        prop::option::of(1u32..5000),
    )
        .prop_map(
            |(compression, format, resolution, length, width)| ImagePayload {
                compression,
                format,
                resolution,
                length,
                width,
            },
        )
}

fn temporal_payload() -> impl Strategy<Value = TemporalPayload> {
    (
        prop::option::of(0.0f64..10_000.0),
        prop::option::of(0.5f64..96_000.0),
        any::<bool>(),
        prop::option::of(word()),
    )
        .prop_map(|(duration, speed, video, descriptor)| TemporalPayload {
            duration,
            speed,
            kind: if video {
                TemporalKind::Video(descriptor)
            } else {
                TemporalKind::Sound(descriptor)
            },
        })
}

pub fn payload() -> impl Strategy<Value = Payload> {
    prop_oneof![
        text_payload().prop_map(Payload::Text),
        view_payload().prop_map(Payload::View),
        image_payload().prop_map(Payload::Image),
        temporal_payload().prop_map(Payload::Temporal),
    ]
}

pub fn subdocument() -> impl Strategy<Value = Subdocument> {
    (
        word(),
        word(),
        0u64..10_000_000,
        word(),
        prop::option::of(word()),
        prop::collection::btree_set(word(), 0..4),
        payload(),
    )
        .prop_map(
            |(doc_name, doc_type, size, location, language, keywords, payload)| Subdocument {
                doc_name,
                doc_type,
                size: ByteSize(size),
                location,
                language,
                keywords: keywords.into_iter().collect(),
                payload,
            },
        )
}

pub fn complex_object() -> impl Strategy<Value = ComplexObject> {
    (
        word(),
        iso_date(),
        word(),
        prop::collection::vec(subdocument(), 1..5),
    )
        .prop_map(|(name, date, source, subdocuments)| ComplexObject {
            name,
            date,
            source,
            subdocuments,
        })
}

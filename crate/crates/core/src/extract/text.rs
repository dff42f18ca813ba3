//! Plain and tagged text.

use super::ExtractError;
use crate::model::{TextBody, TextPayload};

fn decode(bytes: &[u8]) -> Result<&str, ExtractError> {
    std::str::from_utf8(bytes).map_err(|e| ExtractError::DecodeError {
        offset: e.valid_up_to(),
    })
}

/// Character and line counts after CRLF normalization.
///
/// Characters are Unicode scalar values including line terminators. Lines are
/// the `\n` count plus one for a non-empty unterminated final line.
pub fn count_text(content: &str) -> (u64, u64) {
    let normalized = content.replace("\r\n", "\n");
    let chars = normalized.chars().count() as u64;
    let newlines = normalized.matches('\n').count() as u64;
    let lines = if !normalized.is_empty() && !normalized.ends_with('\n') {
        newlines + 1
    } else {
        newlines
    };
    (chars, lines)
}

pub fn extract_plain_text(bytes: &[u8]) -> Result<TextPayload, ExtractError> {
    let content = decode(bytes)?;
    let (nb_char, nb_lines) = count_text(content);
    Ok(TextPayload {
        nb_char,
        nb_lines,
        body: TextBody::Plain(content.to_string()),
    })
}

pub fn extract_tagged_text(bytes: &[u8]) -> Result<TextPayload, ExtractError> {
    let content = decode(bytes)?;
    let tags = scan_tags(content);
    if tags.is_empty() {
        return Err(ExtractError::NotTagged);
    }
    let links = tags
        .iter()
        .flat_map(|t| attributes(t))
        .filter(|(name, _)| name.eq_ignore_ascii_case("href") || name.eq_ignore_ascii_case("src"))
        .map(|(_, value)| decode_entities(value))
        .filter(|v| !v.is_empty())
        .collect();
    let (nb_char, nb_lines) = count_text(content);
    Ok(TextPayload {
        nb_char,
        nb_lines,
        body: TextBody::Tagged {
            content: content.to_string(),
            links,
        },
    })
}

/// Inner text of every start or end tag (between `<` and `>`), skipping
/// comments, declarations, processing instructions and CDATA sections.
fn scan_tags(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = s;
    while let Some(i) = rest.find('<') {
        rest = &rest[i..];
        let skip = [
            ("<!--", "-->"),
            ("<![CDATA[", "]]>"),
            ("<?", "?>"),
            ("<!", ">"),
        ]
        .into_iter()
        .find(|(open, _)| rest.starts_with(open));
        if let Some((open, close)) = skip {
            match rest[open.len()..].find(close) {
                Some(j) => rest = &rest[open.len() + j + close.len()..],
                None => break,
            }
            continue;
        }
        let after = &rest[1..];
        let is_tag = after
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '/');
        if !is_tag {
            rest = after;
            continue;
        }
        match tag_end(after) {
            Some(j) => {
                out.push(&after[..j]);
                rest = &after[j + 1..];
            }
            None => break,
        }
    }
    out
}

// Index of the closing '>' of a tag, ignoring any inside quoted values.
fn tag_end(s: &str) -> Option<usize> {
    let mut quote = None;
    for (i, c) in s.char_indices() {
        match (quote, c) {
            (None, '"' | '\'') => quote = Some(c),
            (Some(q), _) if c == q => quote = None,
            (None, '>') => return Some(i),
            (None, '<') => return None,
            _ => {}
        }
    }
    None
}

/// `(name, raw value)` pairs of a tag body such as `a href="x" target=_top`.
fn attributes(tag: &str) -> Vec<(&str, &str)> {
    let mut out = Vec::new();
    if tag.starts_with('/') {
        return out;
    }
    let mut rest = tag
        .find(|c: char| c.is_whitespace() || c == '/')
        .map_or("", |i| &tag[i..]);
    loop {
        rest = rest.trim_start_matches(|c: char| c.is_whitespace() || c == '/');
        if rest.is_empty() {
            break;
        }
        let name_end = rest
            .find(|c: char| c.is_whitespace() || c == '=' || c == '/')
            .unwrap_or(rest.len());
        let name = &rest[..name_end];
        rest = rest[name_end..].trim_start();
        let Some(after_eq) = rest.strip_prefix('=') else {
            continue;
        };
        let value_src = after_eq.trim_start();
        let (value, remaining) = match value_src.chars().next() {
            Some(q @ ('"' | '\'')) => match value_src[1..].find(q) {
                Some(j) => (&value_src[1..1 + j], &value_src[j + 2..]),
                None => (&value_src[1..], ""),
            },
            _ => {
                let end = value_src
                    .find(char::is_whitespace)
                    .unwrap_or(value_src.len());
                (&value_src[..end], &value_src[end..])
            }
        };
        out.push((name, value));
        rest = remaining;
    }
    out
}

/// Decodes the five predefined XML entities; anything else is kept verbatim.
fn decode_entities(s: &str) -> String {
    const ENTITIES: [(&str, char); 5] = [
        ("&amp;", '&'),
        ("&lt;", '<'),
        ("&gt;", '>'),
        ("&quot;", '"'),
        ("&apos;", '\''),
    ];
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        match ENTITIES.iter().find(|(e, _)| rest.starts_with(e)) {
            Some((e, c)) => {
                out.push(*c);
                rest = &rest[e.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

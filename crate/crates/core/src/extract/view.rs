//! Relational views carried as comma-separated text with a header row.

use super::ExtractError;
use crate::model::{is_iso_date, Attribute, Cell, Domain, RelationalView, Tuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViewMode {
    /// Attributes and tuples.
    #[default]
    Full,
    /// Attributes only.
    Intension,
}

impl std::str::FromStr for ViewMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(ViewMode::Full),
            "intension" => Ok(ViewMode::Intension),
            _ => Err(format!("view_mode must be full or intension, got {s:?}")),
        }
    }
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

// Sign, digits with an optional fraction, optional exponent. No inf/nan.
fn is_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    let mantissa_ok = all_digits(int) && all_digits(frac) && !(int.is_empty() && frac.is_empty());
    mantissa_ok && exponent.is_none_or(is_integer)
}

/// Strictest domain that every value satisfies: integer, real, date, then text.
pub fn infer_domain<S: AsRef<str>>(values: &[S]) -> Domain {
    if values.is_empty() {
        return Domain::Text;
    }
    let all = |pred: fn(&str) -> bool| values.iter().all(|v| pred(v.as_ref()));
    if all(is_integer) {
        Domain::Integer
    } else if all(is_decimal) {
        Domain::Real
    } else if all(is_iso_date) {
        Domain::Date
    } else {
        Domain::Text
    }
}

pub fn extract_view(
    bytes: &[u8],
    mode: ViewMode,
    query: Option<&str>,
) -> Result<RelationalView, ExtractError> {
    if let Err(e) = std::str::from_utf8(bytes) {
        return Err(ExtractError::DecodeError {
            offset: e.valid_up_to(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(ExtractError::NoHeader),
        Some(r) => r.map_err(|e| ExtractError::Csv(e.to_string()))?,
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(ExtractError::EmptyAttributeName { column: i });
        }
        if names[..i].contains(name) {
            return Err(ExtractError::DuplicateAttribute(name.clone()));
        }
    }

    let mut rows: Vec<Vec<Option<String>>> = Vec::new();
    for (row, record) in records.enumerate() {
        let record = record.map_err(|e| ExtractError::Csv(e.to_string()))?;
        if record.len() != names.len() {
            return Err(ExtractError::RaggedRow {
                row,
                expected: names.len(),
                got: record.len(),
            });
        }
        rows.push(
            record
                .iter()
                .map(|cell| (!cell.is_empty()).then(|| cell.to_string()))
                .collect(),
        );
    }

    let attributes = names
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let present: Vec<&str> = rows.iter().filter_map(|r| r[col].as_deref()).collect();
            Attribute::new(name.clone(), infer_domain(&present))
        })
        .collect();
    let tuples = match mode {
        ViewMode::Intension => Vec::new(),
        ViewMode::Full => rows
            .into_iter()
            .map(|row| Tuple {
                cells: names
                    .iter()
                    .zip(row)
                    .map(|(name, value)| Cell::new(name.clone(), value))
                    .collect(),
            })
            .collect(),
    };
    Ok(RelationalView {
        query: query.map(str::to_string),
        attributes,
        tuples,
    })
}

/// Writes the header and tuples back as RFC 4180 text; absent values become
/// empty cells.
pub fn render_view_csv(view: &RelationalView) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(view.attributes.iter().map(|a| a.name.as_str()))
        .expect("writing to memory");
    for tuple in &view.tuples {
        let row = view.attributes.iter().map(|a| {
            tuple
                .cells
                .iter()
                .find(|c| c.att_name_ref == a.name)
                .and_then(|c| c.value.as_deref())
                .unwrap_or("")
        });
        writer.write_record(row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
}

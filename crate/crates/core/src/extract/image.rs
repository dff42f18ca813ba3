//! Header metadata of BMP and PNG images.

use super::ExtractError;
use crate::model::ImagePayload;

pub const BMP_MAGIC: &[u8] = b"BM";
pub const PNG_SIGNATURE: &[u8] = &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

// File header (14) + BITMAPINFOHEADER (40).
const BMP_HEADER_LEN: usize = 54;

fn u32_le(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn i32_le(b: &[u8], at: usize) -> i32 {
    i32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn u32_be(b: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(b[at..at + 4].try_into().unwrap())
}

/// Pixels per meter to dots per inch, rounded half away from zero; `None`
/// when the field is unset or rounds to zero.
pub fn ppm_to_dpi(ppm: i64) -> Option<u32> {
    if ppm <= 0 {
        return None;
    }
    let dpi = (ppm as f64 * 0.0254).round();
    (dpi >= 1.0).then_some(dpi as u32)
}

fn nonzero(n: u32) -> Option<u32> {
    (n != 0).then_some(n)
}

pub fn extract_image(bytes: &[u8]) -> Result<ImagePayload, ExtractError> {
    if bytes.starts_with(PNG_SIGNATURE) {
        extract_png(bytes)
    } else if bytes.starts_with(BMP_MAGIC) {
        extract_bmp(bytes)
    } else {
        Err(ExtractError::UnsupportedImageFormat)
    }
}

fn extract_bmp(b: &[u8]) -> Result<ImagePayload, ExtractError> {
    if b.len() < 18 {
        return Err(ExtractError::TruncatedHeader);
    }
    if u32_le(b, 14) < 40 {
        // OS/2 core headers store 16-bit dimensions elsewhere.
        return Err(ExtractError::UnsupportedImageFormat);
    }
    if b.len() < BMP_HEADER_LEN {
        return Err(ExtractError::TruncatedHeader);
    }
    let width = i32_le(b, 18).unsigned_abs();
    // Negative height marks a top-down bitmap.
    let height = i32_le(b, 22).unsigned_abs();
    let compression = match u32_le(b, 30) {
        0 => "None".to_string(),
        code => code.to_string(),
    };
    Ok(ImagePayload {
        compression: Some(compression),
        format: Some("Bitmap".to_string()),
        resolution: ppm_to_dpi(i64::from(i32_le(b, 38))),
        length: nonzero(height),
        width: nonzero(width),
    })
}

fn extract_png(b: &[u8]) -> Result<ImagePayload, ExtractError> {
    // signature, IHDR length and type, 13 data bytes
    if b.len() < 8 + 8 + 13 || &b[12..16] != b"IHDR" {
        return Err(ExtractError::TruncatedHeader);
    }
    let width = u32_be(b, 16);
    let height = u32_be(b, 20);

    let mut resolution = None;
    let mut at = 8;
    while at + 8 <= b.len() {
        let len = u32_be(b, at) as usize;
        let kind = &b[at + 4..at + 8];
        let data = at + 8;
        if kind == b"IDAT" || kind == b"IEND" || data + len > b.len() {
            break;
        }
        if kind == b"pHYs" && len >= 9 && b[data + 8] == 1 {
            resolution = ppm_to_dpi(i64::from(u32_be(b, data)));
            break;
        }
        // data + crc
        at = data + len + 4;
    }
    Ok(ImagePayload {
        compression: Some("Deflate".to_string()),
        format: Some("PNG".to_string()),
        resolution,
        length: nonzero(height),
        width: nonzero(width),
    })
}

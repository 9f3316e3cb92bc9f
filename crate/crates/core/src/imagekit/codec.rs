//! Binary PPM (P6) read/write, PNG read/write and PGM (P5) output.

use std::io::Cursor;

use super::{ImageGray, ImageRgb};
use crate::error::{Error, Result};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes a binary PPM (P6, maxval 255) or an 8-bit PNG.
pub fn decode_image(bytes: &[u8]) -> Result<ImageRgb> {
    if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(Error::UnsupportedFormat(format!(
            "netpbm variant P{} (only binary P6 is supported)",
            bytes[1] as char
        )))
    } else {
        Err(Error::MalformedFile("unrecognized magic number".into()))
    }
}

/// Encodes as binary PPM: `P6\n<w> <h>\n255\n` followed by the RGB payload.
pub fn encode_image(img: &ImageRgb) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len() * 3);
    out.extend_from_slice(header.as_bytes());
    for px in img.pixels() {
        out.extend_from_slice(px);
    }
    out
}

/// Encodes a grayscale image as binary PGM (P5).
pub fn encode_pgm(img: &ImageGray) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

/// Encodes as an 8-bit RGB PNG.
pub fn encode_png(img: &ImageRgb) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        // Writing into a Vec cannot fail with an I/O error.
        let mut writer = enc.write_header().expect("png header");
        let flat: Vec<u8> = img.pixels().iter().flatten().copied().collect();
        writer.write_image_data(&flat).expect("png data");
    }
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedFile(format!("missing {what} in header")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedFile(format!("{what} out of range")))
    }
}

fn decode_ppm(bytes: &[u8]) -> Result<ImageRgb> {
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.read_uint("width")?;
    let height = cur.read_uint("height")?;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedFile("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedFile(format!("invalid maxval {maxval}")));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} (only 255 is supported)"
        )));
    }
    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::MalformedFile("truncated header".into())),
    }
    let n = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::MalformedFile("dimensions overflow".into()))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < n {
        return Err(Error::MalformedFile(format!(
            "payload truncated: expected {n} bytes, found {}",
            payload.len()
        )));
    }
    let data = payload[..n].chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    ImageRgb::new(width, height, data)
}

fn decode_png(bytes: &[u8]) -> Result<ImageRgb> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::MalformedFile(format!("png: {e}")))?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!("png bit depth {:?}", info.bit_depth)));
    }
    if info.color_type == png::ColorType::Indexed {
        return Err(Error::UnsupportedFormat("paletted png".into()));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::MalformedFile("png: image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::MalformedFile(format!("png: {e}")))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let channels = match frame.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err(Error::UnsupportedFormat("paletted png".into())),
    };
    let mut data = Vec::with_capacity(w * h);
    for row in buf.chunks(frame.line_size).take(h) {
        for px in row[..w * channels].chunks_exact(channels) {
            data.push(if channels < 3 {
                [px[0], px[0], px[0]]
            } else {
                [px[0], px[1], px[2]]
            });
        }
    }
    ImageRgb::new(w, h, data)
}

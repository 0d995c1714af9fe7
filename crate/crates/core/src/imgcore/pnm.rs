//! Binary Netpbm support: PGM (`P5`) and PPM (`P6`) with 8-bit samples.
//! https://netpbm.sourceforge.net/doc/pgm.html

use std::fs;
use std::path::Path;

use super::raster::{Channels, RasterImage};
use crate::error::{Error, Result};

struct Header {
    channels: Channels,
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => Channels::Gray,
        Some(b"P6") => Channels::Rgb,
        Some(other) => {
            return Err(Error::Pnm(format!(
                "unsupported magic {:?}; only P5 and P6 are read",
                String::from_utf8_lossy(other)
            )))
        }
        None => return Err(Error::Pnm("file too short for a magic number".into())),
    };

    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // Whitespace and `#` comments may separate header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(Error::Pnm("header ended early".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pnm(format!("expected a decimal number at byte {start}")));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| Error::Pnm(format!("header value {text} out of range")))?;
    }
    // Exactly one whitespace byte separates maxval from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Pnm("missing whitespace after maxval".into())),
    }

    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::Pnm("zero-sized image".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pnm(format!("maxval {maxval} unsupported; need 1..=255")));
    }
    Ok(Header {
        channels,
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos,
    })
}

/// Decodes a binary PGM or PPM. Samples are kept verbatim when `maxval`
/// is 255 and rescaled to 0..=255 otherwise.
pub fn decode(bytes: &[u8]) -> Result<RasterImage> {
    let header = parse_header(bytes)?;
    let len = header.width * header.height * header.channels.count();
    let raster = bytes
        .get(header.data_offset..header.data_offset + len)
        .ok_or_else(|| Error::Pnm(format!("raster truncated: expected {len} bytes")))?;
    let data = if header.maxval == 255 {
        raster.to_vec()
    } else {
        let max = header.maxval;
        raster
            .iter()
            .map(|&v| {
                let v = u32::from(v).min(max);
                ((v * 255 + max / 2) / max) as u8
            })
            .collect()
    };
    RasterImage::new(header.width, header.height, header.channels, data)
}

pub fn encode(img: &RasterImage) -> Vec<u8> {
    let magic = match img.channels() {
        Channels::Gray => "P5",
        Channels::Rgb => "P6",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn load(path: impl AsRef<Path>) -> Result<RasterImage> {
    decode(&fs::read(path)?)
}

pub fn save(path: impl AsRef<Path>, img: &RasterImage) -> Result<()> {
    fs::write(path, encode(img))?;
    Ok(())
}

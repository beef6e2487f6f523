//! Binary PGM (`P5`, maxval 255). `P6` input is accepted by [`read_pnm`] and
//! reduced to luminance.

use std::fs;
use std::path::Path;

use crate::appearance::Image;
use crate::error::{Error, Result};

pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

pub fn write_pgm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

/// Reads `P5` directly or `P6` converted to luminance.
pub fn read_pnm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes)
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::MalformedPgm("missing P5 magic".into()));
    }
    decode_pnm(bytes)
}

pub fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::MalformedPgm("missing P5/P6 magic".into())),
    };
    let mut header = Header { bytes, pos: 2 };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(Error::MalformedPgm("no whitespace after maxval".into())),
    }

    let (w, h) = (width as usize, height as usize);
    let needed = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::MalformedPgm(format!("image size {w}x{h} overflows")))?;
    let payload = &bytes[header.pos..];
    if payload.len() < needed {
        return Err(Error::MalformedPgm(format!(
            "truncated payload: expected {needed} bytes, found {}",
            payload.len()
        )));
    }
    let payload = &payload[..needed];
    if channels == 1 {
        Image::new(w, h, payload.to_vec())
    } else {
        Image::from_rgb(w, h, payload)
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let start = self.pos;
        self.skip_space_and_comments();
        if self.pos == start {
            return Err(Error::MalformedPgm(format!("expected whitespace before {what}")));
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[digits_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedPgm(format!("invalid {what}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_pixel_round_trip() {
        let img = Image::new(1, 1, vec![0]).unwrap();
        assert_eq!(decode_pgm(&encode_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        let img = Image::new(64, 64, (0..4096).map(|i| (i * 7 % 256) as u8).collect()).unwrap();
        write_pgm(&img, &path).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), img);
    }

    #[test]
    fn header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n2 # w\n1\n255\n".to_vec();
        bytes.extend([7, 9]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.pixels()), (2, 1, &[7u8, 9][..]));
    }

    #[test]
    fn sixteen_bit_rejected() {
        let mut bytes = b"P5 1 1 65535\n".to_vec();
        bytes.extend([0, 0]);
        assert!(matches!(decode_pgm(&bytes), Err(Error::UnsupportedMaxval(65535))));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(decode_pgm(b"P2 1 1 255\n0"), Err(Error::MalformedPgm(_))));
        assert!(matches!(decode_pgm(b"P5 2 2 255\n\x01\x02"), Err(Error::MalformedPgm(_))));
        assert!(matches!(decode_pgm(b"P5 x 2 255\n"), Err(Error::MalformedPgm(_))));
        assert!(matches!(decode_pgm(b"P5 1 1 255"), Err(Error::MalformedPgm(_))));
        // P6 is only accepted through read_pnm.
        assert!(matches!(decode_pgm(b"P6 1 1 255\n\x00\x00\x00"), Err(Error::MalformedPgm(_))));
    }

    #[test]
    fn ppm_reduced_to_luminance() {
        let img = decode_pnm(b"P6 2 1 255\n\xff\x00\x00\x00\x00\xff").unwrap();
        // round(0.299 * 255) = 76, round(0.114 * 255) = 29
        assert_eq!(img.pixels(), &[76, 29]);
    }

    #[test]
    fn pixel_bytes_that_look_like_whitespace() {
        let img = Image::new(3, 1, vec![b'\n', b' ', b'#']).unwrap();
        assert_eq!(decode_pgm(&encode_pgm(&img)).unwrap(), img);
    }

    proptest! {
        #[test]
        fn round_trip(w in 1usize..40, h in 1usize..40, seed in any::<u8>()) {
            let pixels = (0..w * h).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect();
            let img = Image::new(w, h, pixels).unwrap();
            prop_assert_eq!(decode_pgm(&encode_pgm(&img)).unwrap(), img);
        }
    }
}

//! Background histogram persistence: a `BGHIST v1` header line followed by
//! 256 whitespace-separated probabilities.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::appearance::{IntensityHistogram, BINS};
use crate::error::{Error, Result};

pub const HISTOGRAM_HEADER: &str = "BGHIST v1";

/// Values are written in shortest round-trip form, so reading back yields the
/// identical bits.
pub fn encode_histogram(hist: &IntensityHistogram) -> String {
    let mut out = String::with_capacity(BINS * 24);
    out.push_str(HISTOGRAM_HEADER);
    out.push('\n');
    for p in hist.bins() {
        writeln!(out, "{p:?}").expect("writing to a String");
    }
    out
}

pub fn decode_histogram(text: &str, origin: &Path) -> Result<IntensityHistogram> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim() == HISTOGRAM_HEADER => {}
        _ => return Err(Error::parse(origin, 1, format!("expected header `{HISTOGRAM_HEADER}`"))),
    }
    let mut values = Vec::with_capacity(BINS);
    for (n, line) in lines.enumerate() {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(origin, n + 2, format!("invalid number `{tok}`")))?;
            values.push(v);
        }
    }
    if values.len() != BINS {
        return Err(Error::parse(
            origin,
            text.lines().count(),
            format!("expected {BINS} values, found {}", values.len()),
        ));
    }
    IntensityHistogram::from_bins(&values)
}

pub fn write_histogram(hist: &IntensityHistogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_histogram(hist)).map_err(|e| Error::io(path, e))
}

pub fn read_histogram(path: impl AsRef<Path>) -> Result<IntensityHistogram> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_histogram(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appearance::{learn_background, Image};

    #[test]
    fn bit_exact_round_trip() {
        let img = Image::new(4, 4, vec![0, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 255, 255]).unwrap();
        let h = learn_background(&[img]).unwrap();
        let text = encode_histogram(&h);
        assert!(text.starts_with("BGHIST v1\n"));
        assert_eq!(text.lines().count(), 257);
        let back = decode_histogram(&text, Path::new("h")).unwrap();
        for (a, b) in h.bins().iter().zip(back.bins()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_bad_files() {
        let p = Path::new("h");
        assert!(decode_histogram("BGHIST v2\n", p).is_err());
        assert!(decode_histogram("BGHIST v1\n0.5 0.5\n", p).is_err());
        let mut many = String::from("BGHIST v1\n");
        many.push_str(&"0.00390625 ".repeat(255));
        many.push_str("oops\n");
        assert!(matches!(decode_histogram(&many, p), Err(Error::Parse { line: 2, .. })));
        // Right count but not normalized.
        let mut unnormalized = String::from("BGHIST v1\n");
        unnormalized.push_str(&"0.5 ".repeat(256));
        assert!(matches!(decode_histogram(&unnormalized, p), Err(Error::InvalidHistogram(_))));
    }
}

//! Per-frame pose estimates as CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PoseParams;

pub const TRACK_HEADER: &str = "frame,yaw,pitch,roll,tx,ty,scale,artic,\
map_yaw,map_pitch,map_roll,map_tx,map_ty,map_scale,map_artic,map_loglik";

const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRow {
    pub frame: usize,
    /// Weighted mean over the population.
    pub expected: PoseParams,
    /// Highest-weight particle.
    pub map: PoseParams,
    pub map_log_likelihood: f64,
}

/// `%.{digits}g`-style formatting: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn encode_track(rows: &[TrackRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("no track rows to write".into()));
    }
    let mut out = String::from(TRACK_HEADER);
    out.push('\n');
    for row in rows {
        write!(out, "{}", row.frame).expect("writing to a String");
        let values = row
            .expected
            .to_array()
            .into_iter()
            .chain(row.map.to_array())
            .chain([row.map_log_likelihood]);
        for v in values {
            write!(out, ",{}", format_significant(v, SIGNIFICANT_DIGITS)).expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_track(rows: &[TrackRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = encode_track(rows)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_track(path: impl AsRef<Path>) -> Result<Vec<TrackRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(TRACK_HEADER) {
        return Err(Error::parse(path, 1, "unexpected track header"));
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let err = |msg: &str| Error::parse(path, n + 2, msg);
            let mut cells = line.split(',');
            let frame = cells
                .next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| err("invalid frame index"))?;
            let values: Vec<f64> = cells
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err("invalid number"))?;
            if values.len() != 15 {
                return Err(err("expected 16 columns"));
            }
            let mut expected = [0.0; 7];
            let mut map = [0.0; 7];
            expected.copy_from_slice(&values[..7]);
            map.copy_from_slice(&values[7..14]);
            Ok(TrackRow {
                frame,
                expected: PoseParams::from_array(expected),
                map: PoseParams::from_array(map),
                map_log_likelihood: values[14],
            })
        })
        .collect()
}

//! IQ trace files: little-endian interleaved `f32` (re, im) samples plus a
//! `key=value` sidecar header at `<path>.hdr`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sidecar header; keys are kept sorted so files are byte-stable.
pub type TraceHeader = BTreeMap<String, String>;

pub fn header_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".hdr");
    PathBuf::from(p)
}

pub fn encode_samples(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_samples(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::Parse(format!(
            "IQ payload of {} bytes is not a whole number of cf32 samples",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

pub fn format_header(header: &TraceHeader) -> String {
    header.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<TraceHeader> {
    let mut out = TraceHeader::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got {line:?}", no + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn write_trace(path: &Path, samples: &[Complex64], header: &TraceHeader) -> Result<()> {
    fs::write(path, encode_samples(samples))?;
    fs::write(header_path(path), format_header(header))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<(Vec<Complex64>, TraceHeader)> {
    let samples = decode_samples(&fs::read(path)?)?;
    let header = parse_kv(&fs::read_to_string(header_path(path))?)?;
    Ok((samples, header))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_layout() {
        let b = encode_samples(&[Complex64::new(1.0, -2.0)]);
        assert_eq!(b, [0, 0, 128, 63, 0, 0, 0, 192]);
        assert_eq!(decode_samples(&b).unwrap(), vec![Complex64::new(1.0, -2.0)]);
        assert!(decode_samples(&b[..5]).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rx.cf32");
        let x = vec![Complex64::new(0.25, 0.5), Complex64::new(-1.5, 3.0)];
        let mut h = TraceHeader::new();
        h.insert("sample_rate".into(), "500000".into());
        h.insert("fft_size".into(), "256".into());
        write_trace(&path, &x, &h).unwrap();
        let (y, g) = read_trace(&path).unwrap();
        assert_eq!(x, y);
        assert_eq!(h, g);
        assert_eq!(
            fs::read_to_string(header_path(&path)).unwrap(),
            "fft_size=256\nsample_rate=500000\n"
        );
    }

    #[test]
    fn kv_errors() {
        assert!(parse_kv("# c\n\na = 1\n").unwrap()["a"] == "1");
        assert!(matches!(parse_kv("novalue"), Err(Error::Parse(_))));
    }
}

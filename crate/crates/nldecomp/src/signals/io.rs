//! Signal file formats.
//!
//! Two interchangeable formats carry signals on disk:
//!
//! - CSV with header `index,i,q`; real signals write `q = 0`. Values use
//!   shortest round-trip float formatting, so read(write(s)) is bit-exact.
//! - Raw little-endian binary: a 16-byte header (magic `NLDS`, version u32,
//!   sample rate f64) followed by interleaved `f64 i, f64 q` samples.
//!
//! Neither format stores the domain tag; a record whose imaginary parts are
//! all exactly zero reads back as `Real`, which round-trips every signal this
//! crate can construct.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Domain, SampledSignal};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"NLDS";
const VERSION: u32 = 1;

fn infer_domain(samples: &[Complex64]) -> Domain {
    if samples.iter().all(|s| s.im == 0.0) {
        Domain::Real
    } else {
        Domain::ComplexBaseband
    }
}

pub fn write_csv(sig: &SampledSignal, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,i,q")?;
    for (n, s) in sig.samples().iter().enumerate() {
        writeln!(w, "{},{},{}", n, s.re, s.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path, sample_rate_hz: f64) -> Result<SampledSignal> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "index,i,q" => {}
        Some(Ok(h)) => return Err(Error::BadFormat(format!("unexpected CSV header `{h}`"))),
        Some(Err(e)) => return Err(e.into()),
        None => return Err(Error::BadFormat("empty CSV file".into())),
    }
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let bad = |what: &str| Error::BadFormat(format!("line {}: {what}", lineno + 2));
        let _index = parts.next().ok_or_else(|| bad("missing index"))?;
        let re: f64 = parts
            .next()
            .ok_or_else(|| bad("missing i"))?
            .trim()
            .parse()
            .map_err(|_| bad("unparsable i"))?;
        let im: f64 = parts
            .next()
            .ok_or_else(|| bad("missing q"))?
            .trim()
            .parse()
            .map_err(|_| bad("unparsable q"))?;
        samples.push(Complex64::new(re, im));
    }
    let domain = infer_domain(&samples);
    SampledSignal::new(samples, sample_rate_hz, domain)
}

pub fn write_binary(sig: &SampledSignal, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&sig.sample_rate_hz().to_le_bytes())?;
    for s in sig.samples() {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<SampledSignal> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| Error::BadFormat("truncated header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::BadFormat("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::BadFormat(format!("unsupported version {version}")));
    }
    let sample_rate_hz = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 16 != 0 {
        return Err(Error::BadFormat("truncated sample data".into()));
    }
    let samples: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    let domain = infer_domain(&samples);
    SampledSignal::new(samples, sample_rate_hz, domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::generate_filtered_noise;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let sig = generate_filtered_noise(21, 512, 0.7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.bin");
        write_binary(&sig, &path).unwrap();
        let back = read_binary(&path).unwrap();
        assert_eq!(sig.samples(), back.samples());
        assert_eq!(sig.sample_rate_hz(), back.sample_rate_hz());
        assert_eq!(back.domain(), Domain::ComplexBaseband);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let sig = generate_filtered_noise(22, 256, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        write_csv(&sig, &path).unwrap();
        let back = read_csv(&path, sig.sample_rate_hz()).unwrap();
        assert_eq!(sig.samples(), back.samples());
    }

    #[test]
    fn real_signals_round_trip_domain() {
        let sig = SampledSignal::from_real(&[1.5, -2.25, 0.0, 1e-300], 48000.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("r.bin");
        let csv = dir.path().join("r.csv");
        write_binary(&sig, &bin).unwrap();
        write_csv(&sig, &csv).unwrap();
        assert_eq!(read_binary(&bin).unwrap().domain(), Domain::Real);
        let back = read_csv(&csv, 48000.0).unwrap();
        assert_eq!(back.domain(), Domain::Real);
        assert_eq!(back.samples(), sig.samples());
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"JUNKjunkjunkjunk0123456789abcdef").unwrap();
        assert!(matches!(read_binary(&path), Err(Error::BadFormat(_))));
    }
}

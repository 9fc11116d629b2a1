//! Spectrum archive: one JSON header line, then per sample a little-endian
//! u64 eigenvalue count followed by little-endian f64 (re, im) pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt archive at byte {offset}: {reason}")]
    Corrupt { offset: u64, reason: String },
    #[error("header parse error: {0}")]
    Header(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub version: u32,
    pub endianness: String,
    pub samples: u64,
    pub config: serde_json::Value,
}

pub const ARCHIVE_VERSION: u32 = 1;

/// Write spectra with a config echo in the header.
pub fn save_archive(
    path: &Path,
    config: serde_json::Value,
    spectra: &[Vec<Complex64>],
) -> Result<(), ArchiveError> {
    let header = ArchiveHeader {
        version: ARCHIVE_VERSION,
        endianness: "little".into(),
        samples: spectra.len() as u64,
        config,
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for eigs in spectra {
        w.write_all(&(eigs.len() as u64).to_le_bytes())?;
        for z in eigs {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read spectra back; bit-exact round trip.
pub fn load_archive(path: &Path) -> Result<(ArchiveHeader, Vec<Vec<Complex64>>), ArchiveError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = Vec::new();
    let mut offset = 0u64;
    loop {
        let mut byte = [0u8; 1];
        match r.read_exact(&mut byte) {
            Ok(()) => {
                offset += 1;
                if byte[0] == b'\n' {
                    break;
                }
                header_line.push(byte[0]);
            }
            Err(_) => {
                return Err(ArchiveError::Corrupt {
                    offset,
                    reason: "missing newline-terminated header".into(),
                })
            }
        }
        if header_line.len() > 1 << 20 {
            return Err(ArchiveError::Corrupt { offset, reason: "header too large".into() });
        }
    }
    let header: ArchiveHeader = serde_json::from_slice(&header_line)?;
    if header.endianness != "little" {
        return Err(ArchiveError::Corrupt {
            offset,
            reason: format!("unsupported endianness marker {:?}", header.endianness),
        });
    }
    let mut spectra = Vec::with_capacity(header.samples as usize);
    for s in 0..header.samples {
        let mut len_buf = [0u8; 8];
        r.read_exact(&mut len_buf).map_err(|_| ArchiveError::Corrupt {
            offset,
            reason: format!("truncated length prefix of sample {s}"),
        })?;
        offset += 8;
        let count = u64::from_le_bytes(len_buf);
        let mut eigs = Vec::with_capacity(count as usize);
        let mut pair = [0u8; 16];
        for p in 0..count {
            r.read_exact(&mut pair).map_err(|_| ArchiveError::Corrupt {
                offset,
                reason: format!("truncated eigenvalue {p} of sample {s}"),
            })?;
            offset += 16;
            let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
            let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
            eigs.push(Complex64::new(re, im));
        }
        spectra.push(eigs);
    }
    // anything after the declared samples is corruption
    let mut trailing = [0u8; 1];
    if r.read_exact(&mut trailing).is_ok() {
        return Err(ArchiveError::Corrupt { offset, reason: "trailing bytes after last sample".into() });
    }
    Ok((header, spectra))
}

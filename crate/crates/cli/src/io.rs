//! Matrix files, boundary CSV output and input digests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fovkit::{c64, CMat};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exit::Failure;

/// On-disk matrix: `{"order": n, "entries": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub order: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMat) -> Self {
        Self {
            order: m.order(),
            entries: m
                .rows()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat, String> {
        if self.entries.len() != self.order {
            return Err(format!(
                "declared order {} but found {} rows",
                self.order,
                self.entries.len()
            ));
        }
        let mut data = Vec::with_capacity(self.order * self.order);
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.order {
                return Err(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.order
                ));
            }
            data.extend(row.iter().map(|&[re, im]| c64(re, im)));
        }
        CMat::new(self.order, data).map_err(|e| e.to_string())
    }
}

/// A parsed input file together with what identifies it in reports.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub path: PathBuf,
    pub sha256: String,
    pub matrix: CMat,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_matrix(path: &Path) -> Result<LoadedMatrix, Failure> {
    let bytes =
        fs::read(path).map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let matrix = file
        .to_matrix()
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    Ok(LoadedMatrix {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
        matrix,
    })
}

/// `theta,re,im` rows with LF line endings; floats in shortest round-trip form.
pub fn boundary_csv(samples: &[(f64, fovkit::CScalar)]) -> String {
    let mut out = String::from("theta,re,im\n");
    for (theta, z) in samples {
        writeln!(out, "{theta:?},{:?},{:?}", z.re, z.im).expect("writing to a String cannot fail");
    }
    out
}

/// Parses text produced by [`boundary_csv`].
#[cfg(test)]
pub fn parse_boundary_csv(text: &str) -> Result<Vec<(f64, fovkit::CScalar)>, String> {
    let mut lines = text.lines();
    if lines.next() != Some("theta,re,im") {
        return Err("missing header `theta,re,im`".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(format!("row {}: expected 3 fields", i + 1));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1));
            Ok((num(fields[0])?, c64(num(fields[1])?, num(fields[2])?)))
        })
        .collect()
}

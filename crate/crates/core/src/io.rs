//! JSON file formats for matrices, datasets and orbit points.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectra::{CMatrix, CVector, Dataset, HermitianMatrix, OrbitPoint, Spectrum, C64};

/// `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (r, c) = m.shape();
        let re = (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..r).map(|i| (0..c).map(|j| m[(i, j)].im).collect()).collect();
        Self { dim: r, re, im }
    }

    /// Square `dim × dim` matrix. Ragged or wrongly sized rows are rejected.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(invalid("matrix dim must be positive"));
        }
        let ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !ok(&self.re) || !ok(&self.im) {
            return Err(invalid(format!("matrix rows do not match dim {d}")));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// `{"dim": d, "points": [{"re": [...], "im": [...]}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub dim: usize,
    pub points: Vec<VectorFile>,
}

impl DatasetFile {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let points = ds
            .points()
            .iter()
            .map(|p| VectorFile { re: p.iter().map(|z| z.re).collect(), im: p.iter().map(|z| z.im).collect() })
            .collect();
        Self { dim: ds.dim(), points }
    }

    pub fn to_dataset(&self) -> Result<Dataset> {
        let mut pts = Vec::with_capacity(self.points.len());
        for p in &self.points {
            if p.re.len() != self.dim || p.im.len() != self.dim {
                return Err(invalid(format!("dataset point does not match dim {}", self.dim)));
            }
            pts.push(CVector::from_iterator(self.dim, p.re.iter().zip(&p.im).map(|(a, b)| C64::new(*a, *b))));
        }
        Dataset::new(self.dim, pts)
    }
}

#[derive(Serialize, Deserialize)]
struct OrbitPointFile {
    u: MatrixFile,
    spectrum: Spectrum,
}

impl Serialize for OrbitPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OrbitPointFile { u: MatrixFile::from_matrix(self.u()), spectrum: self.spectrum().clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrbitPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = OrbitPointFile::deserialize(d)?;
        let u = f.u.to_matrix().map_err(serde::de::Error::custom)?;
        OrbitPoint::new(u, f.spectrum).map_err(serde::de::Error::custom)
    }
}

/// Input for mechanisms: either a matrix file or a dataset file.
pub enum MatrixOrDataset {
    Matrix(HermitianMatrix),
    Dataset(Dataset),
}

/// Reads a matrix file, falling back to the dataset format when the
/// document has a `points` key.
pub fn read_matrix_or_dataset(path: &Path) -> Result<MatrixOrDataset> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("points").is_some() {
        let f: DatasetFile = serde_json::from_value(value)?;
        Ok(MatrixOrDataset::Dataset(f.to_dataset()?))
    } else {
        let f: MatrixFile = serde_json::from_value(value)?;
        Ok(MatrixOrDataset::Matrix(f.to_hermitian()?))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &HermitianMatrix) -> Result<()> {
    write_json(path, &MatrixFile::from_matrix(m.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = HermitianMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.5, -0.25), C64::new(0.5, 0.25), C64::new(-2.0, 0.0)],
        ))
        .unwrap();
        let f = MatrixFile::from_matrix(m.matrix());
        let text = serde_json::to_string(&f).unwrap();
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_hermitian().unwrap(), m);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let f = MatrixFile { dim: 2, re: vec![vec![1.0, 0.0], vec![0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(f.to_matrix().is_err());
    }

    #[test]
    fn dataset_round_trip_and_norm_check() {
        let f = DatasetFile { dim: 2, points: vec![VectorFile { re: vec![0.6, 0.0], im: vec![0.0, 0.8] }] };
        let ds = f.to_dataset().unwrap();
        assert_eq!(DatasetFile::from_dataset(&ds), f);
        let bad = DatasetFile { dim: 2, points: vec![VectorFile { re: vec![1.0, 1.0], im: vec![0.0, 0.0] }] };
        assert!(bad.to_dataset().is_err());
    }

    #[test]
    fn orbit_point_round_trip() {
        let p = OrbitPoint::at_identity(Spectrum::orbit_target(&[2.0], 3).unwrap());
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.starts_with(r#"{"u":{"dim":3"#));
        let back: OrbitPoint = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}

//! Deterministic JSON + base64 serialization of representations.
//!
//! Matrices are serialized as little-endian column-major `f64` (or
//! interleaved re/im `f64` pairs for complex matrices) wrapped in base64;
//! loading reproduces every matrix bit-exactly.  The header records the
//! construction parameters and the basis-order convention.

use base64::Engine;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::boundary::CliffordRep;
use crate::error::{Error, Result};
use crate::fock::{FockBudget, FockSpace, TruncatedRep};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixBlob {
    pub rows: usize,
    pub cols: usize,
    /// `"f64"` or `"c64"`.
    pub dtype: String,
    pub data_b64: String,
}

impl MatrixBlob {
    pub fn from_real(m: &DMatrix<f64>) -> MatrixBlob {
        let mut bytes = Vec::with_capacity(m.len() * 8);
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                bytes.extend_from_slice(&m[(i, j)].to_le_bytes());
            }
        }
        MatrixBlob {
            rows: m.nrows(),
            cols: m.ncols(),
            dtype: "f64".into(),
            data_b64: base64::engine::general_purpose::STANDARD.encode(bytes),
        }
    }

    pub fn from_complex(m: &DMatrix<Complex64>) -> MatrixBlob {
        let mut bytes = Vec::with_capacity(m.len() * 16);
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                bytes.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                bytes.extend_from_slice(&m[(i, j)].im.to_le_bytes());
            }
        }
        MatrixBlob {
            rows: m.nrows(),
            cols: m.ncols(),
            dtype: "c64".into(),
            data_b64: base64::engine::general_purpose::STANDARD.encode(bytes),
        }
    }

    pub fn to_real(&self) -> Result<DMatrix<f64>> {
        if self.dtype != "f64" {
            return Err(Error::Unsupported(format!(
                "expected f64 blob, got {}",
                self.dtype
            )));
        }
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(&self.data_b64)
            .map_err(|e| Error::Numerical(format!("base64: {e}")))?;
        if bytes.len() != self.rows * self.cols * 8 {
            return Err(Error::DimensionMismatch("blob size".into()));
        }
        let mut m = DMatrix::<f64>::zeros(self.rows, self.cols);
        let mut k = 0;
        for j in 0..self.cols {
            for i in 0..self.rows {
                m[(i, j)] = f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
                k += 8;
            }
        }
        Ok(m)
    }

    pub fn to_complex(&self) -> Result<DMatrix<Complex64>> {
        if self.dtype != "c64" {
            return Err(Error::Unsupported(format!(
                "expected c64 blob, got {}",
                self.dtype
            )));
        }
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(&self.data_b64)
            .map_err(|e| Error::Numerical(format!("base64: {e}")))?;
        if bytes.len() != self.rows * self.cols * 16 {
            return Err(Error::DimensionMismatch("blob size".into()));
        }
        let mut m = DMatrix::<Complex64>::zeros(self.rows, self.cols);
        let mut k = 0;
        for j in 0..self.cols {
            for i in 0..self.rows {
                let re = f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
                let im = f64::from_le_bytes(bytes[k + 8..k + 16].try_into().unwrap());
                m[(i, j)] = Complex64::new(re, im);
                k += 16;
            }
        }
        Ok(m)
    }
}

/// Serialized truncated Fock representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepExport {
    pub schema_version: String,
    pub kind: String,
    pub d: usize,
    pub q: f64,
    pub n_max: usize,
    pub basis_order: String,
    /// Spectral cutoff used for the orthonormalization fallback.
    pub spectral_cutoff: f64,
    pub grading: Vec<usize>,
    pub orthonormality_defect: f64,
    pub discarded_dimensions: usize,
    pub matrices: BTreeMap<String, MatrixBlob>,
}

pub fn export_rep(rep: &TruncatedRep) -> RepExport {
    let mut matrices = BTreeMap::new();
    matrices.insert("gram".to_string(), MatrixBlob::from_real(rep.gram()));
    matrices.insert("to_on".to_string(), MatrixBlob::from_real(rep.to_on()));
    matrices.insert("from_on".to_string(), MatrixBlob::from_real(rep.from_on()));
    for i in 0..rep.d() {
        matrices.insert(
            format!("a_dag_{}", i + 1),
            MatrixBlob::from_real(rep.a_dag(i)),
        );
    }
    RepExport {
        schema_version: SCHEMA_VERSION.into(),
        kind: "truncated_fock_rep".into(),
        d: rep.d(),
        q: rep.q(),
        n_max: rep.n_max(),
        basis_order: "length-then-lexicographic".into(),
        spectral_cutoff: 1e-10,
        grading: rep.grading().to_vec(),
        orthonormality_defect: rep.orthonormality_defect(),
        discarded_dimensions: rep.discarded_dimensions(),
        matrices,
    }
}

pub fn load_rep(export: &RepExport, budget: &FockBudget) -> Result<TruncatedRep> {
    if export.schema_version != SCHEMA_VERSION {
        return Err(Error::Unsupported(format!(
            "schema version {} (expected {})",
            export.schema_version, SCHEMA_VERSION
        )));
    }
    if export.kind != "truncated_fock_rep" {
        return Err(Error::Unsupported(format!("kind {}", export.kind)));
    }
    let space = FockSpace::new(export.d, export.q, export.n_max, budget)?;
    let get = |name: &str| -> Result<DMatrix<f64>> {
        export
            .matrices
            .get(name)
            .ok_or_else(|| Error::Unsupported(format!("missing matrix {name}")))?
            .to_real()
    };
    let gram = get("gram")?;
    let to_on = get("to_on")?;
    let from_on = get("from_on")?;
    let mut a_dag = Vec::with_capacity(export.d);
    for i in 0..export.d {
        a_dag.push(get(&format!("a_dag_{}", i + 1))?);
    }
    if gram.nrows() != space.dim() || to_on.nrows() != space.dim() {
        return Err(Error::DimensionMismatch(
            "matrix dimensions vs header".into(),
        ));
    }
    Ok(TruncatedRep::from_raw_parts(
        space,
        gram,
        to_on,
        from_on,
        a_dag,
        export.grading.clone(),
        export.orthonormality_defect,
        export.discarded_dimensions,
    ))
}

/// Serialized Clifford representation (same container format, extra fields).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CliffordExport {
    pub schema_version: String,
    pub kind: String,
    pub r: usize,
    pub dim: usize,
    /// Central eigenvalue label (re, im) for an odd-`r` irreducible.
    pub central_label: Option<(f64, f64)>,
    pub matrices: BTreeMap<String, MatrixBlob>,
}

pub fn export_clifford(rep: &CliffordRep) -> CliffordExport {
    let mut matrices = BTreeMap::new();
    for (i, s) in rep.s_matrices.iter().enumerate() {
        matrices.insert(format!("s_{}", i + 1), MatrixBlob::from_complex(s));
    }
    CliffordExport {
        schema_version: SCHEMA_VERSION.into(),
        kind: "clifford_rep".into(),
        r: rep.r,
        dim: rep.dim,
        central_label: rep.central_label.map(|l| (l.re, l.im)),
        matrices,
    }
}

/// Load the generator matrices of a serialized Clifford representation.
pub fn load_clifford_matrices(export: &CliffordExport) -> Result<Vec<DMatrix<Complex64>>> {
    if export.kind != "clifford_rep" {
        return Err(Error::Unsupported(format!("kind {}", export.kind)));
    }
    let mut out = Vec::with_capacity(export.r);
    for i in 0..export.r {
        let blob = export
            .matrices
            .get(&format!("s_{}", i + 1))
            .ok_or_else(|| Error::Unsupported(format!("missing s_{}", i + 1)))?;
        let m = blob.to_complex()?;
        if m.nrows() != export.dim {
            return Err(Error::DimensionMismatch("generator dimension".into()));
        }
        out.push(m);
    }
    Ok(out)
}

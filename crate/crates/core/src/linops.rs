/*
Copyright 2026 The vmpladmm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Linear operators `R^cols -> R^rows` with adjoints and the spectral
//! queries the convergence constants are built from.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Closure backing one direction of a matrix-free operator.
pub type ApplyFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

pub const DEFAULT_POWER_TOL: f64 = 1e-8;
pub const DEFAULT_POWER_MAX_ITER: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Adjoint,
}

/// Which Gram matrix a minimum-eigenvalue query refers to: `op* op` or `op op*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramSide {
    Gram,
    Cogram,
}

/// An operator known only through its action. Spectral information cannot be
/// recovered reliably from the action alone, so it has to be declared.
#[derive(Clone)]
pub struct MatrixFree {
    rows: usize,
    cols: usize,
    forward: ApplyFn,
    adjoint: ApplyFn,
    pub declared_norm: Option<f64>,
    pub declared_gram_min_eig: Option<f64>,
    pub declared_cogram_min_eig: Option<f64>,
}

impl MatrixFree {
    pub fn new(rows: usize, cols: usize, forward: ApplyFn, adjoint: ApplyFn) -> Self {
        Self {
            rows,
            cols,
            forward,
            adjoint,
            declared_norm: None,
            declared_gram_min_eig: None,
            declared_cogram_min_eig: None,
        }
    }

    pub fn with_norm(mut self, norm: f64) -> Self {
        self.declared_norm = Some(norm);
        self
    }

    pub fn with_gram_min_eig(mut self, value: f64) -> Self {
        self.declared_gram_min_eig = Some(value);
        self
    }

    pub fn with_cogram_min_eig(mut self, value: f64) -> Self {
        self.declared_cogram_min_eig = Some(value);
        self
    }
}

impl fmt::Debug for MatrixFree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixFree")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("declared_norm", &self.declared_norm)
            .field("declared_gram_min_eig", &self.declared_gram_min_eig)
            .field("declared_cogram_min_eig", &self.declared_cogram_min_eig)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum LinearOperator {
    Dense(Matrix),
    ScaledIdentity { dim: usize, scale: f64 },
    Diagonal(Vector),
    MatrixFree(MatrixFree),
}

/// `op_norm` is the largest singular value; the two eigenvalues are the
/// smallest eigenvalues of `op* op` and `op op*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds {
    pub op_norm: f64,
    pub gram_min_eig: f64,
    pub cogram_min_eig: f64,
}

impl LinearOperator {
    pub fn identity(dim: usize) -> Self {
        Self::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn neg_identity(dim: usize) -> Self {
        Self::ScaledIdentity { dim, scale: -1.0 }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self::ScaledIdentity { dim, scale }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        Self::Diagonal(Vector::from_column_slice(entries))
    }

    pub fn dense(matrix: Matrix) -> Self {
        Self::Dense(matrix)
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::Dense(Matrix::from_row_slice(rows, cols, data))
    }

    pub fn rows(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::ScaledIdentity { dim, .. } => *dim,
            Self::Diagonal(d) => d.len(),
            Self::MatrixFree(mf) => mf.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Self::Dense(m) => m.ncols(),
            Self::ScaledIdentity { dim, .. } => *dim,
            Self::Diagonal(d) => d.len(),
            Self::MatrixFree(mf) => mf.cols,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Dense(_) => "dense-matrix",
            Self::ScaledIdentity { .. } => "scaled-identity",
            Self::Diagonal(_) => "diagonal",
            Self::MatrixFree(_) => "matrix-free-callback",
        }
    }

    pub fn apply(&self, v: &Vector, mode: Mode) -> Result<Vector> {
        let (expected, out_dim) = match mode {
            Mode::Forward => (self.cols(), self.rows()),
            Mode::Adjoint => (self.rows(), self.cols()),
        };
        check_dim("linear operator input", expected, v.len())?;
        let out = match (self, mode) {
            (Self::Dense(m), Mode::Forward) => m * v,
            (Self::Dense(m), Mode::Adjoint) => m.tr_mul(v),
            (Self::ScaledIdentity { scale, .. }, _) => v * *scale,
            (Self::Diagonal(d), _) => d.component_mul(v),
            (Self::MatrixFree(mf), Mode::Forward) => (mf.forward)(v),
            (Self::MatrixFree(mf), Mode::Adjoint) => (mf.adjoint)(v),
        };
        check_dim("linear operator output", out_dim, out.len())?;
        Ok(out)
    }

    pub fn forward(&self, v: &Vector) -> Result<Vector> {
        self.apply(v, Mode::Forward)
    }

    pub fn adjoint(&self, v: &Vector) -> Result<Vector> {
        self.apply(v, Mode::Adjoint)
    }

    /// Dense copy of the operator, when one exists.
    pub fn to_dense(&self) -> Option<Matrix> {
        match self {
            Self::Dense(m) => Some(m.clone()),
            Self::ScaledIdentity { dim, scale } => Some(Matrix::identity(*dim, *dim) * *scale),
            Self::Diagonal(d) => Some(Matrix::from_diagonal(d)),
            Self::MatrixFree(_) => None,
        }
    }

    /// Largest singular value.
    ///
    /// Dense operators run power iteration on `op* op`, stopping once the
    /// eigen-residual `|op* op v - lambda v|` drops below `tol * lambda`.
    /// Diagonal and scaled-identity operators are answered exactly and
    /// matrix-free operators return their declared norm.
    pub fn op_norm(&self, tol: f64, max_iter: usize) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("power iteration tol must be > 0, got {tol}")));
        }
        match self {
            Self::ScaledIdentity { scale, .. } => Ok(scale.abs()),
            Self::Diagonal(d) => Ok(d.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))),
            Self::MatrixFree(mf) => mf.declared_norm.ok_or(Error::MissingBound("operator norm")),
            Self::Dense(m) => power_iteration_norm(m, tol, max_iter),
        }
    }

    pub fn op_norm_default(&self) -> Result<f64> {
        self.op_norm(DEFAULT_POWER_TOL, DEFAULT_POWER_MAX_ITER)
    }

    pub fn gram_min_eig(&self, side: GramSide) -> Result<f64> {
        match self {
            Self::ScaledIdentity { scale, .. } => Ok(scale * scale),
            Self::Diagonal(d) => Ok(d.iter().fold(f64::INFINITY, |acc, x| acc.min(x * x))),
            Self::MatrixFree(mf) => match side {
                GramSide::Gram => mf
                    .declared_gram_min_eig
                    .ok_or(Error::MissingBound("Gram minimum eigenvalue")),
                GramSide::Cogram => mf
                    .declared_cogram_min_eig
                    .ok_or(Error::MissingBound("co-Gram minimum eigenvalue")),
            },
            Self::Dense(m) => {
                let gram = match side {
                    GramSide::Gram => m.tr_mul(m),
                    GramSide::Cogram => m * m.transpose(),
                };
                let eig = SymmetricEigen::new(gram);
                let min = eig.eigenvalues.iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
                Ok(min.max(0.0))
            }
        }
    }

    pub fn spectral_bounds(&self) -> Result<SpectralBounds> {
        Ok(SpectralBounds {
            op_norm: self.op_norm_default()?,
            gram_min_eig: self.gram_min_eig(GramSide::Gram)?,
            cogram_min_eig: self.gram_min_eig(GramSide::Cogram)?,
        })
    }

    /// `Some(s)` when the operator is exactly `s * I`, in any representation.
    pub fn as_scaled_identity(&self) -> Option<f64> {
        match self {
            Self::ScaledIdentity { scale, .. } => Some(*scale),
            Self::Diagonal(d) => {
                let first = *d.iter().next()?;
                d.iter().all(|&x| x == first).then_some(first)
            }
            Self::Dense(m) => {
                if !m.is_square() || m.nrows() == 0 {
                    return None;
                }
                let s = m[(0, 0)];
                let exact = m.iter().enumerate().all(|(idx, &x)| {
                    let (i, j) = (idx % m.nrows(), idx / m.nrows());
                    if i == j {
                        x == s
                    } else {
                        x == 0.0
                    }
                });
                exact.then_some(s)
            }
            Self::MatrixFree(_) => None,
        }
    }

    /// Reads a dense, header-free, row-major CSV matrix.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        read_csv_matrix(reader).map(Self::Dense)
    }
}

pub(crate) fn read_csv_matrix<R: Read>(reader: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let width = record.len();
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Dimension {
                    context: "csv row width",
                    expected: c,
                    got: width,
                })
            }
            _ => {}
        }
        for field in record.iter() {
            let value: f64 = field
                .parse()
                .map_err(|_| Error::Parameter(format!("cannot parse `{field}` as a number")))?;
            data.push(value);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Parameter("empty csv matrix".into()))?;
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

pub(crate) fn write_csv_matrix<W: std::io::Write>(writer: W, m: &Matrix) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..m.nrows() {
        wtr.write_record(m.row(i).iter().map(|x| format!("{x:.17e}")))?;
    }
    wtr.flush()?;
    Ok(())
}

fn power_start(n: usize) -> Vector {
    // all-ones direction plus a small deterministic tilt
    let mut v = Vector::from_fn(n, |i, _| 1.0 + 1e-3 * (((i * 7919) % 17) as f64 / 17.0 - 0.5));
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    v
}

fn power_iteration_norm(m: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return Ok(0.0);
    }
    let mut v = power_start(n);
    for _ in 0..max_iter {
        let w = m.tr_mul(&(m * &v));
        let lambda = v.dot(&w);
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return Ok(0.0);
        }
        let residual = (&w - &v * lambda).norm();
        if residual <= tol * lambda {
            return Ok(lambda.max(0.0).sqrt());
        }
        v = w / w_norm;
    }
    Err(Error::Convergence {
        iterations: max_iter,
    })
}

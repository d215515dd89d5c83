//! Fixed-size real matrix algebra (2×2, 3×3, 4×4) used by the transforms and
//! the polar decomposition.
//!
//! Storage is row-major. [`Mat4::at`] uses 1-based `(u, v)` indices so that
//! element formulas read the same way they are usually printed, e.g.
//! `r.at(2, 4)` for the second-row, fourth-column Mueller element.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular (|det| = {det:e}, threshold {threshold:e})")]
    Singular { det: f64, threshold: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
}

/// A 2-D point or displacement in continuous pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn inverse(&self) -> Result<Mat2, LinalgError> {
        let det = self.det();
        let threshold = 1e-12 * self.max_abs().powi(2);
        if det.abs() <= threshold || !det.is_finite() {
            return Err(LinalgError::Singular { det, threshold });
        }
        let m = &self.0;
        Ok(Mat2([
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ]))
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        Vec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }

    fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |a, &b| a.max(b.abs()))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        Mat2(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn from_diag(d: [f64; 3]) -> Mat3 {
        let mut m = Mat3::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn transpose(&self) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        self + rhs.scale(-1.0)
    }
}

/// A real 4×4 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Default for Mat4 {
    fn default() -> Self {
        Mat4::IDENTITY
    }
}

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);
    pub const ZERO: Mat4 = Mat4([[0.0; 4]; 4]);

    pub fn from_diag(d: [f64; 4]) -> Mat4 {
        let mut m = Mat4::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Builds a matrix from 16 row-major values.
    pub fn from_row_major(v: &[f64]) -> Mat4 {
        assert_eq!(v.len(), 16, "a 4x4 matrix needs 16 values");
        let mut m = Mat4::ZERO;
        for (i, row) in m.0.iter_mut().enumerate() {
            row.copy_from_slice(&v[4 * i..4 * i + 4]);
        }
        m
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (i, row) in self.0.iter().enumerate() {
            out[4 * i..4 * i + 4].copy_from_slice(row);
        }
        out
    }

    /// Element at 1-based row `u`, column `v`.
    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.0[u - 1][v - 1]
    }

    /// Block form `[[a, bᵀ], [c, d]]` with a scalar corner and a 3×3 lower block.
    pub fn from_blocks(a: f64, top: [f64; 3], left: [f64; 3], lower: Mat3) -> Mat4 {
        let mut m = Mat4::ZERO;
        m.0[0][0] = a;
        for i in 0..3 {
            m.0[0][i + 1] = top[i];
            m.0[i + 1][0] = left[i];
            for j in 0..3 {
                m.0[i + 1][j + 1] = lower.0[i][j];
            }
        }
        m
    }

    /// Lower-right 3×3 block.
    pub fn lower_block(&self) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i + 1][j + 1];
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat4 {
        let mut out = Mat4::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn scale(&self, s: f64) -> Mat4 {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// True when `self · selfᵀ` is the identity within `tol` (max-abs).
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        (*self * self.transpose()).max_abs_diff(&Mat4::IDENTITY) <= tol
    }

    /// Determinant and inverse by partial-pivot Gauss-Jordan elimination.
    ///
    /// The matrix is rejected as singular when `|det| <= 1e-12 · ‖m‖_F⁴`.
    pub fn inverse(&self) -> Result<Mat4, LinalgError> {
        let norm = self.frobenius_norm();
        let threshold = 1e-12 * norm.powi(4);
        let mut a = self.0;
        let mut inv = Mat4::IDENTITY.0;
        let mut det = 1.0;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap_or(col);
            if a[pivot][col] == 0.0 {
                return Err(LinalgError::Singular { det: 0.0, threshold });
            }
            if pivot != col {
                a.swap(pivot, col);
                inv.swap(pivot, col);
                det = -det;
            }
            let p = a[col][col];
            det *= p;
            let recip = 1.0 / p;
            for j in 0..4 {
                a[col][j] *= recip;
                inv[col][j] *= recip;
            }
            for row in 0..4 {
                if row == col {
                    continue;
                }
                let f = a[row][col];
                if f != 0.0 {
                    for j in 0..4 {
                        a[row][j] -= f * a[col][j];
                        inv[row][j] -= f * inv[col][j];
                    }
                }
            }
        }
        if !(det.abs() > threshold) || !det.is_finite() {
            return Err(LinalgError::Singular { det, threshold });
        }
        Ok(Mat4(inv))
    }

    pub fn det(&self) -> f64 {
        let mut a = self.0;
        let mut det = 1.0;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap_or(col);
            if a[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for row in col + 1..4 {
                let f = a[row][col] / a[col][col];
                for j in col..4 {
                    a[row][j] -= f * a[col][j];
                }
            }
        }
        det
    }

    /// Similarity transform `t · self · t⁻¹`.
    pub fn conjugate(&self, t: &Mat4) -> Result<Mat4, LinalgError> {
        Ok(*t * *self * t.inverse()?)
    }

    /// `t · self · tᵀ`, the similarity transform for an orthogonal `t`.
    #[inline]
    pub fn conjugate_orthogonal(&self, t: &Mat4) -> Mat4 {
        *t * *self * t.transpose()
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    #[inline]
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            let a = &self.0[i];
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[0] * rhs.0[0][j] + a[1] * rhs.0[1][j] + a[2] * rhs.0[2][j] + a[3] * rhs.0[3][j];
            }
        }
        Mat4(out)
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        let mut out = self;
        out.0
            .iter_mut()
            .flatten()
            .zip(rhs.0.iter().flatten())
            .for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        self + (-rhs)
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale(-1.0)
    }
}

/// Inverse of a 4×4 matrix.
pub fn invert4(m: &Mat4) -> Result<Mat4, LinalgError> {
    m.inverse()
}

/// `t · m · t⁻¹` for any invertible `t`.
pub fn mat4_conjugate(m: &Mat4, t: &Mat4) -> Result<Mat4, LinalgError> {
    m.conjugate(t)
}

/// Eigen-decomposition of a real symmetric 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEig3 {
    /// Eigenvalues, descending.
    pub values: [f64; 3],
    /// Eigenvectors stored as columns, matching `values`.
    pub vectors: Mat3,
}

impl SymEig3 {
    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Mat3 {
        let d = Mat3::from_diag(self.values.map(f));
        self.vectors * d * self.vectors.transpose()
    }

    pub fn reconstruct(&self) -> Mat3 {
        self.map_values(|v| v)
    }
}

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigen-solver for a symmetric 3×3 matrix.
pub fn sym3_eig(m: &Mat3) -> Result<SymEig3, LinalgError> {
    let scale = m.frobenius_norm().max(1.0);
    let mut asymmetry = 0.0_f64;
    for i in 0..3 {
        for j in i + 1..3 {
            asymmetry = asymmetry.max((m.0[i][j] - m.0[j][i]).abs());
        }
    }
    if asymmetry > 1e-9 * scale {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }

    let mut a = (*m + m.transpose()).scale(0.5);
    let mut v = Mat3::IDENTITY;
    let norm = a.frobenius_norm();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (2.0 * (a.0[0][1].powi(2) + a.0[0][2].powi(2) + a.0[1][2].powi(2))).sqrt();
        if off <= JACOBI_TOL * norm || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a.0[p][q];
            if apq == 0.0 {
                continue;
            }
            let tau = (a.0[q][q] - a.0[p][p]) / (2.0 * apq);
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let t = if tau == 0.0 { 1.0 } else { t };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a.0[k][p];
                let akq = a.0[k][q];
                a.0[k][p] = c * akp - s * akq;
                a.0[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a.0[p][k];
                let aqk = a.0[q][k];
                a.0[p][k] = c * apk - s * aqk;
                a.0[q][k] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let vkp = v.0[k][p];
                let vkq = v.0[k][q];
                v.0[k][p] = c * vkp - s * vkq;
                v.0[k][q] = s * vkp + c * vkq;
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a.0[j][j].total_cmp(&a.0[i][i]));
    let mut values = [0.0; 3];
    let mut vectors = Mat3::ZERO;
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a.0[src][src];
        for k in 0..3 {
            vectors.0[k][dst] = v.0[k][src];
        }
    }
    Ok(SymEig3 { values, vectors })
}

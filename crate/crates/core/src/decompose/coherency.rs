//! Coherency matrix of a Mueller matrix and the admissibility test built on
//! its characteristic polynomial.
//!
//! `H = ¼ Σ_{u,v} m_{uv} (σ_u ⊗ σ_v*)` with the Pauli matrices `σ_0 = I`,
//! `σ_1 = diag(1, -1)`, `σ_2 = [[0, 1], [1, 0]]`, `σ_3 = [[0, -i], [i, 0]]`.
//! `H` is Hermitian, `tr H = m_11`, and `M` is physically realizable exactly
//! when `H` is positive semidefinite.

use num_complex::Complex64;

use crate::linalg::Mat4;

/// Default relative tolerance of [`is_admissible`].
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

/// A 4×4 complex Hermitian matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherencyMatrix(pub [[Complex64; 4]; 4]);

type C4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn pauli(k: usize) -> [[Complex64; 2]; 2] {
    match k {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ONE, ZERO], [ZERO, -ONE]],
        2 => [[ZERO, ONE], [ONE, ZERO]],
        _ => [[ZERO, -I], [I, ZERO]],
    }
}

/// `σ_u ⊗ conj(σ_v)`.
fn basis(u: usize, v: usize) -> C4 {
    let a = pauli(u);
    let b = pauli(v);
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l].conj();
                }
            }
        }
    }
    out
}

fn basis_table() -> &'static [[C4; 4]; 4] {
    static TABLE: std::sync::OnceLock<[[C4; 4]; 4]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(|u| std::array::from_fn(|v| basis(u, v))))
}

impl CoherencyMatrix {
    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i].re).sum()
    }

    /// Largest `|H_ij - conj(H_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Coefficients `e_1 … e_4` of `det(λI - H) = λ⁴ - e_1 λ³ + e_2 λ² - e_3 λ + e_4`,
    /// i.e. the sums of the principal minors of order 1 to 4.
    pub fn characteristic_coefficients(&self) -> [f64; 4] {
        let h = &self.0;
        let mut e = [0.0; 4];
        e[0] = self.trace();
        for i in 0..4 {
            for j in i + 1..4 {
                e[1] += (h[i][i] * h[j][j] - h[i][j] * h[j][i]).re;
            }
        }
        for skip in 0..4 {
            let idx: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
            let sub: Vec<Vec<Complex64>> = idx.iter().map(|&r| idx.iter().map(|&c| h[r][c]).collect()).collect();
            e[2] += complex_det(sub).re;
        }
        e[3] = complex_det(h.iter().map(|r| r.to_vec()).collect()).re;
        e
    }
}

/// Determinant by partial-pivot elimination.
fn complex_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap_or(col);
        if a[pivot][col] == ZERO {
            return ZERO;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for row in col + 1..n {
            let f = a[row][col] / p;
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
        }
    }
    det
}

pub fn coherency(m: &Mat4) -> CoherencyMatrix {
    let table = basis_table();
    let mut h = [[ZERO; 4]; 4];
    for u in 0..4 {
        for v in 0..4 {
            let c = 0.25 * m.0[u][v];
            if c == 0.0 {
                continue;
            }
            let b = &table[u][v];
            for i in 0..4 {
                for j in 0..4 {
                    h[i][j] += b[i][j] * c;
                }
            }
        }
    }
    CoherencyMatrix(h)
}

/// Inverse of [`coherency`]: `m_uv = Re tr((σ_u ⊗ σ_v*) H)`.
pub fn mueller_from_coherency(h: &CoherencyMatrix) -> Mat4 {
    let table = basis_table();
    let mut m = Mat4::ZERO;
    for u in 0..4 {
        for v in 0..4 {
            let b = &table[u][v];
            let mut tr = ZERO;
            for i in 0..4 {
                for k in 0..4 {
                    tr += b[i][k] * h.0[k][i];
                }
            }
            m.0[u][v] = tr.re;
        }
    }
    m
}

/// Slack on the shifted coefficients, relative to `(tr H)^k`, absorbing
/// rounding in their evaluation.
const COEFFICIENT_ROUNDING: f64 = 64.0 * f64::EPSILON;

/// True when every eigenvalue of `coherency(m)` is at least `-tol · tr H`,
/// decided from the characteristic polynomial alone.
///
/// The coefficients `e_k` of `H + t·I` with `t = tol · tr H` follow from those
/// of `H` as `Σ_j C(4-j, k-j) t^(k-j) e_j`. A Hermitian matrix has only
/// non-negative eigenvalues iff all its coefficients are non-negative, so the
/// shifted coefficients are required to be `>= 0` up to rounding.
pub fn is_admissible(m: &Mat4, tol: f64) -> bool {
    let h = coherency(m);
    let trace = h.trace();
    if !trace.is_finite() || trace < 0.0 {
        return false;
    }
    let shift = tol.max(0.0) * trace;
    let e = h.characteristic_coefficients();
    let all = [1.0, e[0], e[1], e[2], e[3]];
    let scale = trace + 4.0 * shift;
    (1..=4).all(|k| {
        let shifted: f64 = (0..=k).map(|j| binomial(4 - j, k - j) * shift.powi((k - j) as i32) * all[j]).sum();
        shifted >= -COEFFICIENT_ROUNDING * scale.powi(k as i32)
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

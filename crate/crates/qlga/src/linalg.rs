//! Small dense complex matrices and the few factorizations the rest of the
//! crate needs. Everything here targets matrices of dimension at most a few
//! hundred, so simple O(n^3) algorithms with deterministic arithmetic order
//! are preferred over external LAPACK bindings.

use crate::error::{Result, SimError};
use crate::C64;

/// Square (or rectangular) complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        CMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self[(r, c)] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= s;
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += *y;
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= *y;
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |(A†A - I)_{rc}|; zero for a unitary matrix.
    pub fn unitarity_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        self.adjoint()
            .mul(self)
            .sub(&CMatrix::identity(self.rows))
            .max_abs()
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// In-place Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[(col, col)].norm();
            for r in col + 1..n {
                let v = a[(r, col)].norm();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best < 1e-300 {
                return Err(SimError::Singular("gauss-jordan inverse".into()));
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(col * n + c, pivot * n + c);
                    inv.data.swap(col * n + c, pivot * n + c);
                }
            }
            let d = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= d;
                inv[(col, c)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    let sub_a = f * a[(col, c)];
                    let sub_i = f * inv[(col, c)];
                    a[(r, c)] -= sub_a;
                    inv[(r, c)] -= sub_i;
                }
            }
        }
        Ok(inv)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns eigenvalues in ascending order with the matching
    /// orthonormal eigenvectors as columns.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0, 0)));
        }
        let mut a = self.clone();
        let mut v = CMatrix::identity(n);
        let scale = self.max_abs().max(1e-300);
        let target = (1e-15 * scale).powi(2) * (n * n) as f64;
        let mut converged = false;
        for _sweep in 0..60 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off <= target {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r < 1e-300 {
                        continue;
                    }
                    let phase = apq / r;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * r);
                    // annihilation condition: (1 - t^2) + 2 tau t = 0
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Unitary plane rotation U with columns
                    //   u_p = (c, s*conj(phase)), u_q = (-s*phase, c)
                    // chosen so that (U† A U)[p][q] vanishes.
                    let (up_p, up_q) = (C64::new(c, 0.0), s * phase.conj());
                    let (uq_p, uq_q) = (-s * phase, C64::new(c, 0.0));
                    // rows of A
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * up_p + akq * up_q;
                        a[(k, q)] = akp * uq_p + akq * uq_q;
                    }
                    // columns of A (apply U† on the left)
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = up_p.conj() * apk + up_q.conj() * aqk;
                        a[(q, k)] = uq_p.conj() * apk + uq_q.conj() * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * up_p + vkq * up_q;
                        v[(k, q)] = vkp * uq_p + vkq * uq_q;
                    }
                }
            }
        }
        if !converged {
            return Err(SimError::EigenConvergence(format!(
                "jacobi sweep limit on {n}x{n} matrix"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let evals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
        let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
        let mut sorted_vecs = CMatrix::zeros(n, n);
        for (new_c, &old_c) in order.iter().enumerate() {
            for r in 0..n {
                sorted_vecs[(r, new_c)] = v[(r, old_c)];
            }
        }
        Ok((sorted_vals, sorted_vecs))
    }

    /// Eigendecomposition of a unitary matrix. A unitary matrix is normal,
    /// so it shares eigenvectors with the Hermitian combination
    /// (U+U†)/2 + s·(U-U†)/(2i); a few values of the mixing weight s are
    /// tried until every eigenpair verifies against U itself.
    pub fn unitary_eigen(&self) -> Result<(Vec<C64>, CMatrix)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let adj = self.adjoint();
        let herm = self.add(&adj).scale(C64::new(0.5, 0.0));
        let skew = self.sub(&adj).scale(C64::new(0.0, -0.5));
        for &s in &[0.5337, 0.9481, 0.3141, 1.6180, 0.1113] {
            let combo = herm.add(&skew.scale(C64::new(s, 0.0)));
            let (_, vecs) = combo.hermitian_eigen()?;
            let mut vals = Vec::with_capacity(n);
            let mut ok = true;
            for c in 0..n {
                let v: Vec<C64> = vecs.column(c);
                let uv = self.matvec(&v);
                let lam: C64 = v.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
                let dev: f64 = uv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - lam * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if dev > 1e-10 {
                    ok = false;
                    break;
                }
                vals.push(lam);
            }
            if ok {
                return Ok((vals, vecs));
            }
        }
        Err(SimError::EigenConvergence(
            "unitary eigendecomposition: no Hermitian combination separated the spectrum".into(),
        ))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Solve A x = rhs where A is tridiagonal with periodic corner entries:
/// diagonal `diag`, constant sub/super diagonal `off`, and corners
/// `A[0][n-1] = A[n-1][0] = off`. Sherman-Morrison reduction to two
/// ordinary Thomas solves.
pub fn solve_cyclic_tridiag(diag: &[C64], off: C64, rhs: &[C64]) -> Result<Vec<C64>> {
    let n = diag.len();
    assert_eq!(rhs.len(), n);
    assert!(n >= 3, "cyclic tridiagonal solve needs n >= 3");
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= off * off / gamma;
    let x = thomas(&d, off, rhs)?;
    let mut u = vec![C64::new(0.0, 0.0); n];
    u[0] = gamma;
    u[n - 1] = off;
    let z = thomas(&d, off, &u)?;
    // v = (1, 0, ..., 0, off/gamma)
    let vx = x[0] + off / gamma * x[n - 1];
    let vz = z[0] + off / gamma * z[n - 1];
    let factor = vx / (C64::new(1.0, 0.0) + vz);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect())
}

/// Thomas algorithm for a tridiagonal system with constant off-diagonal.
fn thomas(diag: &[C64], off: C64, rhs: &[C64]) -> Result<Vec<C64>> {
    let n = diag.len();
    let mut c_prime = vec![C64::new(0.0, 0.0); n];
    let mut d_prime = vec![C64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    if denom.norm() < 1e-300 {
        return Err(SimError::Singular("thomas solve".into()));
    }
    c_prime[0] = off / denom;
    d_prime[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c_prime[i - 1];
        if denom.norm() < 1e-300 {
            return Err(SimError::Singular("thomas solve".into()));
        }
        c_prime[i] = off / denom;
        d_prime[i] = (rhs[i] - off * d_prime[i - 1]) / denom;
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    Ok(x)
}

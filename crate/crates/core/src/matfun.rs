//! Dense small-matrix utilities: matrix powers `c^H`, closed-form 2x2
//! symmetric eigen-analysis, a cyclic Jacobi eigensolver for larger
//! symmetric matrices, upper-triangle vectorization and Kronecker products.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::poly;

/// Dense square matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails unless `data.len() == n*n`
    /// and every entry is finite.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("matrix has non-finite entries".into()));
        }
        Ok(Matrix { n, data })
    }

    /// Convenience constructor from nested rows; panics on ragged input.
    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Matrix { n: N, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// `A * diag(d)` (scales columns).
    pub fn mul_diag_right(&self, d: &[f64]) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] *= d[j];
            }
        }
        out
    }

    /// `diag(d) * A` (scales rows).
    pub fn mul_diag_left(&self, d: &[f64]) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] *= d[i];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// LU decomposition with partial pivoting. Returns (lu, permutation, sign).
    fn lu(&self) -> Option<(Vec<f64>, Vec<usize>, f64)> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in (k + 1)..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> f64 {
        match self.n {
            0 => 1.0,
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => match self.lu() {
                None => 0.0,
                Some((lu, _, sign)) => {
                    sign * (0..self.n).map(|i| lu[i * self.n + i]).product::<f64>()
                }
            },
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        if n == 2 {
            let d = self.det();
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Singular("2x2 matrix has zero determinant".into()));
            }
            let [a, b, c, e] = [self.data[0], self.data[1], self.data[2], self.data[3]];
            return Ok(Matrix {
                n,
                data: vec![e / d, -b / d, -c / d, a / d],
            });
        }
        let (lu, perm, _) = self
            .lu()
            .ok_or_else(|| Error::Singular("zero pivot in LU decomposition".into()))?;
        let mut inv = Self::zeros(n);
        for col in 0..n {
            // Solve L U x = P e_col.
            let mut x: Vec<f64> = (0..n).map(|i| if perm[i] == col { 1.0 } else { 0.0 }).collect();
            for i in 0..n {
                for k in 0..i {
                    x[i] -= lu[i * n + k] * x[k];
                }
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    x[i] -= lu[i * n + k] * x[k];
                }
                x[i] /= lu[i * n + i];
            }
            for i in 0..n {
                inv.data[i * n + col] = x[i];
            }
        }
        if inv.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular("inverse has non-finite entries".into()));
        }
        Ok(inv)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Symmetric matrix stored by its upper triangle in row-major order,
/// i.e. exactly the layout of [`vec_sym`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // Rows 0..i hold n + (n-1) + ... + (n-i+1) entries.
    i * n - i * i.saturating_sub(1) / 2 + j - i
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            upper: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.set(i, i, 1.0);
        }
        s
    }

    /// Builds from the upper-triangle vector (the inverse of [`vec_sym`]).
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::Shape(format!(
                "expected {} upper-triangle entries for n = {n}, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        if upper.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("symmetric matrix has non-finite entries".into()));
        }
        Ok(SymMatrix { n, upper })
    }

    /// Takes the upper triangle of `m`, failing if `m` is not symmetric to
    /// `rel_tol` relative to its largest entry.
    pub fn from_matrix(m: &Matrix, rel_tol: f64) -> Result<Self> {
        if !m.is_symmetric(rel_tol) {
            return Err(Error::Shape("matrix is not symmetric".into()));
        }
        Ok(Self::from_matrix_upper(m))
    }

    /// Takes the upper triangle of `m` without checking symmetry.
    pub fn from_matrix_upper(m: &Matrix) -> Self {
        let n = m.n();
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(m.get(i, j));
            }
        }
        SymMatrix { n, upper }
    }

    /// Symmetrizes `(m + m^T)/2`.
    pub fn symmetrize(m: &Matrix) -> Self {
        let n = m.n();
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(0.5 * (m.get(i, j) + m.get(j, i)));
            }
        }
        SymMatrix { n, upper }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[upper_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = upper_index(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.n;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        }
    }

    /// `A S A^T`, which is symmetric for any square `A`.
    pub fn congruence(&self, a: &Matrix) -> SymMatrix {
        let s = self.to_matrix();
        SymMatrix::symmetrize(&(&(a * &s) * &a.transpose()))
    }
}

/// Upper-triangle vectorization `(s11, s12, ..., s1n; s22, ..., s2n; ...; snn)`.
pub fn vec_sym(s: &SymMatrix) -> Vec<f64> {
    s.upper.clone()
}

/// Inverse of [`vec_sym`].
pub fn unvec_sym(n: usize, v: &[f64]) -> Result<SymMatrix> {
    SymMatrix::from_upper(n, v.to_vec())
}

/// Slot pairs `(i, j)`, `i <= j`, in `vec_sym` order.
pub fn vec_sym_slots(n: usize) -> Vec<(usize, usize)> {
    let mut slots = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            slots.push((i, j));
        }
    }
    slots
}

/// The matrix `T(A)` with `vec_sym(A S A^T) = T(A) vec_sym(S)` for every
/// symmetric `S`. For `n = 2` and `A = P^{-1}` this is the 3x3 matrix used to
/// map the covariance of `vec_sym W` onto that of `vec_sym(P^{-1} W P^{-T})`.
pub fn congruence_vec_matrix(a: &Matrix) -> Matrix {
    let n = a.n();
    let slots = vec_sym_slots(n);
    let m = slots.len();
    let mut out = Matrix::zeros(m);
    for (r, &(i, j)) in slots.iter().enumerate() {
        for (c, &(k, l)) in slots.iter().enumerate() {
            let mut v = a.get(i, k) * a.get(j, l);
            if k != l {
                v += a.get(i, l) * a.get(j, k);
            }
            out.set(r, c, v);
        }
    }
    out
}

/// Kronecker product with the standard block layout `(A ⊗ B)[(i,k),(j,l)] = a_ij b_kl`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.n(), b.n());
    let mut out = Matrix::zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            let aij = a.get(i, j);
            for k in 0..m {
                for l in 0..m {
                    out.set(i * m + k, j * m + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Real eigendecomposition `H = P diag(values) P^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealEigen {
    pub p: Matrix,
    pub p_inv: Matrix,
    pub values: Vec<f64>,
}

impl RealEigen {
    /// Wraps a supplied decomposition.
    pub fn new(p: Matrix, values: Vec<f64>) -> Result<Self> {
        if p.n() != values.len() {
            return Err(Error::Shape("eigenvector matrix and eigenvalue list disagree in size".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite eigenvalue".into()));
        }
        let p_inv = p
            .inverse()
            .map_err(|_| Error::UnsupportedSpectrum("eigenvector matrix is singular (defective spectrum)".into()))?;
        Ok(RealEigen { p, p_inv, values })
    }

    /// Computes a real diagonalization of a general square matrix.
    ///
    /// Complex eigenvalues or a missing eigenvector (defective matrix) yield
    /// [`Error::UnsupportedSpectrum`]. Eigenvector columns have unit norm.
    pub fn from_matrix(h: &Matrix) -> Result<Self> {
        let n = h.n();
        let scale = h.max_abs().max(1e-300);
        if n == 1 {
            return Self::new(Matrix::identity(1), vec![h.get(0, 0)]);
        }
        let values: Vec<f64> = if n == 2 {
            let (a, b, c, d) = (h.get(0, 0), h.get(0, 1), h.get(1, 0), h.get(1, 1));
            let disc = (a - d) * (a - d) + 4.0 * b * c;
            if disc < -1e-14 * scale * scale {
                return Err(Error::UnsupportedSpectrum(format!(
                    "complex eigenvalues (discriminant {disc:.3e})"
                )));
            }
            let r = disc.max(0.0).sqrt();
            let tr = a + d;
            let l2 = 0.5 * (tr + r);
            let l1 = if l2 != 0.0 { h.det() / l2 } else { 0.5 * (tr - r) };
            let mut v = vec![l1, l2];
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v
        } else {
            let cp = characteristic_polynomial(h);
            let mut v = Vec::with_capacity(n);
            for z in poly::roots(&cp) {
                if z.im.abs() > 1e-7 * (1.0 + z.norm()) * scale.max(1.0) {
                    return Err(Error::UnsupportedSpectrum(format!(
                        "complex eigenvalue {:.6}{:+.6}i",
                        z.re, z.im
                    )));
                }
                v.push(z.re);
            }
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v
        };

        // Group (numerically) repeated eigenvalues.
        let tol = 1e-7 * scale.max(1.0);
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for &v in &values {
            match groups.last_mut() {
                Some((mean, count)) if (v - *mean).abs() <= tol => {
                    *mean = (*mean * *count as f64 + v) / (*count as f64 + 1.0);
                    *count += 1;
                }
                _ => groups.push((v, 1)),
            }
        }
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ordered_values = Vec::with_capacity(n);
        for &(lambda, mult) in &groups {
            let shifted = h - &Matrix::identity(n).scale(lambda);
            let basis = null_space(&shifted, 1e-7 * scale.max(1.0));
            if basis.len() < mult {
                return Err(Error::UnsupportedSpectrum(format!(
                    "eigenvalue {lambda:.6} has algebraic multiplicity {mult} but only {} eigenvectors",
                    basis.len()
                )));
            }
            for v in basis.into_iter().take(mult) {
                cols.push(v);
                ordered_values.push(lambda);
            }
        }
        let mut p = Matrix::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            let sign = first_nonzero_sign(c);
            for i in 0..n {
                p.set(i, j, sign * c[i] / norm);
            }
        }
        Self::new(p, ordered_values)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `c^H = P diag(c^{h_1}, ..., c^{h_n}) P^{-1}` for `c > 0`.
    pub fn power(&self, c: f64) -> Result<Matrix> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParams(format!("matrix power needs c > 0, got {c}")));
        }
        let d: Vec<f64> = self.values.iter().map(|&h| c.powf(h)).collect();
        Ok(&self.p.mul_diag_right(&d) * &self.p_inv)
    }

    pub fn matrix(&self) -> Matrix {
        &self.p.mul_diag_right(&self.values) * &self.p_inv
    }
}

/// `c^H` for a matrix exponent with real diagonalizable spectrum.
pub fn mat_power(c: f64, h: &RealEigen) -> Result<Matrix> {
    h.power(c)
}

/// Characteristic polynomial `det(xI - A)` (ascending coefficients) via
/// Faddeev-LeVerrier.
fn characteristic_polynomial(a: &Matrix) -> Vec<f64> {
    let n = a.n();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = Matrix::zeros(n);
    let id = Matrix::identity(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        m = &(a * &m) + &id.scale(coeffs[n - k + 1]);
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    coeffs
}

/// Orthonormal-ish basis of the numerical null space via full-pivot elimination.
fn null_space(a: &Matrix, tol: f64) -> Vec<Vec<f64>> {
    let n = a.n();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    let mut col_order: Vec<usize> = (0..n).collect();
    while row < n {
        // Full pivot over remaining rows/cols.
        let mut best = (row, row, 0.0);
        for i in row..n {
            for jj in row..n {
                let v = m[i][col_order[jj]].abs();
                if v > best.2 {
                    best = (i, jj, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        m.swap(row, best.0);
        col_order.swap(row, best.1);
        let pc = col_order[row];
        let pv = m[row][pc];
        for j in 0..n {
            m[row][j] /= pv;
        }
        for i in 0..n {
            if i != row {
                let f = m[i][pc];
                if f != 0.0 {
                    for j in 0..n {
                        m[i][j] -= f * m[row][j];
                    }
                }
            }
        }
        pivot_cols.push(pc);
        row += 1;
    }
    let free: Vec<usize> = col_order[row..].to_vec();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![0.0; n];
        v[f] = 1.0;
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[r][f];
        }
        basis.push(v);
    }
    basis
}

fn first_nonzero_sign(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for &x in v {
        if x.abs() > 1e-14 * scale {
            return if x > 0.0 { 1.0 } else { -1.0 };
        }
    }
    1.0
}

/// Applies the sign convention "first nonzero component positive".
pub fn canonical_sign(v: &mut [f64]) {
    let s = first_nonzero_sign(v);
    if s < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigen-analysis of a symmetric 2x2 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair2 {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

/// Closed-form eigenvalues and unit eigenvectors of `[[a, b], [b, c]]`.
///
/// `lambda1` uses the ratio form `2 det / (trace + sqrt(Δ))` whenever the
/// determinant and the trace are both positive, which keeps full relative
/// accuracy when `lambda1 << lambda2`.
pub fn sym_eig2_abc(a: f64, b: f64, c: f64) -> EigenPair2 {
    let trace = a + c;
    let det = a * c - b * b;
    let sqrt_delta = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    let lambda2 = 0.5 * (trace + sqrt_delta);
    let lambda1 = if det > 0.0 && trace > 0.0 {
        2.0 * det / (trace + sqrt_delta)
    } else {
        0.5 * (trace - sqrt_delta)
    };

    let scale = a.abs().max(c.abs()).max(b.abs());
    if lambda2 - lambda1 <= 1e-12 * trace.abs().max(scale) {
        return EigenPair2 {
            lambda1,
            lambda2,
            v1: [1.0, 0.0],
            v2: [0.0, 1.0],
        };
    }
    let mut v1 = if b == 0.0 {
        if a <= c {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    } else {
        // Both (b, λ - a) and (λ - c, b) solve (S - λ) v = 0; keep the larger one.
        let u = [b, lambda1 - a];
        let w = [lambda1 - c, b];
        let nu = u[0].hypot(u[1]);
        let nw = w[0].hypot(w[1]);
        if nu >= nw {
            [u[0] / nu, u[1] / nu]
        } else {
            [w[0] / nw, w[1] / nw]
        }
    };
    canonical_sign(&mut v1);
    let mut v2 = [-v1[1], v1[0]];
    canonical_sign(&mut v2);
    EigenPair2 {
        lambda1,
        lambda2,
        v1,
        v2,
    }
}

/// Closed-form eigen-analysis of a 2x2 symmetric matrix.
pub fn sym_eig2(s: &SymMatrix) -> Result<EigenPair2> {
    if s.n() != 2 {
        return Err(Error::Shape(format!("sym_eig2 needs n = 2, got n = {}", s.n())));
    }
    Ok(sym_eig2_abc(s.get(0, 0), s.get(0, 1), s.get(1, 1)))
}

/// Ascending eigenvalues with orthonormal eigenvectors (columns of `vectors`).
#[derive(Clone, Debug, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Symmetric eigensolver for any `n` (cyclic Jacobi). Off-diagonal
/// Frobenius norm is driven below `1e-12 ||S||_F`, at most 100 sweeps.
pub fn sym_eig_n(s: &SymMatrix) -> SymEigen {
    let n = s.n();
    if n == 2 {
        let e = sym_eig2_abc(s.get(0, 0), s.get(0, 1), s.get(1, 1));
        let mut v = Matrix::zeros(2);
        v.set(0, 0, e.v1[0]);
        v.set(1, 0, e.v1[1]);
        v.set(0, 1, e.v2[0]);
        v.set(1, 1, e.v2[1]);
        return SymEigen {
            values: vec![e.lambda1, e.lambda2],
            vectors: v,
        };
    }
    let mut a = s.to_matrix();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius();
    let off = |a: &Matrix| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += a.get(i, j) * a.get(i, j);
                }
            }
        }
        acc.sqrt()
    };
    for _sweep in 0..100 {
        if off(&a) <= 1e-12 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let mut col = v.col(old_j);
        canonical_sign(&mut col);
        for i in 0..n {
            vectors.set(i, new_j, col[i]);
        }
    }
    SymEigen { values, vectors }
}

/// Symmetric eigensolver for a general square matrix input; non-symmetric
/// input is rejected with [`Error::Shape`].
pub fn sym_eig_checked(m: &Matrix) -> Result<SymEigen> {
    let s = SymMatrix::from_matrix(m, 1e-12)?;
    Ok(sym_eig_n(&s))
}

/// Principal square root of a symmetric positive semidefinite matrix with
/// eigenvalues below zero clipped to zero.
pub fn sym_sqrt_clipped(s: &SymMatrix) -> (Matrix, f64) {
    let e = sym_eig_n(s);
    let min = e.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let roots: Vec<f64> = e.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let r = &e.vectors.mul_diag_right(&roots) * &e.vectors.transpose();
    (r, min)
}

//! Small dense linear algebra on row-major `Vec<Vec<T>>` matrices.
//!
//! Dimensions here never exceed a handful, so plain Gaussian elimination
//! with partial pivoting is all that is needed.

use crate::scalar::Real;

pub type Matrix<T> = Vec<Vec<T>>;

pub fn identity<T: Real>(n: usize) -> Matrix<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

pub fn transpose<T: Real>(m: &Matrix<T>) -> Matrix<T> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}

pub fn scale<T: Real>(m: &Matrix<T>, a: T) -> Matrix<T> {
    m.iter().map(|row| row.iter().map(|&x| x * a).collect()).collect()
}

/// Row vector times matrix: `sum_i v[i] * m[i]`.
pub fn row_times<T: Real>(v: &[T], m: &Matrix<T>) -> Vec<T> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = vec![T::zero(); cols];
    for (vi, row) in v.iter().zip(m) {
        if *vi == T::zero() {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(row) {
            *o += *vi * x;
        }
    }
    out
}

pub fn mat_mul<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    a.iter().map(|row| row_times(row, b)).collect()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a)
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scaled<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// Determinant by LU decomposition with partial pivoting.
pub fn determinant<T: Real>(m: &Matrix<T>) -> T {
    let n = m.len();
    let mut a = m.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
        }
    }
    det
}

/// Inverse by Gauss-Jordan elimination; `None` if a zero pivot appears.
pub fn inverse<T: Real>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity::<T>(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col] == T::zero() {
            return None;
        }
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let p = a[col][col];
        for k in 0..n {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col];
            if f == T::zero() {
                continue;
            }
            for k in 0..n {
                let (ack, ick) = (a[col][k], inv[col][k]);
                a[row][k] -= f * ack;
                inv[row][k] -= f * ick;
            }
        }
    }
    Some(inv)
}

/// Gram-Schmidt of the rows of `basis`.
///
/// Returns `(q, r)` where the `q[i]` are orthonormal and
/// `basis[j] = sum_{i <= j} r[i][j] * q[i]` with `r[i][i] > 0`.
pub fn gram_schmidt<T: Real>(basis: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let n = basis.len();
    let mut q: Matrix<T> = Vec::with_capacity(n);
    let mut r = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut v = basis[j].clone();
        // two passes of MGS keep q orthogonal to working precision
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &v);
                r[i][j] += c;
                for (vk, &qk) in v.iter_mut().zip(qi) {
                    *vk -= c * qk;
                }
            }
        }
        let len = norm2(&v).sqrt();
        r[j][j] = len;
        q.push(v.into_iter().map(|x| x / len).collect());
    }
    (q, r)
}

//! Small dense matrices: products, LU solves, Hessenberg reduction,
//! characteristic polynomials and real-matrix eigenvalues.
//!
//! Sizes in this crate never exceed a few dozen rows, so everything is a
//! straightforward row-major `Vec` with no blocking.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; every row must have the same length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Column vector.
    pub fn column(v: &[T]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * k).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Copies `rows × cols` entries starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut b = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        b
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    /// Solves `self · x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.lu()?.solve(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.inverse()
    }

    pub fn determinant(&self) -> Result<T> {
        Ok(self.lu()?.determinant())
    }

    /// Reciprocal 1-norm condition number; zero for exactly singular input.
    pub fn rcond(&self) -> Result<T> {
        let lu = self.lu()?;
        if lu.is_singular() {
            return Ok(T::zero());
        }
        let inv = lu.inverse()?;
        let k = self.norm_one() * inv.norm_one();
        Ok(if k.is_finite() && k > T::zero() {
            T::one() / k
        } else {
            T::zero()
        })
    }

    /// Eigenvalues of a square matrix (balanced Hessenberg QR).
    pub fn eigenvalues(&self) -> Result<Vec<Complex<T>>> {
        if !self.is_square() {
            return Err(Error::InvalidInput("eigenvalues need a square matrix".into()));
        }
        let mut a = self.clone();
        balance(&mut a);
        hessenberg(&mut a);
        hqr(a)
    }

    /// Coefficients (ascending powers) of `det(sI − self)`.
    pub fn char_poly(&self) -> Result<Vec<T>> {
        if !self.is_square() {
            return Err(Error::InvalidInput(
                "characteristic polynomial needs a square matrix".into(),
            ));
        }
        let mut h = self.clone();
        balance(&mut h);
        hessenberg(&mut h);
        Ok(hessenberg_char_poly(&h))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.scale(-T::one())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols).collect();
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
    singular: bool,
}

impl<T: Real> Lu<T> {
    fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput("LU needs a square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -T::one()), |best, c| if c.1 > best.1 { c } else { best });
            if pmax == T::zero() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            sign,
            singular,
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> T {
        if self.singular {
            return T::zero();
        }
        (0..self.n).fold(self.sign, |d, i| d * self.lu[i * self.n + i])
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "linear solve right-hand side",
                expected: n,
                got: b.len(),
            });
        }
        if self.singular {
            return Err(Error::SingularPredictor { rcond: 0.0 });
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// Solves the complex system `a · x = b` (`a` row-major, `n × n`) by
/// Gaussian elimination with partial pivoting.
pub fn solve_complex<T: Real>(
    n: usize,
    mut a: Vec<Complex<T>>,
    mut b: Vec<Complex<T>>,
) -> Result<Vec<Complex<T>>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| {
                a[i * n + k]
                    .norm()
                    .partial_cmp(&a[j * n + k].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if a[p * n + k].norm() == T::zero() {
            return Err(Error::SingularPredictor { rcond: 0.0 });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            for j in k..n {
                let u = a[k * n + j];
                a[i * n + j] = a[i * n + j] - f * u;
            }
            let bk = b[k];
            b[i] = b[i] - f * bk;
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s = s - a[i * n + j] * b[j];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(b)
}

/// Diagonal similarity scaling that equalizes row and column norms.
pub(crate) fn balance<T: Real>(a: &mut Matrix<T>) {
    let n = a.rows;
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let g = T::one() / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Reduces to upper Hessenberg form by stabilized elementary similarity
/// transforms; entries below the subdiagonal are zeroed.
pub(crate) fn hessenberg<T: Real>(a: &mut Matrix<T>) {
    let n = a.rows;
    for m in 1..n.saturating_sub(1) {
        let mut x = T::zero();
        let mut piv = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > x.abs() {
                x = a[(j, m - 1)];
                piv = j;
            }
        }
        if piv != m {
            for j in m - 1..n {
                let t = a[(piv, j)];
                a[(piv, j)] = a[(m, j)];
                a[(m, j)] = t;
            }
            for j in 0..n {
                let t = a[(j, piv)];
                a[(j, piv)] = a[(j, m)];
                a[(j, m)] = t;
            }
        }
        if x != T::zero() {
            for i in m + 1..n {
                let mut y = a[(i, m - 1)];
                if y != T::zero() {
                    y /= x;
                    a[(i, m - 1)] = T::zero();
                    for j in m..n {
                        let v = a[(m, j)];
                        a[(i, j)] -= y * v;
                    }
                    for j in 0..n {
                        let v = a[(j, i)];
                        a[(j, m)] += y * v;
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            a[(i, j)] = T::zero();
        }
    }
}

/// `det(sI − H)` for upper Hessenberg `H`, via the Hyman-style recurrence
/// over leading principal submatrices.
pub(crate) fn hessenberg_char_poly<T: Real>(h: &Matrix<T>) -> Vec<T> {
    let n = h.rows;
    // p[k] holds the characteristic polynomial of the leading k×k block.
    let mut p: Vec<Vec<T>> = vec![vec![T::one()]];
    for k in 0..n {
        // (s − h_kk) p_k
        let prev = &p[k];
        let mut next = vec![T::zero(); k + 2];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= h[(k, k)] * c;
        }
        let mut prod = T::one();
        for i in (0..k).rev() {
            prod *= h[(i + 1, i)];
            let coef = h[(i, k)] * prod;
            if coef != T::zero() {
                for (d, &c) in p[i].iter().enumerate() {
                    next[d] -= coef * c;
                }
            }
        }
        p.push(next);
    }
    p.pop().unwrap_or_else(|| vec![T::one()])
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the shifted double-step
/// Francis QR iteration.
pub(crate) fn hqr<T: Real>(mut a: Matrix<T>) -> Result<Vec<Complex<T>>> {
    let n = a.rows as isize;
    let eps = T::epsilon();
    let mut w = vec![Complex::new(T::zero(), T::zero()); a.rows];
    let at = |a: &Matrix<T>, i: isize, j: isize| a[(i as usize, j as usize)];

    let mut anorm = T::zero();
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at(&a, i, j).abs();
        }
    }
    let mut nn = n - 1;
    let mut t = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut x, mut y, mut z);
    let (mut s, mut ww);
    while nn >= 0 {
        let mut its = 0;
        let mut l: isize;
        loop {
            l = nn;
            while l > 0 {
                s = at(&a, l - 1, l - 1).abs() + at(&a, l, l).abs();
                if s == T::zero() {
                    s = anorm;
                }
                if at(&a, l, l - 1).abs() <= eps * s {
                    a[(l as usize, (l - 1) as usize)] = T::zero();
                    break;
                }
                l -= 1;
            }
            x = at(&a, nn, nn);
            if l == nn {
                w[nn as usize] = Complex::new(x + t, T::zero());
                nn -= 1;
            } else {
                y = at(&a, nn - 1, nn - 1);
                ww = at(&a, nn, nn - 1) * at(&a, nn - 1, nn);
                if l == nn - 1 {
                    p = T::lit(0.5) * (y - x);
                    q = p * p + ww;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= T::zero() {
                        z = p + sign(z, p);
                        let hi = x + z;
                        let lo = if z != T::zero() { x - ww / z } else { hi };
                        w[(nn - 1) as usize] = Complex::new(hi, T::zero());
                        w[nn as usize] = Complex::new(lo, T::zero());
                    } else {
                        w[nn as usize] = Complex::new(x + p, -z);
                        w[(nn - 1) as usize] = Complex::new(x + p, z);
                    }
                    nn -= 2;
                } else {
                    if its == 60 {
                        return Err(Error::NoConvergence);
                    }
                    if its == 10 || its == 20 || its == 40 {
                        t += x;
                        for i in 0..=nn {
                            a[(i as usize, i as usize)] -= x;
                        }
                        s = at(&a, nn, nn - 1).abs() + at(&a, nn - 1, nn - 2).abs();
                        x = T::lit(0.75) * s;
                        y = x;
                        ww = T::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    while m >= l {
                        z = at(&a, m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - ww) / at(&a, m + 1, m) + at(&a, m, m + 1);
                        q = at(&a, m + 1, m + 1) - z - r - s;
                        r = at(&a, m + 2, m + 1);
                        s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = at(&a, m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs()
                            * (at(&a, m - 1, m - 1).abs() + z.abs() + at(&a, m + 1, m + 1).abs());
                        if u <= eps * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m..nn - 1 {
                        a[((i + 2) as usize, i as usize)] = T::zero();
                        if i != m {
                            a[((i + 2) as usize, (i - 1) as usize)] = T::zero();
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = at(&a, k, k - 1);
                            q = at(&a, k + 1, k - 1);
                            r = T::zero();
                            if k + 1 != nn {
                                r = at(&a, k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != T::zero() {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != T::zero() {
                            if k == m {
                                if l != m {
                                    let v = at(&a, k, k - 1);
                                    a[(k as usize, (k - 1) as usize)] = -v;
                                }
                            } else {
                                a[(k as usize, (k - 1) as usize)] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let (ku, k1, j) = (k as usize, (k + 1) as usize, j as usize);
                                p = a[(ku, j)] + q * a[(k1, j)];
                                if k + 1 != nn {
                                    let k2 = (k + 2) as usize;
                                    p += r * a[(k2, j)];
                                    a[(k2, j)] -= p * z;
                                }
                                a[(k1, j)] -= p * y;
                                a[(ku, j)] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                let (iu, ku, k1) = (i as usize, k as usize, (k + 1) as usize);
                                p = x * a[(iu, ku)] + y * a[(iu, k1)];
                                if k + 1 != nn {
                                    let k2 = (k + 2) as usize;
                                    p += z * a[(iu, k2)];
                                    a[(iu, k2)] -= p * r;
                                }
                                a[(iu, k1)] -= p * q;
                                a[(iu, ku)] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if !(l + 1 < nn) {
                break;
            }
        }
    }
    Ok(w)
}

#![allow(dead_code)]

use num_complex::Complex64;
use nrflow::Matrix64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix64 {
    let data = (0..rows * cols).map(|_| rng.gen_range(-scale..scale)).collect();
    Matrix64::from_vec(rows, cols, data).unwrap()
}

/// `(A, B, C, T)` of the unstable, non-minimum-phase two-state example.
pub fn unstable_nonminphase() -> (Matrix64, Matrix64, Matrix64, f64) {
    (
        Matrix64::from_rows(&[[2.0, 1.0], [-1.0, -1.0]]).unwrap(),
        Matrix64::from_rows(&[[0.0], [1.0]]).unwrap(),
        Matrix64::from_rows(&[[-10.0, 1.0]]).unwrap(),
        0.25,
    )
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn complex_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap()).unwrap();
        if a[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}

/// `det(sI − M)`.
pub fn char_det(m: &Matrix64, s: Complex64) -> Complex64 {
    let n = m.rows();
    let a = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = if i == j { s } else { Complex64::new(0.0, 0.0) };
                    d - m[(i, j)]
                })
                .collect()
        })
        .collect();
    complex_det(a)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

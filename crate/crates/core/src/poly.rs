//! Real univariate polynomials with coefficients in ascending powers.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{balance, hqr, Matrix};
use crate::scalar::Real;

/// `c[0] + c[1]·s + … + c[d]·s^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    /// Trailing (highest-power) exact zeros are dropped.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&T::zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> T {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }

    pub fn eval(&self, s: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * s + c)
    }

    /// Roots as eigenvalues of the balanced companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        if self.is_zero() {
            return Err(Error::DegenerateStructure(
                "the zero polynomial has no finite root set".into(),
            ));
        }
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        // Upper Hessenberg companion: first row −c_{d−1..0}/c_d, ones on the subdiagonal.
        let mut c = Matrix::zeros(d, d);
        for j in 0..d {
            c[(0, j)] = -self.coeffs[d - 1 - j] / lead;
        }
        for i in 1..d {
            c[(i, i - 1)] = T::one();
        }
        balance(&mut c);
        hqr(c)
    }

    pub fn is_hurwitz(&self, tol: T) -> Result<bool> {
        Ok(self.roots()?.iter().all(|r| r.re < -tol))
    }
}

impl<T: Real> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, &c) in self.coeffs.iter().enumerate().rev() {
            if c == T::zero() && self.degree() > 0 {
                continue;
            }
            let mag = c.abs();
            if first {
                if c < T::zero() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < T::zero() { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag == T::one() && d > 0;
            if !unit {
                write!(f, "{}", mag)?;
            }
            match d {
                0 => {}
                1 => write!(f, "{}s", if unit { "" } else { "·" })?,
                _ => write!(f, "{}s^{}", if unit { "" } else { "·" }, d)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut r: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        r.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        r
    }

    #[test]
    fn roots_of_known_polynomials() {
        // (s + 1)(s − 2)(s + 3) = s³ + 2s² − 5s − 6
        let p = Poly::new(vec![-6.0, -5.0, 2.0, 1.0]);
        let r = sorted_re(p.roots().unwrap());
        for (got, want) in r.iter().zip([-3.0, -1.0, 2.0]) {
            assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12);
        }
        // s² + 2s + 5 → −1 ± 2j
        let r = sorted_re(Poly::new(vec![5.0, 2.0, 1.0]).roots().unwrap());
        assert!((r[0] - Complex::new(-1.0, -2.0)).norm() < 1e-12);
        assert!((r[1] - Complex::new(-1.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn non_monic_and_trailing_zeros() {
        let p = Poly::<f64>::new(vec![4.0, 2.0, 0.0]);
        assert_eq!(p.degree(), 1);
        let r = p.roots().unwrap();
        assert!((r[0].re + 2.0).abs() < 1e-14);
        assert!(Poly::<f64>::new(vec![0.0]).roots().is_err());
        assert!(Poly::new(vec![3.0]).roots().unwrap().is_empty());
    }

    #[test]
    fn hurwitz_classification() {
        assert!(Poly::new(vec![97.18, 16.19, 1.0]).is_hurwitz(1e-9).unwrap());
        assert!(!Poly::new(vec![-1.0, 0.0, 1.0]).is_hurwitz(1e-9).unwrap());
        // roots on the imaginary axis are not strictly stable
        assert!(!Poly::new(vec![1.0, 0.0, 1.0]).is_hurwitz(1e-9).unwrap());
    }

    #[test]
    fn display() {
        assert_eq!(Poly::new(vec![1.0, 1.0]).to_string(), "s + 1");
        assert_eq!(Poly::new(vec![0.0, -1.0, -1.0, 1.0]).to_string(), "s^3 - s^2 - s");
    }
}

//! α-stability certification of linear closed loops.
//!
//! For `ẋ = Ax + Bu`, `y = Cx` under a Newton-Raphson-flow controller with the
//! closed-form LTI predictor, the augmented state `z = (x, u)` obeys
//! `ż = Φ_α z + Ψ_α r(t+T)`. The characteristic polynomial of `Φ_α` is a
//! polynomial in `(α, s)`:
//!
//! ```text
//! P_α(s) = Σ_{i=0..m} α^i · P_{m−i}(s),   deg P_i ≤ n + i.
//! ```
//!
//! If `P₀` and `Q(s) = Σ_k a_{k,n+k} s^k` (the leading coefficients of the `P_k`)
//! are both Hurwitz, the loop is α-stable.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::Variant;
use crate::error::{Error, Result};
use crate::linalg::{solve_complex, Matrix};
use crate::poly::Poly;
use crate::predict::LtiPredictor;
use crate::scalar::Real;

/// Roots with real part above `−HURWITZ_TOL` fail the Hurwitz test.
pub const HURWITZ_TOL: f64 = 1e-9;
/// Real part above which a root is reported as lying in the right half-plane.
pub const RHP_ADVISORY_TOL: f64 = 1e-6;
/// Largest `m` accepted by the α-sampling recovery.
pub const MAX_IO_DIM: usize = 8;
const SNAP_REL: f64 = 1e-9;
const STRUCTURE_REL: f64 = 1e-8;
const FIRST_WITNESS: f64 = 1e3;
const LAST_WITNESS: f64 = 1e8;
const QTILDE_REL: f64 = 1e-8;
const AMBIGUITY_TOL: f64 = 1e-12;

/// LTI plant in closed loop with one of the α-dependent controller variants.
#[derive(Clone, Debug)]
pub struct LinearSystem<T> {
    pred: LtiPredictor<T>,
    variant: Variant,
}

impl<T: Real> LinearSystem<T> {
    /// Supported variants: `basic`, `full` and `intermediate`. For `full`, `ṙ(t+T)`
    /// is treated as an exogenous input and `∂g/∂x·f` as state feedback.
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>, horizon: T, variant: Variant) -> Result<Self> {
        match variant {
            Variant::Basic | Variant::Full | Variant::Intermediate => {}
            v => {
                return Err(Error::InvalidInput(format!(
                    "the {v} variant has no α-dependent closed loop to certify"
                )))
            }
        }
        let pred = LtiPredictor::new(a, b, c, horizon)?;
        Ok(Self { pred, variant })
    }

    pub fn n(&self) -> usize {
        self.pred.a().rows()
    }

    pub fn m(&self) -> usize {
        self.pred.b().cols()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn predictor(&self) -> &LtiPredictor<T> {
        &self.pred
    }

    /// Eigenvalues of `Φ_α`.
    pub fn closed_loop_eigenvalues(&self, alpha: T) -> Result<Vec<Complex<T>>> {
        build_phi_psi(self, alpha)?.0.eigenvalues()
    }

    /// `max_ω σ_max((jωI − Φ_α)⁻¹ Ψ_α)` over the given frequencies.
    pub fn transfer_peak_gain(&self, alpha: T, omegas: &[T]) -> Result<T> {
        let (phi, psi) = build_phi_psi(self, alpha)?;
        let dim = phi.rows();
        let m = psi.cols();
        let mut peak = T::zero();
        for &w in omegas {
            let mut a = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    let diag = if i == j { w } else { T::zero() };
                    a.push(Complex::new(-phi[(i, j)], diag));
                }
            }
            let mut h = Vec::with_capacity(m);
            for col in 0..m {
                let b: Vec<Complex<T>> = (0..dim).map(|i| Complex::new(psi[(i, col)], T::zero())).collect();
                h.push(solve_complex(dim, a.clone(), b)?);
            }
            peak = peak.max(max_singular_value(&h));
        }
        Ok(peak)
    }
}

/// Largest singular value of the matrix with the given columns, by power
/// iteration on the Gram matrix `HᴴH`.
fn max_singular_value<T: Real>(cols: &[Vec<Complex<T>>]) -> T {
    let m = cols.len();
    let gram: Vec<Vec<Complex<T>>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum())
                .collect()
        })
        .collect();
    if m == 1 {
        return gram[0][0].re.sqrt();
    }
    let mut v = vec![Complex::new(T::one(), T::zero()); m];
    let mut lambda = T::zero();
    for _ in 0..500 {
        let w: Vec<Complex<T>> = (0..m)
            .map(|i| (0..m).map(|j| gram[i][j] * v[j]).sum())
            .collect();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        let next = norm;
        v = w.into_iter().map(|z| z / norm).collect();
        if (next - lambda).abs() <= T::epsilon() * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// `Φ_α` and `Ψ_α` of `ż = Φ_α z + Ψ_α r(t+T)`.
pub fn build_phi_psi<T: Real>(sys: &LinearSystem<T>, alpha: T) -> Result<(Matrix<T>, Matrix<T>)> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    let (n, m) = (sys.n(), sys.m());
    let p = &sys.pred;
    let gu_lu = p.gain_u().lu()?;
    if gu_lu.is_singular() {
        return Err(Error::SingularPredictor { rcond: 0.0 });
    }
    let gu_inv = gu_lu.inverse()?;
    let k = &gu_inv * p.gain_x();
    let mut x_rows = k.scale(-alpha);
    let mut u_rows = Matrix::identity(m).scale(-alpha);
    if sys.variant != Variant::Basic {
        x_rows = &x_rows - &(&k * p.a());
        u_rows = &u_rows - &(&k * p.b());
    }
    let mut phi = Matrix::zeros(n + m, n + m);
    phi.set_block(0, 0, p.a());
    phi.set_block(0, n, p.b());
    phi.set_block(n, 0, &x_rows);
    phi.set_block(n, n, &u_rows);
    let mut psi = Matrix::zeros(n + m, m);
    psi.set_block(n, 0, &gu_inv.scale(alpha));
    Ok((phi, psi))
}

/// Coefficients `a_{i,j}` of `P_α(s) = Σ_i α^i P_{m−i}(s)`, with
/// `P_i(s) = Σ_{j ≤ n+i} a_{i,j} s^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly<T> {
    n: usize,
    m: usize,
    /// `rows[i]` holds `a_{i,0..=n+i}`.
    rows: Vec<Vec<T>>,
}

impl<T: Real> BivariatePoly<T> {
    /// `rows[i]` must have length `n + i + 1`; the result is normalized so that
    /// `a_{m,n+m} = 1`.
    pub fn from_rows(n: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("bivariate polynomial needs at least one row".into()));
        }
        let m = rows.len() - 1;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n + i + 1 {
                return Err(Error::InvalidInput(format!(
                    "P_{i} must have {} coefficients, got {}",
                    n + i + 1,
                    r.len()
                )));
            }
        }
        let lead = rows[m][n + m];
        if lead == T::zero() || !lead.is_finite() {
            return Err(Error::DegenerateStructure("leading coefficient a_{m,n+m} is zero".into()));
        }
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|c| c / lead).collect())
            .collect();
        Ok(Self { n, m, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `a_{i,j}`; zero outside the structural support.
    pub fn coeff(&self, i: usize, j: usize) -> T {
        self.rows.get(i).and_then(|r| r.get(j)).copied().unwrap_or_else(T::zero)
    }

    /// `P_i(s)`.
    pub fn p(&self, i: usize) -> Poly<T> {
        Poly::new(self.rows[i].clone())
    }

    /// `P_α` as a polynomial in `s`.
    pub fn at_alpha(&self, alpha: T) -> Poly<T> {
        let mut c = vec![T::zero(); self.n + self.m + 1];
        for (i, row) in self.rows.iter().enumerate() {
            let w = alpha.powi((self.m - i) as i32);
            for (j, &a) in row.iter().enumerate() {
                c[j] += w * a;
            }
        }
        Poly::new(c)
    }

    pub fn eval(&self, alpha: T, s: Complex<T>) -> Complex<T> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| Poly::new(row.clone()).eval_complex(s) * alpha.powi((self.m - i) as i32))
            .sum()
    }

    /// `Q̃_α(s) = Σ_i α^i a_{m−i,n+m−i} s^{m−i}`.
    pub fn qtilde(&self, alpha: T, s: Complex<T>) -> Complex<T> {
        (0..=self.m)
            .map(|i| {
                let k = self.m - i;
                s.powi(k as i32) * (self.coeff(k, self.n + k) * alpha.powi(i as i32))
            })
            .sum()
    }

    /// Copy with `a_{i,j}` replaced; used to probe sensitivity.
    pub fn with_coeff(&self, i: usize, j: usize, value: T) -> Result<Self> {
        if i > self.m || j > self.n + i {
            return Err(Error::InvalidInput(format!("a_{{{i},{j}}} is outside the support")));
        }
        let mut out = self.clone();
        out.rows[i][j] = value;
        Ok(out)
    }
}

/// Recovers all `a_{i,j}` from characteristic polynomials of `Φ_α` sampled at
/// `α = 1, …, m+1`, solving one Vandermonde system per power of `s`.
pub fn char_poly_bivariate<T: Real>(sys: &LinearSystem<T>) -> Result<BivariatePoly<T>> {
    let (n, m) = (sys.n(), sys.m());
    if m > MAX_IO_DIM {
        return Err(Error::UnsupportedDimension(format!(
            "m = {m} exceeds {MAX_IO_DIM}; the α-sampling Vandermonde system is too ill-conditioned"
        )));
    }
    let dim = n + m;
    let samples: Vec<T> = (1..=m + 1).map(|k| T::lit(k as f64)).collect();
    let mut charpolys = Vec::with_capacity(m + 1);
    for &alpha in &samples {
        let (phi, _) = build_phi_psi(sys, alpha)?;
        let cp = phi.char_poly()?;
        debug_assert_eq!(cp.len(), dim + 1);
        charpolys.push(cp);
    }
    let mut vander = Matrix::zeros(m + 1, m + 1);
    for (r, &alpha) in samples.iter().enumerate() {
        for c in 0..=m {
            vander[(r, c)] = alpha.powi(c as i32);
        }
    }
    let lu = vander.lu()?;
    // w[j][p] = coefficient of α^p s^j
    let mut w = vec![vec![T::zero(); m + 1]; dim + 1];
    for (j, wj) in w.iter_mut().enumerate() {
        let rhs: Vec<T> = charpolys.iter().map(|cp| cp[j]).collect();
        *wj = lu.solve(&rhs)?;
    }
    let global = w.iter().flatten().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let mut rows: Vec<Vec<T>> = (0..=m).map(|i| vec![T::zero(); n + i + 1]).collect();
    for (j, wj) in w.iter().enumerate() {
        let col_max = wj.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
        for (p, &v) in wj.iter().enumerate() {
            let i = m - p;
            if j > n + i {
                if v.abs() > T::lit(STRUCTURE_REL) * global {
                    return Err(Error::DegenerateStructure(format!(
                        "coefficient of α^{p}·s^{j} is {v}, but deg P_{i} ≤ {}",
                        n + i
                    )));
                }
                continue;
            }
            rows[i][j] = if v.abs() < T::lit(SNAP_REL) * col_max { T::zero() } else { v };
        }
    }
    BivariatePoly::from_rows(n, rows)
}

/// `P₀(s)` and `Q(s)`.
pub fn extract_p0_q<T: Real>(p: &BivariatePoly<T>) -> Result<(Poly<T>, Poly<T>)> {
    let n = p.n();
    if p.coeff(0, n) == T::zero() {
        return Err(Error::DegenerateStructure(format!(
            "a_{{0,{n}}} = 0, so deg P₀ < {n}"
        )));
    }
    let p0 = Poly::new((0..=n).map(|j| p.coeff(0, j)).collect());
    let q = Poly::new((0..=p.m()).map(|k| p.coeff(k, n + k)).collect());
    Ok((p0, q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    AlphaStable,
    NotCertified,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::AlphaStable => "alpha_stable",
            Verdict::NotCertified => "not_certified",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilityCertificate<T> {
    pub bivariate: BivariatePoly<T>,
    pub p0: Poly<T>,
    pub p0_roots: Vec<Complex<T>>,
    pub q: Poly<T>,
    pub q_roots: Vec<Complex<T>>,
    pub verdict: Verdict,
    /// Gain at which `Φ_α` was confirmed Hurwitz; `None` when not certified or when
    /// no gain up to 1e8 confirmed it.
    pub witness_alpha: Option<T>,
    /// A root of `P₀` or `Q` has real part above 1e−6.
    pub rhp_root: bool,
}

/// Sufficient test: `α`-stable when `P₀` and `Q` are Hurwitz. A certified system
/// is cross-checked by confirming `Φ_α` Hurwitz at `α = 10³` (raised tenfold up to
/// `10⁸` if needed).
pub fn certify<T: Real>(sys: &LinearSystem<T>) -> Result<StabilityCertificate<T>> {
    let bivariate = char_poly_bivariate(sys)?;
    let (p0, q) = extract_p0_q(&bivariate)?;
    let p0_roots = p0.roots()?;
    let q_roots = q.roots()?;
    let tol = T::lit(HURWITZ_TOL);
    let all_roots = || p0_roots.iter().chain(&q_roots);
    let stable = all_roots().all(|r| r.re < -tol);
    let rhp_root = all_roots().any(|r| r.re > T::lit(RHP_ADVISORY_TOL));
    let mut witness_alpha = None;
    if stable {
        let mut alpha = FIRST_WITNESS;
        while alpha <= LAST_WITNESS {
            let a = T::lit(alpha);
            if sys.closed_loop_eigenvalues(a)?.iter().all(|e| e.re < T::zero()) {
                witness_alpha = Some(a);
                break;
            }
            alpha *= 10.0;
        }
    }
    Ok(StabilityCertificate {
        bivariate,
        p0,
        p0_roots,
        q,
        q_roots,
        verdict: if stable {
            Verdict::AlphaStable
        } else {
            Verdict::NotCertified
        },
        witness_alpha,
        rhp_root,
    })
}

/// Root paths of `P_α(s)` over ascending gains.
#[derive(Clone, Debug)]
pub struct RootLocus<T> {
    pub alphas: Vec<T>,
    /// `branches[b][k]` is branch `b` at `alphas[k]`.
    pub branches: Vec<Vec<Complex<T>>>,
    /// Indices `k` where two pairings with `alphas[k−1]` tied within 1e−12.
    pub ambiguous: Vec<usize>,
}

impl<T: Real> RootLocus<T> {
    /// Branch ending farthest from the origin.
    pub fn unbounded_branch(&self) -> Option<usize> {
        (0..self.branches.len()).max_by(|&a, &b| {
            let ea = self.branches[a].last().map(|z| z.norm()).unwrap_or_else(T::zero);
            let eb = self.branches[b].last().map(|z| z.norm()).unwrap_or_else(T::zero);
            ea.partial_cmp(&eb).unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

/// Roots of `P_α(s)` for each gain, joined into branches by greedy
/// nearest-neighbour matching between consecutive gains.
pub fn root_locus<T: Real>(sys: &LinearSystem<T>, alphas: &[T]) -> Result<RootLocus<T>> {
    if alphas.is_empty() {
        return Err(Error::InvalidInput("root locus needs at least one gain".into()));
    }
    if alphas.iter().any(|a| !(*a > T::zero())) {
        return Err(Error::InvalidInput("gains must be positive".into()));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("gains must be strictly ascending".into()));
    }
    let p = char_poly_bivariate(sys)?;
    let mut branches: Vec<Vec<Complex<T>>> = p.at_alpha(alphas[0]).roots()?.into_iter().map(|r| vec![r]).collect();
    let mut ambiguous = Vec::new();
    for (k, &alpha) in alphas.iter().enumerate().skip(1) {
        let roots = p.at_alpha(alpha).roots()?;
        let prev: Vec<Complex<T>> = branches.iter().map(|b| *b.last().unwrap()).collect();
        let (assign, tie) = greedy_match(&prev, &roots);
        if tie {
            ambiguous.push(k);
        }
        for (b, r) in assign.into_iter().enumerate() {
            branches[b].push(roots[r]);
        }
    }
    Ok(RootLocus {
        alphas: alphas.to_vec(),
        branches,
        ambiguous,
    })
}

/// Pairs every previous root with a new root, shortest distances first; ties
/// are resolved by index order and reported.
fn greedy_match<T: Real>(prev: &[Complex<T>], next: &[Complex<T>]) -> (Vec<usize>, bool) {
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(prev.len() * next.len());
    for (i, a) in prev.iter().enumerate() {
        for (j, b) in next.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut assign = vec![usize::MAX; prev.len()];
    let mut taken = vec![false; next.len()];
    let mut tie = false;
    let tol = T::lit(AMBIGUITY_TOL);
    for (idx, &(d, i, j)) in pairs.iter().enumerate() {
        if assign[i] != usize::MAX || taken[j] {
            continue;
        }
        // another free pairing for the same root at (nearly) the same distance
        tie |= pairs[idx + 1..]
            .iter()
            .take_while(|p| p.0 - d <= tol)
            .any(|&(_, i2, j2)| (i2 == i) != (j2 == j) && assign[i2] == usize::MAX && !taken[j2]);
        assign[i] = j;
        taken[j] = true;
    }
    (assign, tie)
}

/// Checks `Q̃_α(αs) = αᵐ·q(s)` at `trials` seeded random `(α, s)` pairs within
/// 1e−8 relative, for a separately supplied `q`.
pub fn qtilde_matches<T: Real>(p: &BivariatePoly<T>, q: &Poly<T>, trials: usize) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9);
    (0..trials).all(|_| {
        let alpha = T::lit(10f64.powf(rng.gen_range(-1.0..3.0)));
        let s = Complex::new(T::lit(rng.gen_range(-3.0..3.0)), T::lit(rng.gen_range(-3.0..3.0)));
        let lhs = p.qtilde(alpha, s * alpha);
        let am = alpha.powi(p.m() as i32);
        let rhs = q.eval_complex(s) * am;
        // scale by the size of the individual terms so cancellation near a root is harmless
        let scale: T = q
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * s.norm().powi(k as i32))
            .sum::<T>()
            * am;
        (lhs - rhs).norm() <= T::lit(QTILDE_REL) * scale.max(T::min_positive_value())
    })
}

/// `Q̃_α(αs) = αᵐ Q(s)` with `Q` extracted from `p` itself.
pub fn qtilde_identity_check<T: Real>(p: &BivariatePoly<T>, trials: usize) -> bool {
    match extract_p0_q(p) {
        Ok((_, q)) => qtilde_matches(p, &q, trials),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_unstable() -> LinearSystem<f64> {
        LinearSystem::new(
            Matrix::from_rows(&[[1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            1.0,
            Variant::Basic,
        )
        .unwrap()
    }

    #[test]
    fn phi_scalar_by_hand() {
        let sys = LinearSystem::<f64>::new(
            Matrix::from_rows(&[[-1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            1.0,
            Variant::Basic,
        )
        .unwrap();
        let (phi, psi) = build_phi_psi(&sys, 1.0).unwrap();
        let e = (-1f64).exp();
        assert!((phi[(0, 0)] + 1.0).abs() < 1e-12);
        assert!((phi[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((phi[(1, 0)] + e / (1.0 - e)).abs() < 1e-10);
        assert!((phi[(1, 1)] + 1.0).abs() < 1e-12);
        assert_eq!(psi[(0, 0)], 0.0);
        assert!((psi[(1, 0)] - 1.0 / (1.0 - e)).abs() < 1e-10);
    }

    #[test]
    fn scalar_unstable_plant_by_hand() {
        // Φ_α = [[1, 1], [−α e/(e−1), −α]]:
        // det(sI − Φ_α) = s² − s + α(s − 1 + e/(e−1)) = (s² − s) + α(s + 1/(e−1))
        let sys = scalar_unstable();
        let p = char_poly_bivariate(&sys).unwrap();
        let k = 1.0 / (std::f64::consts::E - 1.0);
        assert!((p.coeff(1, 2) - 1.0).abs() < 1e-12);
        assert!((p.coeff(1, 1) + 1.0).abs() < 1e-10);
        assert!(p.coeff(1, 0).abs() < 1e-10);
        assert!((p.coeff(0, 1) - 1.0).abs() < 1e-10);
        assert!((p.coeff(0, 0) - k).abs() < 1e-10);
        let cert = certify(&sys).unwrap();
        assert_eq!(cert.verdict, Verdict::AlphaStable);
        assert!((cert.p0_roots[0].re + k).abs() < 1e-10);
        assert!((cert.q_roots[0].re + 1.0).abs() < 1e-10);
        assert_eq!(cert.witness_alpha, Some(1e3));
    }

    #[test]
    fn enhanced_is_rejected() {
        let r = LinearSystem::new(
            Matrix::from_rows(&[[1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            1.0,
            Variant::Enhanced,
        );
        assert!(r.is_err());
    }

    #[test]
    fn q_of_two_term_bivariate() {
        let c = 0.7;
        let p = BivariatePoly::from_rows(2, vec![vec![3.0, 2.0, c], vec![0.0, 5.0, -1.0, 1.0]]).unwrap();
        let (p0, q) = extract_p0_q(&p).unwrap();
        assert_eq!(q.coeffs(), &[c, 1.0]);
        assert_eq!(p0.coeffs(), &[3.0, 2.0, c]);
        let degenerate = p.with_coeff(0, 2, 0.0).unwrap();
        assert!(matches!(extract_p0_q(&degenerate), Err(Error::DegenerateStructure(_))));
    }

    #[test]
    fn qtilde_hand_expansion() {
        // m = 1, Q(s) = s + 1: Q̃₂(2s) = 2s + 2 = 2·Q(s)
        let p = BivariatePoly::from_rows(1, vec![vec![5.0, 1.0], vec![0.0, 3.0, 1.0]]).unwrap();
        let s = Complex::new(0.3, -0.4);
        let lhs = p.qtilde(2.0, s * 2.0);
        assert!((lhs - (s + 1.0) * 2.0).norm() < 1e-14);
        assert!(qtilde_identity_check(&p, 50));
        let (_, q) = extract_p0_q(&p).unwrap();
        let corrupted = p.with_coeff(0, 1, 1.1).unwrap();
        assert!(!qtilde_matches(&corrupted, &q, 50));
    }

    #[test]
    fn greedy_match_pairs_nearest() {
        let prev = [Complex::new(0.0, 0.0), Complex::new(10.0, 0.0)];
        let next = [Complex::new(10.5, 0.0), Complex::new(0.2, 0.0)];
        let (a, tie) = greedy_match(&prev, &next);
        assert_eq!(a, vec![1, 0]);
        assert!(!tie);
        let (_, tie) = greedy_match(&[Complex::new(0.0, 0.0)], &[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)]);
        assert!(tie);
    }

    #[test]
    fn single_gain_locus() {
        let loc = root_locus(&scalar_unstable(), &[5.0]).unwrap();
        assert_eq!(loc.branches.len(), 2);
        assert!(loc.branches.iter().all(|b| b.len() == 1));
        assert!(root_locus(&scalar_unstable(), &[]).is_err());
        assert!(root_locus(&scalar_unstable(), &[2.0, 1.0]).is_err());
    }
}

//! Dense complex nonsymmetric eigenvalues: one diagonal balancing pass,
//! Householder reduction to Hessenberg form, then single-shift complex QR
//! with Wilkinson shifts. Eigenvectors come from inverse iteration.

use std::ops::{Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{ensure_finite, MonicPolynomial};
use crate::C64;

pub const MAX_DIMENSION: usize = 64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseComplexMatrix {
    pub fn new(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: data.len() });
        }
        ensure_finite(&data, "matrix entry")?;
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: bad.len() });
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Companion matrix of a monic polynomial; its eigenvalues are the zeros.
    pub fn companion(p: &MonicPolynomial) -> Self {
        let n = p.degree();
        let mut m = Self::zeros(n);
        for (j, &c) in p.coefficients().iter().enumerate() {
            m[(0, j)] = -c;
        }
        for i in 1..n {
            m[(i, i - 1)] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `P M P^T` where `P` maps index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(perm[i], perm[j])] = self[(i, j)];
            }
        }
        out
    }

    pub fn lu(&self) -> Lu {
        Lu::factor(self)
    }

    pub fn determinant(&self) -> C64 {
        self.lu().determinant()
    }
}

impl Index<(usize, usize)> for DenseComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &DenseComplexMatrix {
    type Output = DenseComplexMatrix;
    fn mul(self, rhs: &DenseComplexMatrix) -> DenseComplexMatrix {
        let n = self.n;
        let mut out = DenseComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Sub for &DenseComplexMatrix {
    type Output = DenseComplexMatrix;
    fn sub(self, rhs: &DenseComplexMatrix) -> DenseComplexMatrix {
        DenseComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: DenseComplexMatrix,
    perm: Vec<usize>,
    odd: bool,
}

impl Lu {
    fn factor(m: &DenseComplexMatrix) -> Self {
        let n = m.n;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| lu[(a, k)].norm().total_cmp(&lu[(b, k)].norm()))
                .unwrap();
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = lu[(k, k)];
            if pivot == ZERO {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Self { lu, perm, odd }
    }

    pub fn determinant(&self) -> C64 {
        let d: C64 = (0..self.lu.n).map(|i| self.lu[(i, i)]).product();
        if self.odd {
            -d
        } else {
            d
        }
    }

    fn min_pivot(&self) -> f64 {
        (0..self.lu.n).map(|i| self.lu[(i, i)].norm()).fold(f64::INFINITY, f64::min)
    }

    fn solve_with_floor(&self, b: &[C64], floor: f64) -> Vec<C64> {
        let n = self.lu.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let t = self.lu[(i, k)] * x[k];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.lu[(i, k)] * x[k];
                x[i] -= t;
            }
            let mut d = self.lu[(i, i)];
            if d.norm() < floor {
                d = C64::new(floor, 0.0);
            }
            x[i] /= d;
        }
        x
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.lu.n {
            return Err(Error::DimensionMismatch { expected: self.lu.n, actual: b.len() });
        }
        if self.min_pivot() == 0.0 {
            return Err(Error::SingularConfiguration("matrix is singular".into()));
        }
        Ok(self.solve_with_floor(b, 0.0))
    }
}

/// Complex Householder reflector `I - 2 v v*` mapping `x` onto a multiple of
/// the first basis vector. Returns `None` when `x` is already in that form.
fn householder(x: &[C64]) -> Option<Vec<C64>> {
    let tail: f64 = x[1..].iter().map(|v| v.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let norm = (x[0].norm_sqr() + tail).sqrt();
    let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
    let mut v = x.to_vec();
    v[0] += phase * norm;
    let vn = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in v.iter_mut() {
        *a /= vn;
    }
    Some(v)
}

fn reduce_to_hessenberg(h: &mut DenseComplexMatrix, mut q: Option<&mut DenseComplexMatrix>) {
    let n = h.n;
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some(v) = householder(&x) else { continue };
        // left: rows k+1.. of H
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)]).sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= 2.0 * vr * dot;
            }
        }
        // right: columns k+1.. of H (and Q)
        let right = |m: &mut DenseComplexMatrix| {
            for i in 0..n {
                let dot: C64 = v.iter().enumerate().map(|(r, vr)| m[(i, k + 1 + r)] * vr).sum();
                for (r, vr) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= 2.0 * dot * vr.conj();
                }
            }
        };
        right(h);
        if let Some(q) = q.as_deref_mut() {
            right(q);
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Unitary similarity `M = Q H Q*` with `H` upper Hessenberg.
pub fn hessenberg_reduce(m: &DenseComplexMatrix) -> (DenseComplexMatrix, DenseComplexMatrix) {
    let mut h = m.clone();
    let mut q = DenseComplexMatrix::identity(m.n);
    reduce_to_hessenberg(&mut h, Some(&mut q));
    (h, q)
}

/// One pass of power-of-two diagonal scaling `D^-1 M D` equalizing
/// off-diagonal row and column norms.
fn balance(m: &mut DenseComplexMatrix) {
    let n = m.n;
    for i in 0..n {
        let mut c = 0.0;
        let mut r = 0.0;
        for j in 0..n {
            if j != i {
                c += m[(j, i)].norm();
                r += m[(i, j)].norm();
            }
        }
        if c == 0.0 || r == 0.0 {
            continue;
        }
        let f = (r / c).sqrt().log2().round().exp2();
        if f == 1.0 {
            continue;
        }
        for j in 0..n {
            m[(i, j)] /= f;
            m[(j, i)] *= f;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<C64>,
    /// Columns are unit-norm eigenvectors, in eigenvalue order.
    pub eigenvectors: Option<DenseComplexMatrix>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: f64::EPSILON, max_sweeps: 10_000 }
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (m1, m2) = (mean + disc, mean - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Givens rotation `[[c, s], [-conj(s), c]]` with real `c` that maps
/// `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let r = na.hypot(b.norm());
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    (na / r, (a / na) * b.conj() / r)
}

/// All eigenvalues of `m`, in the order they deflate.
///
/// Deflation sets `h[k+1][k]` to zero once
/// `|h[k+1][k]| <= tol (|h[k][k]| + |h[k+1][k+1]|)`.
pub fn eigenvalues(m: &DenseComplexMatrix, opts: EigenOptions) -> Result<EigenResult> {
    let n = m.n;
    if n > MAX_DIMENSION {
        return Err(Error::InvalidInput(format!("dimension {n} exceeds {MAX_DIMENSION}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("eigen tolerance must be positive".into()));
    }
    if n == 0 {
        return Ok(EigenResult { eigenvalues: vec![], eigenvectors: None, iterations: 0, converged: true });
    }
    let mut h = m.clone();
    balance(&mut h);
    reduce_to_hessenberg(&mut h, None);
    let norm = h.frobenius_norm();

    let mut eig = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iterations = 0;
    let mut since_deflation = 0;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut scale = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if sub <= opts.tol * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iterations += 1;
        since_deflation += 1;
        if iterations > opts.max_sweeps {
            return Err(Error::NonConvergence { what: "complex QR", iterations });
        }

        let mu = if since_deflation % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(0.75, 0.5) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            h[(k + 1, k)] = ZERO;
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = l + offset;
            for i in l..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    eig[0] = h[(0, 0)];
    Ok(EigenResult { eigenvalues: eig, eigenvectors: None, iterations, converged: true })
}

/// Relative gap below which a spectrum counts as degenerate.
pub const SIMPLE_GAP: f64 = 1e-6;

fn minimum_gap(values: &[C64]) -> f64 {
    crate::poly::min_separation(values)
}

/// Unit-norm eigenvectors for simple eigenvalues by inverse iteration.
///
/// Each column satisfies `||M u - lambda u|| <= 1e-8 ||M||_F` or the call
/// fails with `NonConvergence`.
pub fn eigenvectors(m: &DenseComplexMatrix, values: &[C64]) -> Result<EigenResult> {
    let n = m.n;
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: values.len() });
    }
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let gap = minimum_gap(values);
    if gap < SIMPLE_GAP * scale {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let norm = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let floor = f64::EPSILON * norm;
    let mut vectors = DenseComplexMatrix::zeros(n);
    let mut iterations = 0;

    for (col, &lambda) in values.iter().enumerate() {
        let mut shifted = m.clone();
        let perturbed = lambda + C64::new(floor, 0.0);
        for i in 0..n {
            shifted[(i, i)] -= perturbed;
        }
        let lu = shifted.lu();
        let mut x: Vec<C64> = (0..n).map(|k| C64::new(1.0, 0.1 * (k as f64 + 1.0))).collect();
        // three inverse-iteration steps plus one refinement step
        for _ in 0..4 {
            iterations += 1;
            let y = lu.solve_with_floor(&x, floor);
            let yn = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if !(yn.is_finite() && yn > 0.0) {
                return Err(Error::NonConvergence { what: "inverse iteration", iterations });
            }
            x = y.into_iter().map(|v| v / yn).collect();
        }
        // fix the phase so the largest component is real and positive
        let big = x.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        let phase = big.conj() / big.norm();
        for v in x.iter_mut() {
            *v *= phase;
        }
        let mx = m.mul_vec(&x);
        let residual = mx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > 1e-8 * norm {
            return Err(Error::NonConvergence { what: "inverse iteration", iterations });
        }
        for (i, v) in x.into_iter().enumerate() {
            vectors[(i, col)] = v;
        }
    }
    Ok(EigenResult {
        eigenvalues: values.to_vec(),
        eigenvectors: Some(vectors),
        iterations,
        converged: true,
    })
}

/// Eigenvalues followed by inverse-iteration eigenvectors.
pub fn eigen_decomposition(m: &DenseComplexMatrix, opts: EigenOptions) -> Result<EigenResult> {
    let values = eigenvalues(m, opts)?;
    let mut vecs = eigenvectors(m, &values.eigenvalues)?;
    vecs.iterations += values.iterations;
    Ok(vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{lexicographic, roots, RootOptions};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(lexicographic);
        v
    }

    #[test]
    fn diagonal_is_already_hessenberg() {
        let m = DenseComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let (h, q) = hessenberg_reduce(&m);
        assert_eq!(h, m);
        assert_eq!(q, DenseComplexMatrix::identity(3));
        let e = eigenvalues(&m, EigenOptions::default()).unwrap();
        assert_eq!(sorted(e.eigenvalues), vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn two_by_two_is_untouched() {
        let m = DenseComplexMatrix::from_rows(vec![vec![c(1.0, 2.0), c(3.0, -1.0)], vec![c(0.5, 0.5), c(-2.0, 0.0)]])
            .unwrap();
        let (h, _) = hessenberg_reduce(&m);
        assert_eq!(h, m);
    }

    #[test]
    fn rotation_generator() {
        let m = DenseComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let e = sorted(eigenvalues(&m, EigenOptions::default()).unwrap().eigenvalues);
        assert!((e[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_agrees_with_aberth() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = MonicPolynomial::from_real(&[s, -s]).unwrap();
        let qr = sorted(eigenvalues(&DenseComplexMatrix::companion(&p), EigenOptions::default()).unwrap().eigenvalues);
        let ab = roots(&p, RootOptions::default()).unwrap();
        for (a, b) in qr.iter().zip(ab.as_slice()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_of_diagonal() {
        let d = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let m = DenseComplexMatrix::diagonal(&d);
        let r = eigenvectors(&m, &d).unwrap();
        let u = r.eigenvectors.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((u[(i, j)] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn jordan_block_is_degenerate() {
        let m = DenseComplexMatrix::from_rows(vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        let err = eigenvectors(&m, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateSpectrum { .. }));
    }

    #[test]
    fn rejects_oversized_and_bad_tolerance() {
        let m = DenseComplexMatrix::identity(65);
        assert!(eigenvalues(&m, EigenOptions::default()).is_err());
        let m = DenseComplexMatrix::identity(2);
        assert!(eigenvalues(&m, EigenOptions { tol: 0.0, max_sweeps: 10 }).is_err());
    }

    #[test]
    fn sweep_budget_exhaustion() {
        let p = MonicPolynomial::from_real(&[1.0, -2.0, 3.0, 0.5, 1.0]).unwrap();
        let m = DenseComplexMatrix::companion(&p);
        let err = eigenvalues(&m, EigenOptions { tol: f64::EPSILON, max_sweeps: 1 }).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn lu_determinant_and_solve() {
        let m = DenseComplexMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 1.0), c(3.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, -1.0)],
        ])
        .unwrap();
        // cofactor expansion along the first row
        let det = c(2.0, 0.0) * (c(3.0, 0.0) * c(1.0, -1.0) - c(1.0, 0.0) * c(0.0, 0.0))
            - c(1.0, 1.0) * (c(0.0, 1.0) * c(1.0, -1.0) - c(1.0, 0.0) * c(1.0, 0.0));
        assert!((m.determinant() - det).norm() < 1e-13);
        let b = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let x = m.lu().solve(&b).unwrap();
        let back = m.mul_vec(&x);
        for (a, b) in back.iter().zip(&b) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!(DenseComplexMatrix::zeros(2).lu().solve(&[ONE, ONE]).is_err());
    }
}

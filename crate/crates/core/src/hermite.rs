//! Hermite polynomials `H_N` (physicists' normalization), their zeros, the
//! two algebraic equilibrium identities those zeros satisfy, and the `N!`
//! orderings that assign them to polynomial coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::MonicPolynomial;
use crate::C64;

/// Largest order for which the closed-form coefficient sum stays finite.
pub const MAX_COEFFICIENT_ORDER: usize = 170;
/// Orders accepted by [`hermite_zeros`] and the rest of the pipeline.
pub const MAX_ORDER: usize = 30;
/// Both equilibrium residuals must stay below this at construction.
pub const RESIDUAL_BOUND: f64 = 1e-10;

/// Dense monomial coefficients `[a_0, a_1, ..., a_N]` of
/// `H_N(c) = N! sum_k (-1)^k (2c)^(N-2k) / (k! (N-2k)!)`.
pub fn hermite_coefficients(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("Hermite order must be >= 1".into()));
    }
    if n > MAX_COEFFICIENT_ORDER {
        return Err(Error::Overflow(format!("H_{n} coefficients exceed double range")));
    }
    let mut a = vec![0.0; n + 1];
    // leading term 2^N, then a_{N-2k} = -a_{N-2k+2} (N-2k+2)(N-2k+1) / (4k)
    let mut term = 2f64.powi(n as i32);
    a[n] = term;
    for k in 1..=n / 2 {
        let hi = (n - 2 * k + 2) as f64;
        let lo = (n - 2 * k + 1) as f64;
        term = -term * hi * lo / (4.0 * k as f64);
        a[n - 2 * k] = term;
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Overflow(format!("H_{n} coefficients exceed double range")));
    }
    Ok(a)
}

/// `(H_N(x), H_{N-1}(x))` by the three-term recurrence.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    if n == 0 {
        return (prev, 0.0);
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `H_N(x)` by recurrence; well conditioned where the monomial form is not.
pub fn hermite_value(n: usize, x: f64) -> f64 {
    hermite_pair(n, x).0
}

/// Eigenvalues of a real symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `off[i]` couples rows `i` and `i + 1`.
pub(crate) fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence { what: "tridiagonal QL", iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Ascending zeros of `H_N` together with their equilibrium residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteZeros {
    pub order: usize,
    pub zeros: Vec<f64>,
    /// `max_m |c_m - sum_{l != m} 1/(c_m - c_l)|`
    pub residual_first: f64,
    /// `max_m |-c_m + 2 sum_{l != m} 1/(c_m - c_l)^3|`
    pub residual_second: f64,
}

impl HermiteZeros {
    pub fn as_complex(&self) -> Vec<C64> {
        self.zeros.iter().map(|&x| C64::new(x, 0.0)).collect()
    }
}

/// Zeros of `H_N` for `2 <= N <= 30`: eigenvalues of the Jacobi matrix with
/// off-diagonal `sqrt(k/2)`, one Newton step on the recurrence, then exact
/// symmetrization about the origin.
pub fn hermite_zeros(n: usize) -> Result<HermiteZeros> {
    if !(2..=MAX_ORDER).contains(&n) {
        return Err(Error::IndexOutOfRange {
            what: "N",
            value: n as i64,
            min: 2,
            max: MAX_ORDER as i64,
        });
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut zeros = symmetric_tridiagonal_eigenvalues(&diag, &off)?;

    for x in zeros.iter_mut() {
        let (h, h_prev) = hermite_pair(n, *x);
        let dh = 2.0 * n as f64 * h_prev;
        if dh != 0.0 {
            let step = h / dh;
            if step.is_finite() {
                *x -= step;
            }
        }
    }
    for k in 0..n / 2 {
        let mirrored = 0.5 * (zeros[n - 1 - k] - zeros[k]);
        zeros[k] = -mirrored;
        zeros[n - 1 - k] = mirrored;
    }
    if n % 2 == 1 {
        zeros[n / 2] = 0.0;
    }

    let residual_first = residual_first_order(&zeros)?;
    let residual_second = residual_second_order(&zeros)?;
    if residual_first >= RESIDUAL_BOUND || residual_second >= RESIDUAL_BOUND {
        return Err(Error::NonConvergence { what: "Hermite zeros", iterations: 1 });
    }
    Ok(HermiteZeros { order: n, zeros, residual_first, residual_second })
}

fn pairwise_residual(c: &[f64], combine: impl Fn(f64, f64) -> f64, pair: impl Fn(f64) -> f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (m, &cm) in c.iter().enumerate() {
        let mut sum = 0.0;
        for (l, &cl) in c.iter().enumerate() {
            if l == m {
                continue;
            }
            if cm == cl {
                return Err(Error::DivisionByZero(m.min(l), m.max(l)));
            }
            sum += pair(cm - cl);
        }
        worst = worst.max(combine(cm, sum).abs());
    }
    Ok(worst)
}

/// `max_m |c_m - sum_{l != m} (c_m - c_l)^-1|`.
pub fn residual_first_order(c: &[f64]) -> Result<f64> {
    pairwise_residual(c, |cm, sum| cm - sum, |d| 1.0 / d)
}

/// `max_m |-c_m + 2 sum_{l != m} (c_m - c_l)^-3|`.
pub fn residual_second_order(c: &[f64]) -> Result<f64> {
    pairwise_residual(c, |cm, sum| -cm + 2.0 * sum, |d| d.powi(-3))
}

/// `n!` as `u128`; `None` once it no longer fits.
pub fn factorial(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// One assignment of the ascending Hermite zeros to coefficient slots:
/// coefficient `m` is `zeros[word[m] - 1]`. `ordinal` is the 1-based
/// lexicographic rank of `word` among all `n!` words.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationId {
    pub n: usize,
    pub word: Vec<usize>,
    pub ordinal: u128,
}

impl PermutationId {
    pub fn identity(n: usize) -> Self {
        Self { n, word: (1..=n).collect(), ordinal: 1 }
    }

    pub fn from_word(word: Vec<usize>) -> Result<Self> {
        let n = word.len();
        let mut seen = vec![false; n + 1];
        for &w in &word {
            if w == 0 || w > n || seen[w] {
                return Err(Error::InvalidInput(format!("{word:?} is not a permutation of 1..={n}")));
            }
            seen[w] = true;
        }
        let ordinal = lexicographic_rank(&word)?;
        Ok(Self { n, word, ordinal })
    }

    /// Inverse of the lexicographic rank.
    pub fn from_ordinal(n: usize, ordinal: u128) -> Result<Self> {
        let total = factorial(n).ok_or_else(|| Error::Overflow(format!("{n}! exceeds u128")))?;
        if ordinal == 0 || ordinal > total {
            return Err(Error::InvalidInput(format!("ordinal {ordinal} outside 1..={total}")));
        }
        let mut rest = ordinal - 1;
        let mut pool: Vec<usize> = (1..=n).collect();
        let mut word = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let block = factorial(i).unwrap();
            let idx = (rest / block) as usize;
            rest %= block;
            word.push(pool.remove(idx));
        }
        Ok(Self { n, word, ordinal })
    }

    /// Applies the word to `values` (the ascending zeros).
    pub fn apply<T: Copy>(&self, values: &[T]) -> Vec<T> {
        self.word.iter().map(|&w| values[w - 1]).collect()
    }
}

fn lexicographic_rank(word: &[usize]) -> Result<u128> {
    let n = word.len();
    let mut rank = 0u128;
    for i in 0..n {
        let smaller_after = word[i + 1..].iter().filter(|&&w| w < word[i]).count() as u128;
        let block = factorial(n - 1 - i).ok_or_else(|| Error::Overflow(format!("{n}! exceeds u128")))?;
        rank += smaller_after * block;
    }
    Ok(rank + 1)
}

/// Streams permutation words in lexicographic order.
#[derive(Clone, Debug)]
pub struct Orderings {
    next: Option<Vec<usize>>,
    ordinal: u128,
    remaining: Option<u128>,
}

impl Iterator for Orderings {
    type Item = PermutationId;

    fn next(&mut self) -> Option<PermutationId> {
        if self.remaining == Some(0) {
            return None;
        }
        let word = self.next.take()?;
        let id = PermutationId { n: word.len(), word: word.clone(), ordinal: self.ordinal };
        self.ordinal += 1;
        if let Some(r) = self.remaining.as_mut() {
            *r -= 1;
        }
        self.next = next_permutation(word);
        Some(id)
    }
}

fn next_permutation(mut w: Vec<usize>) -> Option<Vec<usize>> {
    let n = w.len();
    let i = (0..n.saturating_sub(1)).rev().find(|&i| w[i] < w[i + 1])?;
    let j = (i + 1..n).rev().find(|&j| w[j] > w[i])?;
    w.swap(i, j);
    w[i + 1..].reverse();
    Some(w)
}

/// All `N!` orderings in lexicographic order, or the first `limit`.
pub fn enumerate_orderings(n: usize, limit: Option<u128>) -> Result<Orderings> {
    if n < 2 {
        return Err(Error::InvalidInput("orderings need N >= 2".into()));
    }
    Ok(Orderings { next: Some((1..=n).collect()), ordinal: 1, remaining: limit })
}

/// Coefficients `[c_{word(1)}, ..., c_{word(N)}]` as a monic polynomial.
pub fn permuted_polynomial(h: &HermiteZeros, perm: &PermutationId) -> Result<MonicPolynomial> {
    if perm.n != h.order || perm.word.len() != h.order {
        return Err(Error::DimensionMismatch { expected: h.order, actual: perm.n });
    }
    MonicPolynomial::from_real(&perm.apply(&h.zeros))
}

/// The labels `mu = 1..6` used for the six `N = 3` assignments in the
/// original worked example, as words on the ascending zeros
/// `(-sqrt(3/2), 0, sqrt(3/2))`. These labels do not follow lexicographic
/// rank.
pub const MU_TABLE_N3: [(u32, [usize; 3]); 6] = [
    (1, [2, 3, 1]),
    (2, [2, 1, 3]),
    (3, [3, 2, 1]),
    (4, [3, 1, 2]),
    (5, [1, 3, 2]),
    (6, [1, 2, 3]),
];

/// `(mu, PermutationId)` pairs for [`MU_TABLE_N3`].
pub fn mu_table_n3() -> Vec<(u32, PermutationId)> {
    MU_TABLE_N3
        .iter()
        .map(|(mu, w)| (*mu, PermutationId::from_word(w.to_vec()).expect("valid word")))
        .collect()
}

use diophantine_core::dynamics::{
    coefficient_rate, rhs_gamma_first, rhs_gamma_second, rhs_zeta_first, rhs_zeta_second, LinearModes, PERIOD,
};
use diophantine_core::eigen::{eigenvalues, hessenberg_reduce, DenseComplexMatrix, EigenOptions};
use diophantine_core::hermite::{
    enumerate_orderings, factorial, hermite_coefficients, hermite_value, hermite_zeros, permuted_polynomial,
    PermutationId,
};
use diophantine_core::matrices::{build, permutation_similarity_check, MatrixKind};
use diophantine_core::poly::{
    elementary_symmetric, min_separation, poly_from_zeros, roots, sigma, sigma_enumerated, sigma_excluding,
    vieta_jacobian_apply, MonicPolynomial, RootOptions, ZeroVector,
};
use diophantine_core::{Error, C64};
use proptest::prelude::*;

fn complex(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| C64::new(re, im))
}

fn vector(len: std::ops::RangeInclusive<usize>, scale: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(scale), len)
}

/// Entries pairwise at least `gap` apart.
fn separated(len: std::ops::RangeInclusive<usize>, scale: f64, gap: f64) -> impl Strategy<Value = Vec<C64>> {
    vector(len, scale).prop_filter("separated", move |v| min_separation(v) > gap)
}

fn square(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DenseComplexMatrix> {
    n.prop_flat_map(|n| prop::collection::vec(complex(2.0), n * n).prop_map(move |d| DenseComplexMatrix::new(n, d).unwrap()))
}

/// Largest distance after greedily pairing each element of `a` with its
/// nearest unused element of `b`.
fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn roots_recover_zeros(z in separated(2..=8, 1.5, 0.2)) {
        let p = poly_from_zeros(&ZeroVector::new(z.clone()).unwrap());
        let found = roots(&p, RootOptions::default()).unwrap();
        prop_assert!(multiset_distance(&z, found.as_slice()) < 1e-8);
    }

    #[test]
    fn vieta_signs_and_vanishing(z in vector(1..=9, 2.0)) {
        let zv = ZeroVector::new(z.clone()).unwrap();
        let p = poly_from_zeros(&zv);
        for (m, c) in p.coefficients().iter().enumerate() {
            let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((c - sigma(m as i64 + 1, &zv).unwrap() * sign).norm() < 1e-12);
        }
        for &x in &z {
            prop_assert!(p.evaluate(x).norm() <= 1e-12 * p.evaluation_scale(x).max(1.0));
        }
    }

    #[test]
    fn recurrence_matches_subset_enumeration(z in vector(1..=10, 1.5)) {
        let zv = ZeroVector::new(z.clone()).unwrap();
        let e = elementary_symmetric(&z);
        for j in 0..=z.len() {
            let brute = sigma_enumerated(j as i64, &zv).unwrap();
            prop_assert!((e[j] - brute).norm() <= 1e-12 * brute.norm().max(1.0));
        }
    }

    #[test]
    fn sigma_splits_on_one_component(z in vector(3..=8, 1.5), pick in any::<prop::sample::Index>()) {
        let zv = ZeroVector::new(z.clone()).unwrap();
        let n = z.len() as i64;
        let m = pick.index(z.len()) as i64 + 1;
        let zm = z[(m - 1) as usize];
        for j in 2..n {
            let lhs = sigma(j, &zv).unwrap();
            let rhs = sigma_excluding(m, j + 1, &zv).unwrap() + zm * sigma_excluding(m, j, &zv).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-11);
        }
        // j = 1: the excluded sum is empty by convention, so the lone z_m
        // term has to be added back explicitly
        let lhs = sigma(1, &zv).unwrap();
        let rhs = sigma_excluding(m, 2, &zv).unwrap() + zm * (sigma_excluding(m, 1, &zv).unwrap() + 1.0);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn vieta_jacobian_is_linear(z in vector(2..=7, 1.5), seed in vector(14..=14, 1.0), a in -2.0..2.0f64) {
        let n = z.len();
        let zv = ZeroVector::new(z).unwrap();
        let (u, v) = (&seed[..n], &seed[7..7 + n]);
        let combo: Vec<C64> = u.iter().zip(v).map(|(x, y)| x * a + y).collect();
        let lhs = vieta_jacobian_apply(&zv, &combo).unwrap();
        let ju = vieta_jacobian_apply(&zv, u).unwrap();
        let jv = vieta_jacobian_apply(&zv, v).unwrap();
        for i in 0..n {
            prop_assert!((lhs[i] - (ju[i] * a + jv[i])).norm() < 1e-11);
        }
    }

    #[test]
    fn vieta_jacobian_matches_differences(z in vector(2..=7, 1.5), v in vector(7..=7, 1.0)) {
        let n = z.len();
        let v = &v[..n];
        let h = 1e-6;
        let shift = |s: f64| {
            let moved: Vec<C64> = z.iter().zip(v).map(|(a, b)| a + b * s).collect();
            poly_from_zeros(&ZeroVector::new(moved).unwrap()).coefficients().to_vec()
        };
        let (plus, minus) = (shift(h), shift(-h));
        let exact = vieta_jacobian_apply(&ZeroVector::new(z.clone()).unwrap(), v).unwrap();
        for i in 0..n {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            prop_assert!((fd - exact[i]).norm() <= 1e-6 * exact[i].norm().max(1.0));
        }
    }

    #[test]
    fn eigenvalues_reproduce_trace_and_determinant(m in square(1..=8)) {
        let ev = eigenvalues(&m, EigenOptions::default()).unwrap().eigenvalues;
        let scale = m.frobenius_norm().max(1.0);
        let sum: C64 = ev.iter().sum();
        let prod: C64 = ev.iter().product();
        prop_assert!((sum - m.trace()).norm() <= 1e-10 * scale);
        let det = m.determinant();
        prop_assert!((prod - det).norm() <= 1e-9 * scale.powi(m.dim() as i32));
    }

    #[test]
    fn eigenvalues_survive_permutation_similarity(m in square(2..=7), shuffle in any::<prop::sample::Index>()) {
        let n = m.dim();
        let perm = PermutationId::from_ordinal(n, shuffle.index(factorial(n).unwrap() as usize) as u128 + 1).unwrap();
        let p: Vec<usize> = perm.word.iter().map(|w| w - 1).collect();
        let a = eigenvalues(&m, EigenOptions::default()).unwrap().eigenvalues;
        let b = eigenvalues(&m.permuted(&p), EigenOptions::default()).unwrap().eigenvalues;
        // simple eigenvalues are stable at roughly sqrt(eps) for clustered spectra
        prop_assert!(multiset_distance(&a, &b) <= 1e-6 * m.frobenius_norm().max(1.0));
    }

    #[test]
    fn hessenberg_reconstructs(m in square(1..=9)) {
        let (h, q) = hessenberg_reduce(&m);
        let n = m.dim();
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                prop_assert_eq!(h[(i, j)], C64::new(0.0, 0.0));
            }
        }
        let back = &(&q * &h) * &q.conj_transpose();
        prop_assert!((&back - &m).max_abs() <= 1e-12 * m.frobenius_norm().max(1.0) * n as f64);
        let gram = &q.conj_transpose() * &q;
        prop_assert!((&gram - &DenseComplexMatrix::identity(n)).max_abs() < 1e-13 * n as f64);
    }

    #[test]
    fn companion_eigenvalues_are_roots(c in vector(2..=8, 1.5)) {
        let p = MonicPolynomial::new(c).unwrap();
        let r = roots(&p, RootOptions::default()).unwrap();
        if r.separation() > 1e-3 {
            let ev = eigenvalues(&DenseComplexMatrix::companion(&p), EigenOptions::default()).unwrap().eigenvalues;
            prop_assert!(multiset_distance(&ev, r.as_slice()) < 1e-8);
        }
    }

    #[test]
    fn build_commutes_with_transpositions(
        z in separated(2..=6, 1.5, 0.1),
        c in vector(6..=6, 1.5),
        a in any::<prop::sample::Index>(),
        b in any::<prop::sample::Index>(),
    ) {
        let n = z.len();
        let c = &c[..n];
        prop_assume!(min_separation(c) > 0.2);
        let (i, j) = (a.index(n) + 1, b.index(n) + 1);
        prop_assume!(i != j);
        let zv = ZeroVector::new(z).unwrap();
        for kind in [MatrixKind::M1, MatrixKind::M2] {
            let scale = build(kind, &zv, c).unwrap().entries.max_abs();
            let d = permutation_similarity_check(&zv, c, kind, (i.min(j), i.max(j))).unwrap();
            prop_assert!(d <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn first_order_chain_rule(z in separated(3..=3, 1.5, 0.2)) {
        let gamma = poly_from_zeros(&ZeroVector::new(z.clone()).unwrap()).coefficients().to_vec();
        prop_assume!(min_separation(&gamma) > 0.1);
        let zdot = rhs_zeta_first(&z).unwrap();
        let implied = coefficient_rate(&z, &zdot).unwrap();
        let direct = rhs_gamma_first(&gamma).unwrap();
        let scale = max_norm(&direct).max(1.0);
        for i in 0..3 {
            prop_assert!((implied[i] - direct[i]).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn second_order_chain_rule(z in separated(3..=3, 1.5, 0.3), zdot in vector(3..=3, 0.5)) {
        let gamma = poly_from_zeros(&ZeroVector::new(z.clone()).unwrap()).coefficients().to_vec();
        prop_assume!(min_separation(&gamma) > 0.2);
        let zdd = rhs_zeta_second(&z, &zdot).unwrap();
        // coefficients along the quadratic curve through (z, z', z'')
        let at = |t: f64| {
            let p: Vec<C64> = (0..3).map(|i| z[i] + zdot[i] * t + zdd[i] * (t * t / 2.0)).collect();
            poly_from_zeros(&ZeroVector::new(p).unwrap()).coefficients().to_vec()
        };
        let second = |h: f64, i: usize| (at(h)[i] - gamma[i] * 2.0 + at(-h)[i]) / (h * h);
        let direct = rhs_gamma_second(&gamma).unwrap();
        let scale = max_norm(&direct).max(1.0);
        for i in 0..3 {
            // Richardson step removes the O(h^2) term of the second difference
            let fd = (second(1e-3, i) * 4.0 - second(2e-3, i)) / 3.0;
            prop_assert!((fd - direct[i]).norm() <= 1e-6 * scale);
        }
    }

    #[test]
    fn linear_evolution_superposes(rank in 1u128..=24, u in vector(4..=4, 1.0), v in vector(4..=4, 1.0), t in 0.0..7.0f64) {
        let h = hermite_zeros(4).unwrap();
        let p = permuted_polynomial(&h, &PermutationId::from_ordinal(4, rank).unwrap()).unwrap();
        let z = roots(&p, RootOptions::default()).unwrap();
        let modes = LinearModes::new(&build(MatrixKind::M1, &z, p.coefficients()).unwrap(), EigenOptions::default()).unwrap();
        let sum: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let lhs = modes.evolve_first(&sum, t).unwrap();
        let (eu, ev) = (modes.evolve_first(&u, t).unwrap(), modes.evolve_first(&v, t).unwrap());
        for i in 0..4 {
            prop_assert!((lhs[i] - eu[i] - ev[i]).norm() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(19))]

    #[test]
    fn hermite_zeros_are_symmetric_equilibria(n in 2usize..=20) {
        let h = hermite_zeros(n).unwrap();
        for k in 0..n {
            prop_assert_eq!(h.zeros[k], -h.zeros[n - 1 - k]);
        }
        prop_assert!(h.residual_first < 1e-10 && h.residual_second < 1e-10);
        let bound = hermite_coefficients(n).unwrap().iter().fold(0.0f64, |a, c| a.max(c.abs()));
        for &x in &h.zeros {
            prop_assert!(hermite_value(n, x).abs() <= 1e-8 * bound);
        }
        prop_assert!(h.zeros.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn ordering_count_is_factorial() {
    for n in 2..=8 {
        let all: Vec<PermutationId> = enumerate_orderings(n, None).unwrap().collect();
        assert_eq!(all.len() as u128, factorial(n).unwrap());
        for (i, p) in all.iter().enumerate() {
            assert_eq!(p.ordinal, i as u128 + 1);
            assert_eq!(PermutationId::from_word(p.word.clone()).unwrap().ordinal, p.ordinal);
            assert_eq!(&PermutationId::from_ordinal(n, p.ordinal).unwrap(), p);
        }
        assert!(all.windows(2).all(|w| w[0].word < w[1].word));
    }
}

#[test]
fn linear_evolution_is_periodic() {
    for n in 2..=5 {
        let h = hermite_zeros(n).unwrap();
        let p = permuted_polynomial(&h, &PermutationId::identity(n)).unwrap();
        let z = roots(&p, RootOptions::default()).unwrap();
        let v0: Vec<C64> = (0..n).map(|i| C64::new(1.0 / (i + 1) as f64, 0.5 - i as f64 * 0.1)).collect();
        let m1 = LinearModes::new(&build(MatrixKind::M1, &z, p.coefficients()).unwrap(), EigenOptions::default()).unwrap();
        let m2 = LinearModes::new(&build(MatrixKind::M2, &z, p.coefficients()).unwrap(), EigenOptions::default()).unwrap();
        let zero = vec![C64::new(0.0, 0.0); n];
        for (t, tol) in [(0.0, 1e-10), (PERIOD, 1e-8)] {
            let a = m1.evolve_first(&v0, t).unwrap();
            let b = m2.evolve_second(&v0, &zero, t).unwrap();
            for i in 0..n {
                assert!((a[i] - v0[i]).norm() < tol, "n={n} t={t}");
                assert!((b[i] - v0[i]).norm() < tol, "n={n} t={t}");
            }
        }
        assert!(matches!(m1.evolve_second(&v0, &zero, 1.0), Err(Error::InvalidInput(_))));
    }
}

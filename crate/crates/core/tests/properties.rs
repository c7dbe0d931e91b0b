//! Cross-module invariants, checked on random inputs.

use num_complex::Complex64;
use proptest::prelude::{prop_assert, prop_assert_eq, prop_assume, proptest, ProptestConfig, Strategy};
use proptest::sample::subsequence;
use serde_json::Value as Json;

use mvnorm_pairs::cli::{parse_config, run_experiment};
use mvnorm_pairs::haar::{moment_oracle, sample_orthogonal, sample_unitary, MomentQuery};
use mvnorm_pairs::matrix::{ComplexMatrix, RealMatrix};
use mvnorm_pairs::pairs::{make_iid_sum_pair, ProjectionFamily, VectorLaw};
use mvnorm_pairs::rng::seeded;
use mvnorm_pairs::stein::{gauss_legendre, SteinSolution, TestFunction};
use mvnorm_pairs::transport::{w1_exact, w1_sliced_lb, SampleCloud};

/// A permutation of `0..n`.
fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::strategy::Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn query(group: char, factors: &[(char, usize, usize)], n: usize) -> MomentQuery {
    let body: String = factors.iter().map(|(s, i, j)| format!("{s}({i},{j})")).collect();
    format!("{group}:{body}@n={n}").parse().unwrap()
}

/// Report config back to flat `key=value` text.
fn config_text(config: &serde_json::Map<String, Json>) -> String {
    let scalar = |v: &Json| match v {
        Json::String(s) => s.clone(),
        other => other.to_string(),
    };
    config
        .iter()
        .map(|(k, v)| {
            let v = match v {
                Json::Array(rows) if rows.iter().all(Json::is_array) => rows
                    .iter()
                    .map(|r| r.as_array().unwrap().iter().map(scalar).collect::<Vec<_>>().join(","))
                    .collect::<Vec<_>>()
                    .join(";"),
                Json::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
                other => scalar(other),
            };
            format!("{k}={v}\n")
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn haar_samples_are_group_elements(n in 1usize..9, seed in 0u64..10_000) {
        let mut rng = seeded(seed);
        let o = sample_orthogonal(n, &mut rng);
        prop_assert!(o.matmul(&o.transpose()).unwrap().max_abs_diff(&RealMatrix::identity(n)).unwrap() < 1e-12);
        let u = sample_unitary(n, &mut rng);
        prop_assert!(u.matmul(&u.adjoint()).unwrap().max_abs_diff(&ComplexMatrix::identity(n)).unwrap() < 1e-12);
    }

    /// Left and right invariance: relabelling rows and columns leaves every moment unchanged.
    #[test]
    fn orthogonal_moments_invariant_under_relabelling(
        idx in proptest::collection::vec((1usize..5, 1usize..5), 4),
        rows in permutation(4),
        cols in permutation(4),
        n in 4usize..9,
        transpose in proptest::bool::ANY,
    ) {
        let base: Vec<_> = idx.iter().map(|&(i, j)| ('u', i, j)).collect();
        let moved: Vec<_> = idx
            .iter()
            .map(|&(i, j)| {
                let (r, c) = (rows[i - 1] + 1, cols[j - 1] + 1);
                if transpose { ('u', c, r) } else { ('u', r, c) }
            })
            .collect();
        let a = moment_oracle(&query('O', &base, n)).unwrap();
        let b = moment_oracle(&query('O', &moved, n)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn unitary_moments_invariant_under_relabelling(
        idx in proptest::collection::vec((1usize..4, 1usize..4), 4),
        rows in permutation(3),
        cols in permutation(3),
        n in 4usize..8,
    ) {
        let kinds = ['h', 'h', 'H', 'H'];
        let render = |f: &dyn Fn(usize, usize) -> (usize, usize)| -> MomentQuery {
            let body: String = idx
                .iter()
                .zip(kinds)
                .map(|(&(i, j), s)| {
                    let (r, c) = f(i, j);
                    if s == 'h' { format!("h({r},{c})") } else { format!("h*({r},{c})") }
                })
                .collect();
            format!("U:{body}@n={n}").parse().unwrap()
        };
        let a = moment_oracle(&render(&|i, j| (i, j))).unwrap();
        let b = moment_oracle(&render(&|i, j| (rows[i - 1] + 1, cols[j - 1] + 1))).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn gram_schmidt_factors_the_gram_matrix(n in 2usize..7, k in 1usize..5, seed in 0u64..10_000, complex in proptest::bool::ANY) {
        prop_assume!(k <= n * n);
        let mut rng = seeded(seed);
        if complex {
            let raw: Vec<ComplexMatrix> = (0..k).map(|_| ComplexMatrix::gaussian(n, n, &mut rng)).collect();
            let fam = ProjectionFamily::new(raw).unwrap();
            let (ortho, d) = fam.orthonormalized().unwrap();
            prop_assert!(ortho.normalization_defect() < 1e-10);
            prop_assert!(d.matmul(&d.adjoint()).unwrap().max_abs_diff(&fam.gram().normalized()).unwrap() < 1e-10);
        } else {
            let raw: Vec<RealMatrix> = (0..k).map(|_| RealMatrix::gaussian(n, n, &mut rng)).collect();
            let fam = ProjectionFamily::new(raw).unwrap();
            let (ortho, d) = fam.orthonormalized().unwrap();
            prop_assert!(ortho.normalization_defect() < 1e-10);
            prop_assert!(d.matmul(&d.transpose()).unwrap().max_abs_diff(&fam.gram().normalized()).unwrap() < 1e-10);
        }
    }

    /// One summand is swapped, so a Rademacher pair differs by 0 or ±2/sqrt(n) per coordinate.
    #[test]
    fn iid_pair_moves_one_summand(n in 2usize..40, k in 1usize..4, seed in 0u64..10_000) {
        let model = make_iid_sum_pair(VectorLaw::Rademacher(k), n).unwrap();
        let mut rng = seeded(seed);
        let (x, y) = model.sample_pair(&mut rng, None).unwrap();
        let step = 2.0 / (n as f64).sqrt();
        for (a, b) in x.iter().zip(&y) {
            let d = (b - a).abs();
            prop_assert!(d < 1e-12 || (d - step).abs() < 1e-12, "difference {d}");
        }
    }

    #[test]
    fn quadrature_exact_on_polynomials(nodes in 1usize..40, a in -3.0f64..0.0, width in 0.1f64..4.0, deg_frac in 0.0f64..1.0) {
        let b = a + width;
        let deg = ((2 * nodes - 1) as f64 * deg_frac) as i32;
        let got: f64 = gauss_legendre(nodes, a, b).iter().map(|(x, w)| w * x.powi(deg)).sum();
        let want = (b.powi(deg + 1) - a.powi(deg + 1)) / (deg + 1) as f64;
        prop_assert!((got - want).abs() <= 1e-11 * want.abs().max(1.0), "{got} vs {want}");
    }

    /// The solver is exact for linear test functions whatever the sample.
    #[test]
    fn linear_functions_solve_exactly(k in 1usize..4, seed in 0u64..1000, x in proptest::collection::vec(-3.0f64..3.0, 3)) {
        let sol = SteinSolution::new(TestFunction::builtin("linear", k).unwrap(), 16, 64, seed).unwrap();
        let v = sol.evaluate(&x[..k]).unwrap();
        prop_assert!(v.residual.value.abs() < 1e-10);
        prop_assert!(v.hess_hs() < 1e-10);
    }

    #[test]
    fn sliced_bound_below_exact(m in 2usize..40, k in 1usize..4, seed in 0u64..10_000, shift in 0.0f64..2.0) {
        let a = SampleCloud::gaussian(k, m, seed).unwrap();
        let mut b = SampleCloud::gaussian(k, m, seed + 1).unwrap();
        b.points.iter_mut().step_by(k).for_each(|p| *p += shift);
        let exact = w1_exact(&a, &b).unwrap();
        let lb = w1_sliced_lb(&a, &b, 8, &mut seeded(seed)).unwrap();
        prop_assert!(lb <= exact + 1e-9, "{lb} > {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The config embedded in a report reproduces the report.
    #[test]
    fn embedded_config_reproduces_report(
        seed in 0u64..1_000_000,
        k in 1usize..4,
        n in 5usize..30,
        ns in subsequence(vec![4usize, 5, 6], 1..=2),
    ) {
        for text in [
            format!("experiment=bound\ntheorem=ksphere\nk={k}\nn={n}\na=1.25\nseed={seed}"),
            format!("experiment=haar-check\nns={}\nsamples=500\nseed={seed}", ns.iter().map(usize::to_string).collect::<Vec<_>>().join(",")),
            format!("experiment=pair-audit\nmodel=spherical\nk={k}\nn={n}\nsamples=300\nseed={seed}"),
        ] {
            let first = run_experiment(&parse_config(&text).unwrap()).unwrap();
            let again = run_experiment(&parse_config(&config_text(&first.config.clone().into_iter().collect())).unwrap()).unwrap();
            prop_assert_eq!(first.to_json().unwrap(), again.to_json().unwrap());
        }
    }
}

#[test]
fn complex_family_statistics_are_traces() {
    let fam = ProjectionFamily::<Complex64>::coordinate(4, 2).unwrap();
    let u = sample_unitary(4, &mut seeded(3));
    let s = fam.statistics(&u);
    assert!((s[0] - u[(0, 0)] * 2.0).norm() < 1e-14);
    assert!((s[1] - u[(1, 1)] * 2.0).norm() < 1e-14);
}

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value as Json};

use super::config::{Experiment, ExperimentConfig};
use super::report::{cell, Check, Report, Table};
use crate::bounds::{
    bound_basic, bound_complex, bound_cont, bound_discrete, bound_ksphere, bound_mix, bound_uthm, BoundReport, Provenance,
    Theorem,
};
use crate::error::{Error, Result};
use crate::haar::{run_battery, sample_orthogonal};
use crate::matrix::{GramData, RealMatrix};
use crate::pairs::{
    audit_pair_with, make_iid_sum_pair, make_orthogonal_projection_pair, make_spherical_pair, make_unitary_projection_pair,
    ConditionalAudit, ModelKind, PairModel, ProjectionFamily, SphericalLaw, VectorLaw,
};
use crate::rng::{substream, SimRng};
use crate::stats::Estimate;
use crate::stein::{derivative_bound_audit, SteinSolution, TestFunction, DERIVATIVE_ALLOWANCE};
use crate::transport::{self_distance, w1_exact, w1_sliced_lb, Comparison, SampleCloud, SelfDistance};

/// Modules whose versions every report records.
pub const MODULES: [&str; 7] = ["matrix", "haar", "pairs", "bounds", "stein", "transport", "cli"];

/// Standard-error multiplier used by every statistical predicate.
pub const Z: f64 = 4.0;

/// Largest entrywise deviation of an audit slope from `-I`.
pub const SLOPE_TOLERANCE: f64 = 0.05;

// Substream tags, far above any chunk index used by the samplers.
const TAG_FAMILY: u64 = 1 << 40;
const TAG_POINTS: u64 = TAG_FAMILY + 1;
const TAG_DIRECTIONS: u64 = TAG_FAMILY + 2;
const TAG_CONSTANTS: u64 = TAG_FAMILY + 3;
const TAG_X: u64 = TAG_FAMILY + 4;
const TAG_Z: u64 = TAG_FAMILY + 5;
const TAG_SELF: u64 = TAG_FAMILY + 6;

fn stream(seed: u64, tag: u64) -> SimRng {
    substream(seed, tag)
}

fn derive(seed: u64, tag: u64) -> u64 {
    stream(seed, tag).random()
}

/// Runs one experiment and assembles its report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let outcome = match cfg.experiment {
        Experiment::HaarCheck => haar_check(cfg),
        Experiment::PairAudit => pair_audit(cfg),
        Experiment::Bound => bound(cfg),
        Experiment::SteinCheck => stein_check(cfg),
        Experiment::W1Compare => w1_compare(cfg),
        Experiment::DiagExample => diag_example(cfg),
    }
    .map_err(|e| e.context(format!("{} experiment", cfg.experiment)))?;
    let version = env!("CARGO_PKG_VERSION").to_string();
    Ok(Report {
        experiment: cfg.experiment.name().to_string(),
        modules: MODULES.iter().map(|m| (m.to_string(), version.clone())).collect(),
        version,
        seed: cfg.seed(),
        config: cfg.resolved(),
        pass: outcome.checks.iter().all(|c| c.pass),
        checks: outcome.checks,
        results: outcome.results,
        table: outcome.table,
        wall_clock_seconds: if cfg.flag("timing")? { Some(start.elapsed().as_secs_f64()) } else { None },
    })
}

struct Outcome {
    checks: Vec<Check>,
    results: Json,
    table: Option<Table>,
}

fn z_score(e: &Estimate, allowance: f64) -> f64 {
    let excess = (e.value.abs() - allowance).max(0.0);
    if excess <= 1e-12 {
        0.0
    } else if e.se > 0.0 {
        excess / e.se
    } else {
        f64::MAX
    }
}

fn worst_z<'a>(cells: impl IntoIterator<Item = &'a Estimate>, allowance: f64) -> f64 {
    cells.into_iter().map(|e| z_score(e, allowance)).fold(0.0, f64::max)
}

fn haar_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let records = run_battery(cfg.counts("ns")?, cfg.count("samples")?, cfg.seed())?;
    let failing = records.iter().filter(|r| !r.pass).count();
    let mut table = Table::new(&["query", "exact", "estimate", "se", "pass"]);
    for r in &records {
        table.push(vec![r.query.clone(), cell(r.exact), cell(r.estimate), cell(r.se), r.pass.to_string()]);
    }
    Ok(Outcome {
        checks: vec![Check::at_most("queries outside 4 se of the exact moment", failing as f64, 0.0)],
        results: json!({ "queries": records.len(), "failing": failing, "records": records }),
        table: Some(table),
    })
}

fn real_family(cfg: &ExperimentConfig, n: usize, k: usize) -> Result<ProjectionFamily<f64>> {
    match cfg.text("family")? {
        "random" => ProjectionFamily::random_orthonormal(n, k, &mut stream(cfg.seed(), TAG_FAMILY)),
        "coordinate" => ProjectionFamily::coordinate(n, k),
        "diagonal" => {
            let a = cfg.counts("a")?;
            Ok(ProjectionFamily::diagonal_example(n, a)?.orthonormalized()?.0)
        }
        other => Err(Error::Config(format!("unknown family {other:?}; expected random, coordinate or diagonal"))),
    }
}

fn complex_family(cfg: &ExperimentConfig, n: usize, k: usize) -> Result<ProjectionFamily<Complex64>> {
    match cfg.text("family")? {
        "random" => ProjectionFamily::random_orthonormal(n, k, &mut stream(cfg.seed(), TAG_FAMILY)),
        "coordinate" => ProjectionFamily::coordinate(n, k),
        other => Err(Error::Config(format!("unknown complex family {other:?}; expected random or coordinate"))),
    }
}

/// Builds the pair model named by `model`, `law`, `family`, `n` and `k`.
pub fn build_model(cfg: &ExperimentConfig) -> Result<PairModel> {
    let (n, k) = (cfg.count("n")?, cfg.count("k")?);
    let law = cfg.get("law").map(|_| cfg.text("law")).transpose()?;
    match cfg.text("model")? {
        "iid_sum" => {
            let law = match law.unwrap_or("gaussian") {
                "gaussian" => VectorLaw::Gaussian(k),
                "rademacher" => VectorLaw::Rademacher(k),
                other => return Err(Error::Config(format!("unknown summand law {other:?}; expected gaussian or rademacher"))),
            };
            make_iid_sum_pair(law, n)
        }
        "spherical" => {
            let law = match law.unwrap_or("sphere") {
                "gaussian" => SphericalLaw::Gaussian,
                "sphere" => SphericalLaw::UniformSphere,
                other => return Err(Error::Config(format!("unknown spherical law {other:?}; expected gaussian or sphere"))),
            };
            make_spherical_pair(law, n, k)
        }
        "orthogonal_projection" => make_orthogonal_projection_pair(real_family(cfg, n, k)?),
        "unitary_projection" => make_unitary_projection_pair(complex_family(cfg, n, k)?),
        other => Err(Error::Config(format!(
            "unknown model {other:?}; expected iid_sum, spherical, orthogonal_projection or unitary_projection"
        ))),
    }
}

/// The application bound on `d_W(X, Z)` for a continuous model.
fn application_bound(model: &PairModel) -> Result<BoundReport> {
    match model {
        PairModel::Spherical { law, n, k } => bound_ksphere(*k, *n, law.variance_bound(*n)),
        PairModel::OrthogonalProjection { family } => {
            let gram = GramData { k: family.k(), gram: family.gram().gram.clone(), scale: family.n() as f64 };
            bound_mix(family.k(), family.n(), &gram)
        }
        PairModel::UnitaryProjection { family } => bound_uthm(family.k(), family.n()),
        PairModel::IidSum { .. } => {
            Err(Error::Parameter("the i.i.d. sum model has no Wasserstein bound without smoothness constants".into()))
        }
    }
}

fn audit_bounds(model: &PairModel, a: &ConditionalAudit) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    match model.kind() {
        ModelKind::IidSum => {
            let e = a.e_norm.expect("i.i.d. audits carry E");
            out.push(bound_discrete(1.0, 1.0, 1.0, a.lambda, e.value, a.third_moment.value * a.lambda)?);
            if let PairModel::IidSum { law, n } = model {
                if let (Some(f4), Some(f3)) = (law.fourth_moment(), law.third_moment()) {
                    out.push(bound_basic(*n, law.dim(), 1.0, 1.0, f4, f3)?);
                }
            }
        }
        ModelKind::UnitaryProjection => {
            let (g, l) = (a.gamma_norm.expect("gamma"), a.lambda_norm.expect("lambda"));
            out.push(bound_complex(g.value, l.value)?);
            out.push(application_bound(model)?);
        }
        _ => {
            out.push(bound_cont(a.sigma2.sqrt(), a.f_norm.expect("continuous audits carry F").value)?);
            out.push(application_bound(model)?);
        }
    }
    Ok(out)
}

fn pair_audit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let epsilon = if model.is_continuous() {
        Some(cfg.real("epsilon")?)
    } else if cfg.is_explicit("epsilon") {
        return Err(Error::Config("the i.i.d. sum pair takes no epsilon".into()));
    } else {
        None
    };
    let a = audit_pair_with(&model, cfg.count("samples")?, epsilon, cfg.seed(), cfg.count("inner")?)?;
    let (k, n) = (model.k() as f64, model.n() as f64);
    let mut checks = vec![
        Check::at_most("max |slope + I|", a.slope_deviation(), SLOPE_TOLERANCE),
        Check::at_most("exchangeability |z|", z_score(&a.exchangeability, 0.0), Z),
        Check::at_most(
            "marginal moment gap |z|",
            worst_z(&a.marginal_mean_gap, 0.0).max(worst_z(a.marginal_second_gap.iter().flatten(), 0.0)),
            Z,
        ),
        Check::at_most(
            "conditional second moment gap |z| beyond the epsilon allowance",
            worst_z(a.second_moment_gap.iter().flatten(), a.second_moment_allowance),
            Z,
        ),
        Check::at_most("E[surrogate] - (E[xx^T] - sigma^2 I) |z|", worst_z(a.covariance_gap.iter().flatten(), 0.0), Z),
    ];
    match model.kind() {
        ModelKind::OrthogonalProjection => {
            let claim = a.claim.as_ref().expect("projection audits carry the claim");
            let worst = claim.iter().flatten().map(|e| e.value - Z * e.se).fold(f64::MIN, f64::max);
            checks.push(Check::at_most("E(Tr(A_i M A_j M) - delta_ij)^2 - 4 se", worst, 2.0));
            checks.push(Check::at_most("E||F|| - 4 se", a.surrogates.value - Z * a.surrogates.se, 2f64.sqrt() * k / (n - 1.0)));
        }
        ModelKind::UnitaryProjection => {
            checks.push(Check::at_most(
                "E||Gamma|| + E||Lambda|| - 4 se",
                a.surrogates.value - Z * a.surrogates.se,
                3.0 * k / n,
            ));
        }
        _ => {}
    }
    // deviation of E[xx^T] from sigma^2 I, reported without a threshold
    let cov_dev = a.mean_surrogate.iter().flatten().map(|e| e.value.abs()).fold(0.0, f64::max);
    let bounds = audit_bounds(&model, &a)?;
    Ok(Outcome {
        checks,
        results: json!({ "audit": a, "bounds": bounds, "covariance_deviation": cov_dev }),
        table: None,
    })
}

fn need_all(cfg: &ExperimentConfig, keys: &[&str]) -> Result<()> {
    let missing: Vec<String> = keys.iter().filter(|k| cfg.get(k).is_none()).map(|k| k.to_string()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingKeys(missing))
    }
}

fn bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let theorem: Theorem = cfg.text("theorem")?.parse()?;
    let report = match theorem {
        Theorem::Discrete => {
            need_all(cfg, &["lambda", "e_norm", "third_moment"])?;
            bound_discrete(
                cfg.real("sigma")?,
                cfg.real("m1")?,
                cfg.real("m2")?,
                cfg.real("lambda")?,
                cfg.real("e_norm")?,
                cfg.real("third_moment")?,
            )?
            .tag("e_norm", Provenance::User)
            .tag("third_moment", Provenance::User)
        }
        Theorem::Cont => {
            need_all(cfg, &["f_norm"])?;
            bound_cont(cfg.real("sigma")?, cfg.real("f_norm")?)?.tag("f_norm", Provenance::User)
        }
        Theorem::Complex => {
            need_all(cfg, &["gamma_norm", "lambda_norm"])?;
            bound_complex(cfg.real("gamma_norm")?, cfg.real("lambda_norm")?)?
                .tag("gamma_norm", Provenance::User)
                .tag("lambda_norm", Provenance::User)
        }
        Theorem::Basic => {
            need_all(cfg, &["n", "k"])?;
            let (n, k) = (cfg.count("n")?, cfg.count("k")?);
            match cfg.get("law").map(|_| cfg.text("law")).transpose()? {
                Some(name) => {
                    let law = match name {
                        "gaussian" => VectorLaw::Gaussian(k),
                        "rademacher" => VectorLaw::Rademacher(k),
                        other => return Err(Error::Config(format!("unknown summand law {other:?}"))),
                    };
                    let (f4, f3) = (law.fourth_moment().expect("closed form"), law.third_moment().expect("closed form"));
                    bound_basic(n, k, cfg.real("m1")?, cfg.real("m2")?, f4, f3)?
                }
                None => {
                    need_all(cfg, &["fourth_moment", "third_moment"])?;
                    bound_basic(n, k, cfg.real("m1")?, cfg.real("m2")?, cfg.real("fourth_moment")?, cfg.real("third_moment")?)?
                        .tag("fourth_moment", Provenance::User)
                        .tag("third_moment", Provenance::User)
                }
            }
        }
        Theorem::Ksphere => {
            need_all(cfg, &["k", "n", "a"])?;
            bound_ksphere(cfg.count("k")?, cfg.count("n")?, cfg.real("a")?)?.tag("a", Provenance::User)
        }
        Theorem::Mix => {
            need_all(cfg, &["k", "n"])?;
            let (k, n) = (cfg.count("k")?, cfg.count("n")?);
            let c = match cfg.get("c") {
                Some(_) => {
                    let rows = cfg.matrix("c")?;
                    RealMatrix::from_row_major(rows.len(), rows.len(), rows.concat())?
                }
                None => RealMatrix::identity(k),
            };
            let gram = GramData { k: c.rows(), gram: c.scale(n as f64), scale: n as f64 };
            bound_mix(k, n, &gram)?.tag("c", Provenance::User)
        }
        Theorem::Uthm => {
            need_all(cfg, &["k", "n"])?;
            bound_uthm(cfg.count("k")?, cfg.count("n")?)?
        }
    };
    Ok(Outcome {
        checks: vec![Check::holds("bound is finite and nonnegative", report.value.is_finite() && report.value >= 0.0)],
        results: serde_json::to_value(&report)?,
        table: None,
    })
}

fn gaussian_points(k: usize, count: usize, rng: &mut SimRng) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..k).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

fn stein_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let seed = cfg.seed();
    let k = cfg.count("k")?;
    let declared = |key| cfg.get(key).map(|_| cfg.real(key)).transpose();
    let mut f = TestFunction::builtin(cfg.text("g")?, k)?;
    if cfg.get("m1").is_some() || cfg.get("m2").is_some() {
        let (m1, m2, m3) = (declared("m1")?.or(f.m1()), declared("m2")?.or(f.m2()), f.m3());
        f = f.with_constants(m1, m2, m3);
    }
    let f = f.resolve_constants(&mut stream(seed, TAG_CONSTANTS))?;
    let m1 = f.m1().expect("resolved");
    let sol = SteinSolution::new(f, cfg.count("nodes")?, cfg.count("samples")?, seed)?;
    let points = gaussian_points(k, cfg.count("points")?, &mut stream(seed, TAG_POINTS));

    let mut header: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    header.extend(["h", "residual", "se", "hess_hs"].map(String::from));
    let mut table = Table { header, rows: Vec::new() };
    let mut values = Vec::with_capacity(points.len());
    let (mut max_res, mut max_hs) = (0.0f64, 0.0f64);
    for p in &points {
        let v = sol.evaluate(p)?;
        max_res = max_res.max(v.residual.value.abs());
        max_hs = max_hs.max(v.hess_hs());
        let mut row: Vec<String> = p.iter().map(|x| cell(*x)).collect();
        row.extend([cell(v.h), cell(v.residual.value), cell(v.residual.se), cell(v.hess_hs())]);
        table.push(row);
        values.push(json!({ "x": p, "value": v }));
    }

    let mut dir_rng = stream(seed, TAG_DIRECTIONS);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = points
        .iter()
        .map(|p| {
            let u: Vec<f64> = (0..k).map(|_| dir_rng.sample(StandardNormal)).collect();
            let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
            (p.clone(), p.iter().zip(&u).map(|(a, b)| a + 0.1 * b / norm).collect())
        })
        .collect();
    let kink = cfg.flag("kink")?;
    let distances = [0.1, 0.05, 0.025];
    let audit = derivative_bound_audit(&sol, &pairs, kink.then_some(&distances[..]))?;

    let mut checks = vec![
        Check::at_most("max |residual|", max_res, cfg.real("tolerance")?),
        Check::at_most("max ||hess h||_HS", max_hs, m1 * (1.0 + DERIVATIVE_ALLOWANCE)),
        Check::at_most("max Hessian Lipschitz ratio", audit.max_ratio, audit.limit),
    ];
    if let Some(g) = &audit.kink {
        checks.push(Check::holds("kink ratio grows as the distance halves", g.increasing));
    }
    Ok(Outcome {
        checks,
        results: json!({
            "function": sol.function().name(),
            "m1": m1,
            "m2": sol.function().m2(),
            "mean_g": sol.mean_g(),
            "hessian_form": sol.form(),
            "points": values,
            "derivative_audit": audit,
        }),
        table: Some(table),
    })
}

/// Runs the exact, debiased and sliced comparisons of `x` against a
/// Gaussian reference `z` drawn by `gauss`.
fn compare_clouds<F>(
    x: &SampleCloud,
    z: &SampleCloud,
    gauss: F,
    bound: f64,
    reps: usize,
    directions: usize,
    seed: u64,
) -> Result<(Comparison, SelfDistance, f64)>
where
    F: Fn(&mut SimRng, &mut [f64]) + Sync,
{
    let w1 = w1_exact(x, z)?;
    let reference = self_distance(x.k, gauss, x.m, reps, derive(seed, TAG_SELF ^ x.m as u64))?;
    let lb = w1_sliced_lb(x, z, directions, &mut stream(seed, TAG_DIRECTIONS ^ x.m as u64))?;
    Ok((Comparison::new(x.m, w1, &reference, bound), reference, lb))
}

fn comparison_rows(
    rows: &[(Comparison, SelfDistance, f64)],
    checks: &mut Vec<Check>,
) -> (Table, Vec<Json>) {
    let mut table = Table::new(&["m", "w1", "self", "debiased", "bound", "pass"]);
    let mut out = Vec::new();
    for (c, reference, lb) in rows {
        let sliced_gap = lb - reference.mean;
        let sliced_pass = sliced_gap <= c.bound + Z * c.se;
        checks.push(Check::at_most(format!("m={}: debiased w1 - 4 se", c.m), c.debiased - Z * c.se, c.bound));
        checks.push(Check::at_most(format!("m={}: sliced lb - self - 4 se", c.m), sliced_gap - Z * c.se, c.bound));
        table.push(vec![
            c.m.to_string(),
            cell(c.w1),
            cell(c.self_distance),
            cell(c.debiased),
            cell(c.bound),
            (c.pass && sliced_pass).to_string(),
        ]);
        out.push(json!({ "comparison": c, "self_distance": reference, "sliced_lb": lb }));
    }
    (table, out)
}

fn w1_compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    let seed = cfg.seed();
    let model = build_model(cfg)?;
    let bound = application_bound(&model)?;
    let (d, scale) = (model.dim(), model.sigma2().sqrt());
    let gauss = move |r: &mut SimRng, p: &mut [f64]| p.iter_mut().for_each(|v| *v = scale * r.sample::<f64, _>(StandardNormal));
    let mut rows = Vec::new();
    for &m in cfg.counts("m")? {
        let x = SampleCloud::sample(d, m, derive(seed, TAG_X ^ m as u64), model.kind().to_string(), |r, p| {
            p.copy_from_slice(&model.sample_x(r))
        })?;
        let z = SampleCloud::sample(d, m, derive(seed, TAG_Z ^ m as u64), "gaussian", gauss)?;
        rows.push(compare_clouds(&x, &z, gauss, bound.value, cfg.count("reps")?, cfg.count("directions")?, seed)?);
    }
    let mut checks = Vec::new();
    let (table, out) = comparison_rows(&rows, &mut checks);
    Ok(Outcome { checks, results: json!({ "model": model.kind(), "bound": bound, "rows": out }), table: Some(table) })
}

fn diag_example(cfg: &ExperimentConfig) -> Result<Outcome> {
    let seed = cfg.seed();
    let (n, a) = (cfg.count("n")?, cfg.counts("a")?.to_vec());
    let family = ProjectionFamily::diagonal_example(n, &a)?;
    let k = family.k();
    let gram = family.gram();

    let mut gram_dev = 0.0f64;
    let mut expected = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let (lo, hi) = (a[i.min(j)] as f64, a[i.max(j)] as f64);
            expected[i][j] = n as f64 * (lo / hi).sqrt();
            gram_dev = gram_dev.max((gram.gram[(i, j)] - expected[i][j]).abs());
        }
    }
    let (ortho, dmat) = family.orthonormalized()?;
    let c = gram.normalized();
    let ddt = dmat.matmul(&dmat.transpose())?;
    let factor_dev = ddt.max_abs_diff(&c)?;
    let mix = bound_mix(k, n, gram)?;
    let ceiling = 2f64.sqrt() * (k as f64).powf(1.5) / (n as f64 - 1.0);

    let mut checks = vec![
        Check::at_most("max |<B_i, B_j> - n sqrt(a_i/a_j)|", gram_dev, 1e-12),
        Check::at_most("orthonormalized Gram defect", ortho.normalization_defect(), 1e-10),
        Check::at_most("max |D D^T - C|", factor_dev, 1e-10),
        Check::at_most("mix bound vs sqrt(2) k^{3/2}/(n-1)", mix.value, ceiling),
    ];

    // X = (Tr(B_i M)) has covariance C = D D^T; the reference Gaussian is D Z.
    let gauss = |r: &mut SimRng, p: &mut [f64]| {
        let z: Vec<f64> = (0..p.len()).map(|_| r.sample(StandardNormal)).collect();
        p.copy_from_slice(&dmat.mul_vec(&z).expect("k x k factor"));
    };
    let mut rows = Vec::new();
    for &m in cfg.counts("m")? {
        let x = SampleCloud::sample(k, m, derive(seed, TAG_X ^ m as u64), "diagonal-family", |r, p| {
            let mat = sample_orthogonal(n, r);
            p.copy_from_slice(&family.statistics(&mat));
        })?;
        let z = SampleCloud::sample(k, m, derive(seed, TAG_Z ^ m as u64), "gaussian-c", gauss)?;
        rows.push(compare_clouds(&x, &z, gauss, mix.value, cfg.count("reps")?, cfg.count("directions")?, seed)?);
    }
    let (table, out) = comparison_rows(&rows, &mut checks);
    let to_rows = |m: &RealMatrix| -> Vec<Vec<f64>> { (0..m.rows()).map(|i| m.row(i).to_vec()).collect() };
    Ok(Outcome {
        checks,
        results: json!({
            "gram": to_rows(&gram.gram),
            "expected_gram": expected,
            "gram_deviation": gram_dev,
            "d": to_rows(&dmat),
            "d_dt_deviation": factor_dev,
            "bound": mix,
            "ceiling": ceiling,
            "rows": out,
        }),
        table: Some(table),
    })
}


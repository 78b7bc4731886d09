//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use bp_core::catalog::{coherent_structures, semicoherent_structures};
use bp_core::cli::{cmd_analyze, cmd_verify, AnalyzeFlags, VerifyFlags};
use bp_core::indices::{self, IndexValues, IndexVector};
use bp_core::lifetimes::{
    ordering_probabilities, qj_from_rj, rj_from_qj, EmpiricalSampler, EvalOptions, IndependentMarginals,
    JointLifetimeModel, MarginalDistribution, Method, OrderDistribution, OrderingTables,
};
use bp_core::oracle::{self, permutation_oracle, permutation_oracle_for};
use bp_core::scalar::rational;
use bp_core::spec::SystemSpec;
use bp_core::{StandardKind, StructureFunction, SubsetIndex};
use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn exact(v: &IndexVector) -> Result<&[BigRational], String> {
    v.as_exact().ok_or_else(|| format!("{} vector is not exact", v.kind))
}

fn fractions(pairs: &[(i64, i64)]) -> Vec<BigRational> {
    pairs.iter().map(|&(a, b)| rational(a, b)).collect()
}

fn standard(kind: StandardKind, n: usize) -> StructureFunction {
    StructureFunction::make_standard(kind, n).unwrap()
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// 1. Bridge under exchangeability: 1/15 at component 3, equal to the
/// 120-ordering oracle.
fn bridge_exchangeable() -> Outcome {
    let bridge = standard(StandardKind::Bridge, 5);
    let model = JointLifetimeModel::exchangeable(5).map_err(e)?;
    let bp = indices::barlow_proschan(&bridge, &model, &EvalOptions::default()).map_err(e)?;
    let bp = exact(&bp)?.to_vec();
    ensure!(bp[2] == rational(1, 15), "component 3 has {}", bp[2]);
    let (brute, _) = common::brute_indices(&bridge, &common::uniform_law(5));
    ensure!(bp == brute, "brute-force orderings give {brute:?}");
    let lib = permutation_oracle_for(&bridge, &model).map_err(e)?;
    ensure!(bp == lib.bp, "permutation oracle gives {:?}", lib.bp);
    ensure!(
        bp == fractions(&[(7, 30), (7, 30), (1, 15), (7, 30), (7, 30)]),
        "unexpected vector {bp:?}"
    );
    Ok("I_BP = (7/30, 7/30, 1/15, 7/30, 7/30) = 120-ordering oracle".into())
}

/// 2. Series of three: s = (1,0,0), b = (1/3,1/3,1/3).
fn series_structural() -> Outcome {
    let series = standard(StandardKind::Series, 3);
    let s = indices::structural_signature(&series);
    let b = indices::structural_b(&series);
    ensure!(exact(&s)? == fractions(&[(1, 1), (0, 1), (0, 1)]).as_slice(), "s = {:?}", s.values);
    ensure!(exact(&b)? == vec![rational(1, 3); 3].as_slice(), "b = {:?}", b.values);
    Ok("s = (1,0,0), b = (1/3,1/3,1/3)".into())
}

/// 3. Exchangeable collapse over every coherent structure with n ≤ 5.
fn exchangeable_collapse() -> Outcome {
    let mut count = 0;
    for n in 1..=5 {
        let model = JointLifetimeModel::exchangeable(n).map_err(e)?;
        let probs = ordering_probabilities(&model, &EvalOptions::default()).map_err(e)?;
        for phi in coherent_structures(n).map_err(e)? {
            let bp = indices::bp_from_ordering(&phi, &probs).map_err(e)?;
            let p = indices::signature_from_ordering(&phi, &probs).map_err(e)?;
            ensure!(bp.values == indices::structural_b(&phi).values, "I_BP != b for {phi:?}");
            ensure!(p.values == indices::structural_signature(&phi).values, "p != s for {phi:?}");
            count += 1;
        }
    }
    ensure!(count == 1 + 2 + 9 + 114 + 6894, "catalog has {count} structures");
    Ok(format!("{count} coherent structures, I_BP = b and p = s exactly"))
}

/// 4. 200 random (semicoherent φ, rational ordering law) pairs: analytic
/// equals the permutation oracle and a brute-force recount.
fn oracle_equivalence(pairs: &mut Vec<(StructureFunction, OrderDistribution)>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for i in 0..200 {
        let n = rng.random_range(1..=5);
        let phi = common::random_structure(&mut rng, n);
        let law = common::random_order_distribution(&mut rng, n);
        let model = JointLifetimeModel::OrderDistribution(law.clone());
        let opts = EvalOptions::with_method(Method::Exact);
        let bp = indices::barlow_proschan(&phi, &model, &opts).map_err(e)?;
        let p = indices::signature_p(&phi, &model, &opts).map_err(e)?;
        let lib = permutation_oracle(&phi, &law).map_err(e)?;
        let (brute_bp, brute_p) = common::brute_indices(&phi, &common::law_of(&law));
        ensure!(exact(&bp)? == lib.bp.as_slice(), "pair {i}: I_BP differs from the oracle");
        ensure!(exact(&p)? == lib.p.as_slice(), "pair {i}: p differs from the oracle");
        ensure!(lib.bp == brute_bp && lib.p == brute_p, "pair {i}: oracle differs from recount");
        pairs.push((phi, law));
    }
    Ok("200/200 pairs equal exactly (I_BP and p)".into())
}

/// 5. Weibull closed form vs quadrature (1e-8) vs simulation (4σ).
fn weibull_three_way(models: &mut Vec<(StructureFunction, JointLifetimeModel)>) -> Outcome {
    const SAMPLES: u64 = 100_000;
    const SEED: u64 = 2024;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_analytic = 0.0f64;
    let mut worst_sigma = 0.0f64;
    let mut mc_checks = 0;
    for i in 0..50 {
        let n = rng.random_range(2..=8);
        let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..=10.0)).collect();
        let alpha = rng.random_range(0.5..=3.0);
        let phi = common::random_structure(&mut rng, n);
        let model = JointLifetimeModel::weibull(lambdas, alpha).map_err(e)?;
        let closed = indices::barlow_proschan(&phi, &model, &EvalOptions::with_method(Method::ClosedForm))
            .map_err(e)?
            .to_f64();
        let quad = indices::barlow_proschan(&phi, &model, &EvalOptions::with_method(Method::Quadrature))
            .map_err(e)?
            .to_f64();
        let mc = oracle::mc_barlow_proschan(&phi, &model, SAMPLES, SEED).map_err(e)?;
        for j in 0..n {
            let d = (closed[j] - quad[j]).abs();
            worst_analytic = worst_analytic.max(d);
            ensure!(d <= 1e-8, "model {i}, component {}: closed {} vs quadrature {}", j + 1, closed[j], quad[j]);
            let p = closed[j].clamp(0.0, 1.0);
            let sigma = (p * (1.0 - p) / SAMPLES as f64).sqrt().max(1.0 / SAMPLES as f64);
            let z = (mc.mean[j] - closed[j]).abs() / sigma;
            worst_sigma = worst_sigma.max(z);
            mc_checks += 1;
            ensure!(z <= 4.0, "model {i}, component {}: simulation {} vs {} ({z:.2}σ)", j + 1, mc.mean[j], closed[j]);
        }
        models.push((phi, model));
    }
    Ok(format!(
        "50 models: max |closed − quadrature| = {worst_analytic:.2e}, max simulation deviation {worst_sigma:.2}σ over {mc_checks} coordinates"
    ))
}

struct IdentityCase {
    name: String,
    tables: OrderingTables<f64>,
}

fn identity_cases() -> Result<Vec<IdentityCase>, String> {
    let mut cases = Vec::new();
    let mut push = |name: String, model: &JointLifetimeModel, method: Method| -> Result<(), String> {
        let mut opts = EvalOptions::with_method(method);
        opts.samples = 50_000;
        let probs = ordering_probabilities(model, &opts).map_err(|err| format!("{name}: {err}"))?;
        cases.push(IdentityCase {
            name,
            tables: probs.to_float(),
        });
        Ok(())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [1, 3, 5, 8] {
        push(format!("exchangeable n={n}"), &JointLifetimeModel::exchangeable(n).map_err(e)?, Method::Exact)?;
    }
    for n in [2, 4, 5] {
        let law = common::random_order_distribution(&mut rng, n);
        push(format!("ordering law n={n}"), &JointLifetimeModel::OrderDistribution(law), Method::Exact)?;
    }
    for n in [2, 5, 8] {
        let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..=10.0)).collect();
        let alpha = rng.random_range(0.5..=3.0);
        let model = JointLifetimeModel::weibull(lambdas, alpha).map_err(e)?;
        push(format!("weibull n={n} closed form"), &model, Method::ClosedForm)?;
        push(format!("weibull n={n} quadrature"), &model, Method::Quadrature)?;
    }
    for n in [3, 6] {
        let marginals = (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    MarginalDistribution::Exponential { rate: 0.5 + i as f64 }
                } else {
                    MarginalDistribution::Weibull { lambda: 1.0 / (1.0 + i as f64), alpha: 0.7 + 0.4 * i as f64 }
                }
            })
            .collect();
        let model = JointLifetimeModel::IndependentMarginals(IndependentMarginals::new(marginals).map_err(e)?);
        push(format!("mixed marginals n={n}"), &model, Method::Quadrature)?;
    }
    // common shock: X_i = min(Y_i, Z) + ε_i, a dependent law known only by
    // sampling
    let sampler = EmpiricalSampler::new(
        4,
        Arc::new(|seed, index| {
            let mut r = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let z: f64 = -r.random::<f64>().ln();
            (0..4)
                .map(|i| (-(r.random::<f64>()).ln() / (1.0 + i as f64)).min(z) + 1e-9 * r.random::<f64>())
                .collect()
        }),
    )
    .map_err(e)?;
    push("empirical common shock n=4".into(), &JointLifetimeModel::EmpiricalSampler(sampler), Method::MonteCarlo)?;
    Ok(cases)
}

/// 6. Table identities across all model families, n ≤ 8.
fn identity_suite() -> Outcome {
    let cases = identity_cases()?;
    let mut worst = 0.0f64;
    let mut note = |name: &str, what: &str, d: f64| -> Result<(), String> {
        worst = worst.max(d);
        ensure!(d <= 1e-9, "{name}: {what} off by {d:e}");
        Ok(())
    };
    for case in &cases {
        let t = &case.tables;
        let n = t.n;
        for j in 0..n {
            let total: f64 = SubsetIndex::all(n).filter(|a| !a.contains(j)).map(|a| t.qj[j][a.bits()]).sum();
            note(&case.name, "Σ_A q_j(A)", (total - 1.0).abs())?;
        }
        for k in 0..=n {
            let total: f64 = SubsetIndex::all(n).filter(|a| a.len() == k).map(|a| t.q[a.bits()]).sum();
            note(&case.name, "level sum of q", (total - 1.0).abs())?;
        }
        for a in SubsetIndex::all(n) {
            let outside: f64 = (0..n).filter(|&j| !a.contains(j)).map(|j| t.qj[j][a.bits()]).sum();
            let inside: f64 = a.members().map(|j| t.qj[j][a.without(j).bits()]).sum();
            if !a.is_empty() && a != SubsetIndex::full(n) {
                note(&case.name, "two expressions of q(A)", (outside - inside).abs())?;
            }
            if !a.is_empty() {
                note(&case.name, "q(A) vs complement-side sum", (t.q[a.bits()] - inside).abs())?;
            }
        }
        let rj = rj_from_qj(&t.qj).map_err(e)?;
        let back = qj_from_rj(&rj).map_err(e)?;
        for j in 0..n {
            for a in SubsetIndex::all(n).filter(|a| !a.contains(j)) {
                note(&case.name, "q_j → r_j → q_j", (back[j][a.bits()] - t.qj[j][a.bits()]).abs())?;
                note(&case.name, "stored r_j vs superset sum of q_j", (rj[j][a.bits()] - t.rj[j][a.bits()]).abs())?;
            }
        }
    }
    Ok(format!("{} model/method cases, worst deviation {worst:.2e}", cases.len()))
}

fn forms_agree(phi: &StructureFunction, model: &JointLifetimeModel, method: Method) -> Result<f64, String> {
    let opts = EvalOptions::with_method(method);
    let mut worst = 0.0f64;
    for (a, b) in [
        (indices::barlow_proschan(phi, model, &opts), indices::barlow_proschan_mobius(phi, model, &opts)),
        (indices::signature_p(phi, model, &opts), indices::signature_mobius(phi, model, &opts)),
    ] {
        let (a, b) = (a.map_err(e)?, b.map_err(e)?);
        match (&a.values, &b.values) {
            (IndexValues::Exact(x), IndexValues::Exact(y)) => {
                ensure!(x == y, "{} forms differ exactly: {x:?} vs {y:?}", a.kind)
            }
            _ => {
                let tol = 10.0 * (a.tolerance() + b.tolerance());
                for (x, y) in a.to_f64().iter().zip(b.to_f64()) {
                    worst = worst.max((x - y).abs());
                    ensure!((x - y).abs() <= tol, "{} forms differ: {x} vs {y} (tol {tol:e})", a.kind);
                }
            }
        }
    }
    Ok(worst)
}

/// 7. Möbius forms equal the derivative forms on every test pair.
fn form_agreement(pairs: &[(StructureFunction, OrderDistribution)], weibull: &[(StructureFunction, JointLifetimeModel)]) -> Outcome {
    ensure!(!pairs.is_empty() && !weibull.is_empty(), "criteria 4 and 5 produced no test pairs");
    for (phi, law) in pairs {
        forms_agree(phi, &JointLifetimeModel::OrderDistribution(law.clone()), Method::Exact)?;
    }
    let mut worst = 0.0f64;
    for (phi, model) in weibull {
        worst = worst.max(forms_agree(phi, model, Method::ClosedForm)?);
        worst = worst.max(forms_agree(phi, model, Method::Quadrature)?);
    }
    for n in 1..=4 {
        let model = JointLifetimeModel::exchangeable(n).map_err(e)?;
        for phi in semicoherent_structures(n).map_err(e)? {
            forms_agree(&phi, &model, Method::Exact)?;
        }
    }
    Ok(format!(
        "{} exact pairs + semicoherent n ≤ 4 catalog equal exactly; {} Weibull pairs × 2 paths within tolerance (worst {worst:.2e})",
        pairs.len(),
        weibull.len()
    ))
}

/// 8. The ordering law {132, 213, 321} at 1/3 each.
fn counterexample() -> Outcome {
    let key = |s: &str| bp_core::lifetimes::parse_permutation_key(s).unwrap();
    let law = OrderDistribution::new(
        3,
        [("132", 1), ("213", 1), ("321", 1)].map(|(k, w)| (key(k), rational(w, 3))),
    )
    .map_err(e)?;
    let model = JointLifetimeModel::OrderDistribution(law.clone());
    let opts = EvalOptions::default();
    let q = indices::q_symmetry_check(&model, &opts).map_err(e)?;
    ensure!(q.symmetric, "q is not symmetric (witness {:?})", q.witness);
    let coherent = coherent_structures(3).map_err(e)?;
    ensure!(coherent.len() == 9, "{} coherent 3-component structures", coherent.len());
    let mut differing = None;
    for phi in &coherent {
        let p = indices::signature_p(phi, &model, &opts).map_err(e)?;
        ensure!(p.values == indices::structural_signature(phi).values, "p != s for {phi:?}");
        let bp = indices::barlow_proschan(phi, &model, &opts).map_err(e)?;
        let (brute, _) = common::brute_indices(phi, &common::law_of(&law));
        ensure!(exact(&bp)? == brute.as_slice(), "I_BP differs from recount for {phi:?}");
        if differing.is_none() && bp.values != indices::structural_b(phi).values {
            differing = Some((phi.clone(), bp));
        }
    }
    let check = indices::bp_equals_b_check(&model, &opts).map_err(e)?;
    ensure!(!check.holds_for_all_structures, "bp_equals_b_check passed");
    let (j, a) = check.witness.ok_or("no witness")?;
    // recount q_j(A) from the three orderings
    let qj = common::brute_qj(3, &common::law_of(&law));
    let weight = rational(1, 3 * bp_core::subset::binomial(2, a.len()) as i64);
    ensure!(qj[j][a.bits()] != weight, "witness ({}, {a}) is not a violation", j + 1);
    let (phi, bp) = differing.ok_or("every coherent φ has I_BP = b")?;
    Ok(format!(
        "q symmetric, p = s on all 9; witness q_{}({a}) = {} ≠ {}; {phi:?} has I_BP = {:?}",
        j + 1,
        qj[j][a.bits()],
        weight,
        bp.render()
    ))
}

/// 9. Entropy extremes.
fn entropy_extremes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = EvalOptions::default();
    for n in 2..=5 {
        let positive = [
            JointLifetimeModel::OrderDistribution(common::positive_order_distribution(&mut rng, n)),
            JointLifetimeModel::weibull((0..n).map(|i| 0.5 + i as f64).collect(), 1.7).map_err(e)?,
        ];
        for j in 0..n {
            let phi = StructureFunction::single_component(n, j).map_err(e)?;
            for model in &positive {
                let bp = indices::barlow_proschan(&phi, model, &opts).map_err(e)?;
                let h = indices::symmetry_index(&bp).map_err(e)?;
                ensure!(h == 0.0, "H = {h} for x_{} under {}", j + 1, model.kind());
            }
        }
    }
    let mut worst = 0.0f64;
    for n in 2..=8 {
        let model = JointLifetimeModel::exchangeable(n).map_err(e)?;
        for k in 1..=n {
            let bp = indices::barlow_proschan(&standard(StandardKind::KOutOfN(k), n), &model, &opts).map_err(e)?;
            let h = indices::symmetry_index(&bp).map_err(e)?;
            let h_oracle = common::entropy(&bp.to_f64());
            worst = worst.max((h - 1.0).abs());
            ensure!((h - 1.0).abs() <= 1e-12 && (h - h_oracle).abs() <= 1e-12, "H = {h} for {k}-out-of-{n}");
        }
    }
    // symmetric, strictly positive q: exchangeable for every n, and a
    // non-exchangeable law from the same family as the counterexample
    let key = |s: &str| bp_core::lifetimes::parse_permutation_key(s).unwrap();
    let tilted = OrderDistribution::new(
        3,
        [("123", 1), ("132", 3), ("213", 3), ("231", 1), ("312", 1), ("321", 3)].map(|(k, w)| (key(k), rational(w, 12))),
    )
    .map_err(e)?;
    let tilted = JointLifetimeModel::OrderDistribution(tilted);
    ensure!(indices::q_symmetry_check(&tilted, &opts).map_err(e)?.symmetric, "tilted law q not symmetric");
    let mut dirac = 0;
    for n in 1..=5 {
        let kofn: Vec<StructureFunction> = (1..=n).map(|k| standard(StandardKind::KOutOfN(k), n)).collect();
        let mut models = vec![JointLifetimeModel::exchangeable(n).map_err(e)?];
        if n == 3 {
            models.push(tilted.clone());
        }
        for phi in coherent_structures(n).map_err(e)? {
            for model in &models {
                let p = indices::signature_p(&phi, model, &opts).map_err(e)?;
                let is_dirac = exact(&p)?.iter().filter(|x| **x != rational(0, 1)).count() == 1;
                let is_kofn = kofn.contains(&phi);
                ensure!(is_dirac == is_kofn, "{phi:?}: Dirac {is_dirac}, k-out-of-n {is_kofn}");
                dirac += is_dirac as usize;
            }
        }
    }
    Ok(format!(
        "H = 0 for every x_j; |H − 1| ≤ {worst:.1e} for all k-out-of-n, n ≤ 8; {dirac} Dirac signatures, all k-out-of-n"
    ))
}

/// 10. Reports are byte-identical across runs and thread counts.
fn determinism() -> Outcome {
    let specs = [
        r#"{"structure": {"standard": "bridge", "n": 5}, "model": {"model": "exchangeable"}}"#,
        r#"{"structure": {"formula": "x1*(x2|x3) | x4", "n": 4},
            "model": {"model": "weibull", "lambda": [0.3, 1, 2, 4], "alpha": 1.4}}"#,
        r#"{"structure": {"standard": "k_out_of_n", "k": 2, "n": 3},
            "model": {"model": "independent", "marginals": [
                {"dist": "exponential", "rate": 1}, {"dist": "weibull", "lambda": 2, "alpha": 0.8},
                {"dist": "exponential", "rate": 0.5}]}}"#,
    ];
    let flags = VerifyFlags { samples: Some(20_000), seed: Some(31) };
    for text in specs {
        let spec = SystemSpec::from_json(text).map_err(e)?;
        let render = || -> Result<(String, String), String> {
            Ok((
                cmd_analyze(&spec, &AnalyzeFlags::default()).map_err(e)?.to_json(),
                cmd_verify(&spec, &flags).map_err(e)?.to_json(),
            ))
        };
        let first = render()?;
        let second = render()?;
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(e)?.install(&render)?;
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().map_err(e)?.install(&render)?;
        ensure!(first == second, "two runs differ");
        ensure!(first == single && first == three, "thread count changes the report");
    }
    Ok("3 specs × analyze/verify identical over 2 runs and 1/3/default threads".into())
}

fn main() {
    let mut pairs = Vec::new();
    let mut weibull = Vec::new();
    let mut failed = 0;
    let mut report = |id: usize, name: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let mut outcome = f();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {why} [{elapsed:.2?}]");
            }
        }
    };
    let secs = |s| Some(Duration::from_secs(s));
    report(1, "bridge exchangeable I_BP", secs(1), &mut bridge_exchangeable);
    report(2, "series-3 structural values", secs(1), &mut series_structural);
    report(3, "exchangeable collapse, coherent n ≤ 5", secs(120), &mut exchangeable_collapse);
    report(4, "oracle equivalence, 200 pairs", secs(60), &mut || oracle_equivalence(&mut pairs));
    report(5, "Weibull three-way agreement, 50 models", secs(300), &mut || weibull_three_way(&mut weibull));
    report(6, "ordering-table identities", None, &mut identity_suite);
    report(7, "Möbius vs derivative forms", None, &mut || form_agreement(&pairs, &weibull));
    report(8, "counterexample ordering law", secs(1), &mut counterexample);
    report(9, "entropy extremes", None, &mut entropy_extremes);
    report(10, "determinism", None, &mut determinism);
    if failed > 0 {
        println!("{failed} criteria FAILED");
        std::process::exit(1);
    }
    println!("all 10 criteria PASS");
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::Rng as _;
use sha2::{Digest, Sha256};

use conceptrel::bases::{
    concept2vec, label_basis, skipgram_gradient, skipgram_loss, training_pairs, ConceptBasis,
    SkipgramConfig,
};
use conceptrel::clustering::ward_cluster;
use conceptrel::datasets::{
    gen_appendix_i, gen_correlated_pairs, pairs_pairing, ConceptDataset, ProfileDistribution,
    RobustnessPerturbation,
};
use conceptrel::intervention::{
    correlation_sweep, intervention_sweep, CorrelationSweepParams, InterventionPolicy, Pipeline,
    PipelineParams,
};
use conceptrel::metrics::{
    basis_distance, concept_agreement, importance_vectors, responsiveness, robustness, stability,
    VectorMetric,
};
use conceptrel::predictors::{fit_appendix_i, AppendixIKind, ConceptPredictor, LabelPredictor};
use conceptrel::rng;
use conceptrel::theory::{
    estimate_cooccurrence, exact_cooccurrence, random_profile_distribution, std_normal_cdf,
    theorem1_threshold, theorem2_bound, verify_theorem1_at, verify_theorem2,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (usize, &'static str, Option<Duration>, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (
            1,
            "metric axioms",
            Some(Duration::from_secs(5)),
            metric_axioms,
        ),
        (
            2,
            "oracle equivalence",
            Some(Duration::from_secs(10)),
            oracle_equivalence,
        ),
        (
            3,
            "co-occurrence estimation threshold",
            Some(Duration::from_secs(60)),
            theorem1,
        ),
        (
            4,
            "noisy co-occurrence regret bound",
            Some(Duration::from_secs(60)),
            theorem2,
        ),
        (
            5,
            "concept agreement on perfect pairs",
            Some(Duration::from_secs(60)),
            agreement,
        ),
        (
            6,
            "intervention direction",
            Some(Duration::from_secs(180)),
            intervention_direction,
        ),
        (
            7,
            "mixture scenario stability and responsiveness",
            Some(Duration::from_secs(60)),
            mixture,
        ),
        (
            8,
            "accuracy vs correlation rate",
            Some(Duration::from_secs(180)),
            correlation_direction,
        ),
        (
            9,
            "robustness vs flip rate",
            Some(Duration::from_secs(60)),
            robustness_direction,
        ),
        (
            10,
            "Ward clustering oracle",
            Some(Duration::from_secs(30)),
            ward_oracle,
        ),
        (
            11,
            "numerical hygiene",
            Some(Duration::from_secs(30)),
            numerical_hygiene,
        ),
        (12, "CLI determinism", None, cli_determinism),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| verdict(false, format!("panicked: {}", panic_message(&e))));
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = v.pass && in_time;
        let budget = limit.map_or_else(String::new, |l| format!(" / {}s", l.as_secs()));
        println!(
            "acceptance {id:>2} {}: {name}: {} [{:.2}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("c{j}")).collect()
}

fn random_basis(r: &mut rng::Rng, k: usize, d: usize) -> ConceptBasis {
    let v = Array2::from_shape_simple_fn((k, d), || {
        // coarse grid values so distance ties actually occur
        if r.random_bool(0.3) {
            f64::from(r.random_range(-2i8..=2))
        } else {
            r.random_range(-1.0..1.0)
        }
    });
    let v = v.mapv(|x| if x == 0.0 { 0.5 } else { x });
    ConceptBasis::new(names(k), v).unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn metric_axioms() -> Verdict {
    let mut r = rng::seeded(101);
    let mut worst = String::new();
    let mut checked = 0;
    for _ in 0..100 {
        let k = r.random_range(2..=30);
        let d = r.random_range(1..=8);
        let a = random_basis(&mut r, k, d);
        let b = random_basis(&mut r, k, d);
        for m in VectorMetric::ALL {
            let t = r.random_range(1..=5);
            let ab = basis_distance(&a, &b, m, t).unwrap();
            let ba = basis_distance(&b, &a, m, t).unwrap();
            let aa = basis_distance(&a, &a, m, t).unwrap();
            checked += 1;
            if !(0.0..=1.0).contains(&ab) || ab != ba || aa != 0.0 {
                worst = format!("k={k} d={d} {m} t={t}: ab={ab} ba={ba} aa={aa}");
                break;
            }
        }
    }
    verdict(
        worst.is_empty(),
        if worst.is_empty() {
            format!("{checked} basis pairs ok")
        } else {
            worst
        },
    )
}

fn random_dataset(r: &mut rng::Rng, n: usize, k: usize, l: usize) -> ConceptDataset {
    let p: Vec<f64> = (0..k).map(|_| r.random_range(0.05..0.9)).collect();
    let mut c = Array2::from_shape_fn((n, k), |(_, j)| u8::from(r.random_bool(p[j])));
    for j in 0..k {
        let i = r.random_range(0..n);
        c[[i, j]] = 1;
    }
    let x = c.mapv(f64::from);
    let labels = (0..n).map(|_| r.random_range(1..=l)).collect();
    ConceptDataset::new(x, (0.0, 1.0), c, labels, l, names(k), None).unwrap()
}

fn oracle_equivalence() -> Verdict {
    let mut r = rng::seeded(202);
    for case in 0..50 {
        let n = r.random_range(1..=2000);
        let k = r.random_range(2..=15);
        let d = random_dataset(&mut r, n, k, 3);
        let m = estimate_cooccurrence(&label_basis(&d).unwrap()).unwrap();
        let c = d.concepts();
        for i in 0..k {
            let ci = (0..n).filter(|&s| c[[s, i]] == 1).count();
            for j in 0..k {
                let both = (0..n).filter(|&s| c[[s, i]] == 1 && c[[s, j]] == 1).count();
                let want = both as f64 / ci as f64;
                if m.matrix()[[i, j]] != want {
                    return verdict(
                        false,
                        format!(
                            "co-occurrence case {case} entry ({i},{j}): {} vs {want}",
                            m.matrix()[[i, j]]
                        ),
                    );
                }
            }
        }
    }
    for case in 0..50 {
        let n = r.random_range(1..=100);
        let k = r.random_range(2..=8);
        let l = r.random_range(2..=5);
        let d = random_dataset(&mut r, n, k, l);
        let g = ConceptPredictor::from_weights(Array2::from_shape_simple_fn((k + 1, k), || {
            r.random_range(-2.0..2.0)
        }))
        .unwrap();
        let f = LabelPredictor::from_weights(Array2::from_shape_simple_fn((k + 1, l), || {
            r.random_range(-2.0..2.0)
        }))
        .unwrap();
        let outputs = f.predict(g.predict(d.features().view()).view());
        let imp = importance_vectors(&g, &f, &d).unwrap();
        for j in 0..k {
            for y in 0..l {
                let mut pos = 0.0;
                let mut neg = 0.0;
                for s in 0..n {
                    if d.concepts()[[s, j]] == 1 {
                        pos += outputs[[s, y]];
                    } else {
                        neg += outputs[[s, y]];
                    }
                }
                if imp.vectors()[[j, y]] != pos - neg {
                    return verdict(false, format!("importance case {case} entry ({j},{y})"));
                }
            }
        }
    }
    verdict(
        true,
        "50 co-occurrence and 50 importance instances match exactly",
    )
}

fn two_profiles() -> ProfileDistribution {
    ProfileDistribution::new(vec![(vec![1, 1], 0.5), (vec![1, 0], 0.5)]).unwrap()
}

fn theorem1() -> Verdict {
    let p = two_profiles();
    let (eps, delta, trials, seed) = (0.2, 0.1, 500, 3);
    let theta = exact_cooccurrence(&p).unwrap().theta();
    let n_star = theorem1_threshold(eps, delta, 2, theta).unwrap();
    let at = |n: usize| verify_theorem1_at(&p, eps, delta, n, trials, seed).unwrap();
    let mid = at(n_star);
    let low = at(n_star / 4);
    let high = at(4 * n_star);
    let bound_ok = mid.empirical <= delta + 3.0 * mid.stderr;
    let strict = low.empirical > high.empirical;
    verdict(
        bound_ok && strict,
        format!(
            "n*={n_star}: failure {:.4} (se {:.4}) vs delta {delta}; n*/4={}: {:.4}, 4n*={}: {:.4} (strict decrease {})",
            mid.empirical,
            mid.stderr,
            n_star / 4,
            low.empirical,
            4 * n_star,
            high.empirical,
            if strict { "holds" } else { "does not hold" }
        ),
    )
}

fn theorem2() -> Verdict {
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut widened_failures = 0;
    for i in 0..20u64 {
        let k = 3 + (i as usize % 8);
        let p = random_profile_distribution(k, 2 * k, 900 + i).unwrap();
        let m = exact_cooccurrence(&p).unwrap();
        let intervened: Vec<usize> = (0..k / 2).collect();
        let rows: Vec<usize> = (k / 2..k).collect();
        for eps in [0.05, 0.1, 0.3] {
            let r = verify_theorem2(&m, &intervened, eps, 2000, 7 + i).unwrap();
            cases += 1;
            if !r.pass {
                failures.push(format!("m{i}/eps{eps}"));
                worst_ratio = worst_ratio.max(r.empirical / r.threshold.max(1e-300));
            }
            // same bound with the standard deviation of a difference of two noisy entries
            let widened = theorem2_bound(
                m.matrix().view(),
                &rows,
                &intervened,
                eps * std::f64::consts::SQRT_2,
            );
            if r.empirical > widened + 3.0 * r.stderr {
                widened_failures += 1;
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{cases} cases within bound + 3 se")
    } else {
        format!(
            "{}/{cases} cases exceed bound + 3 se (worst regret/bound {:.2}; e.g. {}); with eps*sqrt(2) in the bound {} exceed",
            failures.len(),
            worst_ratio,
            failures.iter().take(3).cloned().collect::<Vec<_>>().join(", "),
            widened_failures
        )
    };
    verdict(failures.is_empty(), detail)
}

fn agreement() -> Verdict {
    let pairing = pairs_pairing(10);
    let mut label = Vec::new();
    let mut c2v = Vec::new();
    for seed in 0..3 {
        let d = gen_correlated_pairs(10, 2000, 1.0, 0.2, seed).unwrap();
        let lb = label_basis(&d).unwrap();
        label.push(concept_agreement(&lb, &pairing, VectorMetric::Euclidean).unwrap());
        let cb = concept2vec(&d, &SkipgramConfig::with_seed(seed)).unwrap();
        c2v.push(concept_agreement(&cb, &pairing, VectorMetric::Euclidean).unwrap());
    }
    let pass = label.iter().chain(&c2v).all(|&a| a == 1.0);
    verdict(pass, format!("label {label:?}, concept2vec {c2v:?}"))
}

fn intervention_direction() -> Verdict {
    let fractions = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let params = PipelineParams::default();
    let mut hard = vec![Vec::new(); fractions.len()];
    let mut only = vec![Vec::new(); fractions.len()];
    let mut concept_acc = Vec::new();
    for seed in 0..3 {
        let d = gen_correlated_pairs(10, 2000, 0.9, 0.5, seed).unwrap();
        let p = Pipeline::fit(&d, &params, seed).unwrap();
        concept_acc.push(p.concept_accuracy());
        for (policy, acc) in [
            (InterventionPolicy::basis_hard(10).unwrap(), &mut hard),
            (InterventionPolicy::predictor_only(), &mut only),
        ] {
            let o = intervention_sweep(
                &p.f,
                &p.g,
                &p.basis,
                &p.test,
                &fractions,
                policy,
                false,
                &[seed],
                "label",
            )
            .unwrap();
            for (fi, &fr) in fractions.iter().enumerate() {
                acc[fi].push(o.mean_task_acc(fr).unwrap());
            }
        }
    }
    let h: Vec<f64> = hard.iter().map(|v| mean(v)).collect();
    let o: Vec<f64> = only.iter().map(|v| mean(v)).collect();
    let mut bad = Vec::new();
    for fi in 1..=4 {
        if h[fi] < o[fi] {
            bad.push(format!("{}", fractions[fi]));
        }
    }
    let end_equal = (h[5] - o[5]).abs() <= 1e-9;
    let fmt = |v: &[f64]| {
        v[1..]
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    verdict(
        bad.is_empty() && end_equal,
        format!(
            "g concept acc {:.3}; task acc at .2/.4/.6/.8/1: basis_hard {} vs predictor_only {}; basis_hard below at [{}]; equal at 1.0: {end_equal}",
            mean(&concept_acc),
            fmt(&h),
            fmt(&o),
            bad.join(", ")
        ),
    )
}

fn mixture() -> Verdict {
    let d = gen_appendix_i(5000, 0).unwrap();
    let seeds: Vec<u64> = (0..5).collect();
    let metric = VectorMetric::Euclidean;
    let t = 1;
    let builder = |kind: AppendixIKind| {
        move |d: &ConceptDataset, s: u64| fit_appendix_i(d, kind, s)?.representation()
    };
    let st_correct = stability(builder(AppendixIKind::Correct), &d, &seeds, metric, t).unwrap();
    let st_random = stability(builder(AppendixIKind::Random), &d, &seeds, metric, t).unwrap();
    let resp = |kind| {
        mean(
            &seeds
                .iter()
                .map(|&s| responsiveness(builder(kind), &d, metric, t, s).unwrap())
                .collect::<Vec<_>>(),
        )
    };
    let (rc, rr) = (resp(AppendixIKind::Correct), resp(AppendixIKind::Random));
    verdict(
        st_correct - st_random > 0.05 && rc > rr,
        format!("stability correct {st_correct:.3} vs random {st_random:.3}; responsiveness correct {rc:.3} vs random {rr:.3}"),
    )
}

fn correlation_direction() -> Verdict {
    let rates = [0.0, 0.25, 0.5, 0.75, 1.0];
    let rows = correlation_sweep(
        &rates,
        &CorrelationSweepParams::default(),
        InterventionPolicy::default(),
        &[0, 1, 2],
    )
    .unwrap();
    let series = |measure: &str| -> Vec<f64> {
        rates
            .iter()
            .map(|&r| {
                mean(
                    &rows
                        .iter()
                        .filter(|x| x.rate == r && x.measure == measure)
                        .map(|x| x.value)
                        .collect::<Vec<_>>(),
                )
            })
            .collect()
    };
    let concept = series("concept_acc");
    let task = series("task_acc");
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0] - 0.02);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    verdict(
        monotone(&concept) && monotone(&task),
        format!("concept acc {}; task acc {}", fmt(&concept), fmt(&task)),
    )
}

fn robustness_direction() -> Verdict {
    let d = gen_correlated_pairs(10, 1000, 1.0, 0.2, 0).unwrap();
    let builder = |d: &ConceptDataset, _: u64| label_basis(d);
    let values: Vec<f64> = [0.01, 0.1, 0.5]
        .iter()
        .map(|&p| {
            mean(
                &(0..3)
                    .map(|s| {
                        robustness(
                            builder,
                            &d,
                            RobustnessPerturbation::flips(p),
                            VectorMetric::Euclidean,
                            1,
                            s,
                        )
                        .unwrap()
                    })
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let pass = values[1] <= values[0]
        && values[2] <= values[1]
        && values[0] > 0.9
        && values[2] < values[0];
    verdict(
        pass,
        format!(
            "robustness at 0.01/0.1/0.5: {:.3}/{:.3}/{:.3}",
            values[0], values[1], values[2]
        ),
    )
}

/// O(k³) Ward by recomputing centroid costs from scratch at every step.
fn naive_ward(points: &Array2<f64>) -> Vec<(usize, usize, f64, usize)> {
    let k = points.nrows();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..k).map(|i| (i + 1, vec![i])).collect();
    let centroid = |members: &[usize]| -> Array1<f64> {
        members
            .iter()
            .map(|&m| points.row(m).to_owned())
            .fold(Array1::zeros(points.ncols()), |a, b| a + b)
            / members.len() as f64
    };
    let mut merges = Vec::new();
    for step in 0..k - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let (na, nb) = (clusters[x].1.len() as f64, clusters[y].1.len() as f64);
                let diff = centroid(&clusters[x].1) - centroid(&clusters[y].1);
                let cost = na * nb / (na + nb) * diff.dot(&diff);
                let key = (
                    clusters[x].0.min(clusters[y].0),
                    clusters[x].0.max(clusters[y].0),
                );
                if best.is_none_or(|(c, l, r, _, _)| cost < c || (cost == c && key < (l, r))) {
                    best = Some((cost, key.0, key.1, x, y));
                }
            }
        }
        let (cost, l, r, x, y) = best.unwrap();
        let mut members = clusters[x].1.clone();
        members.extend(&clusters[y].1);
        clusters.remove(y);
        clusters.remove(x);
        merges.push((l, r, cost, members.len()));
        clusters.push((k + 1 + step, members));
    }
    merges
}

fn ward_oracle() -> Verdict {
    let mut r = rng::seeded(1010);
    for case in 0..50 {
        let k = r.random_range(2..=50);
        let d = r.random_range(1..=6);
        let b = random_basis(&mut r, k, d);
        let got = ward_cluster(&b).unwrap();
        let want = naive_ward(b.vectors());
        for (step, (m, w)) in got.merges().iter().zip(&want).enumerate() {
            let rel = (m.height - w.2).abs() / w.2.abs().max(1e-300);
            if (m.left, m.right, m.size) != (w.0, w.1, w.3)
                || (rel > 1e-9 && (m.height - w.2).abs() > 1e-12)
            {
                return verdict(
                    false,
                    format!(
                        "case {case} (k={k}) step {step}: got ({}, {}, {}) want ({}, {}, {})",
                        m.left, m.right, m.height, w.0, w.1, w.2
                    ),
                );
            }
        }
    }
    verdict(true, "50 instances identical to the naive oracle")
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn max_fd_error(w: &Array2<f64>, grad: &Array2<f64>, loss: impl Fn(&Array2<f64>) -> f64) -> f64 {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for idx in ndarray::indices(w.raw_dim()) {
        let mut plus = w.clone();
        plus[idx] += h;
        let mut minus = w.clone();
        minus[idx] -= h;
        let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
        worst = worst.max(rel_err(fd, grad[idx]));
    }
    worst
}

/// Φ by composite Simpson integration of the density from 0.
fn cdf_oracle(x: f64) -> f64 {
    let steps = 20_000;
    let h = x / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(x);
    for i in 1..steps {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

fn numerical_hygiene() -> Verdict {
    let mut r = rng::seeded(1111);
    let d = gen_correlated_pairs(3, 40, 0.7, 0.3, 5).unwrap();
    let x = d.features().view();
    let c = d.concepts_f64();
    let wg = Array2::from_shape_simple_fn((7, 6), || r.random_range(-1.0..1.0));
    let g = ConceptPredictor::from_weights(wg.clone()).unwrap();
    let e_g = max_fd_error(&wg, &g.gradient(x, c.view()), |w| {
        ConceptPredictor::from_weights(w.clone())
            .unwrap()
            .loss(x, c.view())
    });
    let wf = Array2::from_shape_simple_fn((7, 3), || r.random_range(-1.0..1.0));
    let f = LabelPredictor::from_weights(wf.clone()).unwrap();
    let labels = d.labels();
    let e_f = max_fd_error(&wf, &f.gradient(c.view(), labels), |w| {
        LabelPredictor::from_weights(w.clone())
            .unwrap()
            .loss(c.view(), labels)
    });
    let toy = ProfileDistribution::new(vec![
        (vec![1, 1, 0], 0.4),
        (vec![0, 1, 1], 0.3),
        (vec![1, 0, 1], 0.3),
    ])
    .unwrap()
    .sample_dataset(20, 2)
    .unwrap();
    let pairs = training_pairs(&toy, 2, 9).unwrap();
    let table = Array2::from_shape_simple_fn((3, 4), || r.random_range(-1.0..1.0));
    let e_s = max_fd_error(&table, &skipgram_gradient(&table, &pairs), |t| {
        skipgram_loss(t, &pairs)
    });

    let mut e_cdf: f64 = 0.0;
    let mut x = -8.0;
    while x <= 8.0 + 1e-12 {
        e_cdf = e_cdf.max((std_normal_cdf(x) - cdf_oracle(x)).abs());
        x += 0.01;
    }
    let pass = e_g < 1e-5 && e_f < 1e-5 && e_s < 1e-5 && e_cdf < 1e-7;
    verdict(
        pass,
        format!("gradient rel err g {e_g:.1e}, f {e_f:.1e}, skipgram {e_s:.1e}; cdf abs err {e_cdf:.1e}"),
    )
}

const BIN: &str = env!("CARGO_BIN_EXE_conceptrel");

fn run_cli(args: &[String]) -> Result<(), String> {
    let out = Command::new(BIN)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn tree_hashes(dir: &Path) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let digest = Sha256::digest(fs::read(&path).unwrap());
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), hex));
            }
        }
    }
    out.sort();
    out
}

/// The full command pipeline rooted at `root`.
fn pipeline(root: &Path) -> Result<(), String> {
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    fs::write(
        root.join("profiles.json"),
        r#"{"profiles": [{"pattern": [1, 1, 0], "p": 0.5}, {"pattern": [1, 0, 1], "p": 0.3}, {"pattern": [1, 1, 1], "p": 0.2}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let commands: Vec<Vec<String>> = vec![
        format!("gen appendix-i --n 500 --seed 1 --out {}", p("ai")),
        format!("gen pairs --digits 5 --n 400 --rate 0.9 --noise 0.5 --seed 2 --out {}", p("pairs")),
        format!("gen weak --k 4 --n 300 --pair 1,2,0.4 --pair 3,4,-0.2 --seed 3 --out {}", p("weak")),
        format!("gen profile --profiles {} --n 200 --seed 4 --out {}", p("profiles.json"), p("prof")),
        format!("basis label --data {} --out {}", p("pairs"), p("b_label")),
        format!("basis c2v --data {} --seed 3 --out {}", p("pairs"), p("b_c2v")),
        format!("basis import --file {} --out {}", root.join("b_c2v/basis.json").display(), p("b_import")),
        format!(
            "metrics --data {} --basis c2v --metrics stability,robustness,responsiveness,faithfulness,agreement --seeds 2 --flip-rates 0.01,0.1 --seed 5 --out {}",
            p("pairs"),
            p("m_c2v")
        ),
        format!("metrics --data {} --seeds 3 --seed 6 --out {}", p("weak"), p("m_weak")),
        format!("intervene sweep --data {} --policies predictor_only,basis_hard,basis_weighted --seed 7 --out {}", p("pairs"), p("sweep")),
        format!("intervene correlation --rates 0,0.5,1 --digits 4 --n 300 --seeds 2 --g-epochs 30 --seed 8 --out {}", p("corr")),
        format!("theory theorem1 --trials 100 --seed 9 --out {}", p("t1")),
        format!("theory theorem2 --trials 300 --seed 10 --out {}", p("t2")),
        format!("cluster --data {} --out {}", p("weak"), p("cl")),
        format!("cluster --basis {} --out {}", root.join("b_c2v/basis.json").display(), p("cl_c2v")),
    ]
    .into_iter()
    .map(|c| c.split(' ').map(String::from).collect())
    .collect();
    for c in &commands {
        run_cli(c)?;
    }
    Ok(())
}

fn cli_determinism() -> Verdict {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for root in [a.path(), b.path()] {
        if let Err(e) = pipeline(root) {
            return verdict(false, e);
        }
    }
    let ha = tree_hashes(a.path());
    let hb = tree_hashes(b.path());
    let differing: Vec<String> = ha
        .iter()
        .zip(&hb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.display().to_string())
        .collect();
    let pass = ha.len() == hb.len() && differing.is_empty();
    verdict(
        pass,
        if pass {
            format!("{} output files byte-identical across reruns", ha.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

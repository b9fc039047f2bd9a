use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use conceptrel::bases::{
    concept2vec, export_basis, import_basis, label_basis, ConceptBasis, SkipgramConfig,
};
use conceptrel::clustering::{export_dendrogram, ward_cluster};
use conceptrel::datasets::{
    gen_appendix_i, gen_correlated_pairs, gen_weak_correlation, load_dataset_dir, save_dataset,
    ConceptDataset, ProfileDistribution, RobustnessPerturbation,
};
use conceptrel::intervention::{
    correlation_sweep, intervention_sweep, write_correlation_csv, write_outcome_csv,
    CorrelationSweepParams, InterventionMode, InterventionOutcome, InterventionPolicy, Pipeline,
    PipelineParams,
};
use conceptrel::metrics::{
    concept_agreement, faithfulness, importance_vectors, responsiveness, robustness,
    stability_distances, write_metric_report, MetricRecord, VectorMetric,
};
use conceptrel::predictors::{save_predictor, Predictor};
use conceptrel::theory::{
    exact_cooccurrence, random_profile_distribution, verify_theorem1, verify_theorem1_at,
    verify_theorem2,
};
use conceptrel::{Error, Result};

use super::{
    BasisArgs, BasisKind, C2vArgs, Cli, ClusterArgs, Command, CorrelationArgs, GenArgs, Generator,
    InterveneCommand, MetricsArgs, PipelineArgs, PolicyArgs, SweepArgs, Theorem1Args, Theorem2Args,
    TheoryCommand,
};

pub fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_path();
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, cli.seed, out),
        Command::Basis(a) => cmd_basis(&a, cli.seed, out),
        Command::Metrics(a) => cmd_metrics(&a, cli.seed, out),
        Command::Intervene(InterveneCommand::Sweep(a)) => cmd_sweep(&a, cli.seed, out),
        Command::Intervene(InterveneCommand::Correlation(a)) => cmd_correlation(&a, cli.seed, out),
        Command::Theory(TheoryCommand::Theorem1(a)) => cmd_theorem1(&a, cli.seed, out),
        Command::Theory(TheoryCommand::Theorem2(a)) => cmd_theorem2(&a, cli.seed, out),
        Command::Cluster(a) => cmd_cluster(&a, out),
    }
}

fn create_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })
}

fn write_text(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
}

fn cmd_gen(a: &GenArgs, seed: u64, out: &Path) -> Result<()> {
    let d = match a.generator {
        Generator::AppendixI => gen_appendix_i(a.n, seed)?,
        Generator::Pairs => gen_correlated_pairs(a.digits, a.n, a.rate, a.noise, seed)?,
        Generator::Weak => {
            let pairs = a
                .pairs
                .iter()
                .map(|s| parse_pair(s, a.k))
                .collect::<Result<Vec<_>>>()?;
            gen_weak_correlation(a.k, a.n, &pairs, seed)?
        }
        Generator::Profile => {
            let path = a
                .profiles
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("gen profile needs --profiles".into()))?;
            read_profiles(path)?.sample_dataset(a.n, seed)?
        }
    };
    save_dataset(&d, out)?;
    println!(
        "wrote {} (n={}, k={}, m={})",
        out.display(),
        d.num_samples(),
        d.num_concepts(),
        d.num_features()
    );
    Ok(())
}

/// `i,j,phi` with 1-based concept indices.
fn parse_pair(s: &str, k: usize) -> Result<(usize, usize, f64)> {
    let bad = || Error::InvalidParameter(format!("--pair `{s}` must look like i,j,phi"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [i, j, phi] = parts.as_slice() else {
        return Err(bad());
    };
    let i: usize = i.parse().map_err(|_| bad())?;
    let j: usize = j.parse().map_err(|_| bad())?;
    let phi: f64 = phi.parse().map_err(|_| bad())?;
    for idx in [i, j] {
        if idx == 0 || idx > k {
            return Err(Error::IndexOutOfRange { index: idx, len: k });
        }
    }
    Ok((i - 1, j - 1, phi))
}

#[derive(Deserialize)]
struct ProfilesDoc {
    profiles: Vec<ProfileEntry>,
}

#[derive(Deserialize)]
struct ProfileEntry {
    pattern: Vec<u8>,
    p: f64,
}

fn read_profiles(path: &Path) -> Result<ProfileDistribution> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let doc: ProfilesDoc = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    ProfileDistribution::new(doc.profiles.into_iter().map(|e| (e.pattern, e.p)).collect())
}

fn skipgram(c: &C2vArgs, seed: u64) -> SkipgramConfig {
    SkipgramConfig {
        embed_dim: c.embed_dim,
        epochs: c.epochs,
        learning_rate: c.lr,
        negatives_per_positive: c.negatives,
        seed,
    }
}

fn pipeline_params(p: &PipelineArgs) -> PipelineParams {
    PipelineParams {
        train_fraction: p.train_fraction,
        g_epochs: p.g_epochs,
        g_lr: p.g_lr,
        f_epochs: p.f_epochs,
        f_lr: p.f_lr,
    }
}

fn require_data(data: &Option<PathBuf>, what: &str) -> Result<ConceptDataset> {
    let dir = data
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter(format!("{what} needs --data")))?;
    load_dataset_dir(dir)
}

fn cmd_basis(a: &BasisArgs, seed: u64, out: &Path) -> Result<()> {
    let b = match a.kind {
        BasisKind::Label => label_basis(&require_data(&a.data, "basis label")?)?,
        BasisKind::C2v => concept2vec(
            &require_data(&a.data, "basis c2v")?,
            &skipgram(&a.c2v, seed),
        )?,
        BasisKind::Import => {
            let file = a
                .file
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("basis import needs --file".into()))?;
            import_basis(file)?
        }
    };
    create_out(out)?;
    let path = out.join("basis.json");
    export_basis(&b, &path)?;
    println!(
        "wrote {} (k={}, d={})",
        path.display(),
        b.num_concepts(),
        b.dim()
    );
    Ok(())
}

/// How a metric run obtains bases: rebuilt per dataset and seed, or fixed.
enum BasisSource {
    Label,
    C2v(C2vArgs),
    Fixed(ConceptBasis),
}

impl BasisSource {
    fn parse(arg: &str, c2v: &C2vArgs) -> Result<(Self, String)> {
        Ok(match arg {
            "label" => (BasisSource::Label, "label".into()),
            "c2v" => (BasisSource::C2v(*c2v), "c2v".into()),
            path => {
                let name = Path::new(path)
                    .file_stem()
                    .map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned());
                (BasisSource::Fixed(import_basis(path)?), name)
            }
        })
    }

    fn build(&self, d: &ConceptDataset, seed: u64) -> Result<ConceptBasis> {
        match self {
            BasisSource::Label => label_basis(d),
            BasisSource::C2v(c) => concept2vec(d, &skipgram(c, seed)),
            BasisSource::Fixed(b) => {
                if b.names() != d.concept_names() {
                    return Err(Error::DimensionMismatch(
                        "basis concepts do not match the dataset's concept names".into(),
                    ));
                }
                Ok(b.clone())
            }
        }
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn default_t(d: &ConceptDataset) -> usize {
    match d.groups() {
        Some([a, b]) if a.len() == b.len() && a.len() + b.len() == d.num_concepts() => 1,
        _ => 3,
    }
}

fn parse_pairing(arg: &str, k: usize) -> Result<Vec<(usize, usize)>> {
    if arg == "halves" {
        if !k.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "halves pairing needs an even k, got {k}"
            )));
        }
        return Ok((0..k / 2).map(|j| (j, j + k / 2)).collect());
    }
    arg.split(',')
        .map(|p| {
            let bad = || Error::InvalidParameter(format!("pairing entry `{p}` must look like i:j"));
            let (i, j) = p.trim().split_once(':').ok_or_else(bad)?;
            let i: usize = i.parse().map_err(|_| bad())?;
            let j: usize = j.parse().map_err(|_| bad())?;
            if i == 0 || j == 0 {
                return Err(bad());
            }
            Ok((i - 1, j - 1))
        })
        .collect()
}

fn cmd_metrics(a: &MetricsArgs, seed: u64, out: &Path) -> Result<()> {
    if a.seeds == 0 {
        return Err(Error::InvalidParameter("--seeds must be >= 1".into()));
    }
    let d = load_dataset_dir(&a.data)?;
    let (source, basis_name) = BasisSource::parse(&a.basis, &a.c2v)?;
    let metric: VectorMetric = a.delta_v.parse()?;
    let t = a.t.unwrap_or_else(|| default_t(&d));
    let seeds: Vec<u64> = (0..a.seeds).map(|i| seed.wrapping_add(i)).collect();
    let dataset = a.dataset_name.clone().unwrap_or_else(|| {
        a.data.file_name().map_or_else(
            || a.data.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        )
    });
    let builder = |d: &ConceptDataset, s: u64| source.build(d, s);
    let record = |name: String, values: &[f64], count: usize| {
        let (value, stderr) = mean_se(values);
        MetricRecord {
            metric: name,
            basis_name: basis_name.clone(),
            dataset: dataset.clone(),
            t,
            delta_v: metric.name().to_string(),
            value,
            stderr,
            seed_count: count,
        }
    };

    let mut rows = Vec::new();
    for m in &a.metrics {
        match m.as_str() {
            "stability" => {
                let dist = stability_distances(builder, &d, &seeds, metric, t)?;
                let sims: Vec<f64> = dist.iter().map(|x| 1.0 - x).collect();
                rows.push(record("stability".into(), &sims, seeds.len()));
            }
            "robustness" => {
                for &p in &a.flip_rates {
                    let pert = RobustnessPerturbation {
                        flip_prob: p,
                        noise_std: a.noise_std,
                    };
                    let v = seeds
                        .iter()
                        .map(|&s| robustness(builder, &d, pert, metric, t, s))
                        .collect::<Result<Vec<_>>>()?;
                    rows.push(record(format!("robustness(p={p})"), &v, seeds.len()));
                }
            }
            "responsiveness" => {
                let v = seeds
                    .iter()
                    .map(|&s| responsiveness(builder, &d, metric, t, s))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(record("responsiveness".into(), &v, seeds.len()));
            }
            "faithfulness" => {
                let params = pipeline_params(&a.pipeline);
                let mut v = Vec::with_capacity(seeds.len());
                for &s in &seeds {
                    let p = Pipeline::fit(&d, &params, s)?;
                    let imp = importance_vectors(&p.g, &p.f, &d)?;
                    if !imp.degenerate().is_empty() {
                        let names: Vec<&str> = imp.degenerate().iter().map(|&j| imp.names()[j].as_str()).collect();
                        eprintln!(
                            "warning: seed {s}: importance undefined for {} (always or never active); zero vector used",
                            names.join(", ")
                        );
                    }
                    v.push(faithfulness(&builder(&d, s)?, &imp, metric, t)?);
                }
                rows.push(record("faithfulness".into(), &v, seeds.len()));
            }
            "agreement" => {
                let pairing = parse_pairing(&a.pairing, d.num_concepts())?;
                let v = seeds
                    .iter()
                    .map(|&s| concept_agreement(&builder(&d, s)?, &pairing, metric))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(record("agreement".into(), &v, seeds.len()));
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown metric `{other}` (expected stability, robustness, responsiveness, faithfulness or agreement)"
                )))
            }
        }
    }
    create_out(out)?;
    let path = out.join("metrics.csv");
    write_metric_report(&path, &rows)?;
    for r in &rows {
        println!("{}\t{:.6} ± {:.6}", r.metric, r.value, r.stderr);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_policy(name: &str, q: usize, delta_v: &str) -> Result<InterventionPolicy> {
    let mode: InterventionMode = name.parse()?;
    let metric = match mode {
        InterventionMode::BasisWeighted => VectorMetric::CosineDistance,
        _ => delta_v.parse()?,
    };
    InterventionPolicy::new(mode, q, metric)
}

fn parse_policies(a: &PolicyArgs) -> Result<Vec<InterventionPolicy>> {
    if a.policies.is_empty() {
        return Err(Error::InvalidParameter(
            "--policies must not be empty".into(),
        ));
    }
    a.policies
        .iter()
        .map(|p| parse_policy(p, a.q, &a.delta_v))
        .collect()
}

fn cmd_sweep(a: &SweepArgs, seed: u64, out: &Path) -> Result<()> {
    if a.fractions.is_empty() {
        return Err(Error::InvalidParameter(
            "--fractions must not be empty".into(),
        ));
    }
    if a.seeds == 0 {
        return Err(Error::InvalidParameter("--seeds must be >= 1".into()));
    }
    let policies = parse_policies(&a.policy)?;
    let d = load_dataset_dir(&a.data)?;
    let p = Pipeline::fit(&d, &pipeline_params(&a.pipeline), seed)?;
    let (basis, basis_name) = match a.basis.as_str() {
        "label" => (p.basis.clone(), "label".to_string()),
        "c2v" => (
            concept2vec(&p.train, &skipgram(&a.c2v, seed))?,
            "c2v".to_string(),
        ),
        _ => {
            let (source, name) = BasisSource::parse(&a.basis, &a.c2v)?;
            (source.build(&p.train, seed)?, name)
        }
    };
    let seeds: Vec<u64> = (0..a.seeds).map(|i| seed.wrapping_add(i)).collect();
    let mut outcome = InterventionOutcome::default();
    for policy in policies {
        let o = intervention_sweep(
            &p.f,
            &p.g,
            &basis,
            &p.test,
            &a.fractions,
            policy,
            a.groups,
            &seeds,
            &basis_name,
        )?;
        outcome.rows.extend(o.rows);
    }
    create_out(out)?;
    let path = out.join("interventions.csv");
    write_outcome_csv(&path, &outcome)?;
    save_predictor(&Predictor::Concept(p.g.clone()), out.join("g.json"))?;
    save_predictor(&Predictor::Label(p.f.clone()), out.join("f.json"))?;
    println!(
        "concept accuracy {:.4}, task accuracy {:.4} on {} test samples",
        p.concept_accuracy(),
        p.task_accuracy(),
        p.test.num_samples()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_correlation(a: &CorrelationArgs, seed: u64, out: &Path) -> Result<()> {
    if a.rates.is_empty() {
        return Err(Error::InvalidParameter("--rates must not be empty".into()));
    }
    if a.seeds == 0 {
        return Err(Error::InvalidParameter("--seeds must be >= 1".into()));
    }
    let policy = parse_policy(&a.policy, a.q, &a.delta_v)?;
    let params = CorrelationSweepParams {
        n_digits: a.digits,
        n_samples: a.n,
        feature_noise: a.noise,
        fraction: a.fraction,
        pipeline: pipeline_params(&a.pipeline),
    };
    let seeds: Vec<u64> = (0..a.seeds).map(|i| seed.wrapping_add(i)).collect();
    let rows = correlation_sweep(&a.rates, &params, policy, &seeds)?;
    create_out(out)?;
    let path = out.join("correlation.csv");
    write_correlation_csv(&path, &rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn two_profile_default() -> ProfileDistribution {
    ProfileDistribution::new(vec![(vec![1, 1], 0.5), (vec![1, 0], 0.5)]).expect("valid default")
}

fn cmd_theorem1(a: &Theorem1Args, seed: u64, out: &Path) -> Result<()> {
    let p = match &a.profiles {
        Some(path) => read_profiles(path)?,
        None => two_profile_default(),
    };
    let report = match a.n {
        Some(n) => verify_theorem1_at(&p, a.epsilon, a.delta, n, a.trials, seed)?,
        None => verify_theorem1(&p, a.epsilon, a.delta, a.trials, seed)?,
    };
    create_out(out)?;
    write_text(out.join("theorem1.json"), &report.to_json())?;
    println!("{}", report.summary());
    Ok(())
}

fn cmd_theorem2(a: &Theorem2Args, seed: u64, out: &Path) -> Result<()> {
    let p = match &a.profiles {
        Some(path) => read_profiles(path)?,
        None => random_profile_distribution(a.random_k, 2 * a.random_k, seed)?,
    };
    let m = exact_cooccurrence(&p)?;
    let k = m.num_concepts();
    let intervened: Vec<usize> = if a.intervened.is_empty() {
        (0..k / 2).collect()
    } else {
        a.intervened
            .iter()
            .map(|&j| {
                if j == 0 || j > k {
                    Err(Error::IndexOutOfRange { index: j, len: k })
                } else {
                    Ok(j - 1)
                }
            })
            .collect::<Result<_>>()?
    };
    let report = verify_theorem2(&m, &intervened, a.epsilon, a.trials, seed)?;
    create_out(out)?;
    write_text(out.join("theorem2.json"), &report.to_json())?;
    println!("{}", report.summary());
    Ok(())
}

fn cmd_cluster(a: &ClusterArgs, out: &Path) -> Result<()> {
    let b = match (&a.basis, &a.data) {
        (Some(path), _) => import_basis(path)?,
        (None, Some(dir)) => label_basis(&load_dataset_dir(dir)?)?,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "cluster needs --basis or --data".into(),
            ))
        }
    };
    let dg = ward_cluster(&b)?;
    create_out(out)?;
    let path = out.join("dendrogram.json");
    export_dendrogram(&dg, &path)?;
    println!("wrote {} ({} merges)", path.display(), dg.merges().len());
    Ok(())
}

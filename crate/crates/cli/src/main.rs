//! Command-line front end: simulate datasets, evaluate likelihoods, build
//! surfaces, fit and apply class models, and run the quadrature oracles.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use shapelik::inference::{fit_from_draws, surface_from_draws};
use shapelik::io::{self, DatasetFile, FittedModel, ModelFile, RunConfig, SCHEMA_VERSION};
use shapelik::quadrature::{quad_g_marginal, quad_sigma_marginal, random_instance, QuadratureSpec};
use shapelik::rng::{derive_seed, substream, unit};
use shapelik::{
    classify, g_marginal_loglik, sigma_marginal_loglik, simulate_shape, DatasetDraws, Error, GroupMarginalInputs,
    LabelledDataset, SimilarityTransform,
};

const SIMULATION_KEY: u64 = 0x5349_4d55;
const GROUP_TOL: f64 = 1e-4;
const SIGMA_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "shapelik", version, about = "Integrated likelihood of planar shapes")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset from every class in the config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Points per shape.
        #[arg(long)]
        n: usize,
        /// Noise standard deviation.
        #[arg(long)]
        sigma: f64,
    },
    /// Log-likelihood of the shapes of one class.
    Loglik {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        class: String,
    },
    /// Likelihood surface over the config grid, written as CSV.
    Surface {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        class: Option<String>,
    },
    /// Maximum-likelihood class parameters, started from the config values.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fit only this class (default: every label in the data).
        #[arg(long)]
        class: Option<String>,
    },
    /// Posterior class probabilities of every shape.
    Classify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
    /// Compare the closed-form marginals with numerical quadrature.
    Validate {
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::LengthMismatch { .. } => 3,
            Error::Format(_) => 4,
            Error::Degenerate(_) | Error::NonNormalizable(_) | Error::AllDrawsImpossible | Error::NonConvergence { .. } => 5,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn write_file(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).map_err(|e| Failure {
        code: 4,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn simulate(config: &Path, out: &Path, n: usize, sigma: f64) -> CmdResult {
    let cfg = io::load_config(config)?;
    let sim = cfg.simulation;
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut shapes = Vec::new();
    for (c, model) in cfg.models()?.iter().enumerate() {
        let mut rng = substream(derive_seed(cfg.mc.seed, SIMULATION_KEY), c as u64);
        for i in 0..sim.shapes_per_class {
            let angle = if sim.random_rotation { TAU * unit(&mut rng) } else { 0.0 };
            let spread = sim.translation_spread;
            let tx = spread * (2.0 * unit(&mut rng) - 1.0);
            let ty = spread * (2.0 * unit(&mut rng) - 1.0);
            let transform = SimilarityTransform {
                angle,
                scale: sim.scale,
                translation: (tx, ty),
            };
            let (shape, _) = simulate_shape(&mut rng, model, n, sigma, &transform)?;
            ids.push(format!("{}-{i:04}", model.label));
            labels.push(Some(model.label.clone()));
            shapes.push(shape);
        }
    }
    let file = DatasetFile::from_shapes(ids, labels, &shapes)?;
    io::save_dataset(out, &file)?;
    eprintln!("simulated {} shapes of {n} points into {}", shapes.len(), out.display());
    print_json(&json!({
        "command": "simulate",
        "config_digest": cfg.digest(),
        "seed": cfg.mc.seed,
        "shapes": shapes.len(),
        "points_per_shape": n,
        "sigma": sigma,
    }));
    Ok(())
}

fn class_data(file: &DatasetFile, label: &str) -> Result<LabelledDataset, Failure> {
    Ok(file.labelled(Some(label))?.restricted(label)?)
}

fn loglik(config: &Path, data: &Path, class: &str) -> CmdResult {
    let cfg = io::load_config(config)?;
    let model = cfg.model(class)?;
    let file = io::read_dataset_file(data)?;
    let set = class_data(&file, class)?;
    let est = DatasetDraws::new(&set, &cfg.regulators, &cfg.mc)?.estimate(&model)?;
    eprintln!(
        "class {class}: loglik {:.4} ± {:.4} over {} shapes",
        est.loglik,
        est.std_err,
        set.len()
    );
    let g = model.aspect();
    print_json(&json!({
        "command": "loglik",
        "config_digest": cfg.digest(),
        "seed": est.seed,
        "class": class,
        "k": g.k,
        "theta": g.theta,
        "shapes": set.len(),
        "m_samples": est.m_samples,
        "loglik": est.loglik,
        "std_err": est.std_err,
    }));
    Ok(())
}

/// The class a single-class command applies to.
fn pick_class(cfg: &RunConfig, file: &DatasetFile, class: Option<&str>) -> Result<String, Failure> {
    if let Some(c) = class {
        cfg.model(c)?;
        return Ok(c.to_string());
    }
    let mut found: Vec<&str> = file.shapes.iter().filter_map(|r| r.label.as_deref()).collect();
    found.sort_unstable();
    found.dedup();
    match (found.as_slice(), cfg.classes.as_slice()) {
        ([one], _) => Ok(one.to_string()),
        ([], [only]) => Ok(only.label.clone()),
        _ => Err(usage("the data or config has several classes; pass --class")),
    }
}

fn surface(config: &Path, data: &Path, out: &Path, class: Option<&str>) -> CmdResult {
    let cfg = io::load_config(config)?;
    let grid = cfg.grid.clone().ok_or_else(|| usage("the config has no grid axes"))?;
    let file = io::read_dataset_file(data)?;
    let label = pick_class(&cfg, &file, class)?;
    let set = class_data(&file, &label)?;
    let draws = DatasetDraws::new(&set, &cfg.regulators, &cfg.mc)?;
    let s = surface_from_draws(&draws, &label, &grid.k, &grid.theta)?;
    let mut csv = String::new();
    writeln!(csv, "# config_digest={}", cfg.digest()).unwrap();
    writeln!(csv, "# seed={}", cfg.mc.seed).unwrap();
    writeln!(csv, "# class={label}").unwrap();
    csv.push_str("k,theta,loglik,std_err\n");
    for (i, k) in s.k_values.iter().enumerate() {
        for (j, t) in s.theta_values.iter().enumerate() {
            writeln!(csv, "{k},{t},{},{}", s.loglik[i][j], s.std_err[i][j]).unwrap();
        }
    }
    write_file(out, &csv)?;
    let (bi, bj) = s.argmax();
    eprintln!(
        "{}x{} surface for class {label} written to {}; maximum {:.4} at k={}, theta={}",
        s.k_values.len(),
        s.theta_values.len(),
        out.display(),
        s.loglik[bi][bj],
        s.k_values[bi],
        s.theta_values[bj]
    );
    Ok(())
}

fn fit(config: &Path, data: &Path, out: &Path, class: Option<&str>) -> CmdResult {
    let cfg = io::load_config(config)?;
    let file = io::read_dataset_file(data)?;
    let labels: Vec<String> = match class {
        Some(c) => vec![c.to_string()],
        None => {
            let mut l: Vec<String> = file.shapes.iter().filter_map(|r| r.label.clone()).collect();
            l.sort_unstable();
            l.dedup();
            if l.is_empty() {
                vec![pick_class(&cfg, &file, None)?]
            } else {
                l
            }
        }
    };
    let all_priors = cfg.priors();
    let prior_of = |label: &str| cfg.classes.iter().position(|c| c.label == label).map(|i| all_priors[i]);
    let total: f64 = labels.iter().filter_map(|l| prior_of(l)).sum();
    let mut models = Vec::new();
    for label in &labels {
        let init = cfg.model(label)?;
        let set = class_data(&file, label)?;
        let draws = DatasetDraws::new(&set, &cfg.regulators, &cfg.mc)?;
        let r = fit_from_draws(&draws, &init, &cfg.optimizer)?;
        let g = r.model.aspect();
        eprintln!(
            "class {label}: k={:.4} theta={:.4} (mean {:.4}), loglik {:.4} ± {:.4}, {} iterations{}",
            g.k,
            g.theta,
            g.mean(),
            r.final_loglik,
            r.final_std_err,
            r.iterations,
            if r.converged { "" } else { ", not converged" }
        );
        models.push(FittedModel {
            label: label.clone(),
            k: g.k,
            theta: g.theta,
            prior: prior_of(label).unwrap_or(0.0) / total,
            loglik: Some(r.final_loglik),
            std_err: Some(r.final_std_err),
            iterations: Some(r.iterations),
            converged: Some(r.converged),
        });
    }
    let m = ModelFile {
        schema_version: SCHEMA_VERSION,
        config_digest: cfg.digest(),
        seed: cfg.mc.seed,
        models,
    };
    io::save_models(out, &m)?;
    Ok(())
}

fn run_classify(config: &Path, data: &Path, models: &Path) -> CmdResult {
    let cfg = io::load_config(config)?;
    let file = io::read_dataset_file(data)?;
    let mf = io::load_models(models)?;
    let class_models = mf.class_models()?;
    let priors = mf.priors();
    let shapes = file.shapes()?;
    let mut results = Vec::new();
    let mut correct = 0;
    let mut labelled = 0;
    for (i, (rec, y)) in file.shapes.iter().zip(&shapes).enumerate() {
        let mc = shapelik::McConfig {
            seed: cfg.mc.shape_seed(i, y),
            ..cfg.mc
        };
        let post = classify(y, &class_models, &priors, &cfg.regulators, &mc)?;
        let best = post
            .iter()
            .fold(&post[0], |a, b| if b.1 > a.1 { b } else { a })
            .0
            .clone();
        if let Some(l) = &rec.label {
            labelled += 1;
            correct += usize::from(*l == best);
        }
        results.push(json!({
            "id": rec.id,
            "label": rec.label,
            "predicted": best,
            "seed": mc.seed,
            "log_posterior": post.iter().map(|(l, v)| json!({"class": l, "log_posterior": v})).collect::<Vec<_>>(),
        }));
    }
    if labelled > 0 {
        eprintln!("classified {} shapes; {correct} of {labelled} labelled shapes correct", shapes.len());
    } else {
        eprintln!("classified {} shapes", shapes.len());
    }
    print_json(&json!({
        "command": "classify",
        "config_digest": cfg.digest(),
        "seed": cfg.mc.seed,
        "results": results,
    }));
    Ok(())
}

fn validate(instances: usize, seed: u64) -> CmdResult {
    if instances == 0 {
        return Err(usage("--instances must be positive"));
    }
    let spec = QuadratureSpec::default();
    let mut rng = substream(seed, 0);
    let (mut g_abs, mut g_rel, mut s_abs, mut s_rel) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..instances {
        let inst = random_instance(&mut rng);
        let inputs = GroupMarginalInputs::new(inst.y.clone(), inst.beta_pts.clone(), inst.sigma, inst.regs)?;
        let closed = g_marginal_loglik(&inputs)?;
        let quad = quad_g_marginal(&inst.y, &inst.beta_pts, inst.sigma, &inst.regs, &spec)?;
        g_abs = g_abs.max((closed - quad).abs());
        g_rel = g_rel.max((closed - quad).abs() / quad.abs());
        let closed = sigma_marginal_loglik(&inst.y, &inst.beta_pts, &inst.regs)?;
        let quad = quad_sigma_marginal(&inst.y, &inst.beta_pts, &inst.regs, &spec)?;
        s_abs = s_abs.max((closed - quad).abs());
        s_rel = s_rel.max((closed - quad).abs() / quad.abs());
    }
    let pass = g_abs.max(g_rel) <= GROUP_TOL && s_abs.max(s_rel) <= SIGMA_TOL;
    eprintln!(
        "{instances} instances: group marginal max deviation {g_abs:.3e} abs, {g_rel:.3e} rel (tol {GROUP_TOL:e}), \
         sigma marginal max deviation {s_abs:.3e} abs, {s_rel:.3e} rel (tol {SIGMA_TOL:e}): {}",
        if pass { "ok" } else { "FAILED" }
    );
    print_json(&json!({
        "command": "validate",
        "seed": seed,
        "instances": instances,
        "group_max_abs_dev": g_abs,
        "group_max_rel_dev": g_rel,
        "sigma_max_abs_dev": s_abs,
        "sigma_max_rel_dev": s_rel,
        "pass": pass,
    }));
    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: 6,
            message: "oracle deviation above tolerance".into(),
        })
    }
}

fn run(cli: Cli) -> CmdResult {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("cannot start thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate { config, out, n, sigma } => simulate(&config, &out, n, sigma),
        Command::Loglik { config, data, class } => loglik(&config, &data, &class),
        Command::Surface { config, data, out, class } => surface(&config, &data, &out, class.as_deref()),
        Command::Fit { config, data, out, class } => fit(&config, &data, &out, class.as_deref()),
        Command::Classify { config, data, models } => run_classify(&config, &data, &models),
        Command::Validate { instances, seed } => validate(instances, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

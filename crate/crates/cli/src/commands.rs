use std::path::Path;

use folded_simplex::analysis::SimplexPca;
use folded_simplex::inference::{bootstrap_ci_alpha_with, bootstrap_test_alpha_with};
use folded_simplex::io::{read_compositions, read_matrix, write_compositions, write_contour, write_study};
use folded_simplex::{
    contour_grid, em_fit, fit_alpha_with, frechet_mean, loglik_alpha0, outside_probability,
    recovery_study, sample as draw, simplex_pca, AlphaSearch, BootstrapOptions, BootstrapStatistic,
    DataMatrix, FitResult, FoldedNormalParams, StudyConfig,
};
use serde::Serialize;

use crate::args::{
    CiArgs, CiMethod, ContourArgs, Dataset, FitArgs, Format, InputArgs, ModelArgs, OutsideArgs,
    Preset, SampleArgs, SearchArgs, Statistic, StudyArgs, TestArgs,
};
use crate::output::{emit, to_json, InputDigest};
use crate::CliError;

fn read_file(path: &Path, digest: &mut InputDigest) -> Result<Vec<u8>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    digest.update(&bytes);
    Ok(bytes)
}

fn load_data(args: &InputArgs, digest: &mut InputDigest) -> Result<DataMatrix, CliError> {
    if !args.delimiter.is_ascii() {
        return Err(CliError::Usage(format!("delimiter must be ASCII, got '{}'", args.delimiter)));
    }
    let data = match (&args.input, args.dataset) {
        (Some(path), _) => {
            let bytes = read_file(path, digest)?;
            read_compositions(bytes.as_slice(), args.delimiter as u8, !args.no_header, args.normalize)?
        }
        (None, Some(Dataset::ArcticLake)) => {
            let text = folded_simplex::datasets::arctic_lake_csv();
            digest.update(text.as_bytes());
            folded_simplex::datasets::arctic_lake()
        }
        (None, None) => return Err(CliError::Usage("one of --input or --dataset is required".into())),
    };
    if args.drop_rows.is_empty() {
        return Ok(data);
    }
    if args.drop_rows.contains(&0) {
        return Err(CliError::Usage("--drop-rows takes 1-based row numbers".into()));
    }
    let zero_based: Vec<usize> = args.drop_rows.iter().map(|r| r - 1).collect();
    Ok(data.drop_rows(&zero_based)?)
}

fn load_model(args: &ModelArgs, digest: &mut InputDigest) -> Result<FoldedNormalParams, CliError> {
    let bytes = read_file(&args.sigma, digest)?;
    let sigma = read_matrix(bytes.as_slice())? * args.kappa;
    let p = if args.alpha == 0.0 { 1.0 } else { 0.5 };
    Ok(FoldedNormalParams::new(args.alpha, p, args.mu.clone(), sigma)?)
}

fn search(args: &SearchArgs) -> Result<AlphaSearch, CliError> {
    Ok(AlphaSearch {
        refine: !args.no_refine,
        em_tol: args.tol,
        em_max_iter: args.max_iter,
        ..AlphaSearch::with_step(args.grid_step)?
    })
}

#[derive(Serialize)]
struct ProfilePoint {
    alpha: f64,
    log_likelihood: f64,
}

#[derive(Serialize)]
struct FitReport {
    alpha_hat: f64,
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    p: f64,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
    frechet_mean: Vec<f64>,
    n: usize,
    parts: usize,
    component_names: Vec<String>,
    profile: Vec<ProfilePoint>,
    dropped_rows: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pca: Option<SimplexPca>,
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let mut digest = InputDigest::default();
    let data = load_data(&args.input, &mut digest)?;
    let (fit, profile): (FitResult, Vec<(f64, f64)>) = match args.alpha {
        Some(0.0) => {
            let f = loglik_alpha0(&data)?;
            let ll = f.log_likelihood;
            (f, vec![(0.0, ll)])
        }
        Some(a) => {
            let f = em_fit(&data, a, args.search.tol, args.search.max_iter)?;
            let ll = f.log_likelihood;
            (f, vec![(a, ll)])
        }
        None => {
            let res = fit_alpha_with(&data, &search(&args.search)?)?;
            (res.best_fit, res.profile)
        }
    };
    let pca = match args.pca {
        Some(k) => Some(simplex_pca(&fit, k)?),
        None => None,
    };
    let theta = &fit.params;
    let sigma = theta.sigma();
    let report = FitReport {
        alpha_hat: theta.alpha(),
        mu: theta.mu().to_vec(),
        sigma: sigma.row_iter().map(|r| r.iter().copied().collect()).collect(),
        p: theta.p(),
        log_likelihood: fit.log_likelihood,
        iterations: fit.iterations,
        converged: fit.converged,
        frechet_mean: frechet_mean(&fit)?.parts().to_vec(),
        n: data.n_rows(),
        parts: data.parts(),
        component_names: data.component_names().to_vec(),
        profile: profile
            .into_iter()
            .map(|(alpha, log_likelihood)| ProfilePoint { alpha, log_likelihood })
            .collect(),
        dropped_rows: args.input.drop_rows.clone(),
        pca,
    };
    emit(args.output.output.as_deref(), &to_json(&report)?, "fit", args, None, digest)?;
    if !fit.converged {
        return Err(folded_simplex::Error::NotConverged(format!(
            "EM stopped after {} iterations",
            fit.iterations
        ))
        .into());
    }
    Ok(())
}

pub fn sample(args: &SampleArgs) -> Result<(), CliError> {
    let mut digest = InputDigest::default();
    let theta = load_model(&args.model, &mut digest)?;
    let data = draw(&theta, args.n, args.seed)?;
    let mut bytes = Vec::new();
    write_compositions(&mut bytes, &data)?;
    emit(args.output.output.as_deref(), &bytes, "sample", args, Some(args.seed), digest)
}

pub fn contour(args: &ContourArgs) -> Result<(), CliError> {
    let mut digest = InputDigest::default();
    let theta = load_model(&args.model, &mut digest)?;
    if theta.parts() != 3 {
        return Err(folded_simplex::Error::InvalidDimension(format!(
            "contours need 3 parts, the model has {}",
            theta.parts()
        ))
        .into());
    }
    let grid = contour_grid(&theta, args.resolution)?;
    let modes = grid.modes()?;
    eprintln!(
        "resolution {}: {} nodes, mass {:.4}, {} mode(s)",
        grid.resolution,
        grid.nodes.len(),
        grid.total_mass(),
        modes.len()
    );
    for m in &modes {
        eprintln!("  mode at ({:.4}, {:.4}, {:.4})", m.x[0], m.x[1], m.x[2]);
    }
    let mut bytes = Vec::new();
    write_contour(&mut bytes, &grid)?;
    emit(args.output.output.as_deref(), &bytes, "contour", args, None, digest)
}

pub fn outside(args: &OutsideArgs) -> Result<(), CliError> {
    let mut digest = InputDigest::default();
    let theta = load_model(&args.model, &mut digest)?;
    let out = outside_probability(&theta, args.draws, args.seed)?;
    emit(args.output.output.as_deref(), &to_json(&out)?, "outside", args, Some(args.seed), digest)
}

pub fn test(args: &TestArgs) -> Result<(), CliError> {
    let mut digest = InputDigest::default();
    let data = load_data(&args.input, &mut digest)?;
    let opts = BootstrapOptions {
        statistic: match args.statistic {
            Statistic::Alpha => BootstrapStatistic::Alpha,
            Statistic::Lr => BootstrapStatistic::LogLikelihoodRatio,
        },
        search: search(&args.search)?,
        ..BootstrapOptions::default()
    };
    let res = bootstrap_test_alpha_with(&data, args.b, args.seed, &opts)?;
    emit(args.output.output.as_deref(), &to_json(&res)?, "test", args, Some(args.seed), digest)
}

pub fn ci(args: &CiArgs) -> Result<(), CliError> {
    let mut digest = InputDigest::default();
    let data = load_data(&args.input, &mut digest)?;
    let bytes = match args.method {
        CiMethod::Percentile => {
            let opts = BootstrapOptions {
                search: search(&args.search)?,
                replicate_window: args.window,
                ..BootstrapOptions::default()
            };
            to_json(&bootstrap_ci_alpha_with(&data, args.b, args.level, args.seed, &opts)?)?
        }
        CiMethod::Curvature => to_json(&folded_simplex::curvature_ci_alpha(&data, args.level, args.step)?)?,
    };
    emit(args.output.output.as_deref(), &bytes, "ci", args, Some(args.seed), digest)
}

pub fn study(args: &StudyArgs) -> Result<(), CliError> {
    let mut digest = InputDigest::default();
    let mut cfg = match (args.preset, &args.config) {
        (_, Some(path)) => {
            let bytes = read_file(path, &mut digest)?;
            serde_json::from_slice::<StudyConfig>(&bytes).map_err(|e| {
                folded_simplex::Error::Parse {
                    row: e.line(),
                    column: e.column(),
                    message: e.to_string(),
                }
            })?
        }
        (Some(Preset::PaperDesk), None) => StudyConfig::paper_desk(),
        (Some(Preset::AlphaDesk), None) => StudyConfig::alpha_desk(),
        (None, None) => return Err(CliError::Usage("one of --preset or --config is required".into())),
    };
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let report = recovery_study(&cfg)?;
    let bytes = match args.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut b = Vec::new();
            write_study(&mut b, &report)?;
            b
        }
    };
    emit(args.output.output.as_deref(), &bytes, "study", args, Some(cfg.seed), digest)
}

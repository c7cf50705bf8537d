use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use pfo_core::baselines::{coordinate_dictionary, edmd_fit, ulam_matrix, Observable, UlamGrid};
use pfo_core::{
    ar1_covariance_sequence, averaged_monge_init, empirical_pushforward, fit_basis_empirical, fit_linear_gaussian,
    gaussian_pushforward_linear, monge_map_gaussian, sample_gaussian, solve_discrete_ot, uniform_grid_1d,
    uniform_random_1d, w2_gaussian, BasisFamily, BasisModel, DMatrix, DVector, EmpiricalMeasure, FitStatus, FitTrace,
    GaussianMeasure,
};

use crate::args::{BasisArg, Cli, Command, CommonArgs, DescentArgs, InitArg, OtMode, SamplingArg};
use crate::artifact::{Clock, RunArtifact};
use crate::config::{BasisSpec, DictionarySpec, ExperimentConfig, ExperimentKind, GaussianInit, Sampling};
use crate::error::CliError;
use crate::formats::{
    csv_bytes, empirical_snapshots_json, gaussian_snapshots_json, matrix_csv, matrix_from_rows, num, read_empirical_snapshots,
    read_gaussian_snapshots, read_measure, significant, write_atomic, Measure,
};
use crate::plotdata::{bin_range, ellipse, histogram, map_curve, ELLIPSE_LEVELS, HISTOGRAM_BINS};

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::SimulateAr1 { common, steps, noise_free } => simulate_ar1(&common, steps, noise_free, stdout),
        Command::FitGaussian {
            common,
            descent,
            snapshots,
            init,
            dump_iters,
        } => {
            let mut cfg = load_config(&common)?;
            apply_descent(&mut cfg, &descent)?;
            if snapshots.is_some() {
                cfg.snapshots_file = snapshots;
            }
            match init {
                Some(InitArg::Identity) => cfg.gaussian_init = GaussianInit::Identity,
                Some(InitArg::Average) => cfg.gaussian_init = GaussianInit::Average,
                None => {}
            }
            if let Some(d) = dump_iters {
                cfg.dump_iters = d;
            }
            fit_gaussian(cfg, stdout)
        }
        Command::FitEmpirical {
            common,
            descent,
            snapshots,
            basis,
            exponents,
            theta_init,
            grid_n,
            sampling,
            dump_iters,
        } => {
            let mut cfg = load_config(&common)?;
            apply_descent(&mut cfg, &descent)?;
            if snapshots.is_some() {
                cfg.snapshots_file = snapshots;
            }
            cfg.basis = match (basis, exponents) {
                (Some(BasisArg::Cubic), None) => BasisSpec::default(),
                (Some(BasisArg::Linear), None) => BasisSpec::Linear,
                (Some(BasisArg::Affine), None) => BasisSpec::Affine,
                (Some(BasisArg::Monomials) | None, Some(exponents)) => BasisSpec::Monomials { exponents },
                (Some(BasisArg::Monomials), None) => match cfg.basis {
                    BasisSpec::Monomials { .. } => cfg.basis,
                    _ => return Err(CliError::Usage("--basis monomials needs --exponents".into())),
                },
                (None, None) => cfg.basis,
                (Some(_), Some(_)) => return Err(CliError::Usage("--exponents only applies to --basis monomials".into())),
            };
            if theta_init.is_some() {
                cfg.theta_init = theta_init;
            }
            if let Some(n) = grid_n {
                cfg.cubic.points = n;
            }
            match sampling {
                Some(SamplingArg::Grid) => cfg.cubic.sampling = Sampling::Grid,
                Some(SamplingArg::Random) => cfg.cubic.sampling = Sampling::Random,
                None => {}
            }
            if let Some(d) = dump_iters {
                cfg.dump_iters = d;
            }
            fit_empirical(cfg, stdout)
        }
        Command::Ot {
            source,
            target,
            mode,
            samples,
            seed,
            out,
        } => ot(&source, &target, mode, samples, seed, out.as_deref(), stdout),
        Command::Ulam {
            common,
            boxes,
            samples_per_box,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(b) = boxes {
                cfg.ulam.boxes = b;
            }
            if let Some(k) = samples_per_box {
                cfg.ulam.samples_per_box = k;
            }
            ulam(cfg, stdout)
        }
        Command::Edmd { common, steps, degree } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = steps {
                cfg.edmd.steps = s;
            }
            if let Some(degree) = degree {
                cfg.edmd.dictionary = DictionarySpec::Polynomial { degree };
            }
            edmd(cfg, stdout)
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn apply_descent(cfg: &mut ExperimentConfig, args: &DescentArgs) -> Result<(), CliError> {
    let d = &mut cfg.descent;
    if let Some(alpha) = args.alpha {
        d.step = alpha;
    }
    if let Some(n) = args.max_iters {
        d.max_iters = n;
    }
    if let Some(tol) = args.grad_tol {
        d.grad_tol = tol;
    }
    if args.backtracking {
        d.backtracking.get_or_insert_with(Default::default);
    }
    if args.sum_pairs {
        d.average_pairs = false;
    }
    d.seed = cfg.seed;
    d.validate().map_err(|e| CliError::Usage(e.to_string()))
}

/// Independent stream seed derived from the master seed (splitmix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn usage(e: pfo_core::PfoError) -> CliError {
    CliError::Usage(e.to_string())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], artifact: &mut RunArtifact) -> Result<(), CliError> {
    write_atomic(&dir.join(name), bytes)?;
    artifact.files.push(name.to_string());
    Ok(())
}

/// Trace header: `iter,cost,grad_norm` followed by one column per parameter.
pub fn trace_header(param_names: &[String]) -> Vec<String> {
    let mut h = vec!["iter".to_string(), "cost".to_string(), "grad_norm".to_string()];
    h.extend(param_names.iter().cloned());
    h
}

pub fn matrix_param_names(d: usize) -> Vec<String> {
    let sep = if d >= 10 { "_" } else { "" };
    (1..=d).flat_map(|i| (1..=d).map(move |j| format!("a{i}{sep}{j}"))).collect()
}

pub fn theta_param_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("theta{i}")).collect()
}

fn trace_csv(trace: Option<&FitTrace>, names: &[String]) -> Vec<u8> {
    let header = trace_header(names);
    let rows = trace.into_iter().flat_map(|t| t.records.iter()).map(|r| {
        let mut row = vec![r.iter.to_string(), num(r.cost), num(r.grad_norm)];
        row.extend(r.params.iter().map(|&p| num(p)));
        row
    });
    csv_bytes(Some(&header), rows)
}

/// Requested dump iterations that exist in the trace, plus the final one.
fn selected_iters(requested: &[usize], trace: &FitTrace) -> Vec<usize> {
    let last = trace.last().iter;
    let mut sel: Vec<usize> = requested.iter().copied().filter(|&n| n <= last).collect();
    sel.push(last);
    sel.sort_unstable();
    sel.dedup();
    sel
}

fn finish(artifact: RunArtifact, trace: &FitTrace, dir: &Path, clock: &Clock, stdout: &mut dyn Write) -> Result<(), CliError> {
    let status = artifact.status.clone();
    artifact.write(dir, clock)?;
    let last = trace.last();
    let _ = writeln!(
        stdout,
        "{status} after {} iterations; cost {:.6e}; gradient norm {:.3e}; output in {}",
        last.iter,
        last.cost,
        last.grad_norm,
        dir.display()
    );
    match &trace.status {
        FitStatus::Error(reason) => Err(CliError::Numerical(reason.clone())),
        _ => Ok(()),
    }
}

fn simulate_ar1(common: &CommonArgs, steps: Option<usize>, noise_free: bool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = load_config(common)?;
    if let Some(s) = steps {
        cfg.ar1.steps = s;
    }
    if noise_free {
        let d = cfg.ar1.a0.len();
        cfg.ar1.noise_cov = vec![vec![0.0; d]; d];
    }
    let snapshots = ar1_covariance_sequence(&cfg.ar1.to_core()?).map_err(usage)?;
    let path = cfg.output_dir.join("snapshots.json");
    write_atomic(&path, gaussian_snapshots_json(&snapshots).as_bytes())?;
    let _ = writeln!(stdout, "wrote {} snapshots to {}", snapshots.len(), path.display());
    Ok(())
}

fn same_dimension(dims: impl IntoIterator<Item = usize>) -> Result<usize, CliError> {
    let mut it = dims.into_iter();
    let d = it.next().unwrap_or(0);
    match it.position(|x| x != d) {
        Some(k) => Err(CliError::Usage(format!("snapshot {} has a different dimension than snapshot 0", k + 1))),
        None => Ok(d),
    }
}

fn fit_gaussian(mut cfg: ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let clock = Clock::start();
    let gaussians = match &cfg.snapshots_file {
        Some(path) => {
            cfg.kind = ExperimentKind::Custom;
            read_gaussian_snapshots(path)?
        }
        None => {
            cfg.kind = ExperimentKind::Ar1Gaussian;
            ar1_covariance_sequence(&cfg.ar1.to_core()?).map_err(usage)?
        }
    };
    if gaussians.iter().any(|g| g.mean().iter().any(|&m| m != 0.0)) {
        return Err(CliError::Usage("linear Gaussian fits need zero-mean snapshots".into()));
    }
    let d = same_dimension(gaussians.iter().map(GaussianMeasure::dim))?;
    let covs: Vec<DMatrix<f64>> = gaussians.iter().map(|g| g.cov().clone()).collect();
    let explicit_init = match &cfg.gaussian_init {
        GaussianInit::Matrix(rows) => {
            let a = matrix_from_rows(rows, "gaussian_init")?;
            if a.shape() != (d, d) {
                return Err(CliError::Usage(format!("gaussian_init must be {d}x{d}")));
            }
            Some(a)
        }
        _ => None,
    };

    let dir = cfg.output_dir.clone();
    let names = matrix_param_names(d);
    let mut artifact = RunArtifact::new("fit-gaussian", &cfg, &clock);
    artifact.snapshots = gaussians.iter().map(Into::into).collect();
    write_file(&dir, "snapshots.json", gaussian_snapshots_json(&gaussians).as_bytes(), &mut artifact)?;

    let init = match (&cfg.gaussian_init, explicit_init) {
        (_, Some(a)) => Ok(a),
        (GaussianInit::Average, None) => averaged_monge_init(&covs),
        _ => Ok(DMatrix::identity(d, d)),
    };
    let fitted = init.and_then(|a| fit_linear_gaussian(&covs, &cfg.descent, &a));
    let trace = match fitted {
        Ok((_, trace)) => trace,
        Err(e) => {
            write_file(&dir, "trace.csv", &trace_csv(None, &names), &mut artifact)?;
            artifact.record_failure(&e.to_string());
            artifact.write(&dir, &clock)?;
            return Err(e.into());
        }
    };
    write_file(&dir, "trace.csv", &trace_csv(Some(&trace), &names), &mut artifact)?;
    if d == 2 {
        let bytes = ellipses_csv(&gaussians, &trace, &cfg.dump_iters)?;
        write_file(&dir, "ellipses.csv", &bytes, &mut artifact)?;
    }
    artifact.record_trace(&trace);
    finish(artifact, &trace, &dir, &clock, stdout)
}

pub const ELLIPSES_HEADER: [&str; 7] = ["iter", "pair", "series", "level", "point", "x", "y"];

fn ellipses_csv(gaussians: &[GaussianMeasure], trace: &FitTrace, dump: &[usize]) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    let mut push_rows = |n: usize, pair: usize, series: &str, g: &GaussianMeasure| -> Result<(), CliError> {
        for level in ELLIPSE_LEVELS {
            for (k, p) in ellipse(g, level)?.into_iter().enumerate() {
                rows.push(vec![n.to_string(), pair.to_string(), series.to_string(), num(level), k.to_string(), num(p[0]), num(p[1])]);
            }
        }
        Ok(())
    };
    for n in selected_iters(dump, trace) {
        let a = DMatrix::from_row_slice(2, 2, &trace.records[n].params);
        for pair in 0..gaussians.len() - 1 {
            // Iterates that no longer give a valid covariance are left out of the plot data.
            if let Ok(pushed) = gaussian_pushforward_linear(&gaussians[pair], &a) {
                push_rows(n, pair, "pushforward", &pushed)?;
            }
            push_rows(n, pair, "target", &gaussians[pair + 1])?;
        }
    }
    let header: Vec<String> = ELLIPSES_HEADER.iter().map(|s| s.to_string()).collect();
    Ok(csv_bytes(Some(&header), rows))
}

fn cubic_snapshots(cfg: &ExperimentConfig) -> Result<Vec<EmpiricalMeasure>, CliError> {
    let c = &cfg.cubic;
    if c.snapshots < 2 {
        return Err(CliError::Usage("cubic.snapshots must be at least 2".into()));
    }
    let first = match c.sampling {
        Sampling::Grid => uniform_grid_1d(c.points),
        Sampling::Random => uniform_random_1d(c.points, derive_seed(cfg.seed, 1)),
    }
    .map_err(usage)?;
    let k = c.coefficients;
    let mut snaps = vec![first];
    while snaps.len() < c.snapshots {
        let next = empirical_pushforward(snaps.last().unwrap(), |x| {
            x.map(|v| k[0] * (1.0 - v).powi(3) + k[1] * (1.0 - v) + k[2])
        })
        .map_err(usage)?;
        snaps.push(next);
    }
    Ok(snaps)
}

fn default_theta(family: &BasisFamily) -> Vec<f64> {
    match family {
        BasisFamily::ShiftedMonomials { exponents } if exponents[..] == [3, 1, 0] => vec![-2.0, 0.0, 2.0],
        _ => family
            .identity_params()
            .map(|t| t.iter().copied().collect())
            .unwrap_or_else(|| vec![0.0; family.n_params()]),
    }
}

fn fit_empirical(mut cfg: ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let clock = Clock::start();
    let snaps = match &cfg.snapshots_file {
        Some(path) => {
            cfg.kind = ExperimentKind::Custom;
            read_empirical_snapshots(path)?
        }
        None => {
            cfg.kind = ExperimentKind::CubicEmpirical;
            cubic_snapshots(&cfg)?
        }
    };
    let d = same_dimension(snaps.iter().map(EmpiricalMeasure::dim))?;
    let family = cfg.basis.family(d)?;
    let theta = cfg.theta_init.clone().unwrap_or_else(|| default_theta(&family));
    if theta.len() != family.n_params() {
        return Err(CliError::Usage(format!(
            "theta_init has {} entries, the {} basis has {} parameters",
            theta.len(),
            family.name(),
            family.n_params()
        )));
    }
    cfg.theta_init = Some(theta.clone());

    let dir = cfg.output_dir.clone();
    let names = theta_param_names(family.n_params());
    let mut artifact = RunArtifact::new("fit-empirical", &cfg, &clock);
    artifact.snapshots = snaps.iter().map(Into::into).collect();
    write_file(&dir, "snapshots.json", empirical_snapshots_json(&snaps).as_bytes(), &mut artifact)?;

    let trace = match fit_basis_empirical(&snaps, &family, &cfg.descent, &DVector::from_vec(theta)) {
        Ok((_, trace)) => trace,
        Err(e) => {
            write_file(&dir, "trace.csv", &trace_csv(None, &names), &mut artifact)?;
            artifact.record_failure(&e.to_string());
            artifact.write(&dir, &clock)?;
            return Err(e.into());
        }
    };
    write_file(&dir, "trace.csv", &trace_csv(Some(&trace), &names), &mut artifact)?;
    if d == 1 {
        let sel = selected_iters(&cfg.dump_iters, &trace);
        let models: Vec<(usize, BasisModel)> = sel
            .iter()
            .map(|&n| Ok((n, BasisModel::new(family.clone(), DVector::from_row_slice(&trace.records[n].params))?)))
            .collect::<Result<_, pfo_core::PfoError>>()?;
        write_file(&dir, "map_curves.csv", &map_curves_csv(&models), &mut artifact)?;
        write_file(&dir, "densities.csv", &densities_csv(&models, &snaps), &mut artifact)?;
    }
    artifact.record_trace(&trace);
    finish(artifact, &trace, &dir, &clock, stdout)
}

pub const MAP_CURVES_HEADER: [&str; 3] = ["iter", "x", "s"];
pub const DENSITIES_HEADER: [&str; 7] = ["iter", "pair", "bin", "left", "right", "pushforward", "target"];

fn map_curves_csv(models: &[(usize, BasisModel)]) -> Vec<u8> {
    let header: Vec<String> = MAP_CURVES_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = models
        .iter()
        .flat_map(|(n, m)| map_curve(m).into_iter().map(move |(x, s)| vec![n.to_string(), num(x), num(s)]));
    csv_bytes(Some(&header), rows)
}

fn densities_csv(models: &[(usize, BasisModel)], snaps: &[EmpiricalMeasure]) -> Vec<u8> {
    // Pushforwards that leave the reals (model blow-up) are omitted.
    let pushed: Vec<(usize, usize, EmpiricalMeasure)> = models
        .iter()
        .flat_map(|(n, model)| {
            (0..snaps.len() - 1).filter_map(move |pair| {
                empirical_pushforward(&snaps[pair], |x| model.eval(x))
                    .ok()
                    .map(|m| (*n, pair, m))
            })
        })
        .collect();
    let (lo, hi) = bin_range(pushed.iter().map(|p| &p.2).chain(snaps[1..].iter()));
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let targets: Vec<Vec<f64>> = snaps[1..].iter().map(|s| histogram(s, lo, hi)).collect();
    let header: Vec<String> = DENSITIES_HEADER.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (n, pair, m) in &pushed {
        let h = histogram(m, lo, hi);
        for b in 0..HISTOGRAM_BINS {
            let left = lo + width * b as f64;
            let right = if b + 1 == HISTOGRAM_BINS { hi } else { lo + width * (b + 1) as f64 };
            rows.push(vec![
                n.to_string(),
                pair.to_string(),
                b.to_string(),
                num(left),
                num(right),
                num(h[b]),
                num(targets[*pair][b]),
            ]);
        }
    }
    csv_bytes(Some(&header), rows)
}

fn ot(
    source: &Path,
    target: &Path,
    mode: Option<OtMode>,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let m0 = read_measure(source)?;
    let m1 = read_measure(target)?;
    if m0.dim() != m1.dim() {
        return Err(CliError::Usage(format!("measures have dimensions {} and {}", m0.dim(), m1.dim())));
    }
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let sample = |m: Measure, stream: u64| -> Result<EmpiricalMeasure, CliError> {
        match m {
            Measure::Empirical(e) => Ok(e),
            Measure::Gaussian(g) => Ok(sample_gaussian(&g, samples, derive_seed(seed, stream))?),
        }
    };
    let distance = match (m0, m1, mode) {
        (Measure::Gaussian(g0), Measure::Gaussian(g1), None | Some(OtMode::ClosedForm)) => {
            let w = w2_gaussian(&g0, &g1)?;
            if let Some(dir) = out {
                let map = monge_map_gaussian(&g0, &g1)?;
                let d = g0.dim();
                let joined = DMatrix::from_fn(d, d + 1, |i, j| if j < d { map.matrix[(i, j)] } else { map.offset[i] });
                write_atomic(&dir.join("monge_map.csv"), &matrix_csv(&joined))?;
            }
            w
        }
        (_, _, Some(OtMode::ClosedForm)) => {
            return Err(CliError::Usage("closed-form mode needs two Gaussian measures".into()));
        }
        (m0, m1, _) => {
            let e0 = sample(m0, 1)?;
            let e1 = sample(m1, 2)?;
            let coupling = solve_discrete_ot(&e0, &e1)?;
            if let Some(dir) = out {
                let header = vec!["row".to_string(), "col".to_string(), "mass".to_string()];
                let rows = coupling
                    .entries()
                    .iter()
                    .map(|&(i, j, m)| vec![i.to_string(), j.to_string(), num(m)]);
                write_atomic(&dir.join("coupling.csv"), &csv_bytes(Some(&header), rows))?;
            }
            coupling.cost().max(0.0).sqrt()
        }
    };
    let _ = writeln!(stdout, "{}", significant(distance, 12));
    Ok(())
}

fn ulam(cfg: ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let clock = Clock::start();
    let u = &cfg.ulam;
    let grid = UlamGrid::new(u.lower.clone(), u.upper.clone(), u.boxes.clone()).map_err(usage)?;
    if let Some(d) = u.map.dim() {
        if d != grid.dim() {
            return Err(CliError::Usage(format!("map dimension {d} does not match the {}-dimensional grid", grid.dim())));
        }
    }
    let map = u.map.build()?;
    if u.samples_per_box == 0 {
        return Err(CliError::Usage("samples_per_box must be positive".into()));
    }
    let result = ulam_matrix(map, &grid, u.samples_per_box, cfg.seed)?;
    let dir = cfg.output_dir.clone();
    let mut artifact = RunArtifact::new("ulam", &cfg, &clock);
    write_file(&dir, "ulam_matrix.csv", &matrix_csv(&result.probs), &mut artifact)?;
    let header = vec!["box".to_string(), "escape".to_string()];
    let rows = result.escape.iter().enumerate().map(|(i, &e)| vec![i.to_string(), num(e)]);
    write_file(&dir, "ulam_escape.csv", &csv_bytes(Some(&header), rows), &mut artifact)?;
    artifact.details = serde_json::json!({ "boxes": grid.n_boxes(), "escaped_mass": result.escape.iter().sum::<f64>() });
    artifact.write(&dir, &clock)?;
    let _ = writeln!(stdout, "{} boxes; output in {}", grid.n_boxes(), dir.display());
    Ok(())
}

/// Exponent tuples of all monomials in `d` variables with total degree at
/// most `degree`, ordered by degree.
pub fn monomial_exponents(d: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, d: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == d {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for p in (0..=left).rev() {
            prefix.push(p);
            fill(prefix, d, left - p, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree {
        fill(&mut Vec::new(), d, total, &mut out);
    }
    out
}

fn edmd(cfg: ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let clock = Clock::start();
    let e = &cfg.edmd;
    let d = e.x0.len();
    if d == 0 {
        return Err(CliError::Usage("edmd.x0 must not be empty".into()));
    }
    if let Some(md) = e.map.dim() {
        if md != d {
            return Err(CliError::Usage(format!("map dimension {md} does not match x0 of length {d}")));
        }
    }
    if e.steps < 2 {
        return Err(CliError::Usage("edmd.steps must be at least 2".into()));
    }
    let map = e.map.build()?;
    let mut traj = vec![DVector::from_vec(e.x0.clone())];
    while traj.len() < e.steps {
        let next = map(traj.last().unwrap());
        traj.push(next);
    }
    let dictionary: Vec<Observable> = match e.dictionary {
        DictionarySpec::Coordinates => coordinate_dictionary(d),
        DictionarySpec::Polynomial { degree } => monomial_exponents(d, degree)
            .into_iter()
            .map(|p| Box::new(move |x: &DVector<f64>| p.iter().enumerate().map(|(i, &k)| x[i].powi(k as i32)).product()) as Observable)
            .collect(),
    };
    let fit = edmd_fit(&traj, &dictionary)?;
    let dir = cfg.output_dir.clone();
    let mut artifact = RunArtifact::new("edmd", &cfg, &clock);
    write_file(&dir, "edmd_operator.csv", &matrix_csv(&fit.operator), &mut artifact)?;
    artifact.details = serde_json::json!({ "rank": fit.rank, "rank_deficient": fit.is_rank_deficient() });
    artifact.write(&dir, &clock)?;
    let _ = writeln!(stdout, "dictionary of {} functions, rank {}; output in {}", dictionary.len(), fit.rank, dir.display());
    Ok(())
}

pub fn output_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let artifact = RunArtifact::load(&dir.join("run.json"))?;
    Ok(artifact.files.iter().map(|f| dir.join(f)).collect())
}

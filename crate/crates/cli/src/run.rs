use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lyapsize::audit::monotonicity_audit;
use lyapsize::dynamics::{search_rho, NeighborhoodSpec, SystemSpec};
use lyapsize::expansivity::{check_cw_expansive, check_expansive_pairs, Chain, ExpansivityReport, PairState, Verdict};
use lyapsize::hyperspace::{hausdorff_distance, whitney_size, SizeConfig};
use lyapsize::lyapunov::{
    AsymptoticLyapunov, DiscreteLyapunov, IsolatedSetLyapunov, LyapOptions, LyapunovReport, SingularityLyapunov,
};
use lyapsize::metric::{points_from_csv, AmbientSpace, Point, PointSet};
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};
use crate::sampling::{offset, points_where, rng};
use crate::{CliError, EXIT_COUNTEREXAMPLE, EXIT_OK, EXIT_VIOLATIONS};

/// Exit code, text for stdout, and the files written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

/// The `summary.json` written by the `lyap` modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapSummary {
    pub violations: usize,
    pub max_violation: Option<f64>,
    pub tol: f64,
    pub mesh: f64,
    pub depth: usize,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(self.dir).map_err(|e| CliError::io(self.dir, e))?;
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }
}

fn read_rows(path: &Path) -> Result<Vec<Point<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows = points_from_csv(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    if rows.is_empty() {
        return Err(CliError::Parse { path: path.to_path_buf(), message: "no rows".into() });
    }
    Ok(rows)
}

/// Smallest integer-cornered box holding every point, for point sets given without a system.
fn enclosing_box(sets: &[Vec<Point<f64>>]) -> Result<AmbientSpace<f64>, CliError> {
    let dim = sets[0][0].len();
    let mut lower = vec![f64::INFINITY; dim];
    let mut upper = vec![f64::NEG_INFINITY; dim];
    for p in sets.iter().flatten() {
        if p.len() != dim {
            return Err(CliError::Config("input point sets have different dimensions".into()));
        }
        for (i, &c) in p.iter().enumerate() {
            lower[i] = lower[i].min(c.floor());
            upper[i] = upper[i].max(c.ceil());
        }
    }
    for (lo, hi) in lower.iter().zip(upper.iter_mut()) {
        if *hi <= *lo {
            *hi = *lo + 1.0;
        }
    }
    Ok(AmbientSpace::euclidean_box(lower, upper)?)
}

fn load_sets(cfg: &RunConfig, n: usize) -> Result<(AmbientSpace<f64>, Vec<PointSet<f64>>), CliError> {
    let rows = cfg.io.inputs[..n].iter().map(|p| read_rows(p)).collect::<Result<Vec<_>, _>>()?;
    let space = match &cfg.system {
        Some(_) => cfg.build_system()?.space().clone(),
        None => enclosing_box(&rows)?,
    };
    let sets = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| PointSet::in_space(r, cfg.mesh(i), &space))
        .collect::<lyapsize::Result<Vec<_>>>()?;
    Ok((space, sets))
}

fn run_size(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (space, sets) = load_sets(cfg, 1)?;
    let scfg = SizeConfig::new(space, cfg.mu.depth)?;
    let s = whitney_size(&sets[0], &scfg);
    Ok(Outcome { code: EXIT_OK, stdout: format!("{},{}\n", s.value, s.tail_bound), files: Vec::new() })
}

fn run_hausdorff(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (space, sets) = load_sets(cfg, 2)?;
    let d = hausdorff_distance(&space, &sets[0], &sets[1])?;
    // sampled sets are within their meshes of the sets they stand for
    let bound = sets[0].mesh() + sets[1].mesh();
    Ok(Outcome { code: EXIT_OK, stdout: format!("{d},{bound}\n"), files: Vec::new() })
}

fn opt_cell(v: Option<&Vec<f64>>, i: usize) -> String {
    v.map(|v| v[i].to_string()).unwrap_or_default()
}

fn lyap_csv(r: &LyapunovReport<f64>) -> String {
    let mut s = String::from("t,V,mu_plus,mu_minus\n");
    for i in 0..r.values.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.params[i],
            r.values[i],
            opt_cell(r.mu_plus.as_ref(), i),
            opt_cell(r.mu_minus.as_ref(), i)
        );
    }
    s
}

fn starts(
    cfg: &RunConfig,
    space: &AmbientSpace<f64>,
    keep: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Point<f64>>, CliError> {
    let mut out = cfg.sampling.starts.clone();
    for x in &out {
        space.check(x)?;
    }
    let mut rng = rng(cfg.seed);
    out.extend(points_where(&mut rng, space, cfg.sampling.count, keep)?);
    Ok(out)
}

fn run_lyap(cfg: &RunConfig, w: &mut Writer<'_>, quiet: bool) -> Result<Outcome, CliError> {
    let sys = cfg.build_system()?;
    let nb = cfg.neighborhood.as_ref().expect("validated");
    let p = match (&nb.p, sys.rest_point()) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => p,
        (None, None) => return Err(CliError::Config("`neighborhood.p` is required: the system has no rest point".into())),
    };
    let scfg = SizeConfig::new(sys.space().clone(), cfg.mu.depth)?;
    let opts = LyapOptions {
        grid: cfg.audit.grid,
        horizon: cfg.audit.horizon,
        eps_stop: cfg.integrate.eps_stop,
        floor: cfg.audit.floor,
        tol: cfg.audit.tol,
    };
    let t_max = cfg.integrate.t_max;
    let floor = cfg.audit.floor;
    let space = sys.space().clone();
    let far = |x: &[f64]| space.dist(x, &p) >= floor;

    let reports: Vec<LyapunovReport<f64>> = match cfg.mode {
        Mode::LyapAsymptotic => {
            let a = AsymptoticLyapunov::new(sys.clone(), p.clone(), nb.r, &scfg, opts)?;
            let xs = starts(cfg, &space, |x| a.contains(x) && far(x))?;
            xs.iter().map(|x| a.audit(x, t_max)).collect::<lyapsize::Result<_>>()?
        }
        Mode::LyapSingularity => {
            let spec = match nb.rho {
                Some(rho) => NeighborhoodSpec::new(p.clone(), nb.r, rho)?,
                None => search_rho(&sys, p.clone(), nb.r, cfg.audit.grid, cfg.audit.horizon, 8)?.0.spec().clone(),
            };
            let s = SingularityLyapunov::new(sys.clone(), spec, &scfg, opts)?;
            let xs = starts(cfg, &space, |x| s.contains(x) && far(x))?;
            xs.iter().map(|x| s.audit(x, t_max)).collect::<lyapsize::Result<_>>()?
        }
        Mode::LyapIsolated => {
            let lambda = PointSet::in_space(read_rows(&cfg.io.inputs[0])?, cfg.mesh(0), &space)?;
            let rho = nb.rho.expect("validated");
            let iso = IsolatedSetLyapunov::new(&sys, &lambda, nb.r, rho, &scfg, &opts)?;
            let xs = starts(cfg, &space, |x| iso.contains(x) && space.dist_to_set(x, lambda.points()) >= floor)?;
            xs.iter().map(|x| iso.audit(x, t_max)).collect::<lyapsize::Result<_>>()?
        }
        Mode::LyapDiscrete => {
            let lambda = match cfg.io.inputs.first() {
                Some(path) => PointSet::in_space(read_rows(path)?, cfg.mesh(0), &space)?,
                None => PointSet::singleton(p.clone()),
            };
            let spec = NeighborhoodSpec::new(p.clone(), nb.r, nb.rho.expect("validated"))?;
            let d = DiscreteLyapunov::new(&sys, &lambda, &spec, &scfg, &opts)?;
            let xs = starts(cfg, &space, |x| d.contains(x) && space.dist_to_set(x, lambda.points()) >= floor)?;
            xs.iter().map(|x| d.audit(x, t_max)).collect::<lyapsize::Result<_>>()?
        }
        other => unreachable!("{} is not a lyap mode", other.name()),
    };

    let mut stdout = String::new();
    for (i, r) in reports.iter().enumerate() {
        w.write(&format!("lyap_{i:03}.csv"), &lyap_csv(r))?;
        if !quiet {
            let _ = writeln!(stdout, "start {i}: {} samples, {} violations", r.values.len(), r.violations.len());
        }
    }
    let summary = LyapSummary {
        violations: reports.iter().map(|r| r.violations.len()).sum(),
        max_violation: reports.iter().filter_map(|r| r.max_violation()).reduce(f64::max),
        tol: reports.first().map_or_else(|| opts_tol(cfg, &scfg), |r| r.tol),
        mesh: reports.iter().map(|r| r.mesh).fold(0.0, f64::max),
        depth: cfg.mu.depth,
    };
    let json = serde_json::to_string(&summary).expect("summary serializes");
    w.write("summary.json", &format!("{json}\n"))?;
    if !quiet {
        let _ = writeln!(stdout, "{json}");
    }
    let code = if summary.violations > 0 { EXIT_VIOLATIONS } else { EXIT_OK };
    Ok(Outcome { code, stdout, files: Vec::new() })
}

fn opts_tol(cfg: &RunConfig, scfg: &SizeConfig<f64>) -> f64 {
    cfg.audit.tol.unwrap_or_else(|| lyapsize::audit::default_tol(scfg))
}

fn wrapped(space: &AmbientSpace<f64>, mut x: Point<f64>) -> Point<f64> {
    space.normalize(&mut x);
    x
}

fn read_pairs(path: &Path, sys: &SystemSpec<f64>) -> Result<Vec<PairState<f64>>, CliError> {
    let dim = sys.dim();
    read_rows(path)?
        .into_iter()
        .map(|row| {
            if row.len() != 2 * dim {
                return Err(CliError::Parse { path: path.to_path_buf(), message: format!("pair rows need {} columns", 2 * dim) });
            }
            Ok(PairState::new(sys.space(), row[..dim].to_vec(), row[dim..].to_vec())?)
        })
        .collect()
}

fn read_chains(path: &Path, sys: &SystemSpec<f64>, eps: f64) -> Result<Vec<Chain<f64>>, CliError> {
    let dim = sys.dim();
    let bad = |message: String| CliError::Parse { path: path.to_path_buf(), message };
    let mut groups: Vec<(f64, Vec<Point<f64>>)> = Vec::new();
    for row in read_rows(path)? {
        if row.len() != dim + 1 {
            return Err(bad(format!("chain rows need an id and {dim} coordinates")));
        }
        let id = row[0];
        match groups.iter_mut().find(|(g, _)| *g == id) {
            Some((_, pts)) => pts.push(row[1..].to_vec()),
            None => groups.push((id, vec![row[1..].to_vec()])),
        }
    }
    groups
        .into_iter()
        .map(|(id, pts)| match <[Point<f64>; 2]>::try_from(pts) {
            Ok([a, b]) => Ok(Chain::segment(a, b, eps)?),
            Err(_) => Err(bad(format!("chain {id} needs exactly two endpoint rows"))),
        })
        .collect()
}

fn expansive_outputs(report: &ExpansivityReport<f64>, w: &mut Writer<'_>, quiet: bool) -> Result<Outcome, CliError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    w.write("expansive.json", &format!("{json}\n"))?;
    let mut csv = String::from("index,n\n");
    for (i, n) in report.first_separation.iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", n.map(|n| n.to_string()).unwrap_or_default());
    }
    w.write("first_separation.csv", &csv)?;
    let (code, name) = match report.verdict {
        Verdict::SeparatedAtHorizon => (EXIT_OK, "separated-at-horizon"),
        Verdict::Counterexample => (EXIT_COUNTEREXAMPLE, "counterexample"),
        Verdict::Inconclusive => (EXIT_VIOLATIONS, "inconclusive"),
    };
    let stdout = if quiet { String::new() } else { format!("{name}\n") };
    Ok(Outcome { code, stdout, files: Vec::new() })
}

fn run_expansive(cfg: &RunConfig, w: &mut Writer<'_>, quiet: bool) -> Result<Outcome, CliError> {
    let sys = cfg.build_system()?;
    let space = sys.space();
    let e = &cfg.expansive;
    let s = &cfg.sampling;
    let mut rng = rng(cfg.seed);
    let report = if cfg.mode == Mode::Expansive {
        let mut pairs = match cfg.io.inputs.first() {
            Some(path) => read_pairs(path, &sys)?,
            None => Vec::new(),
        };
        for x in points_where(&mut rng, space, s.count, |_| true)? {
            let d = offset(&mut rng, sys.dim(), s.offset_min, s.offset_max);
            let y = wrapped(space, x.iter().zip(&d).map(|(a, b)| a + b).collect());
            pairs.push(PairState::new(space, x, y)?);
        }
        check_expansive_pairs(&sys, e.delta, e.horizon, &pairs)?
    } else {
        let mut chains = match cfg.io.inputs.first() {
            Some(path) => read_chains(path, &sys, e.eps_chain)?,
            None => Vec::new(),
        };
        for x in points_where(&mut rng, space, s.count, |_| true)? {
            let d = offset(&mut rng, sys.dim(), s.offset_min, s.offset_max);
            let y = x.iter().zip(&d).map(|(a, b)| a + b).collect();
            chains.push(Chain::segment(x, y, e.eps_chain)?);
        }
        check_cw_expansive(&sys, e.delta, e.horizon, &chains)?
    };
    expansive_outputs(&report, w, quiet)
}

#[derive(Serialize)]
struct AuditOutput {
    violations: Vec<usize>,
    tol: f64,
}

fn run_audit(cfg: &RunConfig, w: &mut Writer<'_>, quiet: bool) -> Result<Outcome, CliError> {
    let path = &cfg.io.inputs[0];
    let rows = read_rows(path)?;
    if rows[0].len() != 2 {
        return Err(CliError::Parse { path: path.clone(), message: "series rows are `param,V`".into() });
    }
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let tol = cfg.audit.tol.unwrap_or(lyapsize::audit::BASE_TOL);
    let violations = monotonicity_audit(&series, tol)?;
    let json = serde_json::to_string(&AuditOutput { violations: violations.clone(), tol }).expect("audit serializes");
    w.write("audit.json", &format!("{json}\n"))?;
    let stdout = if quiet { String::new() } else { format!("{json}\n") };
    let code = if violations.is_empty() { EXIT_OK } else { EXIT_VIOLATIONS };
    Ok(Outcome { code, stdout, files: Vec::new() })
}

/// Run a validated config, writing artifacts under `out_dir`.
pub fn run_config(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut w = Writer { dir: out_dir, files: Vec::new() };
    let mut outcome = match cfg.mode {
        Mode::Size => run_size(cfg)?,
        Mode::Hausdorff => run_hausdorff(cfg)?,
        Mode::Expansive | Mode::CwExpansive => run_expansive(cfg, &mut w, quiet)?,
        Mode::Audit => run_audit(cfg, &mut w, quiet)?,
        _ => run_lyap(cfg, &mut w, quiet)?,
    };
    outcome.files = w.files;
    Ok(outcome)
}

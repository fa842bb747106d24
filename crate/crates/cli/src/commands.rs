//! The five subcommands and the sweep driver. Each command reads a finished
//! [`RunConfig`], writes its CSV/SVG artifacts under `cfg.out`, and prints
//! one report block (a single `print!` so sweep workers do not shred each
//! other's output). Numerics are deterministic; reruns produce byte-identical
//! tables.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use mems4_core::branch::{certify, continue_branch, Branch, ContinuationOptions};
use mems4_core::evolution::{self, EvolveOptions, Verdict};
use mems4_core::validate::{run_suite, suite_passes, Status};
use mems4_core::{assemble_a, principal_eigen, ModelParams, OmegaProfile, RadialField, RadialGrid};

use crate::config::RunConfig;
use crate::svg::{line_plot, write_plot, Series};
use crate::table::{write_table, CsvTable};
use crate::Failure;

pub type Runner = fn(&RunConfig) -> Result<(), Failure>;

pub fn ensure_out_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))
}

fn continuation_options(cfg: &RunConfig) -> ContinuationOptions {
    ContinuationOptions {
        newton_tol: cfg.newton_tol,
        ds_min: cfg.ds_min,
        ds_max: cfg.ds_max,
        lambda_stop: cfg.lambda_stop,
        eps_min: cfg.eps_min,
        eig_tol: cfg.eig_tol,
        fold_tol: cfg.fold_tol,
        ..ContinuationOptions::default()
    }
}

fn params(cfg: &RunConfig) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(cfg.dim, cfg.bending, cfg.tension, cfg.lambda, cfg.gamma)?)
}

/// branch.csv, branch.svg, final_profile.csv from a traced branch.
fn write_branch_outputs(cfg: &RunConfig, branch: &Branch) -> Result<(), Failure> {
    let mut table = CsvTable::new(&["s", "lambda", "u_center", "mu1", "newton_iters", "cert_flags"]);
    let mut lam = Vec::with_capacity(branch.points.len());
    let mut amp = Vec::with_capacity(branch.points.len());
    for p in &branch.points {
        let cert = certify(&p.u, p.lambda, branch.m1, &branch.phi1, p.mu1)?;
        table.push(vec![
            p.s,
            p.lambda,
            p.u.values()[0],
            p.mu1,
            p.newton_iters as f64,
            cert.flags as f64,
        ]);
        lam.push(p.lambda);
        amp.push(p.u.values()[0].abs());
    }
    write_table(&cfg.out, "branch.csv", &table)?;
    let plot = line_plot(
        "stationary branch",
        "lambda",
        "sup |u| = |u(0)|",
        &[Series { label: "branch", x: &lam, y: &amp }],
    );
    write_plot(&cfg.out, "branch.svg", &plot)?;

    let last = branch.points.last().expect("branch holds the trivial point");
    let mut profile = CsvTable::new(&["r", "u"]);
    for (&r, &u) in last.u.grid().nodes().iter().zip(last.u.values()) {
        profile.push(vec![r, u]);
    }
    write_table(&cfg.out, "final_profile.csv", &profile)
}

fn fold_report(rep: &mut String, branch: &Branch) {
    if let Some(f) = &branch.fold {
        writeln!(rep, "lambda_star: {}", f.lambda_star).unwrap();
        writeln!(rep, "u_star_center: {}", f.u_star.values()[0]).unwrap();
        writeln!(rep, "mu1_star: {}", f.mu1_star).unwrap();
        writeln!(
            rep,
            "curvature: {} ({})",
            f.curvature,
            if f.curvature < 0.0 { "negative: lambda is locally maximal at the fold" } else { "unexpected sign" }
        )
        .unwrap();
        writeln!(rep, "lambda_star_below_m1: {}", f.lambda_star < branch.m1).unwrap();
    } else {
        writeln!(rep, "fold: none located").unwrap();
    }
}

pub fn cmd_continue(cfg: &RunConfig) -> Result<(), Failure> {
    ensure_out_dir(&cfg.out)?;
    let grid = RadialGrid::new(cfg.dim, cfg.n)?;
    let p = params(cfg)?;
    let branch = continue_branch(&grid, &p, &continuation_options(cfg))?;
    write_branch_outputs(cfg, &branch)?;

    let mut rep = String::new();
    writeln!(rep, "points: {}", branch.points.len()).unwrap();
    writeln!(rep, "m1: {}", branch.m1).unwrap();
    writeln!(rep, "termination: {}", branch.termination.as_str()).unwrap();
    let last = branch.points.last().unwrap();
    writeln!(rep, "last_point: lambda = {}, u(0) = {}, mu1 = {}", last.lambda, last.u.values()[0], last.mu1).unwrap();
    fold_report(&mut rep, &branch);
    print!("{rep}");

    if let Some(f) = &branch.fold {
        if cfg.lambda_stop >= f.lambda_star {
            return Err(Failure::Config(format!(
                "empty run: lambda_stop = {} is not below lambda_star = {}, so the requested branch window past the fold is empty (outputs up to the fold were still written)",
                cfg.lambda_stop, f.lambda_star
            )));
        }
    }
    if branch.termination == mems4_core::Termination::Stalled {
        return Err(Failure::Solver(format!(
            "continuation stalled at lambda = {} after {} points; partial branch written to {}",
            last.lambda,
            branch.points.len(),
            cfg.out.display()
        )));
    }
    Ok(())
}

pub fn cmd_lambda_star(cfg: &RunConfig) -> Result<(), Failure> {
    ensure_out_dir(&cfg.out)?;
    let grid = RadialGrid::new(cfg.dim, cfg.n)?;
    let p = params(cfg)?;
    let branch = continue_branch(&grid, &p, &continuation_options(cfg))?;
    let fold = branch.fold.as_ref().ok_or_else(|| {
        Failure::Solver(format!(
            "no fold located: continuation terminated {} after {} points",
            branch.termination.as_str(),
            branch.points.len()
        ))
    })?;

    let mut rep = String::new();
    writeln!(rep, "n: {}", cfg.n).unwrap();
    writeln!(rep, "m1: {}", branch.m1).unwrap();
    fold_report(&mut rep, &branch);

    let mut table = CsvTable::new(&["n", "lambda_star", "u_center", "mu1_star", "curvature"]);
    table.push(vec![
        cfg.n as f64,
        fold.lambda_star,
        fold.u_star.values()[0],
        fold.mu1_star,
        fold.curvature,
    ]);

    if cfg.refine {
        // A halved grid spacing re-brackets the fold; the drift between the
        // two locations is the practical discretization error bar.
        let n2 = 2 * cfg.n;
        let grid2 = RadialGrid::new(cfg.dim, n2)?;
        let mut opts = continuation_options(cfg);
        // the tail below the fold is not needed for the fold itself
        opts.lambda_stop = opts.lambda_stop.max(0.5 * fold.lambda_star);
        let fine = continue_branch(&grid2, &p, &opts)?;
        let ffold = fine.fold.as_ref().ok_or_else(|| {
            Failure::Solver(format!("refinement at n = {n2} lost the fold ({})", fine.termination.as_str()))
        })?;
        let delta = (ffold.lambda_star - fold.lambda_star).abs();
        writeln!(rep, "refined_n: {n2}").unwrap();
        writeln!(rep, "refined_lambda_star: {}", ffold.lambda_star).unwrap();
        writeln!(rep, "refinement_delta: {delta}").unwrap();
        writeln!(rep, "refinement_delta_rel: {}", delta / ffold.lambda_star).unwrap();
        table.push(vec![
            n2 as f64,
            ffold.lambda_star,
            ffold.u_star.values()[0],
            ffold.mu1_star,
            ffold.curvature,
        ]);
    }

    write_table(&cfg.out, "fold.csv", &table)?;
    print!("{rep}");
    Ok(())
}

pub fn cmd_endpoint(cfg: &RunConfig) -> Result<(), Failure> {
    ensure_out_dir(&cfg.out)?;
    let profile = OmegaProfile::new(cfg.dim, cfg.bending, cfg.tension)?;
    let mut table = CsvTable::new(&["r", "omega"]);
    let mut rs = Vec::with_capacity(1001);
    let mut ws = Vec::with_capacity(1001);
    for k in 0..=1000 {
        let r = k as f64 / 1000.0;
        let w = profile.eval(r);
        table.push(vec![r, w]);
        rs.push(r);
        ws.push(w);
    }
    write_table(&cfg.out, "omega.csv", &table)?;
    let plot = line_plot(
        "touchdown endpoint profile",
        "r",
        "omega(r)",
        &[Series { label: "omega", x: &rs, y: &ws }],
    );
    write_plot(&cfg.out, "omega.svg", &plot)?;

    let mut rep = String::new();
    writeln!(rep, "mu: {}", profile.mu()).unwrap();
    writeln!(rep, "omega_center: {}", profile.eval(0.0)).unwrap();
    writeln!(rep, "omega_wall: {}", profile.eval(1.0)).unwrap();
    writeln!(rep, "omega_wall_slope: {}", profile.eval_deriv(1.0)).unwrap();

    if let Some(path) = &cfg.branch {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let t = CsvTable::parse(&text)?;
        let r = t.column("r")?;
        let u = t.column("u")?;
        if r.is_empty() {
            return Err(Failure::Config(format!("{}: no profile rows", path.display())));
        }
        let mut gap = 0.0f64;
        for (&ri, &ui) in r.iter().zip(&u) {
            if !(0.0..=1.0).contains(&ri) {
                return Err(Failure::Config(format!("{}: radius {ri} outside [0, 1]", path.display())));
            }
            gap = gap.max((ui - profile.eval(ri)).abs());
        }
        writeln!(rep, "profile: {}", path.display()).unwrap();
        writeln!(rep, "endpoint_gap: {gap}").unwrap();
    }
    print!("{rep}");
    Ok(())
}

/// Initial data for `evolve` per `cfg.data`: `zero`, `phi1:<alpha>` for a
/// scaled bare principal mode, or `file:<path>` for an `r,u` table on the run
/// grid (clamped: the wall value must vanish to 1e-12 and is then snapped).
fn initial_data(cfg: &RunConfig, grid: &Arc<RadialGrid>) -> Result<RadialField, Failure> {
    let spec = cfg.data.as_str();
    if spec == "zero" {
        return Ok(RadialField::zeros(Arc::clone(grid)));
    }
    if let Some(alpha) = spec.strip_prefix("phi1:") {
        let alpha: f64 = alpha
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("bad amplitude in data = {spec:?}")))?;
        let op = assemble_a(grid, cfg.bending, cfg.tension)?;
        let pair = principal_eigen(&op, 0.0, cfg.eig_tol)?;
        let mut u = pair.vector;
        u.scale(alpha);
        return Ok(u);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let path = Path::new(path.trim());
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let t = CsvTable::parse(&text)?;
        let r = t.column("r")?;
        let mut u = t.column("u")?;
        if r.len() != grid.n() + 1 {
            return Err(Failure::Config(format!(
                "{}: {} rows for a grid of {} nodes",
                path.display(),
                r.len(),
                grid.n() + 1
            )));
        }
        for (k, (&ri, &gi)) in r.iter().zip(grid.nodes()).enumerate() {
            if (ri - gi).abs() > 1e-9 {
                return Err(Failure::Config(format!(
                    "{}: row {} has r = {ri}, grid node is {gi}",
                    path.display(),
                    k + 2
                )));
            }
        }
        let wall = *u.last().unwrap();
        if wall.abs() > 1e-12 {
            return Err(Failure::Config(format!(
                "{}: wall value {wall} violates the clamped boundary",
                path.display()
            )));
        }
        *u.last_mut().unwrap() = 0.0;
        return Ok(RadialField::new(Arc::clone(grid), u)?);
    }
    Err(Failure::Config(format!(
        "data = {spec:?} is not zero, phi1:<alpha>, or file:<path>"
    )))
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<(), Failure> {
    ensure_out_dir(&cfg.out)?;
    let grid = RadialGrid::new(cfg.dim, cfg.n)?;
    let p = params(cfg)?;
    let mut opts = EvolveOptions {
        dt0: cfg.dt0,
        dt_max: cfg.dt_max,
        eps_touchdown: cfg.eps_td,
        newton_tol: cfg.newton_tol,
        ..EvolveOptions::default()
    };

    let mut rep = String::new();
    if cfg.with_fold {
        let branch = continue_branch(&grid, &p, &continuation_options(cfg))?;
        let fold = branch.fold.ok_or_else(|| {
            Failure::Solver(format!(
                "no fold located for the sharp bound: continuation terminated {}",
                branch.termination.as_str()
            ))
        })?;
        writeln!(rep, "fold: lambda_star = {}, supercritical = {}", fold.lambda_star, cfg.lambda > fold.lambda_star)
            .unwrap();
        opts.lambda_star = Some(fold.lambda_star);
        opts.phi_star = Some(fold.phi_star);
    }

    let u0 = initial_data(cfg, &grid)?;
    let v0 = p.is_hyperbolic().then(|| RadialField::zeros(Arc::clone(&grid)));
    let trace = evolution::run(&p, &u0, v0.as_ref(), cfg.horizon, &opts)?;

    let mut table = CsvTable::new(&["t", "min_u", "N", "M", "E", "dt"]);
    let mut ts = Vec::with_capacity(trace.samples.len());
    let mut mins = Vec::with_capacity(trace.samples.len());
    let mut ns = Vec::with_capacity(trace.samples.len());
    for s in &trace.samples {
        table.push(vec![s.t, s.min_u, s.n_pair, s.m_pair.unwrap_or(f64::NAN), s.energy, s.dt]);
        ts.push(s.t);
        mins.push(s.min_u);
        ns.push(s.n_pair);
    }
    write_table(&cfg.out, "trace.csv", &table)?;
    let plot = line_plot(
        "evolution trace",
        "t",
        "min u, N",
        &[
            Series { label: "min u", x: &ts, y: &mins },
            Series { label: "N = int u phi1", x: &ts, y: &ns },
        ],
    );
    write_plot(&cfg.out, "trace.svg", &plot)?;

    writeln!(rep, "model: {}", if p.is_hyperbolic() { "hyperbolic" } else { "parabolic" }).unwrap();
    writeln!(rep, "m1: {}", trace.m1).unwrap();
    writeln!(rep, "steps: {}", trace.steps).unwrap();
    let last = trace.samples.last().unwrap();
    writeln!(rep, "final: t = {}, min_u = {}, gap = {}", last.t, last.min_u, 1.0 + trace.final_state.min_value())
        .unwrap();
    let touchdown = match trace.verdict {
        Verdict::TouchedDown { bracket } => {
            writeln!(rep, "verdict: touchdown, time in [{}, {}]", bracket.0, bracket.1).unwrap();
            Some(bracket)
        }
        Verdict::Survived { horizon } => {
            writeln!(rep, "verdict: survived to t = {horizon}").unwrap();
            None
        }
        Verdict::SmallDataGlobal { horizon } => {
            writeln!(rep, "verdict: survived to t = {horizon}, settled (small-data regime)").unwrap();
            None
        }
    };
    for (name, bound) in [("bound_general", trace.bounds.general), ("bound_sharp", trace.bounds.sharp)] {
        match bound {
            Some(b) => {
                writeln!(rep, "{name}: {b}").unwrap();
                if let Some(bracket) = touchdown {
                    writeln!(rep, "{name}_respected: {}", bracket.1 <= b).unwrap();
                }
            }
            None => writeln!(rep, "{name}: not-applicable").unwrap(),
        }
    }
    print!("{rep}");
    Ok(())
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<(), Failure> {
    let results = run_suite(cfg.dim, cfg.n);
    let mut rep = String::new();
    let mut counts = [0usize; 3];
    for c in &results {
        writeln!(rep, "{}: {} ({})", c.name, c.status.as_str(), c.detail).unwrap();
        counts[match c.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Skip => 2,
        }] += 1;
    }
    writeln!(rep, "summary: {} pass, {} fail, {} skip", counts[0], counts[1], counts[2]).unwrap();
    print!("{rep}");
    if suite_passes(&results) {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} of {} checks failed", counts[1], results.len())))
    }
}

/// `key=start:step:stop`, inclusive of `stop` up to roundoff.
fn parse_sweep(spec: &str) -> Result<(String, Vec<f64>), Failure> {
    let bad = || Failure::Config(format!("sweep expects key=start:step:stop, got {spec:?}"));
    let (key, range) = spec.split_once('=').ok_or_else(bad)?;
    let mut parts = range.split(':');
    let (a, step, b) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(s), Some(b), None) => (a, s, b),
        _ => return Err(bad()),
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let step: f64 = step.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(step > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
        return Err(Failure::Config(format!(
            "sweep needs step > 0 and stop >= start, got {spec:?}"
        )));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(Failure::Config(format!("sweep spans {count} runs; the cap is 10000")));
    }
    Ok((key.trim().to_string(), (0..count).map(|k| a + k as f64 * step).collect()))
}

/// Fans the runner over every swept value on a fixed-size worker pool. Each
/// run gets `out/<key>-<value>`; the workers pull from a shared queue whose
/// order is shuffled by `cfg.seed` (load shaping only; the outputs of each
/// run do not depend on scheduling).
pub fn run_sweep(base: &RunConfig, spec: &str, runner: Runner) -> Result<(), Failure> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let (key, values) = parse_sweep(spec)?;
    {
        // reject unknown or non-numeric keys before spawning anything
        let mut probe = base.clone();
        probe.apply(&key, &values[0].to_string())?;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.shuffle(&mut rand::rngs::StdRng::seed_from_u64(base.seed));

    let next = AtomicUsize::new(0);
    let failures: Mutex<Vec<(f64, Failure)>> = Mutex::new(Vec::new());
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(values.len())
        .max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= order.len() {
                    break;
                }
                let value = values[order[k]];
                let result = (|| -> Result<(), Failure> {
                    let mut cfg = base.clone();
                    cfg.apply(&key, &value.to_string())?;
                    cfg.validate()?;
                    cfg.out = base.out.join(format!("{key}-{value}"));
                    ensure_out_dir(&cfg.out)?;
                    runner(&cfg)
                })();
                match result {
                    Ok(()) => println!("sweep {key}={value}: ok"),
                    Err(f) => {
                        println!("sweep {key}={value}: error ({})", f.message());
                        failures.lock().unwrap().push((value, f));
                    }
                }
            });
        }
    });

    let mut failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        println!("sweep {key}: {} runs ok", values.len());
        return Ok(());
    }
    failures.sort_by(|a, b| a.0.total_cmp(&b.0));
    let worst = failures.iter().map(|(_, f)| f.code()).max().unwrap();
    let (v0, f0) = &failures[0];
    let msg = format!(
        "sweep {key}: {} of {} runs failed; first at {key}={v0}: {}",
        failures.len(),
        values.len(),
        f0.message()
    );
    Err(match worst {
        4 => Failure::Validation(msg),
        3 => Failure::Solver(msg),
        _ => Failure::Config(msg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grammar() {
        let (key, vals) = parse_sweep("lambda=0.5:0.25:1.25").unwrap();
        assert_eq!(key, "lambda");
        assert_eq!(vals, vec![0.5, 0.75, 1.0, 1.25]);
        let (_, single) = parse_sweep("n=64:10:64").unwrap();
        assert_eq!(single, vec![64.0]);
        assert!(parse_sweep("lambda=1:0:2").is_err());
        assert!(parse_sweep("lambda=2:1:1").is_err());
        assert!(parse_sweep("lambda=1:2").is_err());
        assert!(parse_sweep("nonsense").is_err());
        assert!(parse_sweep("lambda=a:b:c").is_err());
    }

    #[test]
    fn sweep_endpoint_inclusion_under_roundoff() {
        // 0.1 steps do not land exactly on 0.7; the epsilon keeps the stop in
        let (_, vals) = parse_sweep("T=0.1:0.1:0.7").unwrap();
        assert_eq!(vals.len(), 7);
        assert!((vals.last().unwrap() - 0.7).abs() < 1e-12);
    }
}

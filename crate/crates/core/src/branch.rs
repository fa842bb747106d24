//! Stationary branch machinery: the damped Newton corrector, natural and
//! pseudo-arclength continuation, fold localisation, and the qualitative
//! certificates carried along the branch.
//!
//! The branch of `A u = -lambda g(u)` leaves the trivial solution at
//! `lambda = 0`, bends back at the fold `lambda*`, and descends along the
//! unstable sheet while the center deflection closes the gap. Continuation
//! runs in the natural parameter while the stability eigenvalue stays safely
//! positive and switches to arclength before the fold. The arclength metric
//! weighs `lambda` by the principal eigenvalue of the bare operator so both
//! coordinates move on comparable scales.

use std::sync::Arc;

use crate::disc::{assemble_a, laplacian, DiscreteOperator, RadialField, RadialGrid};
use crate::linalg::{principal_eigen, EigenPair, EIG_TOL};
use crate::model::{self, ModelParams, XI_GUARD};
use crate::omega::linear_response;
use crate::{Error, Result};

/// Knobs for [`continue_branch`]; `Default` matches the documented values.
#[derive(Debug, Clone)]
pub struct ContinuationOptions {
    /// Sup-norm residual tolerance of the Newton correctors.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// First natural step; `0` picks `m1 / 50` after the bare eigensolve.
    pub dlambda0: f64,
    /// Arclength step bounds.
    pub ds_min: f64,
    pub ds_max: f64,
    /// Stop once the branch has folded and `lambda` falls below this.
    pub lambda_stop: f64,
    /// Stop when the gap `1 + min u` closes to this.
    pub eps_min: f64,
    pub max_points: usize,
    /// Residual tolerance of the eigensolves along the branch.
    pub eig_tol: f64,
    /// Relative stall tolerance on `lambda` during fold refinement.
    pub fold_tol: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            newton_tol: 1e-8,
            newton_max_iter: 25,
            dlambda0: 0.0,
            ds_min: 1e-6,
            ds_max: 0.1,
            lambda_stop: 1e-3,
            eps_min: 1e-3,
            max_points: 2000,
            eig_tol: EIG_TOL,
            fold_tol: 1e-13,
        }
    }
}

impl ContinuationOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.newton_tol > 0.0
            && self.newton_max_iter >= 2
            && self.dlambda0 >= 0.0
            && self.ds_min > 0.0
            && self.ds_max > self.ds_min
            && self.lambda_stop > 0.0
            && (0.0..1.0).contains(&self.eps_min)
            && self.eps_min > 0.0
            && self.max_points >= 3
            && self.eig_tol > 0.0
            && self.fold_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("continuation options out of range".into()))
        }
    }
}

/// One converged stationary state.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    /// Arclength station from the trivial solution (metric of the module doc).
    pub s: f64,
    /// Center deflection; equals the minimum for the states on this branch.
    pub min_u: f64,
    /// Smallest eigenvalue of the linearization at this state.
    pub mu1: f64,
    /// Corrector iterations spent converging onto this point.
    pub newton_iters: usize,
    pub u: RadialField,
}

/// Why the branch walk stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Folded and descended below `lambda_stop`.
    LambdaBelowStop,
    /// Gap `1 + min u` closed to `eps_min`.
    GapClosed,
    MaxPoints,
    /// Corrector kept failing at the smallest allowed step.
    Stalled,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::LambdaBelowStop => "lambda-below-stop",
            Termination::GapClosed => "gap-closed",
            Termination::MaxPoints => "max-points",
            Termination::Stalled => "stalled",
        }
    }
}

/// Refined fold data.
#[derive(Debug, Clone)]
pub struct FoldRecord {
    pub lambda_star: f64,
    pub u_star: RadialField,
    /// Stability eigenvalue at the refined fold; vanishes there.
    pub mu1_star: f64,
    /// Principal eigenvector of the linearization at the fold.
    pub phi_star: RadialField,
    /// `d^2 lambda / d s^2` from the final parabolic fit; negative.
    pub curvature: f64,
    /// Index of the branch point bracketing the fold from the left.
    pub index: usize,
}

/// Continuation output.
#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    pub fold: Option<FoldRecord>,
    /// Principal eigenvalue of the bare operator on this grid.
    pub m1: f64,
    /// Its eigenvector, `||.||_1 = 1`, positive.
    pub phi1: RadialField,
}

/// The stable/unstable pair below the fold.
#[derive(Debug, Clone)]
pub struct TwoSolutions {
    pub lambda: f64,
    pub stable: BranchPoint,
    pub unstable: BranchPoint,
}

/// Qualitative certificates of one stationary state.
#[derive(Debug, Clone)]
pub struct Certificates {
    pub lambda: f64,
    /// `-1 < u <= 0` everywhere.
    pub bounded: bool,
    /// The minimum sits at the center node.
    pub min_at_center: bool,
    /// The profile does not decrease outward.
    pub nondecreasing: bool,
    /// `0 <= lambda int g(u) phi1 <= m1`.
    pub eigen_pairing: bool,
    /// The discrete Laplacian of `u` changes sign exactly once on `(0, 1]`.
    pub sign_change: bool,
    /// `lambda int g(u) phi1`, the mass paired against the bare mode.
    pub eigen_mass: f64,
    /// `int (1 + u)^-3` when the state is stable (`mu1 >= 0`).
    pub stable_mass: Option<f64>,
    /// `I_d(1 + min u)`, the touchdown functional at the deepest point.
    pub i_d: f64,
    /// Bits 0..4: bounded, min at center, nondecreasing, pairing, sign change.
    pub flags: u8,
}

impl Certificates {
    pub fn all_pass(&self) -> bool {
        self.flags == 0b1_1111
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `g` applied nodewise; `None` once any node touches the guard band.
fn g_vec(u: &[f64]) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(u.len());
    for &x in u {
        out.push(model::g(x).ok()?);
    }
    Some(out)
}

/// `F(u) = A u + lambda g(u) - load` over the unknowns.
fn residual(op: &DiscreteOperator, lambda: f64, load: Option<&[f64]>, u: &[f64]) -> Option<Vec<f64>> {
    let g = g_vec(u)?;
    let mut f = op.apply(u);
    for (i, fi) in f.iter_mut().enumerate() {
        *fi += lambda * g[i];
        if let Some(b) = load {
            *fi -= b[i];
        }
    }
    Some(f)
}

fn wrap(grid: &Arc<RadialGrid>, u: &[f64]) -> Result<RadialField> {
    RadialField::from_unknowns(Arc::clone(grid), u.to_vec())
}

/// Damped Newton solve of `op(u) + lambda g(u) = load` over the clamped
/// unknowns. `op` may carry a mass shift (the time steppers reuse this
/// corrector), `load` defaults to zero. Returns the state and the number of
/// Newton steps taken.
pub fn solve_stationary(
    op: &DiscreteOperator,
    lambda: f64,
    load: Option<&[f64]>,
    u0: &RadialField,
    tol: f64,
    max_iter: usize,
) -> Result<(RadialField, usize)> {
    let grid = op.grid().clone();
    if u0.grid().n() != grid.n() || u0.grid().dim() != grid.dim() {
        return Err(Error::GridMismatch);
    }
    if let Some(b) = load {
        if b.len() != op.n_unknowns() {
            return Err(Error::GridMismatch);
        }
    }
    let mut u = u0.unknowns().to_vec();
    let mut f = residual(op, lambda, load, &u).ok_or(Error::Domain {
        what: "corrector start inside the guard band",
        value: 1.0 + u0.min_value(),
    })?;
    let scale = 1.0 + lambda.abs() + load.map_or(0.0, sup);
    // an exact root still measures a residual of eps ||A|| ||u|| through the
    // banded apply, so the acceptance threshold carries that floor
    let floor = |u: &[f64]| 8.0 * f64::EPSILON * op.band().max_abs() * (1.0 + sup(u));
    for it in 0..=max_iter {
        let fnorm = sup(&f);
        if fnorm <= tol * scale + floor(&u) {
            return Ok((wrap(&grid, &u)?, it));
        }
        if it == max_iter {
            return Err(Error::NoConvergence {
                what: "stationary corrector",
                iterations: max_iter,
                residual: fnorm,
            });
        }
        let jac = op.with_potential(lambda, &wrap(&grid, &u)?)?;
        let step = jac.band().factor()?.solve(&f);
        let mut damp = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(ui, di)| ui - damp * di).collect();
            if let Some(ft) = residual(op, lambda, load, &trial) {
                let fn_t = sup(&ft);
                if fn_t < fnorm || fn_t <= tol * scale + floor(&trial) {
                    u = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            damp *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                what: "stationary corrector",
                iterations: it + 1,
                residual: fnorm,
            });
        }
    }
    unreachable!("loop returns");
}

/// Eigensolve of the linearization. The shift is the certified lower bound
/// `min lambda g'(u) - 1 < mu1` (the operator part is positive), so the
/// nearest eigenvalue to it is the principal one; a warm shift from the
/// previous branch point can land above mu1 once the potential well deepens
/// and silently converge to an interior eigenvalue instead.
fn mu1_at(op: &DiscreteOperator, lambda: f64, u: &RadialField, tol: f64) -> Result<EigenPair> {
    let jac = op.with_potential(lambda, u)?;
    let mut cold = 0.0f64;
    for &x in u.unknowns() {
        cold = cold.min(lambda * model::g_prime(x)?);
    }
    cold -= 1.0;
    principal_eigen(&jac, cold, tol)
}

/// One bordered corrector solve: `F(u, lambda) = 0` together with the
/// hyperplane constraint `(t_u, u - u_b)_w + t_l (lambda - l_b) / L^2 = ds`.
#[allow(clippy::too_many_arguments)]
fn arclength_correct(
    op: &DiscreteOperator,
    t_u: &[f64],
    t_lam: f64,
    lam_scale: f64,
    base_u: &[f64],
    base_lam: f64,
    ds: f64,
    mut u: Vec<f64>,
    mut lam: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64, usize)> {
    let grid = op.grid().clone();
    let n = op.n_unknowns();
    let a_lam = t_lam / (lam_scale * lam_scale);
    let station = |u: &[f64], lam: f64| {
        let mut acc = 0.0;
        for i in 0..n {
            acc += grid.weights()[i] * t_u[i] * (u[i] - base_u[i]);
        }
        acc + a_lam * (lam - base_lam)
    };
    for it in 0..=max_iter {
        let f = match residual(op, lam, None, &u) {
            Some(f) => f,
            None => {
                return Err(Error::NoConvergence {
                    what: "arclength corrector",
                    iterations: it,
                    residual: f64::NAN,
                })
            }
        };
        let ncon = station(&u, lam) - ds;
        let fnorm = sup(&f);
        let floor = 8.0 * f64::EPSILON * op.band().max_abs() * (1.0 + sup(&u));
        if fnorm <= tol * (1.0 + lam.abs()) + floor && ncon.abs() <= tol * (1.0 + ds.abs()) {
            return Ok((u, lam, it));
        }
        if it == max_iter {
            return Err(Error::NoConvergence {
                what: "arclength corrector",
                iterations: max_iter,
                residual: fnorm,
            });
        }
        let jac = op.with_potential(lam, &wrap(&grid, &u)?)?;
        let lu = jac.band().factor()?;
        let z1 = lu.solve(&f);
        let g = g_vec(&u).expect("residual already evaluated");
        let z2 = lu.solve(&g);
        let denom = a_lam - grid.dot_w(t_u, &z2);
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::NoConvergence {
                what: "arclength corrector",
                iterations: it,
                residual: fnorm,
            });
        }
        let dlam = (grid.dot_w(t_u, &z1) - ncon) / denom;
        let mut damp = 1.0;
        let mut moved = false;
        for _ in 0..8 {
            let ut: Vec<f64> = (0..n).map(|i| u[i] + damp * (-z1[i] - dlam * z2[i])).collect();
            let lt = lam + damp * dlam;
            if ut.iter().all(|&x| 1.0 + x > XI_GUARD) {
                u = ut;
                lam = lt;
                moved = true;
                break;
            }
            damp *= 0.5;
        }
        if !moved {
            return Err(Error::NoConvergence {
                what: "arclength corrector",
                iterations: it,
                residual: fnorm,
            });
        }
    }
    unreachable!("loop returns");
}

/// Metric distance between consecutive states.
fn step_length(grid: &RadialGrid, a: &BranchPoint, b: &BranchPoint, lam_scale: f64) -> f64 {
    let n = grid.n();
    let mut acc = 0.0;
    for i in 0..n {
        let d = b.u.values()[i] - a.u.values()[i];
        acc += grid.weights()[i] * d * d;
    }
    let dl = (b.lambda - a.lambda) / lam_scale;
    (acc + dl * dl).sqrt()
}

/// Walks the stationary branch from the trivial solution until one of the
/// [`Termination`] conditions fires, then refines the fold if one was
/// bracketed. `params.lambda` is ignored; the drive is the continuation
/// parameter.
pub fn continue_branch(
    grid: &Arc<RadialGrid>,
    params: &ModelParams,
    opts: &ContinuationOptions,
) -> Result<Branch> {
    if grid.dim() != params.dim {
        return Err(Error::GridMismatch);
    }
    opts.validate()?;
    let op = assemble_a(grid, params.bending, params.tension)?;
    let bare = principal_eigen(&op, 0.0, opts.eig_tol)?;
    let m1 = bare.value;
    let lam_scale = m1.max(1.0);

    let mut points = vec![BranchPoint {
        lambda: 0.0,
        s: 0.0,
        min_u: 0.0,
        mu1: m1,
        newton_iters: 0,
        u: RadialField::zeros(Arc::clone(grid)),
    }];
    let response = linear_response(grid, params.bending, params.tension)?;

    let push_point = |points: &mut Vec<BranchPoint>,
                      u: RadialField,
                      lambda: f64,
                      pair: &EigenPair,
                      iters: usize,
                      lam_scale: f64|
     -> usize {
        let prev = points.last().expect("seeded");
        let mut bp = BranchPoint {
            lambda,
            s: 0.0,
            min_u: u.min_value(),
            mu1: pair.value,
            newton_iters: iters,
            u,
        };
        bp.s = prev.s + step_length(prev.u.grid(), prev, &bp, lam_scale);
        points.push(bp);
        points.len() - 1
    };

    let mut termination = None;
    let mut candidates: Vec<usize> = Vec::new();

    // natural-parameter phase: prescribe lambda while the state is far from
    // the fold, secant predictor after the first linear-response step
    let mut dl = if opts.dlambda0 > 0.0 { opts.dlambda0 } else { m1 / 50.0 };
    let dl_floor = m1 * 1e-7;
    loop {
        if points.len() >= opts.max_points {
            termination = Some(Termination::MaxPoints);
            break;
        }
        let k = points.len() - 1;
        if points[k].mu1 < 0.08 * m1 {
            break; // close to the fold: hand over to arclength
        }
        let lam = points[k].lambda + dl;
        let guess = if k == 0 {
            let mut v = response.clone();
            v.scale(lam);
            v
        } else {
            let ratio = dl / (points[k].lambda - points[k - 1].lambda);
            let mut vals = Vec::with_capacity(grid.n() + 1);
            for i in 0..=grid.n() {
                let a = points[k - 1].u.values()[i];
                let b = points[k].u.values()[i];
                vals.push(b + ratio * (b - a));
            }
            RadialField::new(Arc::clone(grid), vals)?
        };
        match solve_stationary(&op, lam, None, &guess, opts.newton_tol, opts.newton_max_iter) {
            Ok((u, iters)) => {
                let pair = mu1_at(&op, lam, &u, opts.eig_tol)?;
                let gap = 1.0 + u.min_value();
                push_point(&mut points, u, lam, &pair, iters, lam_scale);
                if gap <= opts.eps_min {
                    termination = Some(Termination::GapClosed);
                    break;
                }
                if iters <= 4 {
                    dl = (dl * 1.3).min(m1 / 20.0);
                }
            }
            Err(_) => {
                dl *= 0.5;
                if dl < dl_floor {
                    break; // cannot advance in the natural parameter
                }
            }
        }
    }

    // arclength phase
    if termination.is_none() {
        let k = points.len() - 1;
        let mut ds = if k == 0 {
            0.01 * opts.ds_max.max(10.0 * opts.ds_min)
        } else {
            (points[k].s - points[k - 1].s).clamp(opts.ds_min, opts.ds_max)
        };
        loop {
            if points.len() >= opts.max_points {
                termination = Some(Termination::MaxPoints);
                break;
            }
            let k = points.len() - 1;
            // secant tangent, normalized in the metric
            let (t_u, t_lam) = if k == 0 {
                (response.unknowns().to_vec(), lam_scale)
            } else {
                let du: Vec<f64> =
                    (0..grid.n()).map(|i| points[k].u.values()[i] - points[k - 1].u.values()[i]).collect();
                (du, points[k].lambda - points[k - 1].lambda)
            };
            let nrm = {
                let uu = grid.dot_w(&t_u, &t_u);
                (uu + (t_lam / lam_scale) * (t_lam / lam_scale)).sqrt()
            };
            let t_u: Vec<f64> = t_u.iter().map(|x| x / nrm).collect();
            let t_lam = t_lam / nrm;
            let base = &points[k];
            let pred_u: Vec<f64> = (0..grid.n()).map(|i| base.u.values()[i] + ds * t_u[i]).collect();
            let pred_lam = base.lambda + ds * t_lam;
            match arclength_correct(
                &op,
                &t_u,
                t_lam,
                lam_scale,
                base.u.unknowns(),
                base.lambda,
                ds,
                pred_u,
                pred_lam,
                opts.newton_tol,
                opts.newton_max_iter,
            ) {
                Ok((u, lam, iters)) => {
                    let u = wrap(grid, &u)?;
                    let pair = mu1_at(&op, lam, &u, opts.eig_tol)?;
                    let gap = 1.0 + u.min_value();
                    let idx = push_point(&mut points, u, lam, &pair, iters, lam_scale);
                    if idx >= 2
                        && points[idx].lambda < points[idx - 1].lambda
                        && points[idx - 1].lambda >= points[idx - 2].lambda
                    {
                        candidates.push(idx - 1);
                    }
                    if gap <= opts.eps_min {
                        termination = Some(Termination::GapClosed);
                        break;
                    }
                    if !candidates.is_empty() && lam < opts.lambda_stop {
                        termination = Some(Termination::LambdaBelowStop);
                        break;
                    }
                    if iters <= 3 {
                        ds = (ds * 1.3).min(opts.ds_max);
                    }
                }
                Err(_) => {
                    ds *= 0.5;
                    if ds < opts.ds_min {
                        termination = Some(Termination::Stalled);
                        break;
                    }
                }
            }
        }
    }

    let termination = termination.expect("set on every exit");
    let fold = match candidates
        .iter()
        .copied()
        .max_by(|&a, &b| points[a].lambda.partial_cmp(&points[b].lambda).expect("finite"))
    {
        Some(c) => Some(refine_fold(&op, &points, c, m1, lam_scale, opts)?),
        None => None,
    };
    Ok(Branch { points, termination, fold, m1, phi1: bare.vector })
}

/// Maximizes `lambda` along the curve near the bracketing triple around
/// `center` by successive parabolic interpolation in the arclength station;
/// each trial station is converged back onto the curve with the bordered
/// corrector, so the vertex estimate sees only on-curve values.
fn refine_fold(
    op: &DiscreteOperator,
    points: &[BranchPoint],
    center: usize,
    m1: f64,
    lam_scale: f64,
    opts: &ContinuationOptions,
) -> Result<FoldRecord> {
    let grid = op.grid().clone();
    let n = grid.n();
    let (pa, pb, pc) = (&points[center - 1], &points[center], &points[center + 1]);

    // frame: base at the bracket center, tangent across the bracket
    let t_u: Vec<f64> = (0..n).map(|i| pc.u.values()[i] - pa.u.values()[i]).collect();
    let t_lam = pc.lambda - pa.lambda;
    let nrm = (grid.dot_w(&t_u, &t_u) + (t_lam / lam_scale) * (t_lam / lam_scale)).sqrt();
    let t_u: Vec<f64> = t_u.iter().map(|x| x / nrm).collect();
    let t_lam = t_lam / nrm;
    let a_lam = t_lam / (lam_scale * lam_scale);
    let station = |u: &RadialField, lam: f64| {
        let mut acc = 0.0;
        for i in 0..n {
            acc += grid.weights()[i] * t_u[i] * (u.values()[i] - pb.u.values()[i]);
        }
        acc + a_lam * (lam - pb.lambda)
    };

    // (station, lambda, state) triple ordered by station, maximum inside
    let mut triple: Vec<(f64, f64, RadialField)> = vec![
        (station(&pa.u, pa.lambda), pa.lambda, pa.u.clone()),
        (0.0, pb.lambda, pb.u.clone()),
        (station(&pc.u, pc.lambda), pc.lambda, pc.u.clone()),
    ];
    triple.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite stations"));

    let mut curvature = 0.0;
    let mut best_lam = pb.lambda;
    for _ in 0..12 {
        let (sa, la) = (triple[0].0, triple[0].1);
        let (sb, lb) = (triple[1].0, triple[1].1);
        let (sc, lc) = (triple[2].0, triple[2].1);
        let d1 = (lb - la) / (sb - sa);
        let d2 = (lc - lb) / (sc - sb);
        let dd = (d2 - d1) / (sc - sa);
        let mut sv = 0.5 * (sa + sb) - 0.5 * d1 / dd;
        curvature = 2.0 * dd;
        if !(dd < 0.0) || !sv.is_finite() || sv <= sa || sv >= sc {
            sv = 0.5 * (sa + sc); // fall back to bisection of the bracket
        }
        // quadratic interpolation of the state as the predictor
        let wa = (sv - sb) * (sv - sc) / ((sa - sb) * (sa - sc));
        let wb = (sv - sa) * (sv - sc) / ((sb - sa) * (sb - sc));
        let wc = (sv - sa) * (sv - sb) / ((sc - sa) * (sc - sb));
        let pred_u: Vec<f64> = (0..n)
            .map(|i| wa * triple[0].2.values()[i] + wb * triple[1].2.values()[i] + wc * triple[2].2.values()[i])
            .collect();
        let pred_lam = wa * la + wb * lb + wc * lc;
        let (u, lam, _) = arclength_correct(
            op,
            &t_u,
            t_lam,
            lam_scale,
            pb.u.unknowns(),
            pb.lambda,
            sv,
            pred_u,
            pred_lam,
            opts.newton_tol,
            opts.newton_max_iter,
        )
        .map_err(|_| Error::NoFold)?;
        let u = wrap(&grid, &u)?;
        let done = (lam - best_lam).abs() <= opts.fold_tol * (1.0 + lam.abs());
        if lam > best_lam {
            best_lam = lam;
        }
        // keep the three consecutive stations whose middle carries max lambda
        triple.push((sv, lam, u));
        triple.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite stations"));
        let jmax = (0..triple.len())
            .max_by(|&i, &j| triple[i].1.partial_cmp(&triple[j].1).expect("finite"))
            .expect("nonempty");
        let lo = jmax.clamp(1, triple.len() - 2) - 1;
        triple.drain(lo + 3..);
        triple.drain(..lo);
        if done {
            break;
        }
    }

    let (_, lambda_star, u_star) = triple.swap_remove(1);
    let pair = {
        let jac = op.with_potential(lambda_star, &u_star)?;
        principal_eigen(&jac, -0.05 * m1, opts.eig_tol)?
    };
    Ok(FoldRecord {
        lambda_star,
        mu1_star: pair.value,
        phi_star: pair.vector,
        curvature,
        index: center,
        u_star,
    })
}

/// Indices of the interior local maxima of `lambda` along a point list.
pub fn locate_fold(points: &[BranchPoint]) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 1..points.len().saturating_sub(1) {
        if points[k].lambda >= points[k - 1].lambda && points[k].lambda > points[k + 1].lambda {
            out.push(k);
        }
    }
    out
}

/// The stable and unstable states at a drive below the fold. Warm-starts
/// fixed-drive Newton solves from the bracketing branch points on each sheet.
pub fn two_solutions_at(
    grid: &Arc<RadialGrid>,
    params: &ModelParams,
    branch: &Branch,
    lambda: f64,
    opts: &ContinuationOptions,
) -> Result<TwoSolutions> {
    let fold = branch.fold.as_ref().ok_or(Error::NoFold)?;
    if !(lambda > 0.0) || lambda >= fold.lambda_star {
        return Err(Error::NoBracket { lambda });
    }
    let op = assemble_a(grid, params.bending, params.tension)?;
    let sheet = |lo: usize, hi: usize, descending: bool| -> Result<BranchPoint> {
        let pts = &branch.points[lo..=hi];
        let mut seed = None;
        for w in pts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let bracket = if descending {
                a.lambda >= lambda && lambda >= b.lambda
            } else {
                a.lambda <= lambda && lambda <= b.lambda
            };
            if bracket && a.lambda != b.lambda {
                let th = (lambda - a.lambda) / (b.lambda - a.lambda);
                let vals: Vec<f64> = (0..=grid.n())
                    .map(|i| a.u.values()[i] + th * (b.u.values()[i] - a.u.values()[i]))
                    .collect();
                seed = Some((RadialField::new(Arc::clone(grid), vals)?, a.s + th * (b.s - a.s)));
                break;
            }
        }
        let (guess, s) = seed.ok_or(Error::NoBracket { lambda })?;
        let (u, iters) = solve_stationary(&op, lambda, None, &guess, opts.newton_tol, opts.newton_max_iter)?;
        let pair = mu1_at(&op, lambda, &u, opts.eig_tol)?;
        Ok(BranchPoint { lambda, s, min_u: u.min_value(), mu1: pair.value, newton_iters: iters, u })
    };
    let stable = sheet(0, fold.index, false)?;
    let unstable = sheet(fold.index, branch.points.len() - 1, true)?;
    Ok(TwoSolutions { lambda, stable, unstable })
}

/// Checks the qualitative certificates of a stationary state against the
/// bare principal pair `(m1, phi1)` and the state's own `mu1`.
pub fn certify(u: &RadialField, lambda: f64, m1: f64, phi1: &RadialField, mu1: f64) -> Result<Certificates> {
    let grid = u.grid().clone();
    if phi1.grid().n() != grid.n() {
        return Err(Error::GridMismatch);
    }
    let minv = u.min_value();
    let maxv = u.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let bounded = minv > -1.0 && maxv <= 1e-12;

    let min_at_center = (u.values()[0] - minv).abs() <= 1e-12 * minv.abs().max(1.0);

    let slack = 1e-8 * u.sup_norm().max(1.0);
    let nondecreasing = u.values().windows(2).all(|w| w[1] >= w[0] - slack);

    let mut gphi = Vec::with_capacity(grid.n() + 1);
    for i in 0..=grid.n() {
        gphi.push(model::g(u.values()[i])? * phi1.values()[i]);
    }
    let eigen_mass = lambda * grid.integrate(&gphi);
    let eigen_pairing = eigen_mass >= -1e-9 * m1 && eigen_mass <= m1 * (1.0 + 1e-6);

    let sign_change = if u.sup_norm() < 1e-12 {
        true
    } else {
        let w = laplacian(u);
        let wsup = sup(&w.values()[1..]);
        let mut signs = Vec::new();
        for &v in &w.values()[1..] {
            if v.abs() > 1e-10 * wsup {
                signs.push(v > 0.0);
            }
        }
        signs.windows(2).filter(|p| p[0] != p[1]).count() == 1
    };

    let stable_mass = if mu1 >= 0.0 {
        let cube: Result<Vec<f64>> =
            u.values().iter().map(|&x| model::g(x).map(|gx| gx / (1.0 + x))).collect();
        Some(grid.integrate(&cube?))
    } else {
        None
    };

    let i_d = model::i_d((1.0 + minv).min(1.0), grid.dim())?;

    let flags = (bounded as u8)
        | (min_at_center as u8) << 1
        | (nondecreasing as u8) << 2
        | (eigen_pairing as u8) << 3
        | (sign_change as u8) << 4;
    Ok(Certificates {
        lambda,
        bounded,
        min_at_center,
        nondecreasing,
        eigen_pairing,
        sign_change,
        eigen_mass,
        stable_mass,
        i_d,
        flags,
    })
}

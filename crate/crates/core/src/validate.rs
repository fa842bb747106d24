//! Named self-checks spanning every module, for the `validate` command: each
//! check reports pass/fail with a one-line detail, and checks that need grid
//! resolution report skip on coarse grids instead of failing.

use std::sync::Arc;

use crate::branch::{certify, continue_branch, ContinuationOptions};
use crate::disc::{apply_a, assemble_a, assemble_laplacian, RadialField, RadialGrid};
use crate::evolution::{functionals, step_hyperbolic, step_parabolic, EvolutionState};
use crate::linalg::{principal_eigen, EIG_TOL};
use crate::model::{self, Dim, ModelParams};
use crate::omega::{linear_response, OmegaProfile};
use crate::Result;

/// Frozen beam constant: beta^4 with 2 beta the first positive root of
/// cos(2b) cosh(2b) = 1.
pub const BEAM_M1: f64 = 31.285243858777037;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

/// True when no check failed (skips do not count against the suite).
pub fn suite_passes(results: &[CheckResult]) -> bool {
    results.iter().all(|c| c.status != Status::Fail)
}

fn outcome(name: &'static str, r: Result<(bool, String)>) -> CheckResult {
    match r {
        Ok((true, detail)) => CheckResult { name, status: Status::Pass, detail },
        Ok((false, detail)) => CheckResult { name, status: Status::Fail, detail },
        Err(e) => CheckResult { name, status: Status::Fail, detail: format!("error: {e}") },
    }
}

fn skipped(name: &'static str, why: &str) -> CheckResult {
    CheckResult { name, status: Status::Skip, detail: why.to_string() }
}

/// Runs the whole battery on one grid size. Resolution-sensitive checks
/// (two-grid orders, eigenvalue accuracy, continuation) skip below their
/// minimum usable size so a minimal-grid run still reports cleanly.
pub fn run_suite(dim: Dim, n: usize) -> Vec<CheckResult> {
    let grid = match RadialGrid::new(dim, n) {
        Ok(g) => g,
        Err(e) => {
            return vec![CheckResult {
                name: "grid",
                status: Status::Fail,
                detail: format!("error: {e}"),
            }]
        }
    };
    let mut out = Vec::new();

    out.push(outcome("quadrature-weights", weights_check(&grid)));
    out.push(outcome("laplacian-selfadjoint", selfadjoint_check(&grid)));
    if n >= 64 {
        out.push(outcome("operator-consistency", consistency_check(dim, n)));
    } else {
        out.push(skipped("operator-consistency", "needs n >= 64"));
    }
    if n >= 100 {
        out.push(outcome("beam-eigenvalue", beam_check(n)));
    } else {
        out.push(skipped("beam-eigenvalue", "needs n >= 100"));
    }
    out.push(outcome("bessel-wronskian", wronskian_check()));
    out.push(outcome("omega-clamped", omega_clamped_check()));
    out.push(outcome("omega-disk-closed-form", omega_disk_check()));
    if n >= 32 {
        out.push(outcome("linear-response", response_check(&grid)));
    } else {
        out.push(skipped("linear-response", "needs n >= 32"));
    }
    let slope = model::g_prime(0.0).expect("0 is admissible");
    out.push(outcome("mu1-shift", mu1_suite(&grid, 3.0, slope)));
    if n >= 64 {
        match branch_checks(&grid) {
            Ok((fold, certs)) => {
                out.push(fold);
                out.push(certs);
            }
            Err(e) => {
                out.push(CheckResult {
                    name: "branch-fold",
                    status: Status::Fail,
                    detail: format!("error: {e}"),
                });
                out.push(skipped("branch-certificates", "branch unavailable"));
            }
        }
    } else {
        out.push(skipped("branch-fold", "needs n >= 64"));
        out.push(skipped("branch-certificates", "needs n >= 64"));
    }
    out.push(outcome("evolution-modal-decay", modal_decay_check(&grid)));
    out.push(outcome("energy-dissipation", dissipation_check(&grid)));
    out
}

fn weights_check(grid: &Arc<RadialGrid>) -> Result<(bool, String)> {
    let total: f64 = grid.weights().iter().sum();
    let want = grid.dim().ball_volume();
    let err = (total - want).abs();
    Ok((err <= 1e-12 * want, format!("sum w = {total}, |B1| = {want}")))
}

fn selfadjoint_check(grid: &Arc<RadialGrid>) -> Result<(bool, String)> {
    // W-self-adjointness away from the wall row: vectors vanishing at the
    // last unknown see only the symmetric part of the stencil
    let n = grid.n();
    let lap = assemble_laplacian(grid);
    let mut u: Vec<f64> = (0..n).map(|i| (3.0 * grid.nodes()[i] + 0.3).sin()).collect();
    let mut v: Vec<f64> = (0..n).map(|i| (7.0 * grid.nodes()[i]).cos() * (1.0 - grid.nodes()[i])).collect();
    u[n - 1] = 0.0;
    v[n - 1] = 0.0;
    let lu = lap.apply(&u);
    let lv = lap.apply(&v);
    let a = grid.dot_w(&lu, &v);
    let b = grid.dot_w(&u, &lv);
    let defect = (a - b).abs();
    let tol = 1e-9 * (1.0 + a.abs() + b.abs());
    Ok((defect <= tol, format!("pairing defect {defect:.3e}")))
}

fn consistency_check(dim: Dim, n: usize) -> Result<(bool, String)> {
    // A(1-r^2)^3 against the hand target, interior rows, two grids. The
    // quartic would be useless on the line (its composed truncation vanishes
    // identically there, leaving only roundoff), and on the disk the first
    // two rows carry an O(1) defect from composing the axis closure with the
    // interior stencil, so "interior" starts at row 2 there.
    let d = dim.as_f64();
    let target = |r: f64, t: f64| {
        let lap = -6.0 * d + 12.0 * (d + 2.0) * r * r - 6.0 * (d + 4.0) * r.powi(4);
        let bilap = 24.0 * d * (d + 2.0) - 24.0 * (d + 2.0) * (d + 4.0) * r * r;
        bilap - t * lap
    };
    let lo = if dim == Dim::Two { 2 } else { 0 };
    let mut detail = String::new();
    let mut ok = true;
    for t in [0.0, 50.0] {
        let mut defects = Vec::new();
        for m in [n, 2 * n] {
            let g = RadialGrid::new(dim, m)?;
            let u: Vec<f64> = (0..m)
                .map(|i| {
                    let q = 1.0 - g.nodes()[i] * g.nodes()[i];
                    q * q * q
                })
                .collect();
            let au = apply_a(&g, 1.0, t, &u);
            let d = (lo..m - 1)
                .map(|i| (au[i] - target(g.nodes()[i], t)).abs())
                .fold(0.0f64, f64::max);
            defects.push(d);
        }
        let order = (defects[0] / defects[1]).log2();
        // Composing two n^2-sized stencils floors the achievable defect near
        // eps n^4; once the fine grid reaches it the quotient stops carrying
        // order information (T = 0 on the line gets there first, its h^2
        // coefficient being smallest).
        let floor = 256.0 * f64::EPSILON * ((2 * n) as f64).powi(4);
        let at_floor = defects[1] <= floor;
        ok &= order >= 1.9 || at_floor;
        if !detail.is_empty() {
            detail.push_str(", ");
        }
        if at_floor && order < 1.9 {
            detail.push_str(&format!("T = {t}: fine-grid defect {:.2e} at the roundoff floor", defects[1]));
        } else {
            detail.push_str(&format!("T = {t}: order {order:.2}"));
        }
    }
    Ok((ok, detail))
}

fn beam_check(n: usize) -> Result<(bool, String)> {
    let grid = RadialGrid::new(Dim::One, n)?;
    let op = assemble_a(&grid, 1.0, 0.0)?;
    let m1 = principal_eigen(&op, 0.0, EIG_TOL)?.value;
    let rel = (m1 - BEAM_M1).abs() / BEAM_M1;
    Ok((rel <= 5e-2, format!("m1 = {m1}, rel err {rel:.2e}")))
}

fn wronskian_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k in 0..=200 {
        let x = 0.01 * (60.0f64 / 0.01).powf(k as f64 / 200.0);
        let w = x * (crate::bessel::i0(x) * crate::bessel::k1(x)
            + crate::bessel::i1(x) * crate::bessel::k0(x));
        worst = worst.max((w - 1.0).abs());
    }
    Ok((worst <= 1e-10, format!("worst x W(x) - 1 = {worst:.3e}")))
}

fn omega_clamped_check() -> Result<(bool, String)> {
    let cases = [
        (Dim::One, 1.0, 0.0),
        (Dim::One, 1.0, 1.0),
        (Dim::One, 2.0, 50.0),
        (Dim::Two, 1.0, 0.0),
        (Dim::Two, 1.0, 1.0),
        (Dim::Two, 2.0, 50.0),
    ];
    let mut worst = 0.0f64;
    let mut above = true;
    for (dim, b, t) in cases {
        let w = OmegaProfile::new(dim, b, t)?;
        worst = worst
            .max((w.eval(0.0) + 1.0).abs())
            .max(w.eval_deriv(0.0).abs())
            .max(w.eval(1.0).abs())
            .max(w.eval_deriv(1.0).abs());
        for k in 1..1000 {
            above &= w.eval(k as f64 / 1000.0) > -1.0;
        }
    }
    Ok((worst <= 1e-10 && above, format!("worst boundary defect {worst:.3e}")))
}

fn omega_disk_check() -> Result<(bool, String)> {
    let w = OmegaProfile::new(Dim::Two, 1.0, 0.0)?;
    let mut worst = 0.0f64;
    for k in 0..=1000 {
        let r = k as f64 / 1000.0;
        let want = if r == 0.0 { -1.0 } else { -1.0 + r * r - 2.0 * r * r * r.ln() };
        worst = worst.max((w.eval(r) - want).abs());
    }
    Ok((worst <= 1e-12, format!("sup gap {worst:.3e}")))
}

fn response_check(grid: &Arc<RadialGrid>) -> Result<(bool, String)> {
    let p = linear_response(grid, 1.0, 0.0)?;
    let denom = match grid.dim() {
        Dim::One => 24.0,
        Dim::Two => 64.0,
    };
    let rel = (p.values()[0] + 1.0 / denom).abs() * denom;
    Ok((rel <= 5e-2, format!("center {} vs -1/{denom}", p.values()[0])))
}

/// Constant-potential eigenvalue shift. The reference slope -2 of
/// (1 + x)^-2 at 0 is frozen here on purpose: `slope` is what the assembly
/// under test uses, so a sign error in the model derivative breaks this
/// check instead of cancelling out.
fn mu1_suite(grid: &Arc<RadialGrid>, lambda: f64, slope: f64) -> Result<(bool, String)> {
    let op = assemble_a(grid, 1.0, 0.0)?;
    let m1 = principal_eigen(&op, 0.0, EIG_TOL)?.value;
    let want = m1 - 2.0 * lambda;
    let injected = op.shifted(lambda * slope);
    let mu_inj = principal_eigen(&injected, want, EIG_TOL)?.value;
    let flat = RadialField::zeros(Arc::clone(grid));
    let assembled = op.with_potential(lambda, &flat)?;
    let mu_real = principal_eigen(&assembled, want, EIG_TOL)?.value;
    let tol = 1e-6 * (1.0 + want.abs());
    let e1 = (mu_inj - want).abs();
    let e2 = (mu_real - want).abs();
    Ok((e1 <= tol && e2 <= tol, format!("shift errs {e1:.2e} / {e2:.2e}")))
}

fn branch_checks(grid: &Arc<RadialGrid>) -> Result<(CheckResult, CheckResult)> {
    let params = ModelParams::new(grid.dim(), 1.0, 0.0, 1.0, 0.0)?;
    let opts = ContinuationOptions::default();
    let br = continue_branch(grid, &params, &opts)?;
    let fold = match br.fold.as_ref() {
        Some(f) => f,
        None => {
            return Ok((
                CheckResult {
                    name: "branch-fold",
                    status: Status::Fail,
                    detail: "no fold located".into(),
                },
                skipped("branch-certificates", "branch incomplete"),
            ))
        }
    };
    let hi = 4.0 * br.m1 / 27.0;
    let fold_ok = fold.lambda_star > 0.0
        && fold.lambda_star < hi * (1.0 + 1e-3)
        && fold.lambda_star < br.m1
        && fold.mu1_star.abs() <= 1e-3 * br.m1
        && fold.curvature < 0.0;
    let fold_res = CheckResult {
        name: "branch-fold",
        status: if fold_ok { Status::Pass } else { Status::Fail },
        detail: format!(
            "lambda* = {:.6}, mu1* = {:.2e}, curvature {:.3e}, 4 m1/27 = {:.6}",
            fold.lambda_star, fold.mu1_star, fold.curvature, hi
        ),
    };
    let mut violations = 0usize;
    for p in br.points.iter().skip(1) {
        let cert = certify(&p.u, p.lambda, br.m1, &br.phi1, p.mu1)?;
        if !cert.all_pass() {
            violations += 1;
        }
    }
    let certs = CheckResult {
        name: "branch-certificates",
        status: if violations == 0 { Status::Pass } else { Status::Fail },
        detail: format!("{violations} violations over {} points", br.points.len() - 1),
    };
    Ok((fold_res, certs))
}

fn modal_decay_check(grid: &Arc<RadialGrid>) -> Result<(bool, String)> {
    // one implicit Euler step on the principal mode at lambda = 0 divides
    // the coefficient by exactly 1 + m1 dt
    let op = assemble_a(grid, 1.0, 0.0)?;
    let pair = principal_eigen(&op, 0.0, EIG_TOL)?;
    let p = ModelParams::new(grid.dim(), 1.0, 0.0, 0.0, 0.0)?;
    let dt = 1e-3;
    let mut u = pair.vector.clone();
    u.scale(-0.01 / pair.vector.sup_norm());
    let state = EvolutionState { t: 0.0, u, v: None, dt };
    let next = step_parabolic(&state, &p, &op, 1e-9, 25)?;
    let before = grid.dot_w(state.u.values(), pair.vector.values());
    let after = grid.dot_w(next.u.values(), pair.vector.values());
    let ratio = after / before;
    let want = 1.0 / (1.0 + pair.value * dt);
    let rel = (ratio - want).abs() / want;
    Ok((rel <= 1e-5, format!("decay factor {ratio} vs {want}")))
}

fn dissipation_check(grid: &Arc<RadialGrid>) -> Result<(bool, String)> {
    let op = assemble_a(grid, 1.0, 0.0)?;
    let pair = principal_eigen(&op, 0.0, EIG_TOL)?;
    let p = ModelParams::new(grid.dim(), 1.0, 0.0, 0.0, 1.0)?;
    let u0 = RadialField::from_fn(Arc::clone(grid), |r| {
        -0.1 * (1.0 - r * r) * (1.0 - r * r)
    });
    let mut state = EvolutionState {
        t: 0.0,
        u: u0,
        v: Some(RadialField::zeros(Arc::clone(grid))),
        dt: 1e-3,
    };
    let (_, _, mut prev) = functionals(&state.u, state.v.as_ref(), &pair.vector, None, &p)?;
    let e0 = prev;
    let mut ok = true;
    for _ in 0..30 {
        state = step_hyperbolic(&state, &p, &op, 1e-9, 25)?;
        let (_, _, e) = functionals(&state.u, state.v.as_ref(), &pair.vector, None, &p)?;
        // midpoint quadrature of the potential leaves an O(dt^3) defect per
        // step, so allow a small uphill slack instead of strict monotonicity
        ok &= e <= prev + 1e-6 * (1.0 + e0.abs());
        prev = e;
    }
    Ok((ok, format!("E: {e0} -> {prev}")))
}

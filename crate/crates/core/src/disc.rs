//! Uniform radial grids on `[0, 1]`, ball quadrature, the discrete radial
//! Laplacian, and the banded clamped operator `A_h = B L_h L_h - T L_h`.
//!
//! Nodes are `r_i = i h`, `h = 1/n`, `i = 0..=n`. Clamped fields satisfy
//! `u_n = 0` (eliminated unknown) together with the reflection ghost
//! `u_{n+1} = u_{n-1}` encoding `du/dnu = 0`; the axis uses the parity ghost
//! `u_{-1} = u_1` and the L'Hopital limit `Delta u(0) = d u''(0)`.

use std::sync::Arc;

use crate::linalg::BandMatrix;
use crate::model::Dim;
use crate::{Error, Result};

/// Minimum number of cells; coarser grids cannot host the bandwidth-4 stencil.
pub const MIN_CELLS: usize = 8;

/// Uniform radial grid with ball quadrature weights.
///
/// Weight of node `i` is the exact measure of the annulus
/// `max(0, r_i - h/2) <= |x| <= min(1, r_i + h/2)`:
/// `w_i = c_d (r_hi^d - r_lo^d) / d`. The weights are positive and sum to
/// `|B_1|` exactly (telescoping); for `d = 1` this is the trapezoid rule.
#[derive(Debug)]
pub struct RadialGrid {
    dim: Dim,
    n: usize,
    h: f64,
    r: Vec<f64>,
    w: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: Dim, n: usize) -> Result<Arc<Self>> {
        if n < MIN_CELLS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_CELLS} cells, got {n}"
            )));
        }
        let h = 1.0 / n as f64;
        let d = dim.as_f64();
        let c_d = dim.surface_measure();
        let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let w: Vec<f64> = r
            .iter()
            .map(|&ri| {
                let lo = (ri - 0.5 * h).max(0.0);
                let hi = (ri + 0.5 * h).min(1.0);
                c_d * (hi.powi(dim.as_usize() as i32) - lo.powi(dim.as_usize() as i32)) / d
            })
            .collect();
        Ok(Arc::new(RadialGrid { dim, n, h, r, w }))
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Number of cells; nodes are `0..=n`, unknowns `0..n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// `int_B f dx` by the annulus rule; `f` given at all nodes.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n + 1);
        self.w.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Weighted inner product `(f, g)_w = int_B f g dx` over the given slices
    /// (full fields or unknown prefixes of equal length).
    pub fn dot_w(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        debug_assert!(f.len() <= self.n + 1);
        self.w.iter().zip(f.iter().zip(g)).map(|(w, (a, b))| w * a * b).sum()
    }

    /// `||f||_{L^2(B)}`.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.dot_w(f, f).max(0.0).sqrt()
    }

    /// `||f||_{L^1(B)}`.
    pub fn norm1(&self, f: &[f64]) -> f64 {
        self.w.iter().zip(f).map(|(w, v)| w * v.abs()).sum()
    }
}

/// Samples of a radial function at the grid nodes `0..=n`.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() + 1 {
            return Err(Error::GridMismatch);
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let len = grid.n() + 1;
        RadialField { grid, values: vec![0.0; len] }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField { grid, values }
    }

    /// Wraps unknown values `u_0..u_{n-1}` into a clamped field (`u_n = 0`).
    pub fn from_unknowns(grid: Arc<RadialGrid>, mut unknowns: Vec<f64>) -> Result<Self> {
        if unknowns.len() != grid.n() {
            return Err(Error::GridMismatch);
        }
        unknowns.push(0.0);
        Ok(RadialField { grid, values: unknowns })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Values at the unknown nodes `0..n`.
    pub fn unknowns(&self) -> &[f64] {
        &self.values[..self.grid.n()]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sup_diff(&self, other: &RadialField) -> Result<f64> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.n() != other.grid.n() {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}

/// Discrete Laplacian rows `0..n-1` (axis limit at 0, interior stencil
/// elsewhere); needs values at `0..=n` and never touches the wall ghost.
fn laplacian_interior(grid: &RadialGrid, v: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    let h2 = h * h;
    let d = grid.dim().as_f64();
    let mut out = vec![0.0; n];
    out[0] = 2.0 * d * (v[1] - v[0]) / h2;
    for i in 1..n {
        let conv = (d - 1.0) / grid.nodes()[i] * (v[i + 1] - v[i - 1]) / (2.0 * h);
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2 + conv;
    }
    out
}

/// Wall row `n` of the Laplacian under the clamped reflection ghost
/// `u_{n+1} = u_{n-1}`; the convective term cancels by the ghost symmetry.
fn laplacian_wall(grid: &RadialGrid, v: &[f64]) -> f64 {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    2.0 * (v[n - 1] - v[n]) / h2
}

/// Applies the discrete radial Laplacian at all nodes `0..=n`.
///
/// Assumes the field carries clamped data at the wall (the row at `r = 1`
/// uses the reflection ghost encoding `du/dnu = 0`); rows `0..n` are
/// ghost-free and valid for any radial field.
pub fn laplacian(u: &RadialField) -> RadialField {
    let grid = u.grid();
    let mut values = laplacian_interior(grid, u.values());
    values.push(laplacian_wall(grid, u.values()));
    RadialField { grid: Arc::clone(grid), values }
}

/// Applies `A = B Delta^2 - T Delta` with clamped closure to the unknown
/// values `u_0..u_{n-1}` (implicit `u_n = 0`); returns rows `0..n`.
///
/// The intermediate `w = Delta u` is formed at all nodes (wall row via the
/// reflection ghost); the second Laplacian only needs rows `0..n`, which are
/// ghost-free for `w`.
pub fn apply_a(grid: &RadialGrid, bending: f64, tension: f64, u: &[f64]) -> Vec<f64> {
    let n = grid.n();
    debug_assert_eq!(u.len(), n);
    let mut full = Vec::with_capacity(n + 1);
    full.extend_from_slice(u);
    full.push(0.0);
    let mut w = laplacian_interior(grid, &full);
    w.push(laplacian_wall(grid, &full));
    let lw = laplacian_interior(grid, &w);
    (0..n).map(|i| bending * lw[i] - tension * w[i]).collect()
}

/// What a `DiscreteOperator` represents; the potential/shift variants keep
/// the diagonal modifications explicit for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Laplacian,
    /// `B Delta^2 - T Delta` with clamped closure.
    Composite,
    /// `A + lambda diag(g'(u))`: the linearization around a state.
    WithPotential,
    /// `A + c I` (or a potential variant shifted): time-stepper systems.
    Shifted,
}

/// Banded matrix form of a clamped radial operator on the unknowns `0..n`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Arc<RadialGrid>,
    kind: OperatorKind,
    band: BandMatrix,
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn band(&self) -> &BandMatrix {
        &self.band
    }

    pub fn n_unknowns(&self) -> usize {
        self.grid.n()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.band.mul_vec(x)
    }

    /// `A + lambda diag(g'(u))`. Errors if any node of `u` is in the
    /// touchdown region.
    pub fn with_potential(&self, lambda: f64, u: &RadialField) -> Result<DiscreteOperator> {
        if u.grid().n() != self.grid.n() {
            return Err(Error::GridMismatch);
        }
        let mut band = self.band.clone();
        for (i, &ui) in u.unknowns().iter().enumerate() {
            band.add(i, i, lambda * crate::model::g_prime(ui)?);
        }
        Ok(DiscreteOperator { grid: Arc::clone(&self.grid), kind: OperatorKind::WithPotential, band })
    }

    /// `self + c I`, used by the implicit time steppers.
    pub fn shifted(&self, c: f64) -> DiscreteOperator {
        let mut band = self.band.clone();
        for i in 0..self.band.n() {
            band.add(i, i, c);
        }
        DiscreteOperator { grid: Arc::clone(&self.grid), kind: OperatorKind::Shifted, band }
    }
}

/// Assembles the tridiagonal clamped Laplacian on the unknowns.
pub fn assemble_laplacian(grid: &Arc<RadialGrid>) -> DiscreteOperator {
    let n = grid.n();
    let mut band = BandMatrix::zeros(n, 1, 1);
    let mut e = vec![0.0; n + 1];
    for j in 0..n {
        e[j] = 1.0;
        let col = laplacian_interior(grid, &e);
        e[j] = 0.0;
        for i in j.saturating_sub(1)..(j + 2).min(n) {
            if col[i] != 0.0 {
                band.set(i, j, col[i]);
            }
        }
    }
    DiscreteOperator { grid: Arc::clone(grid), kind: OperatorKind::Laplacian, band }
}

/// Assembles `A_h = B L_h L_h - T L_h` (pentadiagonal) on the unknowns by
/// pushing unit vectors through the stencil pipeline.
pub fn assemble_a(grid: &Arc<RadialGrid>, bending: f64, tension: f64) -> Result<DiscreteOperator> {
    if !(bending > 0.0) || !(tension >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "operator needs B > 0, T >= 0; got B = {bending}, T = {tension}"
        )));
    }
    let n = grid.n();
    let mut band = BandMatrix::zeros(n, 2, 2);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = apply_a(grid, bending, tension, &e);
        e[j] = 0.0;
        for i in 0..n {
            if col[i] != 0.0 {
                debug_assert!(i.abs_diff(j) <= 2, "stencil leaked outside the pentadiagonal band");
                band.set(i, j, col[i]);
            }
        }
    }
    Ok(DiscreteOperator { grid: Arc::clone(grid), kind: OperatorKind::Composite, band })
}

/// Central first derivative at all nodes; parity ghost at the axis, clamped
/// reflection ghost at the wall (both give zero slope there).
fn derivative_central(grid: &RadialGrid, v: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    let mut out = vec![0.0; n + 1];
    for i in 1..n {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    // out[0] = 0 (even parity), out[n] = 0 (reflection ghost)
    out
}

/// The scalar product `<u, v> = int_B [B Delta u Delta v + T grad u . grad v] dx`
/// under which the stationary operator is symmetric; both fields must be
/// clamped on the same grid.
pub fn inner_h2(u: &RadialField, v: &RadialField, bending: f64, tension: f64) -> Result<f64> {
    if u.grid().n() != v.grid().n() || u.grid().dim() != v.grid().dim() {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid();
    let lu = laplacian(u);
    let lv = laplacian(v);
    let du = derivative_central(grid, u.values());
    let dv = derivative_central(grid, v.values());
    let mut acc = 0.0;
    for i in 0..=grid.n() {
        acc += grid.weights()[i] * (bending * lu.values()[i] * lv.values()[i] + tension * du[i] * dv[i]);
    }
    Ok(acc)
}

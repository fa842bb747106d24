//! Closed-form material: the end-point profile `omega` and the linear
//! response of the clamped operator to a unit load.
//!
//! `omega` is the homogeneous solution of `B lap^2 w - T lap w = 0` pinned to
//! `w(0) = -1` with clamped wall values `w(1) = w'(1) = 0`; it is the profile
//! the branch end point approaches as the deflection closes the gap at the
//! center. Each parameter pair selects a four (or three) term fundamental
//! basis and the coefficients come from one small dense solve.

use std::sync::Arc;

use crate::bessel::{i0, i1, k0, k1, EULER_GAMMA};
use crate::disc::{RadialField, RadialGrid};
use crate::linalg::BandMatrix;
use crate::model::Dim;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Case {
    /// basis `1, r, r^2, r^3`
    LineNoTension,
    /// basis `1, r, cosh(mu r), sinh(mu r)`
    LineTension,
    /// basis `1, r^2, r^2 ln r`
    DiskNoTension,
    /// basis `1, ln r + K0(mu r), I0(mu r)`; the log pair shares one
    /// coefficient so the singularities at the origin cancel
    DiskTension,
}

/// End-point deflection profile; see the module notes.
#[derive(Debug, Clone)]
pub struct OmegaProfile {
    dim: Dim,
    mu: f64,
    case: Case,
    c: Vec<f64>,
}

fn solve_dense(rows: &[&[f64]], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = rhs.len();
    let mut a = BandMatrix::zeros(m, m - 1, m - 1);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a.set(i, j, v);
        }
    }
    Ok(a.factor()?.solve(rhs))
}

impl OmegaProfile {
    pub fn new(dim: Dim, bending: f64, tension: f64) -> Result<Self> {
        if !(bending > 0.0) || !(tension >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega profile needs bending > 0 and tension >= 0, got B = {bending}, T = {tension}"
            )));
        }
        let mu = (tension / bending).sqrt();
        let (case, c) = match (dim, tension > 0.0) {
            (Dim::One, false) => {
                let rows: [&[f64]; 4] = [
                    &[1.0, 0.0, 0.0, 0.0], // w(0)  = -1
                    &[0.0, 1.0, 0.0, 0.0], // w'(0) = 0
                    &[1.0, 1.0, 1.0, 1.0], // w(1)  = 0
                    &[0.0, 1.0, 2.0, 3.0], // w'(1) = 0
                ];
                (Case::LineNoTension, solve_dense(&rows, &[-1.0, 0.0, 0.0, 0.0])?)
            }
            (Dim::One, true) => {
                let (ch, sh) = (mu.cosh(), mu.sinh());
                let rows: [&[f64]; 4] = [
                    &[1.0, 0.0, 1.0, 0.0],
                    &[0.0, 1.0, 0.0, mu],
                    &[1.0, 1.0, ch, sh],
                    &[0.0, 1.0, mu * sh, mu * ch],
                ];
                (Case::LineTension, solve_dense(&rows, &[-1.0, 0.0, 0.0, 0.0])?)
            }
            (Dim::Two, false) => {
                let rows: [&[f64]; 3] = [
                    &[1.0, 0.0, 0.0], // w(0)  = -1
                    &[1.0, 1.0, 0.0], // w(1)  = 0
                    &[0.0, 2.0, 1.0], // w'(1) = 0
                ];
                (Case::DiskNoTension, solve_dense(&rows, &[-1.0, 0.0, 0.0])?)
            }
            (Dim::Two, true) => {
                // ln r + K0(mu r) -> -ln(mu/2) - gamma as r -> 0
                let l0 = -(0.5 * mu).ln() - EULER_GAMMA;
                let rows: [&[f64]; 3] = [
                    &[1.0, l0, 1.0],
                    &[1.0, k0(mu), i0(mu)],
                    &[0.0, 1.0 - mu * k1(mu), mu * i1(mu)],
                ];
                (Case::DiskTension, solve_dense(&rows, &[-1.0, 0.0, 0.0])?)
            }
        };
        Ok(OmegaProfile { dim, mu, case, c })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// `sqrt(T / B)`; zero without tension.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Profile value at radius `r` in `[0, 1]`.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!((0.0..=1.0 + 1e-12).contains(&r));
        let c = &self.c;
        match self.case {
            Case::LineNoTension => c[0] + r * (c[1] + r * (c[2] + r * c[3])),
            Case::LineTension => {
                c[0] + c[1] * r + c[2] * (self.mu * r).cosh() + c[3] * (self.mu * r).sinh()
            }
            Case::DiskNoTension => {
                if r == 0.0 {
                    c[0]
                } else {
                    c[0] + r * r * (c[1] + c[2] * r.ln())
                }
            }
            Case::DiskTension => {
                if r == 0.0 {
                    c[0] + c[1] * (-(0.5 * self.mu).ln() - EULER_GAMMA) + c[2]
                } else {
                    c[0] + c[1] * (r.ln() + k0(self.mu * r)) + c[2] * i0(self.mu * r)
                }
            }
        }
    }

    /// Radial derivative at `r` in `[0, 1]`.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        debug_assert!((0.0..=1.0 + 1e-12).contains(&r));
        let c = &self.c;
        match self.case {
            Case::LineNoTension => c[1] + r * (2.0 * c[2] + r * 3.0 * c[3]),
            Case::LineTension => {
                c[1] + self.mu * (c[2] * (self.mu * r).sinh() + c[3] * (self.mu * r).cosh())
            }
            Case::DiskNoTension => {
                if r == 0.0 {
                    0.0
                } else {
                    r * (2.0 * c[1] + c[2] * (2.0 * r.ln() + 1.0))
                }
            }
            Case::DiskTension => {
                if r == 0.0 {
                    return 0.0;
                }
                // d/dr [ln r + K0(mu r)] = 1/r - mu K1(mu r); near the axis
                // both terms blow up like 1/r and cancel, so use the regular
                // part of K1 (the pole cancels exactly against the log).
                let x = self.mu * r;
                let pair = if x <= 2.0 {
                    -self.mu * crate::bessel::k1_regular(x)
                } else {
                    1.0 / r - self.mu * k1(x)
                };
                pair * c[1] + c[2] * self.mu * i1(x)
            }
        }
    }

    /// Samples the profile at the nodes of `grid`.
    pub fn sample(&self, grid: &Arc<RadialGrid>) -> RadialField {
        RadialField::from_fn(Arc::clone(grid), |r| self.eval(r))
    }
}

/// Deflection per unit drive at vanishing drive: the solution of
/// `A p = -1` with clamped boundary values. The stationary branch leaves
/// the origin along `u = lambda p + O(lambda^2)`.
pub fn linear_response(grid: &Arc<RadialGrid>, bending: f64, tension: f64) -> Result<RadialField> {
    let op = crate::disc::assemble_a(grid, bending, tension)?;
    let rhs = vec![-1.0; grid.n()];
    let unknowns = op.band().factor()?.solve(&rhs);
    RadialField::from_unknowns(Arc::clone(grid), unknowns)
}

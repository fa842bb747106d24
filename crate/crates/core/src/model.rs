//! Model parameters, the MEMS nonlinearity `g`, and the scalar functions used
//! by touchdown bounds and branch certificates.

use crate::{Error, Result};

/// Guard band: evaluations at `xi <= -1 + XI_GUARD` are rejected as touchdown.
pub const XI_GUARD: f64 = 1e-12;

/// Spatial dimension of the unit ball (interval or disk).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn new(d: u32) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            _ => Err(Error::InvalidParameter(format!("d must be 1 or 2, got {d}"))),
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_usize() as f64
    }

    /// Surface measure of the unit sphere: `c_1 = 2`, `c_2 = 2 pi`.
    pub fn surface_measure(self) -> f64 {
        match self {
            Dim::One => 2.0,
            Dim::Two => 2.0 * std::f64::consts::PI,
        }
    }

    /// Volume of the unit ball: `|B_1| = c_d / d`.
    pub fn ball_volume(self) -> f64 {
        self.surface_measure() / self.as_f64()
    }
}

/// Parameters of `gamma^2 u_tt + u_t + B Delta^2 u - T Delta u = -lambda g(u)`.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub dim: Dim,
    /// Bending stiffness `B > 0`.
    pub bending: f64,
    /// Tension `T >= 0`.
    pub tension: f64,
    /// Drive parameter `lambda >= 0`.
    pub lambda: f64,
    /// Inertia coefficient `gamma >= 0`; zero selects the parabolic model.
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(dim: Dim, bending: f64, tension: f64, lambda: f64, gamma: f64) -> Result<Self> {
        if !(bending.is_finite() && bending > 0.0) {
            return Err(Error::InvalidParameter(format!("B must be positive, got {bending}")));
        }
        if !(tension.is_finite() && tension >= 0.0) {
            return Err(Error::InvalidParameter(format!("T must be nonnegative, got {tension}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be nonnegative, got {gamma}")));
        }
        Ok(ModelParams { dim, bending, tension, lambda, gamma })
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.gamma > 0.0
    }
}

fn admissible(xi: f64, what: &'static str) -> Result<f64> {
    let one_plus = 1.0 + xi;
    if !xi.is_finite() || one_plus <= XI_GUARD {
        Err(Error::Domain { what, value: xi })
    } else {
        Ok(one_plus)
    }
}

/// `g(xi) = (1 + xi)^{-2}`, positive, decreasing, convex on `(-1, inf)`.
pub fn g(xi: f64) -> Result<f64> {
    let p = admissible(xi, "g")?;
    Ok(1.0 / (p * p))
}

/// `g'(xi) = -2 (1 + xi)^{-3}`.
pub fn g_prime(xi: f64) -> Result<f64> {
    let p = admissible(xi, "g_prime")?;
    Ok(-2.0 / (p * p * p))
}

/// `g''(xi) = 6 (1 + xi)^{-4}`.
pub fn g_second(xi: f64) -> Result<f64> {
    let p = admissible(xi, "g_second")?;
    Ok(6.0 / (p * p * p * p))
}

/// `chi(z) = m1 z + lambda g(z)`: the right-hand side of the differential
/// inequality satisfied by `-N(t)`; its positivity drives touchdown bounds.
pub fn chi(z: f64, m1: f64, lambda: f64) -> Result<f64> {
    Ok(m1 * z + lambda * g(z)?)
}

/// Minimizer of `chi` on `(-1, inf)`: `z_lambda = (2 lambda / m1)^{1/3} - 1`.
pub fn z_lambda(m1: f64, lambda: f64) -> f64 {
    (2.0 * lambda / m1).cbrt() - 1.0
}

/// `chi(z_lambda) = 3 (m1^2 lambda / 4)^{1/3} - m1`, the minimum value of
/// `chi`; positive exactly when `lambda > 4 m1 / 27`.
pub fn chi_min(m1: f64, lambda: f64) -> f64 {
    3.0 * (m1 * m1 * lambda / 4.0).cbrt() - m1
}

/// Threshold above which `chi > 0` uniformly: `4 m1 / 27`.
pub fn lambda_chi_threshold(m1: f64) -> f64 {
    4.0 * m1 / 27.0
}

/// End-point diagnostic integrands evaluated at `z = 1 + u(0)`:
/// `I_1(z) = z^{-4/3} - 1` and `I_2(z) = -ln z`, on `0 < z <= 1` (both vanish
/// at `z = 1`). They blow up as `z -> 0+`, so boundedness of `lambda i_d`
/// along the branch certifies that touchdown cannot occur at finite `lambda`
/// with positive gap.
pub fn i_d(z: f64, dim: Dim) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 || z > 1.0 {
        return Err(Error::Domain { what: "i_d", value: z });
    }
    Ok(match dim {
        Dim::One => z.powf(-4.0 / 3.0) - 1.0,
        Dim::Two => -z.ln(),
    })
}

/// Bundle binding `(m1, lambda, d)` so the touchdown scalars can be passed
/// around as one value by the evolution driver and the CLI reports.
#[derive(Debug, Clone, Copy)]
pub struct ScalarDiagnostics {
    pub m1: f64,
    pub lambda: f64,
    pub dim: Dim,
}

impl ScalarDiagnostics {
    pub fn new(m1: f64, lambda: f64, dim: Dim) -> Self {
        ScalarDiagnostics { m1, lambda, dim }
    }

    pub fn chi(&self, z: f64) -> Result<f64> {
        chi(z, self.m1, self.lambda)
    }

    pub fn z_lambda(&self) -> f64 {
        z_lambda(self.m1, self.lambda)
    }

    pub fn chi_min(&self) -> f64 {
        chi_min(self.m1, self.lambda)
    }

    /// True when `lambda > 4 m1 / 27`, the regime where `chi` is uniformly
    /// positive and the general touchdown bound applies.
    pub fn supercritical(&self) -> bool {
        self.lambda > lambda_chi_threshold(self.m1)
    }

    pub fn i_d(&self, z: f64) -> Result<f64> {
        i_d(z, self.dim)
    }
}

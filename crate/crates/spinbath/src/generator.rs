//! The time-local generator of the map and its canonical Lindblad-form
//! decomposition.
//!
//! In the orthonormal operator basis {I, sx, sy, sz}/sqrt(2) the map is the
//! affine matrix F(t) with F_kl = Tr(G_k Phi(G_l)); the generator is
//! L(t) = F-dot(t) F(t)^{-1}, which exists wherever A - B and |C| stay away
//! from zero. Its entries collapse to logarithmic derivatives of the map
//! coefficients, giving the canonical rates
//!
//!   Gamma_dis = Gamma_abs = -1/2 d/dt ln(A - B),
//!   Gamma_deph            =  1/4 d/dt ln((A - B)/|C|^2),
//!   U                     = -1/2 d/dt arg C.
//!
//! The running integrals of the first two are available in closed form,
//! which is what the complete-positivity check uses.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::bath::{map_coefficients, subspace_terms, BathParams, MapCoefficients};
use crate::channel::DensityMatrix;
use crate::error::{Error, Result, SingularQuantity};

/// Basis indices into the 4x4 affine representation.
const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

/// L(t) in the ordered basis {I, sx, sy, sz}/sqrt(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMatrix {
    pub t: f64,
    entries: Matrix4<f64>,
}

impl GeneratorMatrix {
    pub fn entries(&self) -> &Matrix4<f64> {
        &self.entries
    }

    pub fn l_xx(&self) -> f64 {
        self.entries[(X, X)]
    }

    pub fn l_xy(&self) -> f64 {
        self.entries[(X, Y)]
    }

    pub fn l_zz(&self) -> f64 {
        self.entries[(Z, Z)]
    }

    /// The non-unital entry; vanishes identically because A + B = 1, but it
    /// is carried through the general expression as a regression check.
    pub fn l_z0(&self) -> f64 {
        self.entries[(Z, 0)]
    }

    /// Action of the generator on a state: d rho/dt with
    /// rho-dot_11 = (L_z0 + L_zz)/2 rho_11 + (L_z0 - L_zz)/2 rho_22 and
    /// rho-dot_12 = (L_xx + i L_xy) rho_12.
    pub fn apply(&self, rho: &DensityMatrix) -> Matrix2<Complex64> {
        let l = &self.entries;
        let d11 = 0.5 * (l[(Z, 0)] + l[(Z, Z)]) * rho.rho11()
            + 0.5 * (l[(Z, 0)] - l[(Z, Z)]) * rho.rho22();
        let d12 = Complex64::new(l[(X, X)], l[(X, Y)]) * rho.rho12();
        Matrix2::new(
            Complex64::new(d11, 0.0),
            d12,
            d12.conj(),
            Complex64::new(-d11, 0.0),
        )
    }
}

/// Canonical Lindblad-form rates at one time point. Dissipation and
/// absorption coincide because the bath is at infinite temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub t: f64,
    pub gamma_dis: f64,
    pub gamma_abs: f64,
    pub gamma_deph: f64,
    /// Coefficient of the induced sigma_z drive.
    pub u_rate: f64,
}

/// F(t) built analytically from the map coefficients. F(0) = identity.
pub fn f_matrix(params: &BathParams, t: f64) -> Result<Matrix4<f64>> {
    Ok(f_matrix_from(&map_coefficients(params, t)?))
}

/// F(t) from precomputed coefficients.
pub fn f_matrix_from(coeffs: &MapCoefficients) -> Matrix4<f64> {
    let mut f = Matrix4::zeros();
    f[(0, 0)] = 1.0;
    f[(X, X)] = coeffs.c.re;
    f[(X, Y)] = coeffs.c.im;
    f[(Y, X)] = -coeffs.c.im;
    f[(Y, Y)] = coeffs.c.re;
    f[(Z, 0)] = coeffs.a + coeffs.b - 1.0;
    f[(Z, Z)] = coeffs.a - coeffs.b;
    f
}

fn check_invertible(coeffs: &MapCoefficients, eps: f64) -> Result<(f64, f64)> {
    let gap = coeffs.a - coeffs.b;
    if gap.abs() <= eps {
        return Err(Error::SingularMap {
            t: coeffs.t,
            quantity: SingularQuantity::PopulationGap,
            magnitude: gap.abs(),
        });
    }
    let abs_c2 = coeffs.c.norm_sqr();
    if abs_c2.sqrt() <= eps {
        return Err(Error::SingularMap {
            t: coeffs.t,
            quantity: SingularQuantity::CoherenceMagnitude,
            magnitude: abs_c2.sqrt(),
        });
    }
    Ok((gap, abs_c2))
}

/// L(t) = F-dot F^{-1} in closed form. Fails with [`Error::SingularMap`]
/// where the inverse of F(t) does not exist.
pub fn generator_matrix(params: &BathParams, t: f64) -> Result<GeneratorMatrix> {
    generator_matrix_from(&map_coefficients(params, t)?, params.eps_degeneracy())
}

/// Closed-form generator entries from precomputed coefficients.
pub fn generator_matrix_from(coeffs: &MapCoefficients, eps: f64) -> Result<GeneratorMatrix> {
    let (gap, abs_c2) = check_invertible(coeffs, eps)?;
    let (c, dc) = (coeffs.c, coeffs.dc);

    let l_xx = (c.re * dc.re + c.im * dc.im) / abs_c2;
    // phase derivative of C; quadrant-safe for any sign of C_R, C_I
    let l_xy = (c.re * dc.im - c.im * dc.re) / abs_c2;
    let l_zz = (coeffs.da - coeffs.db) / gap;
    let l_z0 = (coeffs.da + coeffs.db) + l_zz * (1.0 - (coeffs.a + coeffs.b));

    let mut entries = Matrix4::zeros();
    entries[(X, X)] = l_xx;
    entries[(X, Y)] = l_xy;
    entries[(Y, X)] = -l_xy;
    entries[(Y, Y)] = l_xx;
    entries[(Z, 0)] = l_z0;
    entries[(Z, Z)] = l_zz;
    Ok(GeneratorMatrix {
        t: coeffs.t,
        entries,
    })
}

/// Canonical rates at time t.
pub fn canonical_rates(params: &BathParams, t: f64) -> Result<RateSet> {
    canonical_rates_from(&map_coefficients(params, t)?, params.eps_degeneracy())
}

/// Canonical rates from precomputed coefficients. U(t) comes from the phase
/// derivative of C (the ln(1 + (C_R/C_I)^2) form divides by C_I and is
/// singular whenever the coherence is real, including t = 0).
pub fn canonical_rates_from(coeffs: &MapCoefficients, eps: f64) -> Result<RateSet> {
    let (gap, abs_c2) = check_invertible(coeffs, eps)?;
    let gamma = -0.5 * (coeffs.da - coeffs.db) / gap;
    let l_xx = (coeffs.c.re * coeffs.dc.re + coeffs.c.im * coeffs.dc.im) / abs_c2;
    let theta_dot = (coeffs.c.re * coeffs.dc.im - coeffs.c.im * coeffs.dc.re) / abs_c2;
    let gamma_deph = 0.25 * ((coeffs.da - coeffs.db) / gap - 2.0 * l_xx);
    Ok(RateSet {
        t: coeffs.t,
        gamma_dis: gamma,
        gamma_abs: gamma,
        gamma_deph,
        u_rate: -0.5 * theta_dot,
    })
}

/// Right side of the canonical master equation at the given rates:
/// i U [rho, sz] + Gamma_dis/2 (sx rho sx - rho) + Gamma_dis/2
/// (sy rho sy - rho) + Gamma_deph (sz rho sz - rho), written out entrywise.
/// Valid as a superoperator on arbitrary (not necessarily Hermitian) 2x2
/// operators: the two coherence sectors decouple.
pub fn lindblad_rhs(rates: &RateSet, rho: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let d11 = rates.gamma_dis * (rho[(1, 1)] - rho[(0, 0)]);
    let decay = Complex64::new(
        -(rates.gamma_dis + 2.0 * rates.gamma_deph),
        -2.0 * rates.u_rate,
    );
    Matrix2::new(d11, decay * rho[(0, 1)], decay.conj() * rho[(1, 0)], -d11)
}

/// Running integrals of the dissipation and dephasing rates at one grid
/// point, evaluated in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpIntegralSample {
    pub t: f64,
    /// int_0^t Gamma_dis ds = -1/2 ln(A - B).
    pub int_dis: f64,
    /// int_0^t Gamma_deph ds = 1/4 ln((A - B)/|C|^2).
    pub int_deph: f64,
}

/// Complete-positivity report over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CpIntegralReport {
    pub samples: Vec<CpIntegralSample>,
    pub min_dis: f64,
    pub min_deph: f64,
}

impl CpIntegralReport {
    /// Both running integrals stay above -tol everywhere on the grid.
    pub fn all_nonnegative(&self, tol: f64) -> bool {
        self.min_dis >= -tol && self.min_deph >= -tol
    }
}

/// Evaluate the running rate integrals over a strictly increasing grid
/// starting at 0. Propagates [`Error::SingularMap`] from points where the
/// logarithms are undefined.
pub fn cp_integral_check(params: &BathParams, grid: &[f64]) -> Result<CpIntegralReport> {
    validate_grid(grid)?;
    let terms = subspace_terms(params);
    let eps = params.eps_degeneracy();
    let mut samples = Vec::with_capacity(grid.len());
    let mut min_dis = f64::INFINITY;
    let mut min_deph = f64::INFINITY;
    for &t in grid {
        let coeffs = crate::bath::map_coefficients_cached(params, &terms, t)?;
        let (gap, abs_c2) = check_invertible(&coeffs, eps)?;
        let int_dis = -0.5 * gap.ln();
        let int_deph = 0.25 * (gap / abs_c2).ln();
        min_dis = min_dis.min(int_dis);
        min_deph = min_deph.min(int_deph);
        samples.push(CpIntegralSample {
            t,
            int_dis,
            int_deph,
        });
    }
    Ok(CpIntegralReport {
        samples,
        min_dis,
        min_deph,
    })
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("non-finite grid point".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "grid must start at 0, got {}",
            grid[0]
        )));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidGrid(format!(
                "grid not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Uniform grid 0, dt, 2 dt, ..., covering [0, t_max].
pub fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !dt.is_finite() || !t_max.is_finite() || dt <= 0.0 || t_max <= dt {
        return Err(Error::InvalidGrid(format!(
            "need 0 < dt < t_max, got dt = {dt}, t_max = {t_max}"
        )));
    }
    let steps = (t_max / dt).round() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

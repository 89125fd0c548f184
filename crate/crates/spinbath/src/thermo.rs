//! Entropy production, purity dynamics, and the witnesses they provide.
//!
//! The bath sits at infinite temperature, so the net heat flux vanishes
//! (dissipation and absorption rates coincide) and the entropy production
//! rate collapses to sigma = dS/dt with the closed form
//! sigma = 1/2 ln((1-x)/(1+x)) dx/dt in the Bloch norm x. Entropies are in
//! nats (natural logarithm) throughout. Negative sigma -- equivalently a
//! rising purity -- witnesses the indivisibility of the map.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::bath::{
    map_coefficients, map_coefficients_cached, subspace_terms, BathParams, MapCoefficients,
};
use crate::channel::DensityMatrix;
use crate::error::{Error, Result};
use crate::generator::{uniform_grid, RateSet};

/// Everything the thermodynamic trace reports at one time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoSample {
    pub t: f64,
    /// von Neumann entropy S(rho(t)) in nats.
    pub entropy: f64,
    /// Entropy production rate sigma(t) = dS/dt (zero flux).
    pub sigma: f64,
    /// Bloch norm x(t).
    pub bloch_x: f64,
    /// Tr rho^2 = (1 + x^2)/2.
    pub purity: f64,
    /// dP/dt along the trajectory.
    pub purity_rate: f64,
    /// kappa = -dS/dt, the witness integrand.
    pub kappa: f64,
}

/// Binary entropy of the eigenvalues (1 +- x)/2, in nats.
pub fn entropy_from_bloch_norm(x: f64) -> f64 {
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&x));
    let lp = (1.0 + x) / 2.0;
    let lm = ((1.0 - x) / 2.0).max(0.0);
    let mut s = 0.0;
    if lp > 0.0 {
        s -= lp * lp.ln();
    }
    if lm > 0.0 {
        s -= lm * lm.ln();
    }
    s
}

/// von Neumann entropy of a state, in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_from_bloch_norm(rho.bloch_norm().min(1.0))
}

/// Bloch norm and its analytic derivative along the trajectory started at
/// `rho0`: x^2 = w0^2 (A-B)^2 + 4 |rho12(0)|^2 |C|^2. Both stay finite at
/// pure states (unlike sigma).
pub fn bloch_norm_and_rate(coeffs: &MapCoefficients, rho0: &DensityMatrix) -> (f64, f64) {
    let w0 = rho0.rho11() - rho0.rho22();
    let coh2 = 4.0 * rho0.rho12().norm_sqr();
    let gap = coeffs.a - coeffs.b;
    let x2 = w0 * w0 * gap * gap + coh2 * coeffs.c.norm_sqr();
    let x = x2.sqrt();
    if x == 0.0 {
        return (0.0, 0.0);
    }
    let c_dot_c = coeffs.c.re * coeffs.dc.re + coeffs.c.im * coeffs.dc.im;
    let dx = (w0 * w0 * gap * (coeffs.da - coeffs.db) + coh2 * c_dot_c) / x;
    (x, dx)
}

fn sigma_from(coeffs: &MapCoefficients, rho0: &DensityMatrix, eps: f64) -> Result<(f64, f64, f64)> {
    let (x, dx) = bloch_norm_and_rate(coeffs, rho0);
    if x >= 1.0 - eps {
        // ln((1-x)/(1+x)) diverges; the one-sided limit is -inf * sign(dx).
        let limit = if dx > 0.0 {
            f64::NEG_INFINITY
        } else if dx < 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        return Err(Error::PureState {
            t: coeffs.t,
            x,
            limit,
        });
    }
    let sigma = if x == 0.0 {
        // maximally mixed: entropy is stationary
        0.0
    } else {
        0.5 * ((1.0 - x) / (1.0 + x)).ln() * dx
    };
    Ok((sigma, x, dx))
}

/// sigma(t) = 1/2 ln((1-x)/(1+x)) dx/dt for the trajectory started at
/// `rho0`, assembled from the analytic coefficient derivatives.
///
/// At numerically pure states (x >= 1 - eps_degeneracy) the formula is a
/// (-inf * 0)-type limit; the sample is flagged [`Error::PureState`], whose
/// `limit` field carries the one-sided limit of sigma.
pub fn entropy_production_rate(params: &BathParams, rho0: &DensityMatrix, t: f64) -> Result<f64> {
    let coeffs = map_coefficients(params, t)?;
    sigma_from(&coeffs, rho0, params.eps_degeneracy()).map(|(sigma, _, _)| sigma)
}

/// Entropy flux into the bath. The canonical rates satisfy
/// Gamma_dis = Gamma_abs (infinite-temperature bath), so the net heat flow
/// dQ/dt vanishes identically and with it the flux; the definition is kept
/// callable so that sigma = dS/dt + flux stays visible.
pub fn entropy_flux(_rates: &RateSet, _rho: &DensityMatrix) -> f64 {
    0.0
}

/// Full thermodynamic sample along the exact trajectory.
pub fn thermo_sample(params: &BathParams, rho0: &DensityMatrix, t: f64) -> Result<ThermoSample> {
    let coeffs = map_coefficients(params, t)?;
    thermo_sample_from(&coeffs, rho0, params.eps_degeneracy())
}

/// Same as [`thermo_sample`] from precomputed coefficients.
pub fn thermo_sample_from(
    coeffs: &MapCoefficients,
    rho0: &DensityMatrix,
    eps: f64,
) -> Result<ThermoSample> {
    let (sigma, x, dx) = sigma_from(coeffs, rho0, eps)?;
    Ok(ThermoSample {
        t: coeffs.t,
        entropy: entropy_from_bloch_norm(x),
        sigma,
        bloch_x: x,
        purity: (1.0 + x * x) / 2.0,
        purity_rate: x * dx,
        kappa: -sigma,
    })
}

/// The Hermitian Lindblad decomposition of the channel: operators
/// {sx, sy, sz} with rates {Gamma_dis/2, Gamma_dis/2, Gamma_deph}.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianLindbladSet {
    operators: [Matrix2<Complex64>; 3],
    rates: [f64; 3],
}

fn pauli_x() -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

fn pauli_y() -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 0.0),
    )
}

fn pauli_z() -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
    )
}

impl HermitianLindbladSet {
    pub fn from_rates(rates: &RateSet) -> Self {
        Self {
            operators: [pauli_x(), pauli_y(), pauli_z()],
            rates: [
                0.5 * rates.gamma_dis,
                0.5 * rates.gamma_dis,
                rates.gamma_deph,
            ],
        }
    }

    pub fn operators(&self) -> &[Matrix2<Complex64>; 3] {
        &self.operators
    }

    pub fn rates(&self) -> &[f64; 3] {
        &self.rates
    }
}

/// dS/dt from the spectral double sum
/// (1/2) sum_jkl Gamma_j (lam_k - lam_l)(ln lam_k - ln lam_l)
/// |<lam_k|V_j|lam_l>|^2 over the eigenpairs of rho.
///
/// Vanishes termwise for rho = I/2 and is manifestly non-negative whenever
/// every rate is. Pure states are flagged (ln of a zero eigenvalue).
pub fn entropy_rate_spectral(lind: &HermitianLindbladSet, rho: &DensityMatrix) -> Result<f64> {
    let x = rho.bloch_norm();
    if x >= 1.0 - 1e-12 {
        return Err(Error::PureState {
            t: f64::NAN,
            x,
            limit: f64::NAN,
        });
    }
    if x < 1e-15 {
        return Ok(0.0);
    }
    let eig = rho.matrix().symmetric_eigen();
    let lam = [eig.eigenvalues[0], eig.eigenvalues[1]];
    let vecs = eig.eigenvectors;
    let mut total = 0.0;
    for (op, rate) in lind.operators.iter().zip(lind.rates.iter()) {
        for k in 0..2 {
            for l in 0..2 {
                if k == l {
                    continue;
                }
                let amp = (vecs.column(k).adjoint() * op * vecs.column(l))[(0, 0)];
                total +=
                    0.5 * rate * (lam[k] - lam[l]) * (lam[k].ln() - lam[l].ln()) * amp.norm_sqr();
            }
        }
    }
    Ok(total)
}

/// dP/dt = -sum_i Gamma_i Q_i together with the quantumness diagnostics
/// Q_i = ||[V_i, rho]||_HS^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityRate {
    pub rate: f64,
    pub quantumness: [f64; 3],
}

/// Purity rate through the commutator-norm sum of the Hermitian Lindblad
/// decomposition.
pub fn purity_rate(lind: &HermitianLindbladSet, rho: &DensityMatrix) -> PurityRate {
    let r = rho.matrix();
    let mut quantumness = [0.0; 3];
    let mut rate = 0.0;
    for (i, (op, gamma)) in lind.operators.iter().zip(lind.rates.iter()).enumerate() {
        let comm = op * r - r * op;
        let q = comm.norm_squared(); // Tr[X^dag X]
        quantumness[i] = q;
        rate -= gamma * q;
    }
    PurityRate { rate, quantumness }
}

/// Horizon integral of the positive part of kappa = -dS/dt, with the
/// fraction of (pure-state) singular samples that had to be skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessPhi {
    pub phi: f64,
    pub skipped_fraction: f64,
}

/// Entropy-based non-Markovianity witness phi = int_{kappa > 0} kappa dt for
/// a fixed initial state, by trapezoidal quadrature over [0, horizon].
pub fn witness_phi(
    params: &BathParams,
    rho0: &DensityMatrix,
    horizon: f64,
    dt: f64,
) -> Result<WitnessPhi> {
    let grid = uniform_grid(horizon, dt)?;
    let terms = subspace_terms(params);
    let eps = params.eps_degeneracy();
    let mut skipped = 0usize;
    let samples: Vec<Option<f64>> = grid
        .iter()
        .map(|&t| {
            let coeffs = map_coefficients_cached(params, &terms, t).ok()?;
            match sigma_from(&coeffs, rho0, eps) {
                Ok((sigma, _, _)) => Some((-sigma).max(0.0)),
                Err(_) => None,
            }
        })
        .inspect(|s| {
            if s.is_none() {
                skipped += 1;
            }
        })
        .collect();
    let mut phi = 0.0;
    for (pair, w) in samples.windows(2).zip(grid.windows(2)) {
        if let (Some(a), Some(b)) = (pair[0], pair[1]) {
            phi += 0.5 * (a + b) * (w[1] - w[0]);
        }
    }
    Ok(WitnessPhi {
        phi,
        skipped_fraction: skipped as f64 / grid.len() as f64,
    })
}

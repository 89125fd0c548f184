//! Non-Markovianity diagnostics: divisibility breaking (RHP) and trace
//! distance revivals (BLP).
//!
//! For this channel the instantaneous divisibility violation reduces to
//! q(t) = (|Gamma_dis| - Gamma_dis) + (|Gamma_deph| - Gamma_deph), and the
//! trace distance between any two evolving states has the closed form
//! D(t) = sqrt(a^2 (A-B)^2 + |b|^2 |C|^2) in terms of the initial population
//! and coherence differences a and b. The full BLP measure would maximize
//! over all state pairs; here a caller-supplied pair set provides a lower
//! bound.

use num_complex::Complex64;

use crate::bath::{map_coefficients_cached, subspace_terms, BathParams, MapCoefficients};
use crate::channel::DensityMatrix;
use crate::error::{Error, Result, SingularQuantity};
use crate::generator::{canonical_rates_from, uniform_grid, RateSet};

/// Divisibility-violation sample q(t) split by channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhpSample {
    pub t: f64,
    /// |Gamma_dis| - Gamma_dis: the thermal (dissipation + absorption) part.
    pub q_dis: f64,
    /// |Gamma_deph| - Gamma_deph.
    pub q_deph: f64,
}

impl RhpSample {
    pub fn q_total(&self) -> f64 {
        self.q_dis + self.q_deph
    }
}

/// q(t) from the canonical rates: componentwise 2 max(0, -Gamma).
pub fn rhp_q(rates: &RateSet) -> RhpSample {
    RhpSample {
        t: rates.t,
        q_dis: rates.gamma_dis.abs() - rates.gamma_dis,
        q_deph: rates.gamma_deph.abs() - rates.gamma_deph,
    }
}

/// RHP non-Markovianity over a finite horizon: eta = int_0^T q dt and
/// G = eta / (eta + 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhpSummary {
    pub eta: f64,
    pub g_measure: f64,
    /// Fraction of grid points where the generator was singular; those are
    /// skipped by the quadrature and reported here.
    pub undefined_fraction: f64,
}

/// Integrate q(t) by trapezoids over a uniform grid on [0, horizon].
/// Sub-intervals with an undefined endpoint are skipped; if more than 1% of
/// the grid is undefined the whole summary is refused.
pub fn rhp_measure(params: &BathParams, horizon: f64, dt: f64) -> Result<RhpSummary> {
    let grid = uniform_grid(horizon, dt)?;
    let terms = subspace_terms(params);
    let eps = params.eps_degeneracy();

    let mut undefined = 0usize;
    let samples: Vec<Option<f64>> = grid
        .iter()
        .map(|&t| {
            let coeffs = map_coefficients_cached(params, &terms, t).ok()?;
            match canonical_rates_from(&coeffs, eps) {
                Ok(rates) => Some(rhp_q(&rates).q_total()),
                Err(Error::SingularMap { .. }) => None,
                Err(_) => None,
            }
        })
        .inspect(|s| {
            if s.is_none() {
                undefined += 1;
            }
        })
        .collect();

    let fraction = undefined as f64 / grid.len() as f64;
    if fraction > 0.01 {
        return Err(Error::TooManyUndefined {
            percent: 100.0 * fraction,
            limit_percent: 1.0,
        });
    }

    let mut eta = 0.0;
    for (pair, w) in samples.windows(2).zip(grid.windows(2)) {
        if let (Some(a), Some(b)) = (pair[0], pair[1]) {
            eta += 0.5 * (a + b) * (w[1] - w[0]);
        }
    }
    Ok(RhpSummary {
        eta,
        g_measure: eta / (eta + 1.0),
        undefined_fraction: fraction,
    })
}

/// A pair of initial states with its precomputed population difference
/// a = rho^1_11(0) - rho^2_11(0) and coherence difference
/// b = rho^1_12(0) - rho^2_12(0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePair {
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub a: f64,
    pub b: Complex64,
}

impl StatePair {
    pub fn new(rho1: DensityMatrix, rho2: DensityMatrix) -> Self {
        Self {
            rho1,
            rho2,
            a: rho1.rho11() - rho2.rho11(),
            b: rho1.rho12() - rho2.rho12(),
        }
    }

    /// The |+>, |-> pair (a = 0, b = 1): D(t) = |C(t)| exactly.
    pub fn plus_minus() -> Self {
        Self::new(DensityMatrix::plus(), DensityMatrix::minus())
    }

    /// The |0>, |1> pair (a = 1, b = 0): D(t) = A(t) - B(t).
    pub fn zero_one() -> Self {
        Self::new(DensityMatrix::ket0(), DensityMatrix::ket1())
    }

    /// The |+i>, |-i> pair (a = 0, |b| = 1).
    pub fn plus_minus_i() -> Self {
        Self::new(DensityMatrix::plus_i(), DensityMatrix::minus_i())
    }

    /// The default pair set used for the BLP lower bound.
    pub fn default_pairs() -> Vec<Self> {
        vec![Self::plus_minus(), Self::zero_one(), Self::plus_minus_i()]
    }

    /// Antipodal pure-state pairs on a latitude/longitude grid of the Bloch
    /// sphere, for a denser search than [`StatePair::default_pairs`]. Only
    /// a hemisphere is enumerated; the antipode supplies the other half.
    pub fn bloch_grid(resolution: usize) -> Vec<Self> {
        let res = resolution.max(1);
        let mut pairs = Vec::new();
        for i in 0..=res {
            let polar = std::f64::consts::PI * i as f64 / (2 * res) as f64;
            let azimuths = if i == 0 { 1 } else { 2 * res };
            for k in 0..azimuths {
                let azimuth = 2.0 * std::f64::consts::PI * k as f64 / azimuths as f64;
                let (rx, ry, rz) = (
                    polar.sin() * azimuth.cos(),
                    polar.sin() * azimuth.sin(),
                    polar.cos(),
                );
                pairs.push(Self::new(
                    DensityMatrix::from_bloch(rx, ry, rz).expect("unit Bloch vector"),
                    DensityMatrix::from_bloch(-rx, -ry, -rz).expect("unit Bloch vector"),
                ));
            }
        }
        pairs
    }
}

/// Trace distance between the two evolved states of the pair at the time of
/// `coeffs`, in closed form.
pub fn trace_distance(coeffs: &MapCoefficients, pair: &StatePair) -> f64 {
    let gap = coeffs.a - coeffs.b;
    (pair.a * pair.a * gap * gap + pair.b.norm_sqr() * coeffs.c.norm_sqr()).sqrt()
}

/// p(t) = d/dt D(t) assembled from the analytic coefficient derivatives.
/// Undefined (flagged [`Error::SingularMap`] on the trace distance) when
/// D is below tolerance.
pub fn blp_p(params: &BathParams, pair: &StatePair, t: f64) -> Result<f64> {
    let coeffs = crate::bath::map_coefficients(params, t)?;
    blp_p_from(&coeffs, pair, params.eps_degeneracy())
}

/// Same as [`blp_p`] from precomputed coefficients.
pub fn blp_p_from(coeffs: &MapCoefficients, pair: &StatePair, eps: f64) -> Result<f64> {
    let d = trace_distance(coeffs, pair);
    if d <= eps {
        return Err(Error::SingularMap {
            t: coeffs.t,
            quantity: SingularQuantity::TraceDistance,
            magnitude: d,
        });
    }
    let gap = coeffs.a - coeffs.b;
    let dgap = coeffs.da - coeffs.db;
    let c_dot_c = coeffs.c.re * coeffs.dc.re + coeffs.c.im * coeffs.dc.im;
    Ok((pair.a * pair.a * gap * dgap + pair.b.norm_sqr() * c_dot_c) / d)
}

/// Lower bound on the BLP measure: the maximum over the supplied pairs of
/// int max(0, p(t)) dt on [0, horizon]. Undefined samples are skipped.
pub fn blp_lower_bound(
    params: &BathParams,
    pairs: &[StatePair],
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidGrid("need at least one state pair".into()));
    }
    let grid = uniform_grid(horizon, dt)?;
    let terms = subspace_terms(params);
    let eps = params.eps_degeneracy();
    let mut best = 0.0f64;
    for pair in pairs {
        let samples: Vec<Option<f64>> = grid
            .iter()
            .map(|&t| {
                let coeffs = map_coefficients_cached(params, &terms, t).ok()?;
                blp_p_from(&coeffs, pair, eps).ok().map(|p| p.max(0.0))
            })
            .collect();
        let mut acc = 0.0;
        for (pairw, w) in samples.windows(2).zip(grid.windows(2)) {
            if let (Some(a), Some(b)) = (pairw[0], pairw[1]) {
                acc += 0.5 * (a + b) * (w[1] - w[0]);
            }
        }
        best = best.max(acc);
    }
    Ok(best)
}

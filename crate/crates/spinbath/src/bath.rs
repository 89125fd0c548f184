//! The spin-bath model and the exact coefficients of its dynamical map.
//!
//! A central spin-1/2 with level splitting `omega0` couples uniformly (XXX
//! Heisenberg, strength `alpha`) to N non-interacting bath spins prepared in
//! the maximally mixed state. Both J^2 and the total z angular momentum are
//! conserved, so the composite evolution decomposes into two-dimensional
//! blocks spanned by |up>|j,m> and |down>|j,m+1>. Summing the block solutions
//! over the (j, m) ladder with the degeneracy weights N_j / 2^N yields the
//! reduced map
//!
//!   rho_11(t) = A(t) rho_11(0) + B(t) rho_22(0),
//!   rho_12(t) = C(t) rho_12(0),
//!
//! with A + B = 1 (the map is unital). C(t) carries a global e^{i omega0 t}
//! factor, i.e. it is expressed in the frame co-rotating with the free
//! precession: at alpha = 0 the brackets reduce to e^{-i omega0 t} and
//! C(t) = 1 identically.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Physical configuration of the bath plus numerical policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    n: u32,
    alpha: f64,
    omega0: f64,
    eps_degeneracy: f64,
}

/// Default tolerance below which denominators count as singular.
pub const DEFAULT_EPS_DEGENERACY: f64 = 1e-12;

impl BathParams {
    /// N bath spins, coupling `alpha`, level splitting `omega0` (sets the
    /// time unit). Fails on N = 0, non-finite alpha, or omega0 <= 0.
    pub fn new(n: u32, alpha: f64, omega0: f64) -> Result<Self> {
        Self::with_eps(n, alpha, omega0, DEFAULT_EPS_DEGENERACY)
    }

    /// Same as [`BathParams::new`] with an explicit degeneracy tolerance.
    pub fn with_eps(n: u32, alpha: f64, omega0: f64, eps_degeneracy: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite, got {alpha}"
            )));
        }
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        if !eps_degeneracy.is_finite() || eps_degeneracy <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "eps_degeneracy must be positive, got {eps_degeneracy}"
            )));
        }
        Ok(Self {
            n,
            alpha,
            omega0,
            eps_degeneracy,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn eps_degeneracy(&self) -> f64 {
        self.eps_degeneracy
    }
}

/// One conserved (j, m) subspace of the bath together with everything the
/// coefficient sums need: the probability weight N_j / 2^N, the detunings
/// Omega_+/-, the Rabi-like half-splittings mu_+/-, and the ladder factors
/// b_+/-.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceTerm {
    /// Total bath angular momentum (integer or half-integer).
    pub j: f64,
    /// z projection, -j <= m <= j.
    pub m: f64,
    /// N_j / 2^N; sums to 1 over the whole ladder.
    pub weight: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
}

/// ln of the binomial coefficient C(n, k) via log-gamma.
fn ln_choose(n: u32, k: u32) -> f64 {
    libm::lgamma(f64::from(n) + 1.0)
        - libm::lgamma(f64::from(k) + 1.0)
        - libm::lgamma(f64::from(n - k) + 1.0)
}

/// Enumerate the (j, m) ladder of the bath.
///
/// j steps by 1 from 0 (even N) or 1/2 (odd N) up to N/2, m runs over the
/// full range -j..j. Weights are evaluated in log space so that the
/// enumeration stays finite for N up to at least 10^3: the degeneracy
/// difference of binomials collapses to
///
///   N_j = C(N, N/2 + j) * (2j + 1) / (N/2 + j + 1),
///
/// which avoids forming the (overflowing) binomials themselves. Terms are
/// ordered by increasing j, then increasing m.
pub fn subspace_terms(params: &BathParams) -> Vec<SubspaceTerm> {
    let n = params.n;
    let alpha = params.alpha;
    let omega0 = params.omega0;
    let n_f = f64::from(n);

    let mut terms = Vec::with_capacity(((n as usize / 2 + 1) * (n as usize + 2)) / 2 + n as usize);
    // twice_j keeps j exact for odd N; runs n % 2, n % 2 + 2, ..., n.
    let mut twice_j = n % 2;
    while twice_j <= n {
        let j = f64::from(twice_j) / 2.0;
        // k = N/2 + j is always an integer.
        let k = (n + twice_j) / 2;
        let ln_weight = ln_choose(n, k) + f64::from(twice_j + 1).ln()
            - (f64::from(n + twice_j + 2) / 2.0).ln()
            - n_f * std::f64::consts::LN_2;
        let weight = ln_weight.exp();

        let mut twice_m = -(twice_j as i64);
        while twice_m <= twice_j as i64 {
            let m = twice_m as f64 / 2.0;
            // b_+(j, j) and b_-(j, -j) vanish identically; clamp roundoff.
            let b_plus = (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt();
            let b_minus = (j * (j + 1.0) - m * (m - 1.0)).max(0.0).sqrt();
            let omega_plus = omega0 + alpha * (m + 0.5);
            let omega_minus = -omega0 + alpha * (-m + 0.5);
            let mu_plus = 0.5 * (omega_plus * omega_plus + alpha * alpha * b_plus * b_plus).sqrt();
            let mu_minus =
                0.5 * (omega_minus * omega_minus + alpha * alpha * b_minus * b_minus).sqrt();
            terms.push(SubspaceTerm {
                j,
                m,
                weight,
                omega_plus,
                omega_minus,
                mu_plus,
                mu_minus,
                b_plus,
                b_minus,
            });
            twice_m += 2;
        }
        twice_j += 2;
    }
    terms
}

/// The map coefficients A, B, C at one time point together with their
/// analytic first time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCoefficients {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: Complex64,
    pub da: f64,
    pub db: f64,
    pub dc: Complex64,
}

impl MapCoefficients {
    /// A(t) - B(t) = exp(-2 int_0^t Gamma_dis); positive wherever the
    /// generator exists.
    pub fn population_gap(&self) -> f64 {
        self.a - self.b
    }

    /// d/dt (A - B).
    pub fn population_gap_rate(&self) -> f64 {
        self.da - self.db
    }

    /// |C(t)|.
    pub fn coherence_magnitude(&self) -> f64 {
        self.c.norm()
    }
}

/// sin(mu t)/mu with its analytic mu -> 0 limit t.
#[inline]
fn sin_over(mu: f64, t: f64, eps: f64) -> f64 {
    if mu < eps {
        t
    } else {
        (mu * t).sin() / mu
    }
}

/// sin(2 mu t)/mu with its analytic mu -> 0 limit 2t.
#[inline]
fn sin2_over(mu: f64, t: f64, eps: f64) -> f64 {
    if mu < eps {
        2.0 * t
    } else {
        (2.0 * mu * t).sin() / mu
    }
}

/// Evaluate A, B, C and their derivatives at time t.
///
/// Builds the subspace ladder on every call; loops over many time points
/// should enumerate once and use [`map_coefficients_cached`].
pub fn map_coefficients(params: &BathParams, t: f64) -> Result<MapCoefficients> {
    let terms = subspace_terms(params);
    map_coefficients_cached(params, &terms, t)
}

/// Evaluate A, B, C and their derivatives at time t from a pre-enumerated
/// ladder (see [`subspace_terms`]).
///
/// Everything is term-analytic: derivatives come from d/dt cos^2(mu t) =
/// -mu sin(2 mu t) and friends, never from finite differences. The removable
/// mu = 0 singularities (possible only when Omega and b vanish together) are
/// replaced by their limits below `eps_degeneracy`.
///
/// Pure function of its inputs; safe to call concurrently over disjoint
/// time points.
pub fn map_coefficients_cached(
    params: &BathParams,
    terms: &[SubspaceTerm],
    t: f64,
) -> Result<MapCoefficients> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidTime(t));
    }
    let eps = params.eps_degeneracy;
    let alpha = params.alpha;

    let mut a = 0.0;
    let mut b = 0.0;
    let mut db = 0.0;
    let mut s = Complex64::new(0.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0);

    for term in terms {
        let w = term.weight;

        // Populations: the dissipative channel pairs with the raising ladder
        // factor b_+ through the |+>|j,m> <-> |->|j,m+1> block.
        let cos_p = (term.mu_plus * t).cos();
        let sin_p = (term.mu_plus * t).sin();
        let s_over_p = sin_over(term.mu_plus, t, eps);
        let half_om_p = 0.5 * term.omega_plus;
        let coupling2 = 0.25 * alpha * alpha * term.b_plus * term.b_plus;

        a += w * (cos_p * cos_p + half_om_p * half_om_p * s_over_p * s_over_p);
        b += w * coupling2 * s_over_p * s_over_p;
        db += w * coupling2 * sin2_over(term.mu_plus, t, eps);

        // Coherence: product of the two block brackets; the e^{i omega0 t}
        // prefactor is applied once outside the sum.
        let cos_m = (term.mu_minus * t).cos();
        let sin_m = (term.mu_minus * t).sin();
        let s_over_m = sin_over(term.mu_minus, t, eps);
        let half_om_m = 0.5 * term.omega_minus;

        let br_p = Complex64::new(cos_p, -half_om_p * s_over_p);
        let br_m = Complex64::new(cos_m, half_om_m * s_over_m);
        let dbr_p = Complex64::new(-term.mu_plus * sin_p, -half_om_p * cos_p);
        let dbr_m = Complex64::new(-term.mu_minus * sin_m, half_om_m * cos_m);

        s += w * br_p * br_m;
        ds += w * (dbr_p * br_m + br_p * dbr_m);
    }

    let phase = Complex64::from_polar(1.0, params.omega0 * t);
    let c = phase * s;
    let dc = phase * (Complex64::new(0.0, params.omega0) * s + ds);

    Ok(MapCoefficients {
        t,
        a,
        b,
        c,
        da: -db,
        db,
        dc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n: u32, alpha: f64) -> BathParams {
        BathParams::new(n, alpha, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BathParams::new(0, 0.1, 1.0).is_err());
        assert!(BathParams::new(4, f64::NAN, 1.0).is_err());
        assert!(BathParams::new(4, f64::INFINITY, 1.0).is_err());
        assert!(BathParams::new(4, 0.1, 0.0).is_err());
        assert!(BathParams::new(4, 0.1, -1.0).is_err());
        assert!(BathParams::with_eps(4, 0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_times() {
        let p = params(2, 0.1);
        assert!(map_coefficients(&p, -1.0).is_err());
        assert!(map_coefficients(&p, f64::NAN).is_err());
        assert!(map_coefficients(&p, f64::INFINITY).is_err());
    }

    #[test]
    fn n2_ladder_matches_hand_count() {
        // N_0 = C(2,1) - C(2,2) = 1, N_1 = C(2,2) - C(2,3) = 1; four (j, m)
        // cells each of weight 1/4, completeness 1*1 + 1*3 = 4 = 2^2.
        let terms = subspace_terms(&params(2, 0.1));
        let jm: Vec<(f64, f64)> = terms.iter().map(|t| (t.j, t.m)).collect();
        assert_eq!(jm, vec![(0.0, 0.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0)]);
        for term in &terms {
            assert_abs_diff_eq!(term.weight, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn ladder_size_n20() {
        // sum_{j=0}^{10} (2j+1) = 121.
        assert_eq!(subspace_terms(&params(20, 0.03)).len(), 121);
    }

    #[test]
    fn odd_n_has_half_integer_ladder() {
        let terms = subspace_terms(&params(3, 0.1));
        assert_abs_diff_eq!(terms[0].j, 0.5, epsilon = 0.0);
        assert_abs_diff_eq!(terms.last().unwrap().j, 1.5, epsilon = 0.0);
        // sum_{j=1/2,3/2} (2j+1) = 2 + 4 = 6.
        assert_eq!(terms.len(), 6);
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 3, 7, 20, 101, 500] {
            let total: f64 = subspace_terms(&params(n, 0.05))
                .iter()
                .map(|t| t.weight)
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ladder_factor_edges_vanish() {
        for term in subspace_terms(&params(9, 0.2)) {
            assert!(term.weight >= 0.0 && term.weight <= 1.0);
            assert!(term.m >= -term.j - 1e-15 && term.m <= term.j + 1e-15);
            if (term.m - term.j).abs() < 1e-15 {
                assert_eq!(term.b_plus, 0.0);
            }
            if (term.m + term.j).abs() < 1e-15 {
                assert_eq!(term.b_minus, 0.0);
            }
            assert!(term.mu_plus >= 0.5 * term.omega_plus.abs() - 1e-15);
            assert!(term.mu_minus >= 0.5 * term.omega_minus.abs() - 1e-15);
        }
    }

    #[test]
    fn identity_at_t_zero() {
        for (n, alpha) in [(1, 0.5), (4, 0.1), (20, 0.03), (7, -0.2)] {
            let c = map_coefficients(&params(n, alpha), 0.0).unwrap();
            assert_abs_diff_eq!(c.a, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(c.b, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(c.c.re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(c.c.im, 0.0, epsilon = 1e-14);
            assert_eq!(c.da, 0.0);
            assert_eq!(c.db, 0.0);
            // In the co-rotating frame the coherence is stationary at t = 0
            // as well: the i omega0 S term cancels against S-dot.
            assert_abs_diff_eq!(c.dc.norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_coupling_is_identity_channel() {
        // The brackets collapse to unit phases e^{-i omega0 t/2} whose
        // product cancels the e^{i omega0 t} prefactor.
        let p = params(12, 0.0);
        for t in [0.3, 1.0, 17.5, 200.0] {
            let c = map_coefficients(&p, t).unwrap();
            assert_abs_diff_eq!(c.a, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.b, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.c.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.c.im, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.da, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(c.dc.norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn unitality_and_positivity_on_grid() {
        for (n, alpha) in [(5, 0.1), (20, 0.03), (3, 0.4)] {
            let p = params(n, alpha);
            let terms = subspace_terms(&p);
            let mut t = 0.0;
            while t <= 100.0 {
                let c = map_coefficients_cached(&p, &terms, t).unwrap();
                assert!((c.a + c.b - 1.0).abs() < 1e-12, "A+B at t={t}");
                assert!(c.b >= -1e-14 && c.b <= 1.0 + 1e-12);
                assert!(c.a >= c.c.norm() - 1e-12, "Choi positivity at t={t}");
                assert!((c.da + c.db).abs() < 1e-10);
                t += 0.37;
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = params(10, 0.07);
        let terms = subspace_terms(&p);
        let h = 1e-5;
        for k in 1..40 {
            let t = 0.5 * k as f64;
            let c = map_coefficients_cached(&p, &terms, t).unwrap();
            let plus = map_coefficients_cached(&p, &terms, t + h).unwrap();
            let minus = map_coefficients_cached(&p, &terms, t - h).unwrap();
            assert_abs_diff_eq!(c.da, (plus.a - minus.a) / (2.0 * h), epsilon = 1e-6);
            assert_abs_diff_eq!(c.db, (plus.b - minus.b) / (2.0 * h), epsilon = 1e-6);
            assert_abs_diff_eq!(
                c.dc.re,
                (plus.c.re - minus.c.re) / (2.0 * h),
                epsilon = 1e-6
            );
            assert_abs_diff_eq!(
                c.dc.im,
                (plus.c.im - minus.c.im) / (2.0 * h),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn degenerate_mu_limit_is_finite() {
        // alpha = -2 omega0 / (2j + 1) sends Omega_+ to zero on the m = j
        // edge where b_+ = 0 too, so mu_+ = 0 exactly.
        let n = 4;
        let j = 2.0_f64;
        let alpha = -2.0 / (2.0 * j + 1.0);
        let p = params(n, alpha);
        let edge = subspace_terms(&p)
            .into_iter()
            .find(|t| (t.j - j).abs() < 1e-15 && (t.m - j).abs() < 1e-15)
            .unwrap();
        assert!(edge.mu_plus < 1e-15);
        for t in [0.0, 1.0, 10.0, 123.0] {
            let c = map_coefficients(&p, t).unwrap();
            assert!(c.a.is_finite() && c.b.is_finite() && c.c.norm().is_finite());
            assert!((c.a + c.b - 1.0).abs() < 1e-12);
        }
    }
}

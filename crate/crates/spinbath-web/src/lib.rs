//! Browser bindings for the spin-bath dynamics crate.
//!
//! Each export samples a uniform time grid and returns the rows flattened
//! into one `Float64Array` (row-major, fixed stride documented per
//! function). Samples where a quantity is undefined — the time-local
//! generator singular, or the entropy rate at a pure state — carry NaN in
//! the affected cells, which plotting code can treat as line breaks.
//!
//! The functions are thin wrappers over the `spinbath` crate and compile
//! natively as well, which is how they are unit-tested.

use wasm_bindgen::prelude::wasm_bindgen;

use spinbath::bath::{map_coefficients_cached, subspace_terms, BathParams};
use spinbath::channel::DensityMatrix;
use spinbath::generator::canonical_rates_from;
use spinbath::nonmarkov::{blp_p_from, rhp_q, trace_distance, StatePair};
use spinbath::thermo::{bloch_norm_and_rate, thermo_sample_from};

fn params_or_panic(n: u32, alpha: f64, omega0: f64) -> BathParams {
    BathParams::new(n, alpha, omega0).unwrap_or_else(|e| panic!("invalid parameters: {e}"))
}

fn time_grid(t_max: f64, points: u32) -> Vec<f64> {
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|k| t_max * k as f64 / steps as f64)
        .collect()
}

/// Canonical rates and the divisibility-violation rate on a uniform grid.
/// Row stride 5: [t, gamma_dis, gamma_deph, u, q].
#[wasm_bindgen]
pub fn rates_trace(n: u32, alpha: f64, omega0: f64, t_max: f64, points: u32) -> Vec<f64> {
    let params = params_or_panic(n, alpha, omega0);
    let terms = subspace_terms(&params);
    let mut out = Vec::with_capacity(5 * points as usize);
    for t in time_grid(t_max, points) {
        let coeffs = map_coefficients_cached(&params, &terms, t).unwrap();
        match canonical_rates_from(&coeffs, params.eps_degeneracy()) {
            Ok(r) => {
                let q = rhp_q(&r);
                out.extend_from_slice(&[t, r.gamma_dis, r.gamma_deph, r.u_rate, q.q_total()]);
            }
            Err(_) => out.extend_from_slice(&[t, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
        }
    }
    out
}

/// Trace distance D(t) and its rate p(t) for one of the built-in state
/// pairs (0 = |+>/|->, 1 = |0>/|1>, 2 = |+i>/|-i>).
/// Row stride 3: [t, d, p].
#[wasm_bindgen]
pub fn distance_trace(
    n: u32,
    alpha: f64,
    omega0: f64,
    t_max: f64,
    points: u32,
    pair: u32,
) -> Vec<f64> {
    let params = params_or_panic(n, alpha, omega0);
    let pair = match pair {
        0 => StatePair::plus_minus(),
        1 => StatePair::zero_one(),
        _ => StatePair::plus_minus_i(),
    };
    let terms = subspace_terms(&params);
    let mut out = Vec::with_capacity(3 * points as usize);
    for t in time_grid(t_max, points) {
        let coeffs = map_coefficients_cached(&params, &terms, t).unwrap();
        let d = trace_distance(&coeffs, &pair);
        let p = blp_p_from(&coeffs, &pair, params.eps_degeneracy()).unwrap_or(f64::NAN);
        out.extend_from_slice(&[t, d, p]);
    }
    out
}

/// Entropy production rate, purity rate, and the dissipation rate along the
/// trajectory started from |1><1| (the state whose sign linkage ties all
/// three together). Row stride 4: [t, sigma, purity_rate, gamma_dis].
#[wasm_bindgen]
pub fn thermo_trace(n: u32, alpha: f64, omega0: f64, t_max: f64, points: u32) -> Vec<f64> {
    let params = params_or_panic(n, alpha, omega0);
    let rho0 = DensityMatrix::ket1();
    let terms = subspace_terms(&params);
    let mut out = Vec::with_capacity(4 * points as usize);
    for t in time_grid(t_max, points) {
        let coeffs = map_coefficients_cached(&params, &terms, t).unwrap();
        let gamma = canonical_rates_from(&coeffs, params.eps_degeneracy())
            .map(|r| r.gamma_dis)
            .unwrap_or(f64::NAN);
        match thermo_sample_from(&coeffs, &rho0, params.eps_degeneracy()) {
            Ok(s) => out.extend_from_slice(&[t, s.sigma, s.purity_rate, gamma]),
            Err(_) => {
                // pure sample: sigma diverges, dP/dt stays finite
                let (x, dx) = bloch_norm_and_rate(&coeffs, &rho0);
                out.extend_from_slice(&[t, f64::NAN, x * dx, gamma]);
            }
        }
    }
    out
}

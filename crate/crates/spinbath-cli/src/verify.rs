//! The `verify` command: seeded, machine-readable pass/fail report of the
//! per-module invariant suites.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use spinbath::bath::{map_coefficients_cached, subspace_terms, BathParams};
use spinbath::channel::{apply_kraus, choi_state, evolve_with, kraus_set, DensityMatrix};
use spinbath::generator::{
    canonical_rates_from, cp_integral_check, f_matrix_from, generator_matrix_from, lindblad_rhs,
    uniform_grid,
};
use spinbath::nonmarkov::{rhp_q, trace_distance, StatePair};
use spinbath::oracle::{integrate_master_equation, BruteForce};
use spinbath::thermo::{
    entropy_rate_spectral, purity_rate, thermo_sample_from, von_neumann_entropy,
    HermitianLindbladSet,
};

#[derive(Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub pass: bool,
    pub detail: String,
}

fn suite(name: &str, pass: bool, detail: String) -> SuiteResult {
    SuiteResult {
        suite: name.to_string(),
        pass,
        detail,
    }
}

fn random_state(rng: &mut impl Rng) -> DensityMatrix {
    loop {
        let rx = rng.random_range(-1.0..1.0);
        let ry = rng.random_range(-1.0..1.0);
        let rz = rng.random_range(-1.0..1.0);
        if rx * rx + ry * ry + rz * rz <= 0.96 {
            return DensityMatrix::from_bloch(rx, ry, rz).unwrap();
        }
    }
}

/// Run every suite at the given parameters. Deterministic for a fixed seed.
pub fn run_all(params: &BathParams, seed: u64) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = subspace_terms(params);
    let eps = params.eps_degeneracy();
    let mut results = Vec::new();

    // parameter validation
    {
        let pass = BathParams::new(0, 0.1, 1.0).is_err()
            && BathParams::new(4, f64::NAN, 1.0).is_err()
            && BathParams::new(4, 0.1, -1.0).is_err();
        results.push(suite(
            "params_validation",
            pass,
            "invalid parameters rejected".into(),
        ));
    }

    // unitality + Choi positivity preconditions on a grid
    {
        let mut max_dev = 0.0f64;
        let mut cp_ok = true;
        for k in 0..=5000 {
            let t = k as f64 * 0.01;
            let c = map_coefficients_cached(params, &terms, t).unwrap();
            max_dev = max_dev.max((c.a + c.b - 1.0).abs());
            cp_ok &= c.b >= -1e-14 && c.a >= c.c.norm() - 1e-12;
        }
        results.push(suite(
            "unitality_grid",
            max_dev < 1e-12 && cp_ok,
            format!("max |A+B-1| = {max_dev:.3e} over [0, 50]"),
        ));
    }

    // closed form vs brute force (capped bath size)
    {
        let n = params.n().min(8);
        let p = BathParams::new(n, params.alpha(), params.omega0()).unwrap();
        let oracle_terms = subspace_terms(&p);
        match BruteForce::new(&p) {
            Ok(oracle) => {
                let mut max_dev = 0.0f64;
                for _ in 0..20 {
                    let t = rng.random_range(0.0..50.0);
                    let got = oracle.map_coefficients(t).unwrap();
                    let want = map_coefficients_cached(&p, &oracle_terms, t).unwrap();
                    max_dev = max_dev
                        .max((got.a - want.a).abs())
                        .max((got.b - want.b).abs())
                        .max((got.c - want.c).norm());
                }
                results.push(suite(
                    "oracle_equivalence",
                    max_dev < 1e-10,
                    format!("N = {n}: max discrepancy = {max_dev:.3e}"),
                ));
            }
            Err(e) => results.push(suite("oracle_equivalence", false, e.to_string())),
        }
    }

    // channel representation triangle
    {
        let inputs = [
            DensityMatrix::ket0(),
            DensityMatrix::ket1(),
            DensityMatrix::plus(),
            DensityMatrix::plus_i(),
        ];
        let mut max_dev = 0.0f64;
        for _ in 0..20 {
            let t = rng.random_range(0.0..100.0);
            let c = map_coefficients_cached(params, &terms, t).unwrap();
            let kraus = kraus_set(&c).unwrap();
            let choi = choi_state(&c);
            for rho0 in &inputs {
                let direct = evolve_with(&c, rho0);
                max_dev = max_dev
                    .max(direct.trace_distance(&apply_kraus(&kraus, rho0)))
                    .max(direct.trace_distance(&choi.apply(rho0).unwrap()));
            }
        }
        results.push(suite(
            "channel_triangle",
            max_dev < 1e-12,
            format!("max representation distance = {max_dev:.3e}"),
        ));
    }

    // generator: L F = F-dot and rate-form reconstruction
    {
        let h = 1e-5;
        let mut max_lf = 0.0f64;
        let mut max_rec = 0.0f64;
        for _ in 0..20 {
            let t = rng.random_range(0.1..100.0);
            let c = map_coefficients_cached(params, &terms, t).unwrap();
            if let (Ok(g), Ok(r)) = (
                generator_matrix_from(&c, eps),
                canonical_rates_from(&c, eps),
            ) {
                let f = f_matrix_from(&c);
                let fp = f_matrix_from(&map_coefficients_cached(params, &terms, t + h).unwrap());
                let fm = f_matrix_from(&map_coefficients_cached(params, &terms, t - h).unwrap());
                max_lf = max_lf.max((g.entries() * f - (fp - fm) / (2.0 * h)).norm());
                let rho = random_state(&mut rng);
                let diff: Matrix2<_> = g.apply(&rho) - lindblad_rhs(&r, &rho.matrix());
                max_rec = max_rec.max(diff.norm());
            }
        }
        results.push(suite(
            "generator_consistency",
            max_lf < 1e-6 && max_rec < 1e-10,
            format!("max |LF - Fdot| = {max_lf:.3e}, max reconstruction deviation = {max_rec:.3e}"),
        ));
    }

    // complete positivity integrals
    {
        match cp_integral_check(params, &uniform_grid(100.0, 0.01).unwrap()) {
            Ok(rep) => results.push(suite(
                "cp_integrals",
                rep.all_nonnegative(1e-10),
                format!(
                    "min integrals = ({:.3e}, {:.3e})",
                    rep.min_dis, rep.min_deph
                ),
            )),
            Err(e) => results.push(suite("cp_integrals", false, e.to_string())),
        }
    }

    // Kraus completeness + unitality
    {
        let id = Matrix2::identity();
        let mut max_dev = 0.0f64;
        for _ in 0..20 {
            let t = rng.random_range(0.0..150.0);
            let k = kraus_set(&map_coefficients_cached(params, &terms, t).unwrap()).unwrap();
            max_dev = max_dev
                .max((k.completeness() - id).norm())
                .max((k.unitality() - id).norm());
        }
        results.push(suite(
            "kraus_identities",
            max_dev < 1e-12,
            format!("max identity deviation = {max_dev:.3e}"),
        ));
    }

    // closed-form trace distance vs 2x2 eigensolve
    {
        let mut max_dev = 0.0f64;
        for _ in 0..20 {
            let pair = StatePair::new(random_state(&mut rng), random_state(&mut rng));
            let t = rng.random_range(0.0..100.0);
            let c = map_coefficients_cached(params, &terms, t).unwrap();
            let closed = trace_distance(&c, &pair);
            let diff = evolve_with(&c, &pair.rho1).matrix() - evolve_with(&c, &pair.rho2).matrix();
            let direct: f64 = 0.5
                * diff
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .map(|x| x.abs())
                    .sum::<f64>();
            max_dev = max_dev.max((closed - direct).abs());
        }
        results.push(suite(
            "trace_distance_eigensolve",
            max_dev < 1e-12,
            format!("max deviation = {max_dev:.3e}"),
        ));
    }

    // spectral entropy rate and commutator purity rate vs finite differences
    {
        let h = 1e-5;
        let mut max_s = 0.0f64;
        let mut max_p = 0.0f64;
        for _ in 0..10 {
            let rho0 = random_state(&mut rng);
            let t = rng.random_range(0.5..100.0);
            let c = map_coefficients_cached(params, &terms, t).unwrap();
            if let Ok(rates) = canonical_rates_from(&c, eps) {
                let lind = HermitianLindbladSet::from_rates(&rates);
                let rho_t = evolve_with(&c, &rho0);
                let plus = evolve_with(
                    &map_coefficients_cached(params, &terms, t + h).unwrap(),
                    &rho0,
                );
                let minus = evolve_with(
                    &map_coefficients_cached(params, &terms, t - h).unwrap(),
                    &rho0,
                );
                if let Ok(spectral) = entropy_rate_spectral(&lind, &rho_t) {
                    let fd = (von_neumann_entropy(&plus) - von_neumann_entropy(&minus)) / (2.0 * h);
                    max_s = max_s.max((spectral - fd).abs());
                }
                let fd_p = (plus.purity() - minus.purity()) / (2.0 * h);
                max_p = max_p.max((purity_rate(&lind, &rho_t).rate - fd_p).abs());
            }
        }
        results.push(suite(
            "thermo_cross_checks",
            max_s < 1e-6 && max_p < 1e-6,
            format!("max dS/dt deviation = {max_s:.3e}, max dP/dt deviation = {max_p:.3e}"),
        ));
    }

    // ODE route vs exact map
    {
        let grid = uniform_grid(20.0, 0.01).unwrap();
        let mut max_dev = 0.0f64;
        let mut failed = None;
        for rho0 in [DensityMatrix::plus(), DensityMatrix::ket1()] {
            match integrate_master_equation(params, &rho0, &grid) {
                Ok(traj) => {
                    for (t, state) in traj.samples() {
                        let exact = evolve_with(
                            &map_coefficients_cached(params, &terms, *t).unwrap(),
                            &rho0,
                        );
                        max_dev = max_dev.max(state.trace_distance(&exact));
                    }
                }
                Err(e) => failed = Some(e.to_string()),
            }
        }
        match failed {
            None => results.push(suite(
                "ode_vs_exact",
                max_dev < 1e-6,
                format!("max trace distance = {max_dev:.3e}"),
            )),
            Some(e) => results.push(suite("ode_vs_exact", false, e)),
        }
    }

    // entropy / purity / dissipation sign linkage for the |1> trajectory
    {
        let rho0 = DensityMatrix::ket1();
        let mut violations = 0usize;
        let mut checked = 0usize;
        for k in 1..=5000 {
            let t = k as f64 * 0.01;
            let c = map_coefficients_cached(params, &terms, t).unwrap();
            let rates = match canonical_rates_from(&c, eps) {
                Ok(r) => r,
                Err(_) => continue,
            };
            if rates.gamma_dis.abs() <= 1e-10 {
                continue;
            }
            if let Ok(sample) = thermo_sample_from(&c, &rho0, eps) {
                checked += 1;
                let neg = rates.gamma_dis < 0.0;
                if (sample.sigma < 0.0) != neg || (sample.purity_rate > 0.0) != neg {
                    violations += 1;
                }
                if rhp_q(&rates).q_total() < 0.0 {
                    violations += 1;
                }
            }
        }
        results.push(suite(
            "entropy_sign_linkage",
            violations == 0 && checked > 0,
            format!("checked = {checked}, violations = {violations}"),
        ));
    }

    results
}

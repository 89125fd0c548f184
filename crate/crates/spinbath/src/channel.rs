//! States of the central spin and the three faces of its dynamical map:
//! direct coefficient action, Choi-Jamiolkowski state, and Kraus operator
//! sum.
//!
//! Choi convention: ancilla first, the map acts on the second factor of the
//! computational product basis |a s>, so the Choi state is
//! (id (x) Phi) on the maximally entangled state, and reconstruction reads
//! Phi of rho = 2 Tr_A((rho^T (x) I) J).

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::bath::{map_coefficients, BathParams, MapCoefficients};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance for the Hermiticity / trace / positivity checks on
/// construction.
const STATE_TOL: f64 = 1e-12;

/// 2x2 density matrix of the central spin.
///
/// Hermiticity is structural (rho_21 is stored as the conjugate of rho_12);
/// unit trace and positive semidefiniteness are validated to 1e-12 on
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    rho11: f64,
    rho22: f64,
    rho12: Complex64,
}

impl DensityMatrix {
    pub fn new(rho11: f64, rho12: Complex64, rho22: f64) -> Result<Self> {
        if !rho11.is_finite()
            || !rho22.is_finite()
            || !rho12.re.is_finite()
            || !rho12.im.is_finite()
        {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let trace = rho11 + rho22;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} != 1")));
        }
        let det = rho11 * rho22 - rho12.norm_sqr();
        if det < -STATE_TOL || rho11 < -STATE_TOL || rho22 < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (det = {det:e})"
            )));
        }
        Ok(Self {
            rho11,
            rho22,
            rho12,
        })
    }

    /// Validates Hermiticity of an explicit complex 2x2 matrix before
    /// accepting it.
    pub fn from_matrix(m: &Matrix2<Complex64>) -> Result<Self> {
        if m[(0, 0)].im.abs() > STATE_TOL
            || m[(1, 1)].im.abs() > STATE_TOL
            || (m[(1, 0)] - m[(0, 1)].conj()).norm() > STATE_TOL
        {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        Self::new(m[(0, 0)].re, m[(0, 1)], m[(1, 1)].re)
    }

    /// State with Bloch vector (rx, ry, rz); |r| <= 1 required.
    pub fn from_bloch(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let norm2 = rx * rx + ry * ry + rz * rz;
        if norm2 > 1.0 + 1e-9 {
            return Err(Error::InvalidState(format!(
                "Bloch vector has norm {} > 1",
                norm2.sqrt()
            )));
        }
        Self::new(
            (1.0 + rz) / 2.0,
            Complex64::new(rx / 2.0, -ry / 2.0),
            (1.0 - rz) / 2.0,
        )
    }

    /// Bloch-vector construction without the positivity check. Only for
    /// integrator output, whose error control bounds the excursion outside
    /// the Bloch ball to the local tolerance.
    pub(crate) fn from_bloch_unchecked(rx: f64, ry: f64, rz: f64) -> Self {
        Self {
            rho11: (1.0 + rz) / 2.0,
            rho22: (1.0 - rz) / 2.0,
            rho12: Complex64::new(rx / 2.0, -ry / 2.0),
        }
    }

    /// |0><0| (excited level of the sigma_z splitting).
    pub fn ket0() -> Self {
        Self {
            rho11: 1.0,
            rho22: 0.0,
            rho12: ZERO,
        }
    }

    /// |1><1|.
    pub fn ket1() -> Self {
        Self {
            rho11: 0.0,
            rho22: 1.0,
            rho12: ZERO,
        }
    }

    /// |+><+| = (|0> + |1>)(<0| + <1|)/2.
    pub fn plus() -> Self {
        Self {
            rho11: 0.5,
            rho22: 0.5,
            rho12: Complex64::new(0.5, 0.0),
        }
    }

    /// |-><-|.
    pub fn minus() -> Self {
        Self {
            rho11: 0.5,
            rho22: 0.5,
            rho12: Complex64::new(-0.5, 0.0),
        }
    }

    /// |+i><+i| (sigma_y eigenstate, Bloch vector +y).
    pub fn plus_i() -> Self {
        Self {
            rho11: 0.5,
            rho22: 0.5,
            rho12: Complex64::new(0.0, -0.5),
        }
    }

    /// |-i><-i|.
    pub fn minus_i() -> Self {
        Self {
            rho11: 0.5,
            rho22: 0.5,
            rho12: Complex64::new(0.0, 0.5),
        }
    }

    /// I/2, the fixed point of the (unital) map.
    pub fn maximally_mixed() -> Self {
        Self {
            rho11: 0.5,
            rho22: 0.5,
            rho12: ZERO,
        }
    }

    pub fn rho11(&self) -> f64 {
        self.rho11
    }

    pub fn rho22(&self) -> f64 {
        self.rho22
    }

    pub fn rho12(&self) -> Complex64 {
        self.rho12
    }

    pub fn rho21(&self) -> Complex64 {
        self.rho12.conj()
    }

    /// Bloch components (rx, ry, rz) = Tr[sigma_k rho].
    pub fn bloch(&self) -> [f64; 3] {
        [
            2.0 * self.rho12.re,
            -2.0 * self.rho12.im,
            self.rho11 - self.rho22,
        ]
    }

    /// Bloch-vector length x = sqrt((rho11 - rho22)^2 + 4 |rho12|^2).
    pub fn bloch_norm(&self) -> f64 {
        let w = self.rho11 - self.rho22;
        (w * w + 4.0 * self.rho12.norm_sqr()).sqrt()
    }

    /// Tr rho^2 = (1 + x^2)/2.
    pub fn purity(&self) -> f64 {
        (1.0 + self.bloch_norm().powi(2)) / 2.0
    }

    /// Eigenvalues (1 + x)/2 >= (1 - x)/2 in decreasing order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let x = self.bloch_norm();
        [(1.0 + x) / 2.0, (1.0 - x) / 2.0]
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            Complex64::new(self.rho11, 0.0),
            self.rho12,
            self.rho12.conj(),
            Complex64::new(self.rho22, 0.0),
        )
    }

    /// Trace distance (1/2)||rho - other||_1; for qubits this is the
    /// Euclidean half-distance of the Bloch vectors.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let u = self.rho11 - other.rho11;
        let v = self.rho12 - other.rho12;
        // difference is traceless Hermitian: eigenvalues +-sqrt(u^2 + |v|^2)
        (u * u + v.norm_sqr()).sqrt()
    }
}

/// Push a state through the map at time t: rho11 -> A rho11 + B rho22,
/// rho12 -> C rho12 (and the trace is preserved exactly).
pub fn evolve_state(params: &BathParams, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let coeffs = map_coefficients(params, t)?;
    Ok(evolve_with(&coeffs, rho0))
}

/// Same as [`evolve_state`] from precomputed coefficients.
pub fn evolve_with(coeffs: &MapCoefficients, rho0: &DensityMatrix) -> DensityMatrix {
    let rho11 = coeffs.a * rho0.rho11 + coeffs.b * rho0.rho22;
    DensityMatrix {
        rho11,
        rho22: 1.0 - rho11,
        rho12: coeffs.c * rho0.rho12,
    }
}

/// Choi-Jamiolkowski state of the map at one time point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    matrix: Matrix4<Complex64>,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    /// Eigenvalues in ascending order (numerical Hermitian eigensolve).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev: Vec<f64> = self
            .matrix
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Reconstruct the channel action from the Choi state:
    /// Phi of rho = 2 Tr_A((rho^T (x) I) J).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let r = rho.matrix();
        let mut out = Matrix2::zeros();
        for s in 0..2 {
            for sp in 0..2 {
                let mut acc = ZERO;
                for a in 0..2 {
                    for i in 0..2 {
                        // J[(a s),(i s')] = (1/2) Phi[|a><i|]_{s s'}
                        acc += r[(a, i)] * self.matrix[(2 * a + s, 2 * i + sp)];
                    }
                }
                out[(s, sp)] = 2.0 * acc;
            }
        }
        DensityMatrix::from_matrix(&out)
    }
}

/// The Choi state of the map: diag-corner structure with A/2 on the outer
/// diagonal, B/2 on the inner, and C/2 on the |00><11| corner.
pub fn choi_state(coeffs: &MapCoefficients) -> ChoiMatrix {
    let a = Complex64::new(coeffs.a / 2.0, 0.0);
    let b = Complex64::new(coeffs.b / 2.0, 0.0);
    let c = coeffs.c / 2.0;
    let matrix = Matrix4::new(
        a,
        ZERO,
        ZERO,
        c,
        ZERO,
        b,
        ZERO,
        ZERO,
        ZERO,
        ZERO,
        b,
        ZERO,
        c.conj(),
        ZERO,
        ZERO,
        a,
    );
    ChoiMatrix { matrix }
}

/// Operator-sum representation of the map at one time point.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: [Matrix2<Complex64>; 4],
    theta: f64,
}

impl KrausSet {
    pub fn operators(&self) -> &[Matrix2<Complex64>; 4] {
        &self.ops
    }

    /// Quadrant-correct phase of C(t): C = |C| e^{i theta}.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// sum_i K_i^dag K_i (identity iff trace-preserving).
    pub fn completeness(&self) -> Matrix2<Complex64> {
        self.ops.iter().map(|k| k.adjoint() * k).sum()
    }

    /// sum_i K_i K_i^dag (identity iff unital).
    pub fn unitality(&self) -> Matrix2<Complex64> {
        self.ops.iter().map(|k| k * k.adjoint()).sum()
    }
}

/// Build the four Kraus operators from the Choi eigensystem. Fails with
/// [`Error::NotCompletelyPositive`] when the Choi positivity conditions
/// B >= 0, A >= |C| are violated beyond tolerance.
pub fn kraus_set(coeffs: &MapCoefficients) -> Result<KrausSet> {
    let abs_c = coeffs.c.norm();
    if coeffs.a < abs_c - 1e-12 {
        return Err(Error::NotCompletelyPositive {
            t: coeffs.t,
            detail: format!("A = {} < |C| = {}", coeffs.a, abs_c),
        });
    }
    if coeffs.b < -1e-14 {
        return Err(Error::NotCompletelyPositive {
            t: coeffs.t,
            detail: format!("B = {} < 0", coeffs.b),
        });
    }
    // atan2, not arctan of the ratio: C_R can vanish or go negative.
    let theta = coeffs.c.im.atan2(coeffs.c.re);
    let phase = Complex64::from_polar(1.0, theta);
    let sqrt_b = Complex64::new(coeffs.b.max(0.0).sqrt(), 0.0);
    let lam_minus = ((coeffs.a - abs_c) / 2.0).max(0.0).sqrt();
    let lam_plus = ((coeffs.a + abs_c) / 2.0).max(0.0).sqrt();

    let k1 = Matrix2::new(ZERO, sqrt_b, ZERO, ZERO);
    let k2 = Matrix2::new(ZERO, ZERO, sqrt_b, ZERO);
    let k3 = Matrix2::new(
        -phase * lam_minus,
        ZERO,
        ZERO,
        Complex64::new(lam_minus, 0.0),
    );
    let k4 = Matrix2::new(phase * lam_plus, ZERO, ZERO, Complex64::new(lam_plus, 0.0));

    Ok(KrausSet {
        ops: [k1, k2, k3, k4],
        theta,
    })
}

/// Operator-sum application rho -> sum_i K_i rho K_i^dag.
pub fn apply_kraus(kraus: &KrausSet, rho: &DensityMatrix) -> DensityMatrix {
    let r = rho.matrix();
    let mut out = Matrix2::<Complex64>::zeros();
    for k in &kraus.ops {
        out += k * r * k.adjoint();
    }
    // CPTP output of a valid set; renormalize the representation only.
    let rho11 = out[(0, 0)].re;
    let rho22 = out[(1, 1)].re;
    DensityMatrix {
        rho11,
        rho22,
        rho12: out[(0, 1)],
    }
}

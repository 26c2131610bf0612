use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::IsingHamiltonian;
use crate::error::{check_len, Error, Result};
use crate::simulator::amplitude::Amplitude;
use crate::simulator::circuit::{tangents, Tangents};
use crate::simulator::ParamCircuit;

/// Singular values below this are dropped by the least-squares fallback.
pub const PINV_CUTOFF: f64 = 1e-8;

/// `M_ij = Re<d_i psi|d_j psi>`, `V_i = -Re<d_i psi|H|psi>` and
/// `energy = <psi|H|psi>` at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvSystem {
    /// Row-major `P x P`.
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub energy: f64,
}

impl MvSystem {
    pub fn n_params(&self) -> usize {
        self.v.len()
    }

    pub fn m_entry(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.v.len() + j]
    }
}

pub fn compute_mv(circuit: &ParamCircuit, theta: &[f64], h: &IsingHamiltonian) -> Result<MvSystem> {
    circuit.validate()?;
    check_len("parameter vector", circuit.n_params, theta.len())?;
    check_len("hamiltonian qubits", circuit.n_qubits, h.n_qubits)?;
    Ok(mv_with_diagonal(circuit, theta, &h.diagonal()))
}

/// Same as [`compute_mv`] for a validated circuit and precomputed basis energies.
pub(crate) fn mv_with_diagonal(circuit: &ParamCircuit, theta: &[f64], diagonal: &[f64]) -> MvSystem {
    if circuit.is_real() {
        assemble(tangents::<f64>(circuit, theta), diagonal)
    } else {
        assemble(tangents::<Complex64>(circuit, theta), diagonal)
    }
}

fn assemble<T: Amplitude>(t: Tangents<T>, diagonal: &[f64]) -> MvSystem {
    let p = t.width - 1;
    let dim = diagonal.len();
    let mut lane_m = vec![0.0; p * p];
    if p > 0 {
        // Jᵀ J over the f64 view; complex lanes add Reᵀ Re + Imᵀ Im
        let (flat, s) = T::as_f64_slice(&t.data);
        let row = (t.width * s) as isize;
        let col = s as isize;
        for part in 0..s {
            let j = flat[s + part..].as_ptr();
            let beta = if part == 0 { 0.0 } else { 1.0 };
            // SAFETY: lanes 1..width of every row lie inside `flat`; the last
            // element read is at (dim-1)*row + s*(width-1) + part < flat.len().
            unsafe {
                matrixmultiply::dgemm(
                    p, dim, p, 1.0,
                    j, col, row,
                    j, row, col,
                    beta,
                    lane_m.as_mut_ptr(), p as isize, 1,
                );
            }
        }
    }

    let mut lane_v = vec![0.0; p];
    let mut energy = 0.0;
    for (rowdata, &e) in t.data.chunks_exact(t.width).zip(diagonal) {
        let psi = rowdata[0];
        energy += psi.norm_sqr() * e;
        let hpsi = psi * e;
        for (acc, d) in lane_v.iter_mut().zip(&rowdata[1..]) {
            *acc -= d.re_inner(hpsi);
        }
    }

    // lanes follow gate order; report in slot order
    let mut m = vec![0.0; p * p];
    let mut v = vec![0.0; p];
    for (a, &sa) in t.slot_of_lane.iter().enumerate() {
        v[sa] = lane_v[a];
        for (b, &sb) in t.slot_of_lane.iter().enumerate() {
            // symmetrize against accumulation-order rounding
            m[sa * p + sb] = 0.5 * (lane_m[a * p + b] + lane_m[b * p + a]);
        }
    }
    MvSystem { m, v, energy }
}

/// Solves `(M + ridge I) theta_dot = V` by Cholesky, falling back to an SVD
/// least-squares solution when the factorization fails or is non-finite.
pub fn solve_update(sys: &MvSystem, ridge: f64) -> Result<Vec<f64>> {
    let p = sys.n_params();
    check_len("M matrix entries", p * p, sys.m.len())?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be finite and >= 0, got {ridge}")));
    }
    if sys.m.iter().chain(&sys.v).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("M or V has a non-finite entry".into()));
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    let mut a = DMatrix::from_row_slice(p, p, &sys.m);
    for i in 0..p {
        a[(i, i)] += ridge;
    }
    let b = DVector::from_column_slice(&sys.v);
    if let Some(chol) = a.clone().cholesky() {
        let x = chol.solve(&b);
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x.as_slice().to_vec());
        }
    }
    let x = a
        .svd(true, true)
        .solve(&b, PINV_CUTOFF)
        .map_err(|e| Error::NonFinite(format!("least-squares fallback failed: {e}")))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares fallback produced a non-finite update".into()));
    }
    Ok(x.as_slice().to_vec())
}

pub fn euler_step(theta: &[f64], theta_dot: &[f64], delta_tau: f64) -> Result<Vec<f64>> {
    check_len("parameter derivative", theta.len(), theta_dot.len())?;
    Ok(theta.iter().zip(theta_dot).map(|(t, d)| t + d * delta_tau).collect())
}

//! Gate definitions and in-place kernels.
//!
//! Kernels act on a row-major `dim x width` buffer where row `z` holds the
//! amplitude of basis state `z` in each lane; only the first `active` lanes
//! are touched. A plain state vector is the `width == 1` case. Qubit `q` is
//! bit `q` of the basis index (qubit 0 least significant).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::Amplitude;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    SqrtX,
    SqrtXdg,
    CX,
    RX,
    RY,
    RZ,
    RZZ,
    RZY,
    RYZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::RZZ | GateKind::RZY | GateKind::RYZ => 2,
            _ => 1,
        }
    }

    /// Rotation gates `exp(-i theta G / 2)` carry one parameter.
    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ | GateKind::RZY | GateKind::RYZ
        )
    }

    /// Whether the gate matrix (and its generator factor `-iG/2`) is real.
    pub fn is_real(self) -> bool {
        matches!(
            self,
            GateKind::H | GateKind::X | GateKind::CX | GateKind::RY | GateKind::RZY | GateKind::RYZ
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::SqrtX => "sx",
            GateKind::SqrtXdg => "sxdg",
            GateKind::CX => "cx",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::RZZ => "rzz",
            GateKind::RZY => "rzy",
            GateKind::RYZ => "ryz",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            GateKind::H,
            GateKind::X,
            GateKind::SqrtX,
            GateKind::SqrtXdg,
            GateKind::CX,
            GateKind::RX,
            GateKind::RY,
            GateKind::RZ,
            GateKind::RZZ,
            GateKind::RZY,
            GateKind::RYZ,
        ];
        all.into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gate kind {s:?}")))
    }
}

/// One gate in a circuit. Two-qubit rotations apply their first Pauli to
/// `targets[0]` (for `RZY`: `Z` on `targets[0]`, `Y` on `targets[1]`); `CX`
/// is `(control, target)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub param_slot: Option<usize>,
}

impl GateSpec {
    pub fn fixed(kind: GateKind, targets: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            param_slot: None,
        }
    }

    pub fn rotation(kind: GateKind, targets: Vec<usize>, slot: usize) -> Self {
        Self {
            kind,
            targets,
            param_slot: Some(slot),
        }
    }

    pub(crate) fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} target(s), got {:?}",
                self.kind,
                self.kind.arity(),
                self.targets
            )));
        }
        for &q in &self.targets {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::InvalidArgument(format!(
                "{} needs two distinct qubits, got {:?}",
                self.kind, self.targets
            )));
        }
        match (self.kind.is_parameterized(), self.param_slot) {
            (true, Some(slot)) if slot < n_params => Ok(()),
            (true, Some(slot)) => Err(Error::InvalidArgument(format!(
                "parameter slot {slot} out of range for {n_params} parameters"
            ))),
            (true, None) => Err(Error::InvalidArgument(format!(
                "{} requires a parameter slot",
                self.kind
            ))),
            (false, Some(_)) => Err(Error::InvalidArgument(format!(
                "{} takes no parameter",
                self.kind
            ))),
            (false, None) => Ok(()),
        }
    }
}

#[inline]
fn bit(z: usize, q: usize) -> bool {
    z >> q & 1 == 1
}

#[inline]
fn sign(z: usize, q: usize) -> f64 {
    if bit(z, q) {
        -1.0
    } else {
        1.0
    }
}

/// Calls `f(z0, row0, row1)` for every pair of rows differing only in bit `q`
/// (`z0` has the bit clear), each row truncated to `active` lanes.
#[inline]
fn for_pairs<T, F>(data: &mut [T], width: usize, active: usize, q: usize, mut f: F)
where
    F: FnMut(usize, &mut [T], &mut [T]),
{
    let dim = data.len() / width;
    let stride = 1usize << q;
    for base in (0..dim).step_by(2 * stride) {
        for z0 in base..base + stride {
            let z1 = z0 + stride;
            let (lo, hi) = data.split_at_mut(z1 * width);
            let r0 = &mut lo[z0 * width..z0 * width + active];
            let r1 = &mut hi[..active];
            f(z0, r0, r1);
        }
    }
}

#[inline]
fn for_rows<T, F>(data: &mut [T], width: usize, active: usize, mut f: F)
where
    F: FnMut(usize, &mut [T]),
{
    for (z, row) in data.chunks_exact_mut(width).enumerate() {
        f(z, &mut row[..active]);
    }
}

#[inline]
fn real_rotation<T: Amplitude>(r0: &mut [T], r1: &mut [T], c: f64, s: f64) {
    // (a0, a1) -> (c a0 - s a1, s a0 + c a1)
    for (a, b) in r0.iter_mut().zip(r1.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x * c - y * s;
        *b = x * s + y * c;
    }
}

fn complex_2x2<T: Amplitude>(data: &mut [T], width: usize, active: usize, q: usize, m: [[Complex64; 2]; 2]) {
    for_pairs(data, width, active, q, |_, r0, r1| {
        for (a, b) in r0.iter_mut().zip(r1.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x.mul_complex(m[0][0]) + y.mul_complex(m[0][1]);
            *b = x.mul_complex(m[1][0]) + y.mul_complex(m[1][1]);
        }
    });
}

/// Applies `exp(-i theta Z_zq Y_yq / 2)`.
fn zy_rotation<T: Amplitude>(data: &mut [T], width: usize, active: usize, zq: usize, yq: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    for_pairs(data, width, active, yq, |z0, r0, r1| {
        real_rotation(r0, r1, c, s * sign(z0, zq));
    });
}

/// Applies one gate to the first `active` lanes of a `width`-lane buffer.
pub(crate) fn apply_gate<T: Amplitude>(
    data: &mut [T],
    width: usize,
    active: usize,
    gate: &GateSpec,
    theta: f64,
) {
    debug_assert!(T::IS_COMPLEX || gate.kind.is_real());
    let t = &gate.targets;
    let i = Complex64::i();
    match gate.kind {
        GateKind::H => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for_pairs(data, width, active, t[0], |_, r0, r1| {
                for (a, b) in r0.iter_mut().zip(r1.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * r;
                    *b = (x - y) * r;
                }
            });
        }
        GateKind::X => for_pairs(data, width, active, t[0], |_, r0, r1| r0.swap_with_slice(r1)),
        GateKind::SqrtX | GateKind::SqrtXdg => {
            let p = Complex64::new(0.5, 0.5);
            let m = Complex64::new(0.5, -0.5);
            let (p, m) = if gate.kind == GateKind::SqrtX { (p, m) } else { (m, p) };
            complex_2x2(data, width, active, t[0], [[p, m], [m, p]]);
        }
        GateKind::CX => {
            let control = t[0];
            for_pairs(data, width, active, t[1], |z0, r0, r1| {
                if bit(z0, control) {
                    r0.swap_with_slice(r1);
                }
            });
        }
        GateKind::RX => {
            let (s, c) = (theta / 2.0).sin_cos();
            let c = Complex64::new(c, 0.0);
            let off = -i * s;
            complex_2x2(data, width, active, t[0], [[c, off], [off, c]]);
        }
        GateKind::RY => {
            let (s, c) = (theta / 2.0).sin_cos();
            for_pairs(data, width, active, t[0], |_, r0, r1| real_rotation(r0, r1, c, s));
        }
        GateKind::RZ => {
            let q = t[0];
            let p0 = Complex64::from_polar(1.0, -theta / 2.0);
            let p1 = p0.conj();
            for_rows(data, width, active, |z, row| {
                let p = if bit(z, q) { p1 } else { p0 };
                row.iter_mut().for_each(|a| *a = a.mul_complex(p));
            });
        }
        GateKind::RZZ => {
            let (a, b) = (t[0], t[1]);
            let even = Complex64::from_polar(1.0, -theta / 2.0);
            let odd = even.conj();
            for_rows(data, width, active, |z, row| {
                let p = if bit(z, a) ^ bit(z, b) { odd } else { even };
                row.iter_mut().for_each(|x| *x = x.mul_complex(p));
            });
        }
        GateKind::RZY => zy_rotation(data, width, active, t[0], t[1], theta),
        GateKind::RYZ => zy_rotation(data, width, active, t[1], t[0], theta),
    }
}

/// Writes `(-i G / 2) lane[src]` into `lane[dst]`, where `G` is the Pauli
/// generator of a rotation gate. `dst > src`.
pub(crate) fn apply_generator<T: Amplitude>(
    data: &mut [T],
    width: usize,
    gate: &GateSpec,
    src: usize,
    dst: usize,
) {
    debug_assert!(dst > src && dst < width);
    let t = &gate.targets;
    let half_neg_i = Complex64::new(0.0, -0.5);
    let active = dst + 1;
    match gate.kind {
        GateKind::RX => for_pairs(data, width, active, t[0], |_, r0, r1| {
            r0[dst] = r1[src].mul_complex(half_neg_i);
            r1[dst] = r0[src].mul_complex(half_neg_i);
        }),
        GateKind::RY => for_pairs(data, width, active, t[0], |_, r0, r1| {
            r0[dst] = r1[src] * -0.5;
            r1[dst] = r0[src] * 0.5;
        }),
        GateKind::RZ => {
            let q = t[0];
            for_rows(data, width, active, |z, row| {
                row[dst] = row[src].mul_complex(half_neg_i * sign(z, q));
            });
        }
        GateKind::RZZ => {
            let (a, b) = (t[0], t[1]);
            for_rows(data, width, active, |z, row| {
                row[dst] = row[src].mul_complex(half_neg_i * (sign(z, a) * sign(z, b)));
            });
        }
        GateKind::RZY | GateKind::RYZ => {
            let (zq, yq) = if gate.kind == GateKind::RZY {
                (t[0], t[1])
            } else {
                (t[1], t[0])
            };
            for_pairs(data, width, active, yq, |z0, r0, r1| {
                let h = 0.5 * sign(z0, zq);
                r0[dst] = r1[src] * -h;
                r1[dst] = r0[src] * h;
            });
        }
        _ => unreachable!("{} has no generator", gate.kind),
    }
}

/// Dense `2^n x 2^n` matrix of one gate, `matrix[row][col] = <row|U|col>`.
pub fn gate_matrix(gate: &GateSpec, theta: f64, n_qubits: usize) -> Result<Vec<Vec<Complex64>>> {
    let n_params = gate.param_slot.map_or(0, |s| s + 1);
    gate.validate(n_qubits, n_params)?;
    let dim = 1usize << n_qubits;
    // column k of U is U|k>; run all basis states as lanes at once
    let mut lanes = vec![Complex64::default(); dim * dim];
    for k in 0..dim {
        lanes[k * dim + k] = Complex64::new(1.0, 0.0);
    }
    apply_gate(&mut lanes, dim, dim, gate, theta);
    Ok((0..dim)
        .map(|row| (0..dim).map(|col| lanes[row * dim + col]).collect())
        .collect())
}

/// Product of dense matrices `a * b`.
pub fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut out = vec![vec![Complex64::default(); n]; n];
    for r in 0..n {
        for k in 0..n {
            let x = a[r][k];
            if x == Complex64::default() {
                continue;
            }
            for c in 0..n {
                out[r][c] += x * b[k][c];
            }
        }
    }
    out
}

/// Largest entrywise deviation between `a` and `phase * b`, with the phase
/// fitted on the largest entry of `b`.
pub fn distance_up_to_phase(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    let (mut pr, mut pc, mut best) = (0, 0, -1.0);
    for (r, row) in b.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            if x.norm() > best {
                (pr, pc, best) = (r, c, x.norm());
            }
        }
    }
    let phase = a[pr][pc] / b[pr][pc];
    let phase = phase / phase.norm();
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(move |(x, y)| (x - phase * y).norm()))
        .fold(0.0, f64::max)
}

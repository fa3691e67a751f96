//! Elementary-gate decompositions of the controlled rotations used by the
//! builders, the controlled-gate cost classifier, and partially defined
//! unitaries.
//!
//! Gate fragments are real, so their unitaries are real matrices. The
//! classifier takes complex 2x2 input.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::circuit::Gate;
use crate::error::{DickeError, Result};
use crate::sim::apply_gate;

pub const UNITARY_TOL: f64 = 1e-10;
pub const CLASSIFY_TOL: f64 = 1e-9;

/// 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Mat2 {
    pub const I: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const Z: Mat2 = Mat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]);

    pub fn real(m: [[f64; 2]; 2]) -> Mat2 {
        Mat2([
            [C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)],
            [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)],
        ])
    }

    pub fn ry(theta: f64) -> Mat2 {
        let (s, c) = (theta / 2.0).sin_cos();
        Mat2::real([[c, -s], [s, c]])
    }

    /// `U(alpha) = [[sin a/2, cos a/2], [cos a/2, -sin a/2]]`, equal to `Ry(-alpha) X`.
    pub fn u_alpha(alpha: f64) -> Mat2 {
        let (s, c) = (alpha / 2.0).sin_cos();
        Mat2::real([[s, c], [c, -s]])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let a = &self.0;
        Mat2([[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - o.0[r][c]).norm());
            }
        }
        d
    }

    pub fn approx_eq(&self, o: &Mat2, tol: f64) -> bool {
        self.max_abs_diff(o) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint()).approx_eq(&Mat2::I, tol)
    }

    /// Real part, if every imaginary part is below `tol`.
    pub fn to_real(&self, tol: f64) -> Option<[[f64; 2]; 2]> {
        let a = &self.0;
        if a.iter().flatten().any(|z| z.im.abs() > tol) {
            return None;
        }
        Some([[a[0][0].re, a[0][1].re], [a[1][0].re, a[1][1].re]])
    }

    /// True if `self = e^{i phi} p` for some phase. `p` must be a Pauli-like
    /// matrix with two unit entries.
    fn equals_up_to_phase(&self, p: &Mat2, tol: f64) -> bool {
        let mut overlap = ZERO;
        for r in 0..2 {
            for c in 0..2 {
                overlap += p.0[r][c].conj() * self.0[r][c];
            }
        }
        let phase = overlap / 2.0;
        (phase.norm() - 1.0).abs() <= tol && self.approx_eq(&p.scale(phase), tol)
    }
}

/// Minimal elementary-gate cost class of a controlled single-qubit gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CostClass {
    AtMostTwo,
    Three,
    Four,
}

/// Classifies `CU` by the minimal number of elementary gates.
///
/// The `AtMostTwo` case is tested first: `Z` also satisfies the trace and
/// determinant conditions of `Three`, and the cheaper class wins.
pub fn classify_controlled_cost(u: &Mat2) -> Result<CostClass> {
    if !u.is_unitary(UNITARY_TOL) {
        return Err(DickeError::InvalidGate(format!("{u:?} is not unitary")));
    }
    let tol = CLASSIFY_TOL;
    if [Mat2::I, Mat2::X, Mat2::Z].iter().any(|p| u.equals_up_to_phase(p, tol)) {
        return Ok(CostClass::AtMostTwo);
    }
    let tr = u.trace();
    let det = u.det();
    let tr_ux = u.mul(&Mat2::X).trace();
    if tr_ux.norm() <= tol && tr.norm() > tol && (det - ONE).norm() <= tol {
        return Ok(CostClass::Four);
    }
    if tr.norm() <= tol && (det + ONE).norm() <= tol {
        return Ok(CostClass::Three);
    }
    Err(DickeError::InvalidGate(format!("{u:?} is unclassifiable: outside the three cost cases")))
}

fn distinct(qs: &[usize]) -> Result<()> {
    for (i, a) in qs.iter().enumerate() {
        if *a == 0 {
            return Err(DickeError::QubitOutOfRange { qubit: 0, n: 0 });
        }
        if qs[i + 1..].contains(a) {
            return Err(DickeError::InvalidGate(format!("repeated qubit {a} in {qs:?}")));
        }
    }
    Ok(())
}

/// Controlled-Ry(theta): 2 CNOT + 2 Ry.
pub fn decompose_cry(theta: f64, ctrl: usize, targ: usize) -> Result<Vec<Gate>> {
    distinct(&[ctrl, targ])?;
    Ok(vec![
        Gate::cx(ctrl, targ),
        Gate::ry(targ, -theta / 2.0),
        Gate::cx(ctrl, targ),
        Gate::ry(targ, theta / 2.0),
    ])
}

/// Controlled-U(alpha) in 1 CNOT + 2 Ry. With `alpha = pi - theta` it agrees
/// with controlled-Ry(theta) whenever the input is not |1>|1> on (targ, ctrl).
pub fn u0_sequence(alpha: f64, ctrl: usize, targ: usize) -> Result<Vec<Gate>> {
    distinct(&[ctrl, targ])?;
    Ok(vec![Gate::ry(targ, alpha / 2.0), Gate::cx(ctrl, targ), Gate::ry(targ, -alpha / 2.0)])
}

/// Doubly controlled Ry(theta): 4 CNOT + 4 Ry, rotation first.
pub fn decompose_ccry(theta: f64, c1: usize, c2: usize, targ: usize) -> Result<Vec<Gate>> {
    distinct(&[c1, c2, targ])?;
    let a = theta / 4.0;
    Ok(vec![
        Gate::ry(targ, a),
        Gate::cx(c1, targ),
        Gate::ry(targ, -a),
        Gate::cx(c2, targ),
        Gate::ry(targ, a),
        Gate::cx(c1, targ),
        Gate::ry(targ, -a),
        Gate::cx(c2, targ),
    ])
}

/// Same operator as [`decompose_ccry`], cyclically shifted to start with
/// `CX(c1, targ)`. The builders use this form so the leading CNOT can merge
/// with the CNOTs before it.
pub fn ccry_ladder(theta: f64, c1: usize, c2: usize, targ: usize) -> Result<Vec<Gate>> {
    distinct(&[c1, c2, targ])?;
    let a = theta / 4.0;
    Ok(vec![
        Gate::cx(c1, targ),
        Gate::ry(targ, -a),
        Gate::cx(c2, targ),
        Gate::ry(targ, a),
        Gate::cx(c1, targ),
        Gate::ry(targ, -a),
        Gate::cx(c2, targ),
        Gate::ry(targ, a),
    ])
}

/// Controlled block of the cheap completion of T1(theta): `U(pi - theta)`.
pub fn complete_t1(theta: f64) -> Result<Mat2> {
    if !(theta > 0.0 && theta < PI) {
        return Err(DickeError::InvalidParams(format!("T1 angle {theta} outside (0, pi)")));
    }
    Ok(Mat2::u_alpha(PI - theta))
}

// ---------------------------------------------------------------------------
// dense matrices

/// Real square matrix, row-major, used as a unitary oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn identity(dim: usize) -> Matrix {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Matrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, c)).collect()
    }

    fn set_column(&mut self, c: usize, col: &[f64]) {
        for (r, v) in col.iter().enumerate() {
            self.data[r * self.dim + c] = *v;
        }
    }

    pub fn max_abs_diff(&self, o: &Matrix) -> f64 {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `u` on `targ` when every qubit in `ctrls` is 1, identity otherwise.
    /// Qubit 1 is the most significant index bit, as in the simulator.
    ///
    /// Panics if `u` has an imaginary part; the oracle is real.
    pub fn controlled(m: usize, ctrls: &[usize], targ: usize, u: &Mat2) -> Matrix {
        let u = u.to_real(1e-15).expect("real single-qubit gate");
        let dim = 1usize << m;
        let bit = |q: usize| 1usize << (m - q);
        let mut out = Matrix::identity(dim);
        for j in 0..dim {
            if ctrls.iter().all(|&c| j & bit(c) != 0) {
                let tb = bit(targ);
                let b = usize::from(j & tb != 0);
                let mut col = vec![0.0; dim];
                col[j & !tb] = u[0][b];
                col[j | tb] = u[1][b];
                out.set_column(j, &col);
            }
        }
        out
    }
}

pub const MAX_FRAGMENT_QUBITS: usize = 6;

/// Unitary of a gate list on `m` qubits, first gate applied first.
pub fn fragment_unitary(gates: &[Gate], m: usize) -> Result<Matrix> {
    if m == 0 || m > MAX_FRAGMENT_QUBITS {
        return Err(DickeError::TooManyQubits { n: m, max: MAX_FRAGMENT_QUBITS });
    }
    for g in gates {
        for q in 1..=64 {
            if g.touches(q) && q > m {
                return Err(DickeError::QubitOutOfRange { qubit: q, n: m });
            }
        }
    }
    let dim = 1usize << m;
    let mut out = Matrix::identity(dim);
    for j in 0..dim {
        let mut col = vec![0.0; dim];
        col[j] = 1.0;
        for g in gates {
            apply_gate(&mut col, m, g);
        }
        out.set_column(j, &col);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// partially defined unitaries

/// A unitary specified only on some basis inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSpec {
    m: usize,
    entries: Vec<(usize, Vec<f64>)>,
}

impl PartialSpec {
    /// Checks that some unitary completion can exist: distinct inputs,
    /// unit-norm outputs and pairwise orthogonal outputs.
    pub fn new(m: usize, entries: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        if m == 0 || m > MAX_FRAGMENT_QUBITS {
            return Err(DickeError::TooManyQubits { n: m, max: MAX_FRAGMENT_QUBITS });
        }
        let dim = 1usize << m;
        for (i, (inp, out)) in entries.iter().enumerate() {
            if *inp >= dim || out.len() != dim {
                return Err(DickeError::InconsistentSpec(format!("entry {i} has the wrong size")));
            }
            if entries[..i].iter().any(|(p, _)| p == inp) {
                return Err(DickeError::InconsistentSpec(format!("input {inp} listed twice")));
            }
            let norm: f64 = out.iter().map(|a| a * a).sum();
            if (norm - 1.0).abs() > UNITARY_TOL {
                return Err(DickeError::InconsistentSpec(format!("output for input {inp} has norm {norm}")));
            }
            for (p, o) in &entries[..i] {
                let ip: f64 = out.iter().zip(o).map(|(a, b)| a * b).sum();
                if ip.abs() > UNITARY_TOL {
                    return Err(DickeError::InconsistentSpec(format!(
                        "outputs for orthogonal inputs {p} and {inp} overlap by {ip}"
                    )));
                }
            }
        }
        Ok(PartialSpec { m, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[(usize, Vec<f64>)] {
        &self.entries
    }

    /// Does `u` send every specified input to its output?
    pub fn satisfied_by(&self, u: &Matrix, tol: f64) -> bool {
        u.dim() == 1 << self.m
            && self.entries.iter().all(|(inp, out)| {
                u.column(*inp).iter().zip(out).all(|(a, b)| (a - b).abs() <= tol)
            })
    }

    /// Rows already saturated by the specified columns. Rows of a unitary have
    /// unit norm, so every unspecified column must vanish on these rows.
    pub fn forced_zero_rows(&self) -> Vec<usize> {
        (0..1usize << self.m)
            .filter(|&r| {
                let w: f64 = self.entries.iter().map(|(_, o)| o[r] * o[r]).sum();
                (w - 1.0).abs() <= UNITARY_TOL
            })
            .collect()
    }

    /// Basis inputs with no specified output.
    pub fn free_inputs(&self) -> Vec<usize> {
        (0..1usize << self.m).filter(|i| self.entries.iter().all(|(p, _)| p != i)).collect()
    }
}

fn basis(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

/// T1(theta) on (targ, ctrl) = (qubit 1, qubit 2): fixes |00> and |10>,
/// sends |01> to (cos(theta/2)|0> + sin(theta/2)|1>)|1>.
pub fn t1_spec(theta: f64) -> PartialSpec {
    let (s, c) = (theta / 2.0).sin_cos();
    let mut out = vec![0.0; 4];
    out[0b01] = c;
    out[0b11] = s;
    PartialSpec::new(2, vec![(0b00, basis(4, 0b00)), (0b10, basis(4, 0b10)), (0b01, out)])
        .expect("T1 is a valid partial isometry")
}

/// T4: |0011> -> |0011>, |0111> -> |0100>.
pub fn t4_spec() -> PartialSpec {
    PartialSpec::new(4, vec![(0b0011, basis(16, 0b0011)), (0b0111, basis(16, 0b0100))])
        .expect("T4 is a valid partial isometry")
}

/// T4 moved to the start state |0010>: |0010> -> |0011>, |0110> -> |0100>.
pub fn t4_rewired_spec() -> PartialSpec {
    PartialSpec::new(4, vec![(0b0010, basis(16, 0b0011)), (0b0110, basis(16, 0b0100))])
        .expect("rewired T4 is a valid partial isometry")
}

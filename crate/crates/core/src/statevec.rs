//! Dense statevector simulator with exactly the gates the smoothing circuits
//! need.
//!
//! Amplitude index `i` is the basis state whose qubit `j` holds bit `j` of `i`,
//! matching [`BitString`] indices. Kernels update amplitude pairs in place.
//! The norm is never renormalized; [`StateVector::check_norm`] reports drift.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::bitdata::{BitString, FlipProbabilities};
use crate::oracle::TruthTable;
use crate::{Error, Result, MAX_QUBITS};

pub const NORM_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

type Matrix2 = [[Complex64; 2]; 2];

/// A contiguous block of qubits `start..start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Register {
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    #[inline]
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    #[inline]
    fn contains(&self, qubit: usize) -> bool {
        (self.start..self.end()).contains(&qubit)
    }

    #[inline]
    fn extract(&self, index: usize) -> usize {
        (index >> self.start) & ((1 << self.len) - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn new_ground_state(num_qubits: usize) -> Result<Self> {
        check_budget(num_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Ok(Self { num_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No norm check.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter("amplitude count must be a power of two >= 2"));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_budget(num_qubits)?;
        Ok(Self { num_qubits, amplitudes })
    }

    /// `|i⟩` on `num_qubits` qubits.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::new_ground_state(num_qubits)?;
        if index >= state.amplitudes.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: state.amplitudes.len(),
            });
        }
        state.amplitudes[0] = ZERO;
        state.amplitudes[index] = ONE;
        Ok(state)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_norm(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NormDrift(norm));
        }
        Ok(())
    }

    /// `Σ conj(self_i) other_i`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                len: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_register(&self, register: Register, control: Option<usize>) -> Result<()> {
        if register.len == 0 || register.end() > self.num_qubits {
            return Err(Error::RegisterMismatch {
                start: register.start,
                end: register.end(),
                num_qubits: self.num_qubits,
            });
        }
        if let Some(c) = control {
            self.check_qubit(c)?;
            if register.contains(c) {
                return Err(Error::ControlOverlap(c));
            }
        }
        Ok(())
    }

    fn apply_matrix(&mut self, qubit: usize, m: &Matrix2, control: Option<usize>) -> Result<()> {
        self.check_qubit(qubit)?;
        if let Some(c) = control {
            self.check_qubit(c)?;
            if c == qubit {
                return Err(Error::ControlOverlap(c));
            }
        }
        let stride = 1usize << qubit;
        let cmask = control.map_or(0, |c| 1usize << c);
        for (b, block) in self.amplitudes.chunks_exact_mut(stride << 1).enumerate() {
            let base = b * (stride << 1);
            let (lo, hi) = block.split_at_mut(stride);
            for (k, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                if (base + k) & cmask != cmask {
                    continue;
                }
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
        Ok(())
    }

    pub fn apply_ry(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.apply_matrix(qubit, &ry_matrix(angle), None)
    }

    pub fn apply_rx(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.apply_matrix(qubit, &rx_matrix(angle), None)
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        self.apply_matrix(qubit, &hadamard_matrix(), None)
    }

    /// `diag(1, e^{iφ})`.
    pub fn apply_phase(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.apply_matrix(qubit, &phase_matrix(angle), None)
    }

    pub fn apply_controlled_ry(&mut self, control: usize, qubit: usize, angle: f64) -> Result<()> {
        self.apply_matrix(qubit, &ry_matrix(angle), Some(control))
    }

    pub fn apply_controlled_rx(&mut self, control: usize, qubit: usize, angle: f64) -> Result<()> {
        self.apply_matrix(qubit, &rx_matrix(angle), Some(control))
    }

    pub fn apply_controlled_phase(&mut self, control: usize, qubit: usize, angle: f64) -> Result<()> {
        self.apply_matrix(qubit, &phase_matrix(angle), Some(control))
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Ok(());
        }
        let (ma, mb) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            // visit each (…1_a…0_b…) index once and swap with its partner
            if i & ma != 0 && i & mb == 0 {
                self.amplitudes.swap(i, i ^ ma ^ mb);
            }
        }
        Ok(())
    }

    /// Multiplies amplitude `i` by −1 when `predicate` is 1 on the bits of `i`
    /// inside `target` (and the control bit, if any, is set).
    pub fn apply_sign_diagonal(
        &mut self,
        predicate: &TruthTable,
        target: Register,
        control: Option<usize>,
    ) -> Result<()> {
        self.check_register(target, control)?;
        if predicate.num_inputs() != target.len {
            return Err(Error::LengthMismatch {
                expected: target.len,
                actual: predicate.num_inputs(),
            });
        }
        let cmask = control.map_or(0, |c| 1usize << c);
        let outputs = predicate.outputs();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & cmask == cmask && outputs[target.extract(i)] {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// `R₀ = 2|0⟩⟨0| − I` on `target`: negates every amplitude whose target bits
    /// are not all zero (only where the control bit is set, if any).
    pub fn apply_reflection_about_zero(&mut self, target: Register, control: Option<usize>) -> Result<()> {
        self.check_register(target, control)?;
        let cmask = control.map_or(0, |c| 1usize << c);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & cmask == cmask && target.extract(i) != 0 {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Born distribution of the listed qubits; outcome bit `k` is `qubits[k]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        if qubits.len() > MAX_QUBITS {
            return Err(Error::QubitBudget {
                qubits: qubits.len(),
                max: MAX_QUBITS,
            });
        }
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let outcome = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &q)| acc | (((i >> q) & 1) << k));
            dist[outcome] += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Samples `shots` measurements of `qubits`; returns counts per outcome.
    pub fn measure_register<R: Rng + ?Sized>(&self, qubits: &[usize], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be positive"));
        }
        let dist = self.marginal(qubits)?;
        let sampler = DiscreteSampler::new(&dist);
        let mut counts = vec![0u64; dist.len()];
        for _ in 0..shots {
            counts[sampler.sample(rng)] += 1;
        }
        Ok(counts)
    }
}

fn check_budget(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::QubitBudget {
            qubits: num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

fn ry_matrix(angle: f64) -> Matrix2 {
    let (s, c) = (libm::sin(angle / 2.0), libm::cos(angle / 2.0));
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn rx_matrix(angle: f64) -> Matrix2 {
    let (s, c) = (libm::sin(angle / 2.0), libm::cos(angle / 2.0));
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

fn hadamard_matrix() -> Matrix2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn phase_matrix(angle: f64) -> Matrix2 {
    [[ONE, ZERO], [ZERO, Complex64::new(libm::cos(angle), libm::sin(angle))]]
}

/// Inverse-CDF sampler over a finite distribution.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let u = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // rounding can leave u at the very top; fall back to the last outcome
        // with nonzero weight
        if idx >= self.cumulative.len() {
            let mut k = self.cumulative.len() - 1;
            while k > 0 && self.cumulative[k] == self.cumulative[k - 1] {
                k -= 1;
            }
            return k;
        }
        idx
    }
}

/// A gate of the fixed set used by the loader and the Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    H { qubit: usize },
    Phase { qubit: usize, angle: f64 },
    ControlledPhase { control: usize, qubit: usize, angle: f64 },
    Swap { a: usize, b: usize },
}

impl Gate {
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx { qubit, angle } => Gate::Rx { qubit, angle: -angle },
            Gate::Ry { qubit, angle } => Gate::Ry { qubit, angle: -angle },
            Gate::Phase { qubit, angle } => Gate::Phase { qubit, angle: -angle },
            Gate::ControlledPhase { control, qubit, angle } => Gate::ControlledPhase {
                control,
                qubit,
                angle: -angle,
            },
            g @ (Gate::H { .. } | Gate::Swap { .. }) => g,
        }
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Gate::Rx { qubit, angle } => state.apply_rx(qubit, angle),
            Gate::Ry { qubit, angle } => state.apply_ry(qubit, angle),
            Gate::H { qubit } => state.apply_hadamard(qubit),
            Gate::Phase { qubit, angle } => state.apply_phase(qubit, angle),
            Gate::ControlledPhase { control, qubit, angle } => state.apply_controlled_phase(control, qubit, angle),
            Gate::Swap { a, b } => state.apply_swap(a, b),
        }
    }
}

/// An ordered gate list; the first gate is applied first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateSequence {
    gates: Vec<Gate>,
}

impl GateSequence {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self { gates }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.apply(state))
    }

    /// Applies the adjoint: gates reversed, angles negated.
    pub fn apply_inverse(&self, state: &mut StateVector) -> Result<()> {
        self.gates.iter().rev().try_for_each(|g| g.inverse().apply(state))
    }

    pub fn inverse(&self) -> GateSequence {
        Self {
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }
}

/// Applies `inner · wrapped · inner†`. Adding a control to `wrapped` controls
/// the whole product, so `inner` itself never needs one.
pub fn apply_unitary_conjugated<F>(state: &mut StateVector, inner: &GateSequence, wrapped: F) -> Result<()>
where
    F: FnOnce(&mut StateVector) -> Result<()>,
{
    inner.apply_inverse(state)?;
    wrapped(state)?;
    inner.apply(state)
}

/// Rotation angles of the superposition loader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoaderParams {
    pub theta0: f64,
    pub theta_d: f64,
}

impl LoaderParams {
    pub fn new(probs: &FlipProbabilities) -> Self {
        let keep_plus = libm::acos(libm::sqrt(1.0 - probs.p_plus()));
        let keep_minus = libm::acos(libm::sqrt(1.0 - probs.p_minus()));
        Self {
            theta0: 2.0 * keep_plus,
            theta_d: -2.0 * (keep_plus + keep_minus),
        }
    }
}

/// `U(x, p₋, p₊) = ⊗_m RY(θ₀ + x_m θ_D) · RX(x_m π)` on qubits
/// `offset..offset + n`. `RX(0)` factors are omitted.
pub fn loader_circuit(x: &BitString, probs: &FlipProbabilities, offset: usize) -> GateSequence {
    let params = LoaderParams::new(probs);
    let mut seq = GateSequence::default();
    for (m, bit) in x.bits().enumerate() {
        let qubit = offset + m;
        if bit {
            seq.push(Gate::Rx { qubit, angle: PI });
            seq.push(Gate::Ry {
                qubit,
                angle: params.theta0 + params.theta_d,
            });
        } else {
            seq.push(Gate::Ry {
                qubit,
                angle: params.theta0,
            });
        }
    }
    seq
}

/// `U(x, p₋, p₊)|0⟩`, equal to `|Ψ(x)⟩` up to the global phase `(−i)^{|x|}`.
pub fn load_superposition(x: &BitString, probs: &FlipProbabilities) -> Result<StateVector> {
    let mut state = StateVector::new_ground_state(x.len())?;
    loader_circuit(x, probs, 0).apply(&mut state)?;
    state.check_norm()?;
    Ok(state)
}

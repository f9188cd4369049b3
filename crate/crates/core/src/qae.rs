//! Amplitude estimation of the smooth classifier: Grover operator assembly,
//! phase estimation on a counting register, folding outcomes onto the
//! amplitude grid and median boosting.
//!
//! Qubit layout: the work register occupies qubits `0..n` (bit `j` of the
//! perturbation code on qubit `j`), counting qubit `k` is qubit `n + k` and
//! controls `G^(2^k)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitdata::{BitString, FlipProbabilities};
use crate::certify::smooth_sum;
use crate::oracle::TruthTable;
use crate::statevec::{
    apply_unitary_conjugated, loader_circuit, DiscreteSampler, Gate, GateSequence, Register, StateVector,
};
use crate::{Error, Result, MAX_QUBITS};

/// `G = R_Ψ · O_f` with `R_Ψ = U R₀ U†`.
#[derive(Debug, Clone)]
pub struct GroverOperator {
    x: BitString,
    probs: FlipProbabilities,
    loader: GateSequence,
    oracle: TruthTable,
}

/// Assembles the Grover operator for smoothing `oracle` around `x`.
pub fn build_grover(x: &BitString, probs: &FlipProbabilities, oracle: &TruthTable) -> Result<GroverOperator> {
    if oracle.num_inputs() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: oracle.num_inputs(),
        });
    }
    Ok(GroverOperator {
        x: *x,
        probs: *probs,
        loader: loader_circuit(x, probs, 0),
        oracle: oracle.clone(),
    })
}

impl GroverOperator {
    #[inline]
    pub fn num_work_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn point(&self) -> &BitString {
        &self.x
    }

    pub fn probs(&self) -> &FlipProbabilities {
        &self.probs
    }

    pub fn loader(&self) -> &GateSequence {
        &self.loader
    }

    pub fn oracle(&self) -> &TruthTable {
        &self.oracle
    }

    fn work(&self) -> Register {
        Register::new(0, self.num_work_qubits())
    }

    /// Loads `U|0⟩` into the work register.
    pub fn prepare(&self, state: &mut StateVector) -> Result<()> {
        self.loader.apply(state)
    }

    /// One application of `G` to the work register, optionally controlled.
    /// Costs exactly one oracle call.
    pub fn apply(&self, state: &mut StateVector, control: Option<usize>) -> Result<()> {
        let work = self.work();
        state.apply_sign_diagonal(&self.oracle, work, control)?;
        apply_unitary_conjugated(state, &self.loader, |s| s.apply_reflection_about_zero(work, control))
    }
}

/// `g(x) = |⟨a|Ψ(x)⟩|² = Σ_{f(x̃)=1} φ(x̃|x)`.
pub fn analytic_amplitude(x: &BitString, probs: &FlipProbabilities, oracle: &TruthTable) -> Result<f64> {
    smooth_sum(x, probs, oracle)
}

/// The amplitude grid `a_j = sin²(πj / 2^t)`, `j = 0..=2^(t−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid {
    t: usize,
}

impl PhaseGrid {
    pub fn new(t: usize) -> Result<Self> {
        if t == 0 || t > MAX_QUBITS {
            return Err(Error::QubitBudget {
                qubits: t,
                max: MAX_QUBITS,
            });
        }
        Ok(Self { t })
    }

    pub fn counting_qubits(&self) -> usize {
        self.t
    }

    /// Largest grid index, `2^(t−1)`, where `a = 1`.
    pub fn max_index(&self) -> usize {
        1 << (self.t - 1)
    }

    pub fn value(&self, j: usize) -> f64 {
        if j == self.max_index() {
            return 1.0;
        }
        let s = libm::sin(PI * j as f64 / (1u64 << self.t) as f64);
        s * s
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.max_index()).map(|j| self.value(j)).collect()
    }

    /// Grid neighbours of `j`, clamped to `[0, 1]` at the ends.
    pub fn bounds(&self, j: usize) -> (f64, f64) {
        let lower = if j == 0 { 0.0 } else { self.value(j - 1) };
        let upper = if j >= self.max_index() { 1.0 } else { self.value(j + 1) };
        (lower, upper)
    }
}

/// Folds the outcome pair `(y, T − y)` onto one grid index and its amplitude.
pub fn fold_and_grid(y: usize, t: usize) -> Result<(usize, f64)> {
    let grid = PhaseGrid::new(t)?;
    let big_t = 1usize << t;
    if y >= big_t {
        return Err(Error::IndexOutOfRange { index: y, len: big_t });
    }
    let j = y.min(big_t - y);
    Ok((j, grid.value(j)))
}

/// Repeats needed for a median to fail with probability at most `delta`.
pub fn required_repeats(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1)"));
    }
    Ok(libm::ceil(17.0 * libm::log(1.0 / delta)) as usize)
}

/// Lower median of the grid indices.
pub fn median_boost(samples: &[usize]) -> Result<usize> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    Ok(sorted[(sorted.len() - 1) / 2])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QaeConfig {
    pub counting_qubits: usize,
    pub delta: f64,
    pub repeats: usize,
    pub seed: u64,
    /// Re-simulate the full circuit for every repeat instead of sampling the
    /// counting-register distribution computed once.
    pub per_shot: bool,
}

impl QaeConfig {
    /// `repeats = ⌈17 ln(1/δ)⌉`.
    pub fn new(counting_qubits: usize, delta: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            counting_qubits,
            delta,
            repeats: required_repeats(delta)?,
            seed,
            per_shot: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counting_qubits == 0 {
            return Err(Error::InvalidParameter("at least one counting qubit is required"));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn oracle_calls(&self) -> u64 {
        self.repeats as u64 * (1u64 << self.counting_qubits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeEstimate {
    pub point: f64,
    pub grid_index: usize,
    pub counting_qubits: usize,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub oracle_calls: u64,
}

/// Inverse QFT gates on `register`: `|c⟩ ↦ T^{−1/2} Σ_y e^{−2πi c y / T} |y⟩`
/// with qubit `register.start` as the least significant bit.
pub fn inverse_qft_circuit(register: Register) -> GateSequence {
    qft_circuit(register).inverse()
}

/// Textbook QFT: Hadamards and controlled phases from the most significant
/// qubit down, then a bit reversal.
pub fn qft_circuit(register: Register) -> GateSequence {
    let t = register.len;
    let q = |k: usize| register.start + k;
    let mut seq = GateSequence::default();
    for j in (0..t).rev() {
        seq.push(Gate::H { qubit: q(j) });
        for m in (0..j).rev() {
            let angle = PI / (1u64 << (j - m)) as f64;
            seq.push(Gate::ControlledPhase {
                control: q(m),
                qubit: q(j),
                angle,
            });
        }
    }
    for k in 0..t / 2 {
        seq.push(Gate::Swap {
            a: q(k),
            b: q(t - 1 - k),
        });
    }
    seq
}

fn check_layout(g: &GroverOperator, t: usize) -> Result<()> {
    let qubits = g.num_work_qubits() + t;
    if t == 0 || qubits > MAX_QUBITS {
        return Err(Error::QubitBudget {
            qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Counting-register distribution after phase estimation, together with the
/// number of oracle calls spent producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimation {
    t: usize,
    distribution: Vec<f64>,
    oracle_calls: u64,
}

impl PhaseEstimation {
    /// Evaluates the circuit through its branch decomposition: after the
    /// Hadamards and controlled powers the joint state is
    /// `T^{−1/2} Σ_c |c⟩ ⊗ G^c U|0⟩`, so the work states `G^c U|0⟩` are built by
    /// `T − 1` successive applications of `G`. The inverse QFT then runs on
    /// that joint state exactly as in the gate-level circuit.
    pub fn simulate(g: &GroverOperator, t: usize) -> Result<Self> {
        check_layout(g, t)?;
        let n = g.num_work_qubits();
        let big_t = 1usize << t;
        let mut work = StateVector::new_ground_state(n)?;
        g.prepare(&mut work)?;
        let scale = 1.0 / libm::sqrt(big_t as f64);
        let mut joint = vec![Complex64::new(0.0, 0.0); big_t << n];
        let mut calls = 1u64;
        for (c, block) in joint.chunks_exact_mut(1 << n).enumerate() {
            if c > 0 {
                g.apply(&mut work, None)?;
                calls += 1;
            }
            for (dst, src) in block.iter_mut().zip(work.amplitudes()) {
                *dst = src * scale;
            }
        }
        let state = StateVector::from_amplitudes(joint)?;
        state.check_norm()?;
        Self::finish(state, n, t, calls)
    }

    /// Runs the literal circuit: Hadamards on the counting register, loader on
    /// the work register, controlled-`G` applied `2^k` times under counting
    /// qubit `k`, inverse QFT.
    pub fn simulate_gates(g: &GroverOperator, t: usize) -> Result<Self> {
        let (state, calls) = phase_estimation_state(g, t)?;
        Self::finish(state, g.num_work_qubits(), t, calls)
    }

    fn finish(mut state: StateVector, n: usize, t: usize, calls: u64) -> Result<Self> {
        inverse_qft_circuit(Register::new(n, t)).apply(&mut state)?;
        state.check_norm()?;
        let mut distribution = vec![0.0; 1 << t];
        for (y, block) in state.amplitudes().chunks_exact(1 << n).enumerate() {
            distribution[y] = block.iter().map(|a| a.norm_sqr()).sum();
        }
        Ok(Self {
            t,
            distribution,
            oracle_calls: calls,
        })
    }

    pub fn counting_qubits(&self) -> usize {
        self.t
    }

    /// `P(y)` for `y = 0..2^t`.
    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    /// Oracle calls per circuit run: `2^t − 1` Grover applications plus one
    /// state preparation.
    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    pub fn sampler(&self) -> DiscreteSampler {
        DiscreteSampler::new(&self.distribution)
    }

    /// Median-boosted estimate from `repeats` independent draws; repeat `r`
    /// uses the stream seeded with `seed + r`.
    pub fn boosted_estimate(&self, repeats: usize, delta: f64, seed: u64) -> Result<AmplitudeEstimate> {
        let sampler = self.sampler();
        let indices = (0..repeats)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
                fold_and_grid(sampler.sample(&mut rng), self.t).map(|(j, _)| j)
            })
            .collect::<Result<Vec<_>>>()?;
        summarize(&indices, self.t, delta, self.oracle_calls * repeats as u64)
    }
}

/// Pre-measurement state of the gate-level circuit (before the inverse QFT)
/// and the oracle calls it used.
pub fn phase_estimation_state(g: &GroverOperator, t: usize) -> Result<(StateVector, u64)> {
    check_layout(g, t)?;
    let n = g.num_work_qubits();
    let mut state = StateVector::new_ground_state(n + t)?;
    for k in 0..t {
        state.apply_hadamard(n + k)?;
    }
    g.prepare(&mut state)?;
    let mut calls = 1u64;
    for k in 0..t {
        for _ in 0..1u64 << k {
            g.apply(&mut state, Some(n + k))?;
            calls += 1;
        }
    }
    state.check_norm()?;
    Ok((state, calls))
}

/// One run of the gate-level circuit followed by a measurement of the
/// counting register.
pub fn run_phase_estimation<R: Rng + ?Sized>(g: &GroverOperator, t: usize, rng: &mut R) -> Result<usize> {
    let pe = PhaseEstimation::simulate_gates(g, t)?;
    Ok(pe.sampler().sample(rng))
}

fn summarize(indices: &[usize], t: usize, delta: f64, oracle_calls: u64) -> Result<AmplitudeEstimate> {
    let grid = PhaseGrid::new(t)?;
    let j = median_boost(indices)?;
    let (lower, upper) = grid.bounds(j);
    Ok(AmplitudeEstimate {
        point: grid.value(j),
        grid_index: j,
        counting_qubits: t,
        lower,
        upper,
        confidence: 1.0 - delta,
        oracle_calls,
    })
}

/// Algorithm end to end: simulate phase estimation, take `repeats` shots,
/// fold, median, read the grid bounds.
pub fn estimate(
    x: &BitString,
    probs: &FlipProbabilities,
    oracle: &TruthTable,
    cfg: &QaeConfig,
) -> Result<AmplitudeEstimate> {
    cfg.validate()?;
    let g = build_grover(x, probs, oracle)?;
    let t = cfg.counting_qubits;
    if cfg.per_shot {
        let mut indices = Vec::with_capacity(cfg.repeats);
        let mut calls = 0;
        for r in 0..cfg.repeats {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            let pe = PhaseEstimation::simulate_gates(&g, t)?;
            calls += pe.oracle_calls();
            indices.push(fold_and_grid(pe.sampler().sample(&mut rng), t)?.0);
        }
        return summarize(&indices, t, cfg.delta, calls);
    }
    PhaseEstimation::simulate(&g, t)?.boosted_estimate(cfg.repeats, cfg.delta, cfg.seed)
}

/// Closed-form outcome law of phase estimation on `G` when the work register
/// starts in `|Ψ⟩`: an even mixture of the two eigenphases `±θ/π`, each
/// contributing the Fejér kernel `|S_T(y/T ∓ θ/π)|² / T²`.
pub fn closed_form_distribution(amplitude: f64, t: usize) -> Vec<f64> {
    let big_t = (1u64 << t) as f64;
    let theta = libm::asin(libm::sqrt(amplitude.clamp(0.0, 1.0)));
    let kernel = |delta: f64| {
        let s = libm::sin(PI * delta);
        if s.abs() < 1e-12 {
            1.0
        } else {
            let num = libm::sin(big_t * PI * delta);
            (num * num) / (s * s) / (big_t * big_t)
        }
    };
    (0..1usize << t)
        .map(|y| {
            let f = y as f64 / big_t;
            0.5 * kernel(f - theta / PI) + 0.5 * kernel(f + theta / PI)
        })
        .collect()
}

/// `2π√(a(1−a))/T + π²/T²`, the single-run error bound holding with
/// probability at least `8/π²`.
pub fn single_run_error_bound(amplitude: f64, t: usize) -> f64 {
    let big_t = (1u64 << t) as f64;
    2.0 * PI * libm::sqrt(amplitude * (1.0 - amplitude)) / big_t + PI * PI / (big_t * big_t)
}

//! Circuit pieces checked against explicitly assembled dense matrices.

use num_complex::Complex64;
use qsmooth_core::oracle::compile_truth_table;
use qsmooth_core::qae::{analytic_amplitude, build_grover, GroverOperator};
use qsmooth_core::statevec::{apply_unitary_conjugated, loader_circuit, Register};
use qsmooth_core::{BitString, FlipProbabilities, StateVector, TruthTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Matrix = Vec<Vec<Complex64>>;
type Op = Box<dyn Fn(&mut StateVector)>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Column `j` is the image of basis state `j`.
fn matrix_of(q: usize, mut op: impl FnMut(&mut StateVector)) -> Matrix {
    let dim = 1 << q;
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut s = StateVector::basis_state(q, j).unwrap();
        op(&mut s);
        cols.push(s.amplitudes().to_vec());
    }
    (0..dim).map(|i| (0..dim).map(|j| cols[j][i]).collect()).collect()
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn adjoint(a: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { ONE } else { ZERO }).collect())
        .collect()
}

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn diagonal_signs(table: &TruthTable) -> Matrix {
    let n = 1 << table.num_inputs();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i != j {
                        ZERO
                    } else if table.outputs()[i] {
                        -ONE
                    } else {
                        ONE
                    }
                })
                .collect()
        })
        .collect()
}

fn random_table(n: usize, rng: &mut impl Rng) -> TruthTable {
    TruthTable::new(n, (0..1 << n).map(|_| rng.gen_bool(0.5)).collect()).unwrap()
}

#[test]
fn every_gate_is_unitary_on_small_registers() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in 1..=4usize {
        let angle = rng.gen_range(-3.0..3.0);
        let table = random_table(q, &mut rng);
        let mut ops: Vec<Op> = Vec::new();
        for qubit in 0..q {
            ops.push(Box::new(move |s| s.apply_ry(qubit, angle).unwrap()));
            ops.push(Box::new(move |s| s.apply_rx(qubit, angle).unwrap()));
            ops.push(Box::new(move |s| s.apply_hadamard(qubit).unwrap()));
            ops.push(Box::new(move |s| s.apply_phase(qubit, angle).unwrap()));
        }
        let t = table.clone();
        ops.push(Box::new(move |s| {
            s.apply_sign_diagonal(&t, Register::new(0, q), None).unwrap()
        }));
        ops.push(Box::new(move |s| {
            s.apply_reflection_about_zero(Register::new(0, q), None).unwrap()
        }));
        if q >= 2 {
            let sub = random_table(q - 1, &mut rng);
            ops.push(Box::new(move |s| {
                s.apply_sign_diagonal(&sub, Register::new(0, q - 1), Some(q - 1))
                    .unwrap()
            }));
            ops.push(Box::new(move |s| {
                s.apply_reflection_about_zero(Register::new(1, q - 1), Some(0)).unwrap()
            }));
            ops.push(Box::new(move |s| s.apply_controlled_ry(q - 1, 0, angle).unwrap()));
            ops.push(Box::new(move |s| s.apply_controlled_rx(0, q - 1, angle).unwrap()));
            ops.push(Box::new(move |s| s.apply_controlled_phase(q - 1, 0, angle).unwrap()));
            ops.push(Box::new(move |s| s.apply_swap(0, q - 1).unwrap()));
        }
        for op in &ops {
            let m = matrix_of(q, |s| op(s));
            assert!(max_diff(&matmul(&adjoint(&m), &m), &identity(1 << q)) < 1e-10, "q={q}");
        }
    }
}

#[test]
fn conjugated_reflection_matches_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let x = BitString::new(2, rng.gen_range(0..4)).unwrap();
        let probs = FlipProbabilities::new(rng.gen(), rng.gen()).unwrap();
        let loader = loader_circuit(&x, &probs, 0);
        let u = matrix_of(2, |s| loader.apply(s).unwrap());
        let r0 = matrix_of(2, |s| s.apply_reflection_about_zero(Register::new(0, 2), None).unwrap());
        let expect = matmul(&matmul(&u, &r0), &adjoint(&u));
        let got = matrix_of(2, |s| {
            apply_unitary_conjugated(s, &loader, |s| s.apply_reflection_about_zero(Register::new(0, 2), None)).unwrap()
        });
        assert!(max_diff(&got, &expect) < 1e-12);
    }
}

fn grover_matrix(g: &GroverOperator) -> Matrix {
    matrix_of(g.num_work_qubits(), |s| g.apply(s, None).unwrap())
}

#[test]
fn uniform_loader_gives_textbook_grover() {
    let x: BitString = "00".parse().unwrap();
    let oracle = compile_truth_table(|b| b.index() == 3, 2).unwrap();
    let g = build_grover(&x, &FlipProbabilities::new(0.5, 0.5).unwrap(), &oracle).unwrap();
    // (2|s⟩⟨s| − I) · O_f with |s⟩ uniform
    let diffusion: Matrix = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| Complex64::new(0.5 - if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let expect = matmul(&diffusion, &diagonal_signs(&oracle));
    assert!(max_diff(&grover_matrix(&g), &expect) < 1e-12);
}

#[test]
fn global_phase_of_loader_cancels_in_grover() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in 1..=3usize {
        for _ in 0..5 {
            let x = BitString::new(q, rng.gen_range(0..1 << q)).unwrap();
            let probs = FlipProbabilities::new(rng.gen(), rng.gen()).unwrap();
            let oracle = random_table(q, &mut rng);
            let g = build_grover(&x, &probs, &oracle).unwrap();
            // strip (−i)^{|x|} by multiplying with i^{|x|}
            let phase = Complex64::i().powu(x.count_ones() as u32);
            let u: Matrix = matrix_of(q, |s| g.loader().apply(s).unwrap())
                .into_iter()
                .map(|row| row.into_iter().map(|a| a * phase).collect())
                .collect();
            let r0 = matrix_of(q, |s| s.apply_reflection_about_zero(Register::new(0, q), None).unwrap());
            let stripped = matmul(&matmul(&matmul(&u, &r0), &adjoint(&u)), &diagonal_signs(&oracle));
            assert!(max_diff(&grover_matrix(&g), &stripped) < 1e-12);
        }
    }
}

#[test]
fn psi_equals_transition_pmf_after_phase_strip() {
    let x: BitString = "101".parse().unwrap();
    let probs = FlipProbabilities::new(0.2, 0.35).unwrap();
    let mut s = StateVector::new_ground_state(3).unwrap();
    loader_circuit(&x, &probs, 0).apply(&mut s).unwrap();
    let phase = Complex64::i().powu(2);
    for (i, a) in s.amplitudes().iter().enumerate() {
        let p =
            qsmooth_core::bitdata::transition_probability(&BitString::new(3, i as u64).unwrap(), &x, &probs).unwrap();
        let stripped = a * phase;
        assert!(stripped.im.abs() < 1e-12 && (stripped.re - p.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn controlled_grover_acts_only_when_control_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = BitString::new(2, 1).unwrap();
    let probs = FlipProbabilities::new(0.3, 0.4).unwrap();
    let oracle = random_table(2, &mut rng);
    let g = build_grover(&x, &probs, &oracle).unwrap();
    let plain = grover_matrix(&g);
    let controlled = matrix_of(3, |s| g.apply(s, Some(2)).unwrap());
    for i in 0..8 {
        for j in 0..8 {
            let expect = match (i >> 2, j >> 2) {
                (0, 0) => {
                    if i == j {
                        ONE
                    } else {
                        ZERO
                    }
                }
                (1, 1) => plain[i & 3][j & 3],
                _ => ZERO,
            };
            assert!((controlled[i][j] - expect).norm() < 1e-12);
        }
    }
}

/// Eigenvalues of a 2×2 complex matrix.
fn eig2(m: [[Complex64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

#[test]
fn grover_rotates_good_bad_plane_by_twice_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(1..=4usize);
        let x = BitString::new(n, rng.gen_range(0..1 << n)).unwrap();
        let probs = FlipProbabilities::new(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)).unwrap();
        let oracle = random_table(n, &mut rng);
        let a = analytic_amplitude(&x, &probs, &oracle).unwrap();
        if !(1e-6..=1.0 - 1e-6).contains(&a) {
            continue;
        }
        let g = build_grover(&x, &probs, &oracle).unwrap();
        let mut psi = StateVector::new_ground_state(n).unwrap();
        g.prepare(&mut psi).unwrap();
        let split = |good: bool| -> Vec<Complex64> {
            let v: Vec<Complex64> = psi
                .amplitudes()
                .iter()
                .zip(oracle.outputs())
                .map(|(&amp, &f)| if f == good { amp } else { ZERO })
                .collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|c| c / norm).collect()
        };
        let basis = [split(true), split(false)];
        let gm = grover_matrix(&g);
        let mut m = [[ZERO; 2]; 2];
        for (r, bra) in basis.iter().enumerate() {
            for (c, ket) in basis.iter().enumerate() {
                let image: Vec<Complex64> = (0..1 << n)
                    .map(|i| (0..1 << n).map(|k| gm[i][k] * ket[k]).sum())
                    .collect();
                m[r][c] = bra.iter().zip(&image).map(|(b, v)| b.conj() * v).sum();
            }
        }
        let theta = a.sqrt().asin();
        let mut args: Vec<f64> = eig2(m).iter().map(|l| l.arg()).collect();
        args.sort_by(|p, q| p.partial_cmp(q).unwrap());
        assert!(
            (args[0] + 2.0 * theta).abs() < 1e-9 && (args[1] - 2.0 * theta).abs() < 1e-9,
            "a={a} args={args:?}"
        );
        checked += 1;
    }
}

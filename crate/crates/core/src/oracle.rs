//! Base classifiers as precompiled truth tables over perturbation codes, plus
//! the stand-in domain classifiers used by the experiments.

use alloc::vec::Vec;

use rand::Rng;

use crate::bitdata::{decode_perturbation, BitString, PerturbationScheme};
use crate::{Error, Result, MAX_QUBITS};

/// `f : {0,1}^n → {0,1}` stored as `2^n` outputs indexed by [`BitString::index`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    outputs: Vec<bool>,
}

impl TruthTable {
    pub fn new(n: usize, outputs: Vec<bool>) -> Result<Self> {
        check_size(n)?;
        if outputs.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                actual: outputs.len(),
            });
        }
        Ok(Self { n, outputs })
    }

    pub fn constant(n: usize, value: bool) -> Result<Self> {
        check_size(n)?;
        Ok(Self {
            n,
            outputs: alloc::vec![value; 1 << n],
        })
    }

    pub fn from_fn<F: FnMut(&BitString) -> bool>(n: usize, classifier: F) -> Result<Self> {
        compile_truth_table(classifier, n)
    }

    #[inline]
    pub fn num_inputs(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    pub fn get(&self, input: &BitString) -> Result<bool> {
        if input.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: input.len(),
            });
        }
        Ok(self.outputs[input.index() as usize])
    }

    #[inline]
    pub(crate) fn get_index(&self, index: u64) -> bool {
        self.outputs[index as usize]
    }

    pub fn count_ones(&self) -> usize {
        self.outputs.iter().filter(|&&b| b).count()
    }

    /// The classifier for the other class.
    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            outputs: self.outputs.iter().map(|b| !b).collect(),
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitBudget {
            qubits: n,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Evaluates `classifier` once on every `n`-bit string.
pub fn compile_truth_table<F: FnMut(&BitString) -> bool>(mut classifier: F, n: usize) -> Result<TruthTable> {
    check_size(n)?;
    let outputs = (0..1u64 << n)
        .map(|i| classifier(&BitString::new(n, i).expect("index below 2^n")))
        .collect();
    Ok(TruthTable { n, outputs })
}

/// A domain classifier composed with the inverse perturbation encoding of a
/// fixed base point: `f(b) = f̃(η_x⁻¹(b))`.
pub struct WrappedClassifier<'a, S: PerturbationScheme, F> {
    scheme: &'a S,
    base_point: Vec<S::Value>,
    classifier: F,
}

impl<'a, S, F> WrappedClassifier<'a, S, F>
where
    S: PerturbationScheme,
    F: Fn(&[S::Value]) -> bool,
{
    pub fn new(scheme: &'a S, base_point: Vec<S::Value>, classifier: F) -> Result<Self> {
        if base_point.len() != scheme.domain_dim() {
            return Err(Error::LengthMismatch {
                expected: scheme.domain_dim(),
                actual: base_point.len(),
            });
        }
        Ok(Self {
            scheme,
            base_point,
            classifier,
        })
    }

    pub fn base_point(&self) -> &[S::Value] {
        &self.base_point
    }

    pub fn evaluate(&self, code: &BitString) -> Result<bool> {
        let point = decode_perturbation(self.scheme, &self.base_point, code)?;
        Ok((self.classifier)(&point))
    }

    pub fn truth_table(&self) -> Result<TruthTable> {
        let n = self.scheme.code_len();
        check_size(n)?;
        let outputs = (0..1u64 << n)
            .map(|i| self.evaluate(&BitString::new(n, i)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruthTable { n, outputs })
    }
}

/// Position of edge `(i, j)`, `i < j`, in the lexicographic pair order
/// `(0,1), (0,2), …, (v−2, v−1)`.
pub fn edge_index(i: usize, j: usize, v: usize) -> usize {
    debug_assert!(i < j && j < v);
    i * (2 * v - i - 1) / 2 + (j - i - 1)
}

pub fn edge_count(v: usize) -> usize {
    v * v.saturating_sub(1) / 2
}

/// Whether the graph has a clique of `k` vertices, by exhaustive subset search.
pub fn has_k_clique(adjacency: &BitString, v: usize, k: usize) -> Result<bool> {
    if v == 0 || v > 8 {
        return Err(Error::InvalidParameter("vertex count must be 1..=8"));
    }
    if adjacency.len() != edge_count(v) {
        return Err(Error::LengthMismatch {
            expected: edge_count(v),
            actual: adjacency.len(),
        });
    }
    if k > v {
        return Ok(false);
    }
    let mut neighbors = [0u32; 8];
    for i in 0..v {
        for j in i + 1..v {
            if adjacency.bit(edge_index(i, j, v)) {
                neighbors[i] |= 1 << j;
                neighbors[j] |= 1 << i;
            }
        }
    }
    Ok((0u32..1 << v).filter(|m| m.count_ones() as usize == k).any(|subset| {
        (0..v)
            .filter(|&i| subset >> i & 1 == 1)
            .all(|i| subset & !(1 << i) & !neighbors[i] == 0)
    }))
}

/// `G(v, p)` adjacency in lexicographic edge order.
pub fn erdos_renyi_graph<R: Rng + ?Sized>(v: usize, p: f64, rng: &mut R) -> Result<BitString> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let m = edge_count(v);
    let index = (0..m).fold(0u64, |acc, e| if rng.gen::<f64>() < p { acc | 1 << e } else { acc });
    BitString::new(m, index)
}

/// Linear threshold on the window pixels: 1 iff `Σ w_k · image[window[k]] ≥ threshold`.
pub fn mock_window_classifier(image: &[bool], window: &[usize], weights: &[i32], threshold: i32) -> Result<bool> {
    if weights.len() != window.len() {
        return Err(Error::LengthMismatch {
            expected: window.len(),
            actual: weights.len(),
        });
    }
    let mut score = 0i32;
    for (&pixel, &w) in window.iter().zip(weights) {
        let value = image.get(pixel).ok_or(Error::IndexOutOfRange {
            index: pixel,
            len: image.len(),
        })?;
        if *value {
            score += w;
        }
    }
    Ok(score >= threshold)
}

/// Signed integer weight per word id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    weights: Vec<i32>,
}

impl Lexicon {
    pub fn new(weights: Vec<i32>) -> Self {
        Self { weights }
    }

    /// Unknown ids weigh 0.
    pub fn weight(&self, word: u32) -> i32 {
        self.weights.get(word as usize).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Positive (1) iff the summed weight of the tokens still present is strictly
/// positive; removed tokens (`None`) are skipped and ties go to class 0.
pub fn stopword_sentiment_stub(tokens: &[Option<u32>], lexicon: &Lexicon) -> bool {
    tokens
        .iter()
        .flatten()
        .map(|&w| i64::from(lexicon.weight(w)))
        .sum::<i64>()
        > 0
}

//! Binary data, the sparsity-aware flip distribution, perturbation balls and
//! the encoding of discrete perturbations of arbitrary data as bit strings.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::{Error, Result};

/// A fixed-length binary vector stored as the integer whose bit `j` is
/// position `j` (LSB first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    n: usize,
    index: u64,
}

impl BitString {
    pub const MAX_LEN: usize = 64;

    pub fn new(n: usize, index: u64) -> Result<Self> {
        if n == 0 || n > Self::MAX_LEN {
            return Err(Error::InvalidLength(n));
        }
        if n < 64 && index >> n != 0 {
            return Err(Error::IndexTooLarge { index, n });
        }
        Ok(Self { n, index })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::new(n, low_mask(n))
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let n = bits.len();
        let index = bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &b)| acc | (u64::from(b) << j));
        Self::new(n, index)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn get(&self, j: usize) -> Result<bool> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange { index: j, len: self.n });
        }
        Ok(self.bit(j))
    }

    #[inline]
    pub(crate) fn bit(&self, j: usize) -> bool {
        (self.index >> j) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |j| self.bit(j))
    }

    pub fn to_vec(&self) -> Vec<bool> {
        self.bits().collect()
    }

    pub fn count_ones(&self) -> usize {
        self.index.count_ones() as usize
    }

    pub fn count_zeros(&self) -> usize {
        self.n - self.count_ones()
    }

    /// Bitwise complement within the string's length.
    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            index: !self.index & low_mask(self.n),
        }
    }

    pub fn with_bit(&self, j: usize, value: bool) -> Result<Self> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange { index: j, len: self.n });
        }
        let index = if value {
            self.index | 1 << j
        } else {
            self.index & !(1 << j)
        };
        Ok(Self { n: self.n, index })
    }

    /// `(additions, deletions)` needed to turn `self` into `other`: positions
    /// going 0→1 and 1→0 respectively.
    pub fn flip_counts(&self, other: &BitString) -> Result<(usize, usize)> {
        check_len(self.n, other.n)?;
        let additions = (!self.index & other.index).count_ones() as usize;
        let deletions = (self.index & !other.index).count_ones() as usize;
        Ok((additions, deletions))
    }
}

impl fmt::Display for BitString {
    /// Position 0 first, so `"01"` has bit 1 set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .enumerate()
            .map(|(j, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::IndexOutOfRange { index: j, len: s.len() }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// The `(p₊, p₋)` pair of the sparsity-aware smoothing distribution: a 0 bit
/// flips to 1 with `p_plus`, a 1 bit flips to 0 with `p_minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipProbabilities {
    p_plus: f64,
    p_minus: f64,
}

impl FlipProbabilities {
    pub fn new(p_plus: f64, p_minus: f64) -> Result<Self> {
        for p in [p_plus, p_minus] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
        }
        Ok(Self { p_plus, p_minus })
    }

    #[inline]
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    #[inline]
    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    #[inline]
    pub fn for_bit(&self, bit: bool) -> f64 {
        if bit {
            self.p_minus
        } else {
            self.p_plus
        }
    }

    #[inline]
    pub fn for_kind(&self, kind: FlipKind) -> f64 {
        match kind {
            FlipKind::Plus => self.p_plus,
            FlipKind::Minus => self.p_minus,
        }
    }

    /// The same distribution seen from complemented data.
    pub fn swapped(&self) -> Self {
        Self {
            p_plus: self.p_minus,
            p_minus: self.p_plus,
        }
    }
}

/// Maximum number of additions (0→1) and deletions (1→0) an adversary may make.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PerturbationBall {
    pub r_a: usize,
    pub r_d: usize,
}

impl PerturbationBall {
    pub fn new(r_a: usize, r_d: usize) -> Self {
        Self { r_a, r_d }
    }

    /// Radii clamped to what is reachable from `x`; the ball is unchanged.
    pub fn clamped_to(&self, x: &BitString) -> Self {
        Self {
            r_a: self.r_a.min(x.count_zeros()),
            r_d: self.r_d.min(x.count_ones()),
        }
    }
}

/// Flip probability of bit `j` of `x`: `p_plus` for a 0, `p_minus` for a 1.
pub fn flip_probability(x: &BitString, j: usize, probs: &FlipProbabilities) -> Result<f64> {
    Ok(probs.for_bit(x.get(j)?))
}

/// `φ(x̃ | x)`, the product of independent per-bit flip/keep probabilities.
pub fn transition_probability(xt: &BitString, x: &BitString, probs: &FlipProbabilities) -> Result<f64> {
    check_len(x.n, xt.n)?;
    Ok(transition_unchecked(xt.index, x.index, x.n, probs))
}

#[inline]
pub(crate) fn transition_unchecked(xt: u64, x: u64, n: usize, probs: &FlipProbabilities) -> f64 {
    let mut p = 1.0;
    for j in 0..n {
        let bit = (x >> j) & 1 == 1;
        let pf = probs.for_bit(bit);
        p *= if ((xt ^ x) >> j) & 1 == 1 { pf } else { 1.0 - pf };
    }
    p
}

/// Whether `xt` is reachable from `x` with at most `r_a` additions and `r_d`
/// deletions. Radii are inclusive.
pub fn ball_contains(xt: &BitString, x: &BitString, ball: &PerturbationBall) -> Result<bool> {
    let (additions, deletions) = x.flip_counts(xt)?;
    Ok(additions <= ball.r_a && deletions <= ball.r_d)
}

/// Draws `x̃ ~ φ(· | x)` by flipping each bit independently.
pub fn sample_perturbation<R: Rng + ?Sized>(x: &BitString, probs: &FlipProbabilities, rng: &mut R) -> BitString {
    BitString {
        n: x.n,
        index: sample_index(x.index, x.n, probs, rng),
    }
}

#[inline]
pub(crate) fn sample_index<R: Rng + ?Sized>(x: u64, n: usize, probs: &FlipProbabilities, rng: &mut R) -> u64 {
    let mut out = x;
    for j in 0..n {
        let pf = probs.for_bit((x >> j) & 1 == 1);
        if rng.gen::<f64>() < pf {
            out ^= 1 << j;
        }
    }
    out
}

/// Which of the two flip probabilities governs a feature in its current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlipKind {
    /// Governed by `p_plus`; encodes as 0.
    Plus,
    /// Governed by `p_minus`; encodes as 1.
    Minus,
}

impl FlipKind {
    pub fn other(self) -> Self {
        match self {
            FlipKind::Plus => FlipKind::Minus,
            FlipKind::Minus => FlipKind::Plus,
        }
    }
}

/// A discrete threat model on `domain_dim`-dimensional data where each feature
/// in `perturbable()` may be replaced by `perturb(value, index)`.
///
/// Implementations must make `perturb` an involution per index and must flip
/// the [`FlipKind`] under `perturb`.
pub trait PerturbationScheme {
    type Value: Clone + PartialEq;

    fn domain_dim(&self) -> usize;
    fn perturbable(&self) -> &[usize];
    fn perturb(&self, value: &Self::Value, index: usize) -> Self::Value;
    fn flip_kind(&self, value: &Self::Value, index: usize) -> FlipKind;

    fn code_len(&self) -> usize {
        self.perturbable().len()
    }
}

fn check_domain<S: PerturbationScheme>(scheme: &S, point: &[S::Value]) -> Result<()> {
    check_len(scheme.domain_dim(), point.len())
}

/// Maps a member `xt` of the perturbation set of `x` to its code: bit `j` is
/// set iff perturbable feature `j` of `xt` is in its `Minus` state.
pub fn encode_perturbation<S: PerturbationScheme>(scheme: &S, x: &[S::Value], xt: &[S::Value]) -> Result<BitString> {
    check_domain(scheme, x)?;
    check_domain(scheme, xt)?;
    let idx = scheme.perturbable();
    let mut perturbable = alloc::vec![false; x.len()];
    for &i in idx {
        if i >= x.len() {
            return Err(Error::IndexOutOfRange { index: i, len: x.len() });
        }
        perturbable[i] = true;
    }
    for (i, (a, b)) in x.iter().zip(xt).enumerate() {
        if !perturbable[i] && a != b {
            return Err(Error::NotAPerturbation(i));
        }
    }
    let mut code = 0u64;
    for (j, &i) in idx.iter().enumerate() {
        if xt[i] != x[i] && xt[i] != scheme.perturb(&x[i], i) {
            return Err(Error::NotAPerturbation(i));
        }
        if scheme.flip_kind(&xt[i], i) == FlipKind::Minus {
            code |= 1 << j;
        }
    }
    BitString::new(idx.len(), code)
}

/// Inverse of [`encode_perturbation`] for the base point `x`.
pub fn decode_perturbation<S: PerturbationScheme>(
    scheme: &S,
    x: &[S::Value],
    code: &BitString,
) -> Result<Vec<S::Value>> {
    check_domain(scheme, x)?;
    let idx = scheme.perturbable();
    check_len(idx.len(), code.len())?;
    let mut out = x.to_vec();
    for (j, &i) in idx.iter().enumerate() {
        let want_minus = code.bit(j);
        let is_minus = scheme.flip_kind(&x[i], i) == FlipKind::Minus;
        if want_minus != is_minus {
            out[i] = scheme.perturb(&x[i], i);
        }
    }
    Ok(out)
}

/// Scheme-level smoothing probability `φ̃(y | z)` for `y, z` in a common
/// perturbation set: each perturbable feature of `z` is perturbed with the
/// probability of its current [`FlipKind`].
pub fn scheme_transition_probability<S: PerturbationScheme>(
    scheme: &S,
    y: &[S::Value],
    z: &[S::Value],
    probs: &FlipProbabilities,
) -> Result<f64> {
    check_domain(scheme, y)?;
    check_domain(scheme, z)?;
    let mut p = 1.0;
    for &i in scheme.perturbable() {
        let pf = probs.for_kind(scheme.flip_kind(&z[i], i));
        p *= if y[i] != z[i] { pf } else { 1.0 - pf };
    }
    Ok(p)
}

/// Complementing binary features: pixels in a window, or every edge of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplementScheme {
    domain_dim: usize,
    indices: Vec<usize>,
}

impl ComplementScheme {
    pub fn new(domain_dim: usize, indices: Vec<usize>) -> Result<Self> {
        validate_indices(domain_dim, &indices)?;
        Ok(Self { domain_dim, indices })
    }

    /// Every feature is perturbable (edge toggling on an adjacency vector).
    pub fn all(domain_dim: usize) -> Self {
        Self {
            domain_dim,
            indices: (0..domain_dim).collect(),
        }
    }
}

impl PerturbationScheme for ComplementScheme {
    type Value = bool;

    fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    fn perturbable(&self) -> &[usize] {
        &self.indices
    }

    fn perturb(&self, value: &bool, _index: usize) -> bool {
        !value
    }

    fn flip_kind(&self, value: &bool, _index: usize) -> FlipKind {
        if *value {
            FlipKind::Minus
        } else {
            FlipKind::Plus
        }
    }
}

/// Token removal: perturbable positions hold `Some(word)` or the removal
/// sentinel `None`. Removing a token is the `Plus` move; restoring it is the
/// `Minus` move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRemovalScheme {
    original: Vec<Option<u32>>,
    indices: Vec<usize>,
}

impl TokenRemovalScheme {
    /// `tokens` is the clean token list; `indices` are the removable positions.
    pub fn new(tokens: Vec<Option<u32>>, indices: Vec<usize>) -> Result<Self> {
        validate_indices(tokens.len(), &indices)?;
        if let Some(&i) = indices.iter().find(|&&i| tokens[i].is_none()) {
            return Err(Error::NotAPerturbation(i));
        }
        Ok(Self {
            original: tokens,
            indices,
        })
    }

    pub fn tokens(&self) -> &[Option<u32>] {
        &self.original
    }
}

impl PerturbationScheme for TokenRemovalScheme {
    type Value = Option<u32>;

    fn domain_dim(&self) -> usize {
        self.original.len()
    }

    fn perturbable(&self) -> &[usize] {
        &self.indices
    }

    fn perturb(&self, value: &Option<u32>, index: usize) -> Option<u32> {
        match value {
            Some(_) => None,
            None => self.original[index],
        }
    }

    fn flip_kind(&self, value: &Option<u32>, _index: usize) -> FlipKind {
        match value {
            Some(_) => FlipKind::Plus,
            None => FlipKind::Minus,
        }
    }
}

fn validate_indices(domain_dim: usize, indices: &[usize]) -> Result<()> {
    if indices.is_empty() || indices.len() > BitString::MAX_LEN {
        return Err(Error::InvalidLength(indices.len()));
    }
    let mut seen = alloc::vec![false; domain_dim];
    for &i in indices {
        if i >= domain_dim {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: domain_dim,
            });
        }
        if core::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter("duplicate perturbable index"));
        }
    }
    Ok(())
}

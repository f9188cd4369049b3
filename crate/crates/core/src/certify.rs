//! Smooth-classifier evaluation and Neyman–Pearson certificates.
//!
//! A certificate for `x` against a perturbed `x̃` asks how small the smooth
//! classifier can be at `x̃` over every base classifier whose smooth value at
//! `x` is at least `p_lower`. The minimiser fills mass greedily in decreasing
//! likelihood ratio `φ(z|x)/φ(z|x̃)`; since the ratio only depends on how many
//! differing positions `z` agrees with `x̃` on, the fill runs over at most
//! `(r_a+1)(r_d+1)` regions.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::bitdata::{sample_index, transition_unchecked, BitString, FlipProbabilities, PerturbationBall};
use crate::oracle::TruthTable;
use crate::qae::AmplitudeEstimate;
use crate::{Error, Result, MAX_QUBITS};

/// Worst-case values within this distance of ½ are ties and stay uncertified;
/// sums over differently ordered regions disagree at the last few ulps.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[inline]
fn above_half(value: f64) -> bool {
    value > 0.5 + TIE_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvaluationMethod {
    Exact,
    MonteCarlo,
    Qae,
}

impl EvaluationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::MonteCarlo => "mc",
            Self::Qae => "qae",
        }
    }
}

/// An estimate of `g(x) = P[f(x̃) = 1]` with one-sided bounds holding jointly
/// with probability `confidence`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothEvaluation {
    pub value: f64,
    pub method: EvaluationMethod,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub oracle_calls: u64,
}

impl SmoothEvaluation {
    pub fn from_qae(est: &AmplitudeEstimate) -> Self {
        Self {
            value: est.point,
            method: EvaluationMethod::Qae,
            lower: est.lower,
            upper: est.upper,
            confidence: est.confidence,
            oracle_calls: est.oracle_calls,
        }
    }

    /// The same evaluation seen from class `class`: class 0 reads `1 − g`,
    /// so its lower bound is `1 − upper`.
    pub fn for_class(&self, class: bool) -> Self {
        if class {
            return *self;
        }
        Self {
            value: 1.0 - self.value,
            lower: 1.0 - self.upper,
            upper: 1.0 - self.lower,
            ..*self
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::QubitBudget {
            qubits: n,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

fn check_lengths(x: &BitString, oracle: &TruthTable) -> Result<()> {
    if oracle.num_inputs() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: oracle.num_inputs(),
        });
    }
    check_size(x.len())
}

pub(crate) fn smooth_sum(x: &BitString, probs: &FlipProbabilities, oracle: &TruthTable) -> Result<f64> {
    check_lengths(x, oracle)?;
    let n = x.len();
    Ok(oracle
        .outputs()
        .iter()
        .enumerate()
        .filter(|(_, &hit)| hit)
        .map(|(z, _)| transition_unchecked(z as u64, x.index(), n, probs))
        .sum())
}

/// `g(x)` summed over the whole truth table; `2^n` oracle calls.
pub fn exact_smooth(x: &BitString, probs: &FlipProbabilities, oracle: &TruthTable) -> Result<SmoothEvaluation> {
    let value = smooth_sum(x, probs, oracle)?;
    Ok(SmoothEvaluation {
        value,
        method: EvaluationMethod::Exact,
        lower: value,
        upper: value,
        confidence: 1.0,
        oracle_calls: 1u64 << x.len(),
    })
}

/// Monte-Carlo estimate from `samples` perturbations with one-sided
/// Clopper–Pearson bounds at level `delta`.
pub fn mc_estimate<R: Rng + ?Sized>(
    x: &BitString,
    probs: &FlipProbabilities,
    oracle: &TruthTable,
    samples: u64,
    delta: f64,
    rng: &mut R,
) -> Result<SmoothEvaluation> {
    check_lengths(x, oracle)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("at least one sample is required"));
    }
    check_delta(delta)?;
    let hits = (0..samples)
        .filter(|_| oracle.get_index(sample_index(x.index(), x.len(), probs, rng)))
        .count() as u64;
    Ok(SmoothEvaluation {
        value: hits as f64 / samples as f64,
        method: EvaluationMethod::MonteCarlo,
        lower: clopper_pearson_lower(hits, samples, delta)?,
        upper: clopper_pearson_upper(hits, samples, delta)?,
        confidence: 1.0 - delta,
        oracle_calls: samples,
    })
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("delta must lie in (0, 1)"))
    }
}

fn check_counts(successes: u64, trials: u64) -> Result<()> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidParameter("need 0 ≤ successes ≤ trials and trials ≥ 1"));
    }
    Ok(())
}

/// One-sided lower bound: the `delta`-quantile of `Beta(k, N−k+1)`.
pub fn clopper_pearson_lower(successes: u64, trials: u64, delta: f64) -> Result<f64> {
    check_counts(successes, trials)?;
    check_delta(delta)?;
    if successes == 0 {
        return Ok(0.0);
    }
    Ok(beta_quantile(successes as f64, (trials - successes + 1) as f64, delta))
}

/// One-sided upper bound: the `(1−delta)`-quantile of `Beta(k+1, N−k)`.
pub fn clopper_pearson_upper(successes: u64, trials: u64, delta: f64) -> Result<f64> {
    check_counts(successes, trials)?;
    check_delta(delta)?;
    if successes == trials {
        return Ok(1.0);
    }
    Ok(beta_quantile(
        (successes + 1) as f64,
        (trials - successes) as f64,
        1.0 - delta,
    ))
}

/// Inverts the regularized incomplete beta function by bisection.
fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if regularized_beta(mid, a, b) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `I_x(a, b)` via the Lentz continued fraction, using the symmetry
/// `I_x(a, b) = 1 − I_{1−x}(b, a)` where the fraction converges slowly.
pub(crate) fn regularized_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let guard = |v: f64| if v.abs() < TINY { TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Points `z` agreeing with `x̃` on `additions_agree` of the addition positions
/// (`x=0, x̃=1`) and on `deletions_agree` of the deletion positions
/// (`x=1, x̃=0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodRegion {
    pub additions_agree: usize,
    pub deletions_agree: usize,
    pub mass_x: f64,
    pub mass_xt: f64,
}

impl LikelihoodRegion {
    /// `φ(z|x)/φ(z|x̃)`; infinite when `x̃` puts no mass here.
    pub fn ratio(&self) -> f64 {
        likelihood_ratio(self.mass_x, self.mass_xt)
    }
}

fn likelihood_ratio(mass_x: f64, mass_xt: f64) -> f64 {
    if mass_xt == 0.0 {
        if mass_x == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        mass_x / mass_xt
    }
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let mut coeff = 1.0;
    for i in 0..k {
        coeff = coeff * (n - i) as f64 / (i + 1) as f64;
    }
    coeff * libm::pow(p, k as f64) * libm::pow(1.0 - p, (n - k) as f64)
}

/// The constant-ratio partition of `{0,1}^n` for the pair `(x, x̃)`, with masses
/// in closed form.
pub fn region_partition(x: &BitString, xt: &BitString, probs: &FlipProbabilities) -> Result<Vec<LikelihoodRegion>> {
    let (additions, deletions) = x.flip_counts(xt)?;
    let (pp, pm) = (probs.p_plus(), probs.p_minus());
    let mut regions = Vec::with_capacity((additions + 1) * (deletions + 1));
    for i in 0..=additions {
        let (ax, axt) = (binomial_pmf(additions, i, pp), binomial_pmf(additions, i, 1.0 - pm));
        for j in 0..=deletions {
            regions.push(LikelihoodRegion {
                additions_agree: i,
                deletions_agree: j,
                mass_x: ax * binomial_pmf(deletions, j, pm),
                mass_xt: axt * binomial_pmf(deletions, j, 1.0 - pp),
            });
        }
    }
    Ok(regions)
}

fn check_p_lower(p_lower: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p_lower) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p_lower))
    }
}

/// Greedy fill of `(mass_x, mass_xt)` cells in decreasing likelihood ratio
/// until `p_lower` of the mass under `x` is used.
fn greedy_fill(mut cells: Vec<(f64, f64)>, p_lower: f64) -> f64 {
    cells.retain(|&(mx, _)| mx > 0.0);
    cells.sort_by(|a, b| {
        likelihood_ratio(b.0, b.1)
            .partial_cmp(&likelihood_ratio(a.0, a.1))
            .unwrap_or(Ordering::Equal)
    });
    let mut remaining = p_lower;
    let mut value = 0.0;
    for (mx, mxt) in cells {
        if remaining <= 0.0 {
            break;
        }
        let take = (remaining / mx).min(1.0);
        value += take * mxt;
        remaining -= take * mx;
    }
    value.clamp(0.0, 1.0)
}

/// `min_h E_{x̃}[h]` subject to `E_x[h] = p_lower`, over the region partition.
pub fn worst_case_value(p_lower: f64, x: &BitString, xt: &BitString, probs: &FlipProbabilities) -> Result<f64> {
    check_p_lower(p_lower)?;
    let regions = region_partition(x, xt, probs)?;
    Ok(greedy_fill(
        regions.iter().map(|r| (r.mass_x, r.mass_xt)).collect(),
        p_lower,
    ))
}

/// The same minimisation over individual points of `{0,1}^n`.
pub fn worst_case_value_pointwise(
    p_lower: f64,
    x: &BitString,
    xt: &BitString,
    probs: &FlipProbabilities,
) -> Result<f64> {
    check_p_lower(p_lower)?;
    let n = x.len();
    if xt.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: xt.len(),
        });
    }
    check_size(n)?;
    let cells = (0..1u64 << n)
        .map(|z| {
            (
                transition_unchecked(z, x.index(), n, probs),
                transition_unchecked(z, xt.index(), n, probs),
            )
        })
        .collect();
    Ok(greedy_fill(cells, p_lower))
}

/// `x` with its first `additions` zeros set and first `deletions` ones cleared.
pub fn canonical_perturbation(x: &BitString, additions: usize, deletions: usize) -> Result<BitString> {
    if additions > x.count_zeros() || deletions > x.count_ones() {
        return Err(Error::BallTooLarge {
            r_a: additions,
            r_d: deletions,
            n: x.len(),
        });
    }
    let mut index = x.index();
    let (mut a, mut d) = (additions, deletions);
    for j in 0..x.len() {
        let bit = 1u64 << j;
        if x.index() & bit == 0 && a > 0 {
            index |= bit;
            a -= 1;
        } else if x.index() & bit != 0 && d > 0 {
            index &= !bit;
            d -= 1;
        }
    }
    BitString::new(x.len(), index)
}

/// Worst-case smooth values at canonical perturbations, indexed `[a][d]` for
/// `a ≤ min(max_ra, zeros(x))`, `d ≤ min(max_rd, ones(x))`.
fn worst_case_table(
    p_lower: f64,
    x: &BitString,
    probs: &FlipProbabilities,
    max_ra: usize,
    max_rd: usize,
) -> Result<Vec<Vec<f64>>> {
    let ra = max_ra.min(x.count_zeros());
    let rd = max_rd.min(x.count_ones());
    (0..=ra)
        .map(|a| {
            (0..=rd)
                .map(|d| worst_case_value(p_lower, x, &canonical_perturbation(x, a, d)?, probs))
                .collect()
        })
        .collect()
}

/// Certified iff every `x̃` within the ball keeps the worst-case value
/// strictly above ½ (beyond [`TIE_TOLERANCE`]).
pub fn certify_ball(p_lower: f64, x: &BitString, probs: &FlipProbabilities, ball: &PerturbationBall) -> Result<bool> {
    check_p_lower(p_lower)?;
    if ball.r_a + ball.r_d > x.len() {
        return Err(Error::BallTooLarge {
            r_a: ball.r_a,
            r_d: ball.r_d,
            n: x.len(),
        });
    }
    let table = worst_case_table(p_lower, x, probs, ball.r_a, ball.r_d)?;
    let min = table.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok(above_half(min))
}

/// Which radius a scalar summary of a grid measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusAxis {
    Additions,
    Deletions,
    /// `r_a + r_d`, certified when every cell on that anti-diagonal is.
    Total,
}

/// Decisions on the rectangle `0..=max_ra × 0..=max_rd`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateGrid {
    max_ra: usize,
    max_rd: usize,
    /// Extents actually reachable from `x`: `min(max_ra, zeros)`, `min(max_rd, ones)`.
    reach: (usize, usize),
    p_lower: f64,
    decisions: Vec<bool>,
}

/// Certifies every cell of the rectangle using `evaluation.lower`.
///
/// Cells asking for more additions than `x` has zeros (or more deletions than
/// ones) describe no perturbation at that radius and are left uncertified.
pub fn certificate_grid(
    evaluation: &SmoothEvaluation,
    x: &BitString,
    probs: &FlipProbabilities,
    max_ra: usize,
    max_rd: usize,
) -> Result<CertificateGrid> {
    let p_lower = evaluation.lower.clamp(0.0, 1.0);
    let table = worst_case_table(p_lower, x, probs, max_ra, max_rd)?;
    let (ra, rd) = (table.len() - 1, table[0].len() - 1);
    // prefix minima over the sub-rectangle make the grid anti-monotone
    let mut mins = vec![vec![f64::INFINITY; rd + 1]; ra + 1];
    for a in 0..=ra {
        for d in 0..=rd {
            let mut m = table[a][d];
            if a > 0 {
                m = m.min(mins[a - 1][d]);
            }
            if d > 0 {
                m = m.min(mins[a][d - 1]);
            }
            mins[a][d] = m;
        }
    }
    let mins = &mins;
    let decisions = (0..=max_ra)
        .flat_map(|a| (0..=max_rd).map(move |d| a <= ra && d <= rd && above_half(mins[a][d])))
        .collect();
    Ok(CertificateGrid {
        max_ra,
        max_rd,
        reach: (ra, rd),
        p_lower,
        decisions,
    })
}

impl CertificateGrid {
    pub fn max_ra(&self) -> usize {
        self.max_ra
    }

    pub fn max_rd(&self) -> usize {
        self.max_rd
    }

    pub fn p_lower(&self) -> f64 {
        self.p_lower
    }

    pub fn radii(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.max_ra).flat_map(move |a| (0..=self.max_rd).map(move |d| (a, d)))
    }

    /// `None` outside the rectangle.
    pub fn certified(&self, r_a: usize, r_d: usize) -> Option<bool> {
        (r_a <= self.max_ra && r_d <= self.max_rd).then(|| self.decisions[r_a * (self.max_rd + 1) + r_d])
    }

    pub fn is_anti_monotone(&self) -> bool {
        self.radii().all(|(a, d)| {
            !self.certified(a, d).unwrap_or(false)
                || ((a == 0 || self.certified(a - 1, d) == Some(true))
                    && (d == 0 || self.certified(a, d - 1) == Some(true)))
        })
    }

    /// Whether the given radius along `axis` is certified.
    pub fn certified_at(&self, axis: RadiusAxis, r: usize) -> bool {
        match axis {
            RadiusAxis::Additions => self.certified(r, 0).unwrap_or(false),
            RadiusAxis::Deletions => self.certified(0, r).unwrap_or(false),
            // splits needing more flips than `x` offers do not exist
            RadiusAxis::Total => {
                let (ra, rd) = self.reach;
                r <= ra + rd && (r.saturating_sub(rd)..=r.min(ra)).all(|a| self.certified(a, r - a) == Some(true))
            }
        }
    }

    /// Largest certified radius along `axis`, `None` if even radius 0 fails.
    pub fn max_certified_radius(&self, axis: RadiusAxis) -> Option<usize> {
        let limit = match axis {
            RadiusAxis::Additions => self.max_ra,
            RadiusAxis::Deletions => self.max_rd,
            RadiusAxis::Total => self.reach.0 + self.reach.1,
        };
        (0..=limit).take_while(|&r| self.certified_at(axis, r)).last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::compile_truth_table;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::vec::Vec;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn probs(pp: f64, pm: f64) -> FlipProbabilities {
        FlipProbabilities::new(pp, pm).unwrap()
    }

    #[test]
    fn exact_smooth_examples() {
        let x = bs("0110");
        let p = probs(0.3, 0.2);
        let one = TruthTable::constant(4, true).unwrap();
        let e = exact_smooth(&x, &p, &one).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert_eq!(e.oracle_calls, 16);
        assert_eq!(e.lower, e.value);

        let f = compile_truth_table(|b| b.count_ones() == 2 && b.get(0).unwrap(), 4).unwrap();
        for xi in 0..16 {
            let x = BitString::new(4, xi).unwrap();
            let v = exact_smooth(&x, &probs(0.0, 0.0), &f).unwrap().value;
            assert_eq!(v, if f.get(&x).unwrap() { 1.0 } else { 0.0 });
        }
        let marked = compile_truth_table(|b| b.index() == 3, 2).unwrap();
        assert!((exact_smooth(&bs("00"), &probs(0.5, 0.1), &marked).unwrap().value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn class_flip() {
        let e = SmoothEvaluation {
            value: 0.3,
            method: EvaluationMethod::MonteCarlo,
            lower: 0.2,
            upper: 0.45,
            confidence: 0.99,
            oracle_calls: 10,
        };
        let f = e.for_class(false);
        assert!((f.value - 0.7).abs() < 1e-15 && (f.lower - 0.55).abs() < 1e-15 && (f.upper - 0.8).abs() < 1e-15);
        assert_eq!(e.for_class(true), e);
    }

    #[test]
    fn clopper_pearson_closed_forms() {
        for &n in &[1u64, 7, 50, 1000] {
            for &delta in &[0.01, 0.05, 0.2] {
                assert_eq!(clopper_pearson_lower(0, n, delta).unwrap(), 0.0);
                assert_eq!(clopper_pearson_upper(n, n, delta).unwrap(), 1.0);
                let lo = clopper_pearson_lower(n, n, delta).unwrap();
                assert!((lo - libm::pow(delta, 1.0 / n as f64)).abs() < 1e-12, "n={n}");
                let hi = clopper_pearson_upper(0, n, delta).unwrap();
                assert!((hi - (1.0 - libm::pow(delta, 1.0 / n as f64))).abs() < 1e-12, "n={n}");
            }
        }
        assert!(clopper_pearson_lower(3, 2, 0.1).is_err());
        assert!(clopper_pearson_lower(1, 2, 1.0).is_err());
    }

    #[test]
    fn regularized_beta_symmetry_and_uniform() {
        for i in 1..20 {
            let x = i as f64 / 20.0;
            assert!((regularized_beta(x, 1.0, 1.0) - x).abs() < 1e-14);
            let s = regularized_beta(x, 3.5, 7.0) + regularized_beta(1.0 - x, 7.0, 3.5);
            assert!((s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn mc_estimate_basic() {
        let x = bs("0101");
        let p = probs(0.3, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let zero = TruthTable::constant(4, false).unwrap();
        let e = mc_estimate(&x, &p, &zero, 100, 0.01, &mut rng).unwrap();
        assert_eq!((e.value, e.lower, e.oracle_calls), (0.0, 0.0, 100));
        let one = TruthTable::constant(4, true).unwrap();
        let e = mc_estimate(&x, &p, &one, 100, 0.01, &mut rng).unwrap();
        assert!((e.lower - libm::pow(0.01, 0.01)).abs() < 1e-12);
        assert!(mc_estimate(&x, &p, &one, 0, 0.01, &mut rng).is_err());
    }

    #[test]
    fn mc_width_scales_as_inverse_sqrt() {
        let x = bs("0110");
        let p = probs(0.3, 0.3);
        let f = compile_truth_table(|b| b.count_ones() >= 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        for e in 2..=6 {
            let n = 10u64.pow(e);
            let mut widths: Vec<f64> = (0..7)
                .map(|_| {
                    let est = mc_estimate(&x, &p, &f, n, 0.01, &mut rng).unwrap();
                    est.upper - est.lower
                })
                .collect();
            widths.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.push((libm::log(n as f64), libm::log(widths[3])));
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / m, sy / m);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn region_examples() {
        let x = bs("0110");
        let r = region_partition(&x, &x, &probs(0.3, 0.2)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].mass_x, r[0].mass_xt, r[0].ratio()), (1.0, 1.0, 1.0));

        let (pp, pm) = (0.3, 0.2);
        let r = region_partition(&bs("0"), &bs("1"), &probs(pp, pm)).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].ratio() - (1.0 - pp) / pm).abs() < 1e-12);
        assert!((r[1].ratio() - pp / (1.0 - pm)).abs() < 1e-12);

        let r = region_partition(&bs("0"), &bs("1"), &probs(0.3, 0.0)).unwrap();
        assert_eq!(r[0].ratio(), f64::INFINITY);
    }

    #[test]
    fn region_masses_group_point_masses() {
        let p = probs(0.35, 0.15);
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = BitString::new(n, rng.gen_range(0..1 << n)).unwrap();
            let xt = BitString::new(n, rng.gen_range(0..1 << n)).unwrap();
            let regions = region_partition(&x, &xt, &p).unwrap();
            let (a, d) = x.flip_counts(&xt).unwrap();
            assert_eq!(regions.len(), (a + 1) * (d + 1));
            let add_mask = !x.index() & xt.index();
            let del_mask = x.index() & !xt.index();
            let mut sums = vec![(0.0, 0.0); regions.len()];
            for z in 0..1u64 << n {
                let i = (!(z ^ xt.index()) & add_mask).count_ones() as usize;
                let j = (!(z ^ xt.index()) & del_mask).count_ones() as usize;
                let s = &mut sums[i * (d + 1) + j];
                s.0 += transition_unchecked(z, x.index(), n, &p);
                s.1 += transition_unchecked(z, xt.index(), n, &p);
            }
            for (r, s) in regions.iter().zip(&sums) {
                assert!((r.mass_x - s.0).abs() < 1e-12 && (r.mass_xt - s.1).abs() < 1e-12);
            }
            let tx: f64 = regions.iter().map(|r| r.mass_x).sum();
            let txt: f64 = regions.iter().map(|r| r.mass_xt).sum();
            assert!((tx - 1.0).abs() < 1e-12 && (txt - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn worst_case_examples() {
        let x = bs("011010");
        let p = probs(0.3, 0.25);
        assert!((worst_case_value(0.73, &x, &x, &p).unwrap() - 0.73).abs() < 1e-15);
        assert_eq!(worst_case_value(0.0, &x, &bs("111000"), &p).unwrap(), 0.0);
        assert!(worst_case_value(1.1, &x, &x, &p).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x = BitString::new(6, rng.gen_range(0..64)).unwrap();
            let xt = BitString::new(6, rng.gen_range(0..64)).unwrap();
            let p = probs(rng.gen_range(0.0..0.9), rng.gen_range(0.0..0.9));
            let pl = rng.gen::<f64>();
            let fast = worst_case_value(pl, &x, &xt, &p).unwrap();
            let slow = worst_case_value_pointwise(pl, &x, &xt, &p).unwrap();
            assert!((fast - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn certify_ball_examples() {
        let x = bs("01101001");
        let p = probs(0.3, 0.3);
        assert!(certify_ball(0.6, &x, &p, &PerturbationBall::new(0, 0)).unwrap());
        for &(a, d) in &[(0, 0), (1, 0), (0, 1), (2, 2)] {
            assert!(!certify_ball(0.5, &x, &p, &PerturbationBall::new(a, d)).unwrap());
        }
        let one_sided = probs(0.3, 0.0);
        assert!(!certify_ball(0.99, &x, &one_sided, &PerturbationBall::new(0, 1)).unwrap());
        assert!(certify_ball(0.99, &x, &one_sided, &PerturbationBall::new(1, 0)).unwrap());
        assert!(certify_ball(0.6, &x, &p, &PerturbationBall::new(5, 4)).is_err());
    }

    #[test]
    fn canonical_perturbation_counts() {
        let x = bs("0110100");
        for a in 0..=4 {
            for d in 0..=3 {
                let xt = canonical_perturbation(&x, a, d).unwrap();
                assert_eq!(x.flip_counts(&xt).unwrap(), (a, d));
            }
        }
        assert!(canonical_perturbation(&x, 5, 0).is_err());
    }

    #[test]
    fn grid_extremes_and_shape() {
        let x = bs("0110100110");
        let p = probs(0.3, 0.3);
        let mk = |lower: f64| SmoothEvaluation {
            value: lower,
            method: EvaluationMethod::Exact,
            lower,
            upper: lower,
            confidence: 1.0,
            oracle_calls: 0,
        };
        let g = certificate_grid(&mk(0.0), &x, &p, 4, 4).unwrap();
        assert!(g.radii().all(|(a, d)| !g.certified(a, d).unwrap()));
        assert_eq!(g.max_certified_radius(RadiusAxis::Total), None);

        let g = certificate_grid(&mk(0.93), &x, &p, 5, 5).unwrap();
        assert!(g.is_anti_monotone());
        assert!(g.certified(0, 0).unwrap());
        let total = g.max_certified_radius(RadiusAxis::Total).unwrap();
        assert!(total >= 1);
        for (a, d) in g.radii() {
            let direct = certify_ball(0.93, &x, &p, &PerturbationBall::new(a, d)).unwrap();
            assert_eq!(g.certified(a, d).unwrap(), direct, "({a},{d})");
        }

        let one_sided = probs(0.3, 0.0);
        let g = certificate_grid(&mk(1.0), &x, &one_sided, 8, 3).unwrap();
        assert_eq!(g.max_certified_radius(RadiusAxis::Additions), Some(5));
        assert!(!g.certified(6, 0).unwrap());
        assert_eq!(g.max_certified_radius(RadiusAxis::Deletions), Some(0));
    }

    #[test]
    fn total_radius_skips_unreachable_splits() {
        let x = bs("0001");
        let sure = SmoothEvaluation {
            value: 1.0,
            method: EvaluationMethod::Exact,
            lower: 1.0,
            upper: 1.0,
            confidence: 1.0,
            oracle_calls: 0,
        };
        let g = certificate_grid(&sure, &x, &probs(0.3, 0.3), 4, 4).unwrap();
        assert!(g.certified(3, 1).unwrap() && !g.certified(0, 2).unwrap() && !g.certified(4, 0).unwrap());
        assert_eq!(g.max_certified_radius(RadiusAxis::Total), Some(4));
        assert_eq!(g.max_certified_radius(RadiusAxis::Deletions), Some(1));
    }
}

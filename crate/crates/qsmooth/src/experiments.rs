//! Desk-scale experiment instances. Every instance is a perturbation code `x`
//! together with the truth table of the wrapped base classifier over codes
//! and a reference label.
//!
//! - `window_image`: 8×8 binary images, a 4×4 (16-pixel) perturbation window
//!   and a fixed linear threshold classifier on that window.
//! - `graph_clique`: 6-vertex Erdős–Rényi graphs, every edge perturbable,
//!   classified by the exact 4-clique check.
//! - `sentiment`: ten-token toy reviews whose eight stop-words may be removed,
//!   classified by a signed-lexicon stub.
//! - `truth_table`: a user-supplied table and base point.

use std::sync::Arc;

use qsmooth_core::bitdata::{encode_perturbation, ComplementScheme, PerturbationScheme, TokenRemovalScheme};
use qsmooth_core::certify::RadiusAxis;
use qsmooth_core::oracle::{
    edge_count, erdos_renyi_graph, has_k_clique, mock_window_classifier, stopword_sentiment_stub, Lexicon,
    WrappedClassifier,
};
use qsmooth_core::{BitString, FlipProbabilities, TruthTable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Result};
use crate::formats::{load_graphs, load_truth_table, GRAPH_VERTICES};

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: usize,
    /// Perturbation code of the clean input.
    pub x: BitString,
    pub oracle: Arc<TruthTable>,
    /// Class the certificate is issued for.
    pub label: bool,
}

pub const IMAGE_SIDE: usize = 8;
const WINDOW_ORIGIN: usize = 2;
const WINDOW_SIDE: usize = 4;
/// Centre-weighted window weights, row-major.
pub const WINDOW_WEIGHTS: [i32; 16] = [1, 2, 2, 1, 2, 3, 3, 2, 2, 3, 3, 2, 1, 2, 2, 1];
/// Half of the total weight: the classifier fires when the window is at
/// least "half lit" by weight.
pub const WINDOW_THRESHOLD: i32 = 16;

pub fn window_pixels() -> Vec<usize> {
    (0..WINDOW_SIDE)
        .flat_map(|r| (0..WINDOW_SIDE).map(move |c| (WINDOW_ORIGIN + r) * IMAGE_SIDE + WINDOW_ORIGIN + c))
        .collect()
}

pub const CLIQUE_SIZE: usize = 4;
/// Generator edge probabilities of the two graph populations.
pub const ER_PROBABILITIES: [f64; 2] = [0.65, 0.30];

/// Stop-words and their small weights; these are the removable tokens.
pub const STOPWORDS: [(&str, i32); 12] = [
    ("the", 1),
    ("a", -1),
    ("and", 1),
    ("of", -1),
    ("to", 1),
    ("is", -1),
    ("it", 1),
    ("this", -1),
    ("that", 1),
    ("was", -1),
    ("in", 1),
    ("for", -1),
];
/// Sentiment-bearing words; never removed.
pub const SENTIMENT_WORDS: [(&str, i32); 8] = [
    ("great", 4),
    ("wonderful", 5),
    ("enjoyable", 3),
    ("fine", 2),
    ("boring", -4),
    ("awful", -5),
    ("dull", -3),
    ("weak", -2),
];
pub const REVIEW_STOPWORDS: usize = 8;
const REVIEW_SENTIMENT_WORDS: usize = 2;

/// Word ids: stop-words first, then sentiment words.
pub fn lexicon() -> Lexicon {
    Lexicon::new(STOPWORDS.iter().chain(&SENTIMENT_WORDS).map(|&(_, w)| w).collect())
}

pub fn word(id: u32) -> &'static str {
    STOPWORDS
        .iter()
        .chain(&SENTIMENT_WORDS)
        .nth(id as usize)
        .map_or("?", |&(w, _)| w)
}

/// One-line description of the substitutions behind each experiment.
pub fn desk_scale_note(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::WindowImage => {
            "window_image: synthetic 8x8 binary images, 16-pixel window, fixed linear threshold classifier in place of a trained CNN"
        }
        ExperimentKind::GraphClique => {
            "graph_clique: ER(6, {0.65, 0.30}) graphs, 15 edge bits, exact 4-clique check in place of a trained graph network"
        }
        ExperimentKind::Sentiment => {
            "sentiment: toy 10-token reviews, 8 removable stop-words, signed-lexicon stub in place of a pretrained model"
        }
        ExperimentKind::TruthTable => "truth_table: user-supplied base classifier",
    }
}

/// The radius a one-number summary reports: the only certifiable direction
/// for one-sided noise, otherwise the total `r_a + r_d`.
pub fn radius_axis(probs: &FlipProbabilities) -> RadiusAxis {
    if probs.p_minus() == 0.0 && probs.p_plus() > 0.0 {
        RadiusAxis::Additions
    } else if probs.p_plus() == 0.0 && probs.p_minus() > 0.0 {
        RadiusAxis::Deletions
    } else {
        RadiusAxis::Total
    }
}

pub fn build_instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    let instances = match cfg.experiment {
        ExperimentKind::WindowImage => window_instances(cfg.instance_count, cfg.seed)?,
        ExperimentKind::GraphClique => match &cfg.graph_file {
            Some(path) => graph_instances_from(&load_graphs(path)?)?,
            None => graph_instances(cfg.instance_count, cfg.seed)?,
        },
        ExperimentKind::Sentiment => sentiment_instances(cfg.instance_count, cfg.seed)?,
        ExperimentKind::TruthTable => {
            let path = cfg.truth_table.as_ref().expect("validated");
            let table = load_truth_table(path)?;
            let x: BitString = cfg.x.as_deref().expect("validated").parse()?;
            if x.len() != table.num_inputs() {
                return Err(CliError::config(format!(
                    "`x` has {} bits but the truth table takes {}",
                    x.len(),
                    table.num_inputs()
                )));
            }
            let label = table.get(&x)?;
            vec![Instance {
                id: 0,
                x,
                oracle: Arc::new(table),
                label,
            }]
        }
    };
    if instances.is_empty() {
        return Err(CliError::config("empty instance set"));
    }
    Ok(instances)
}

pub fn window_instances(count: usize, seed: u64) -> Result<Vec<Instance>> {
    let window = window_pixels();
    let scheme = ComplementScheme::new(IMAGE_SIDE * IMAGE_SIDE, window.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|id| {
            let label = rng.gen_bool(0.5);
            let lit = if label { 0.7 } else { 0.3 };
            let image: Vec<bool> = (0..IMAGE_SIDE * IMAGE_SIDE)
                .map(|p| rng.gen_bool(if window.contains(&p) { lit } else { 0.5 }))
                .collect();
            let x = encode_perturbation(&scheme, &image, &image)?;
            let classify =
                |img: &[bool]| mock_window_classifier(img, &window, &WINDOW_WEIGHTS, WINDOW_THRESHOLD).unwrap_or(false);
            let oracle = WrappedClassifier::new(&scheme, image, classify)?.truth_table()?;
            Ok(Instance {
                id,
                x,
                oracle: Arc::new(oracle),
                label,
            })
        })
        .collect()
}

/// `count` graphs alternating between the two generator densities.
pub fn generate_graphs(count: usize, seed: u64) -> Result<Vec<BitString>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| Ok(erdos_renyi_graph(GRAPH_VERTICES, ER_PROBABILITIES[i % 2], &mut rng)?))
        .collect()
}

pub fn clique_table() -> Result<TruthTable> {
    let m = edge_count(GRAPH_VERTICES);
    let scheme = ComplementScheme::all(m);
    let base = vec![false; m];
    let classify = |adj: &[bool]| {
        BitString::from_bits(adj)
            .and_then(|g| has_k_clique(&g, GRAPH_VERTICES, CLIQUE_SIZE))
            .unwrap_or(false)
    };
    Ok(WrappedClassifier::new(&scheme, base, classify)?.truth_table()?)
}

pub fn graph_instances(count: usize, seed: u64) -> Result<Vec<Instance>> {
    graph_instances_from(&generate_graphs(count, seed)?)
}

/// The label is the exact clique check, not the generator density.
pub fn graph_instances_from(graphs: &[BitString]) -> Result<Vec<Instance>> {
    let table = Arc::new(clique_table()?);
    graphs
        .iter()
        .enumerate()
        .map(|(id, g)| {
            let label = table.get(g)?;
            Ok(Instance {
                id,
                x: *g,
                oracle: Arc::clone(&table),
                label,
            })
        })
        .collect()
}

/// A toy review: its tokens, removable positions and generator sentiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Review {
    pub tokens: Vec<Option<u32>>,
    pub stopword_positions: Vec<usize>,
    pub label: bool,
}

pub fn generate_reviews(count: usize, seed: u64) -> Vec<Review> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_stop = STOPWORDS.len() as u32;
    let (positive, negative): (Vec<u32>, Vec<u32>) = (0..SENTIMENT_WORDS.len() as u32)
        .map(|i| i + n_stop)
        .partition(|&id| SENTIMENT_WORDS[(id - n_stop) as usize].1 > 0);
    (0..count)
        .map(|_| {
            let label = rng.gen_bool(0.5);
            // one word carrying the review's sentiment, the other drawn from either side
            let lead = *if label { &positive } else { &negative }
                .choose(&mut rng)
                .expect("non-empty");
            let other = *if rng.gen_bool(0.5) { &positive } else { &negative }
                .choose(&mut rng)
                .expect("non-empty");
            let mut words: Vec<(u32, bool)> = vec![(lead, false), (other, false)];
            words.extend((0..REVIEW_STOPWORDS).map(|_| (rng.gen_range(0..n_stop), true)));
            words.shuffle(&mut rng);
            debug_assert_eq!(words.len(), REVIEW_STOPWORDS + REVIEW_SENTIMENT_WORDS);
            let stopword_positions = words.iter().enumerate().filter(|(_, w)| w.1).map(|(i, _)| i).collect();
            Review {
                tokens: words.iter().map(|w| Some(w.0)).collect(),
                stopword_positions,
                label,
            }
        })
        .collect()
}

pub fn sentiment_instances(count: usize, seed: u64) -> Result<Vec<Instance>> {
    let lex = lexicon();
    generate_reviews(count, seed)
        .into_iter()
        .enumerate()
        .map(|(id, review)| {
            let scheme = TokenRemovalScheme::new(review.tokens.clone(), review.stopword_positions.clone())?;
            let x = encode_perturbation(&scheme, &review.tokens, &review.tokens)?;
            debug_assert_eq!(x.len(), scheme.code_len());
            let classify = |tokens: &[Option<u32>]| stopword_sentiment_stub(tokens, &lex);
            let oracle = WrappedClassifier::new(&scheme, review.tokens, classify)?.truth_table()?;
            Ok(Instance {
                id,
                x,
                oracle: Arc::new(oracle),
                label: review.label,
            })
        })
        .collect()
}

//! Judge-mediated dispute protocols over who knows how an ensemble was
//! prepared.
//!
//! Both protocols hand a physical ensemble to a judge along with claims
//! from two parties, Alice and Charles, and settle the dispute with
//! measurements the judge performs — no party ever touches the particles
//! during adjudication, and each particle is measured once.
//!
//! **Protocol A** (axis dispute): Alice claims to know the preparation
//! axis and commits to one before anything is disclosed. Charles then
//! demonstrates his own knowledge by predicting, particle by particle, the
//! outcomes of spin measurements along his declared axis; the judge
//! performs them and validates the demonstration when at least a threshold
//! fraction of predictions match. The judge rules for Alice exactly when
//! the demonstration validates *and* her committed axis lies within an
//! angular tolerance of the validated one. Honest axis-knowing Alices
//! always win; an impostor guessing blindly wins with probability
//! `1 - cos(tolerance)` — the fraction of the axis sphere within tolerance.
//!
//! **Protocol B** (prediction-margin dispute): Alice claims outcomes are
//! unpredictable and picks the judge's measurement direction; if she knows
//! the preparation axis she picks perpendicular to it, making every
//! particle a fair coin for everyone. Charles claims he *can* predict, and
//! wins if his per-particle predictions beat one half by a committed
//! margin. With a perpendicular direction Charles's win probability is an
//! exact binomial tail; against a blindly chosen direction the notebook
//! lets him win most of the time.

use std::fmt;

use rand::Rng;

use crate::ensemble::{Ensemble, KnowledgeView};
use crate::quantum::{Axis, Direction, Sign};
use crate::stats::{binomial_tail, uniform_direction};
use crate::strategies::{
    choose_perpendicular, disguised_predict, impostor_axis_guess, predict_for_view,
    DisguisePolicy, StrategyError,
};
use crate::ensemble::EnsembleError;
use thiserror::Error;

/// Errors from configuring or running a dispute protocol.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    /// Protocols need at least one particle.
    #[error("particle count must be positive")]
    NoParticles,
    /// Axis tolerance must lie strictly between 0 and a quarter turn.
    #[error("axis tolerance {0} outside (0, pi/2)")]
    InvalidAxisTolerance(f64),
    /// Match threshold must be a fraction in `(0.5, 1]`.
    #[error("match threshold {0} outside (0.5, 1]")]
    InvalidMatchThreshold(f64),
    /// Prediction margin must lie in `(0, 0.5)`.
    #[error("margin {0} outside (0, 0.5)")]
    InvalidMargin(f64),
    /// The ensemble handed to the judge has the wrong size.
    #[error("protocol expects {expected} particles, ensemble holds {actual}")]
    EnsembleSizeMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Smallest integer `>= fraction * count`, guarded against the product
/// landing a hair above an exact integer (e.g. `0.6 * 100` evaluating to
/// `60.000000000000014`, which must still demand 60 matches, not 61).
fn required_count(count: usize, fraction: f64) -> usize {
    (fraction * count as f64 - 1e-9).ceil() as usize
}

/// Parameters of the axis dispute: ensemble size, angular tolerance for the
/// committed axis (radians), and the fraction of matching predictions that
/// validates Charles's demonstration (default: all of them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolAParams {
    count: usize,
    axis_tolerance: f64,
    match_threshold: f64,
}

impl ProtocolAParams {
    /// Builds params with the default match threshold of 1 (every
    /// prediction must hit; exact for aligned measurements).
    pub fn new(count: usize, axis_tolerance: f64) -> Result<Self, ProtocolError> {
        ProtocolAParams::with_threshold(count, axis_tolerance, 1.0)
    }

    /// Builds params with an explicit match threshold in `(0.5, 1]`.
    pub fn with_threshold(
        count: usize,
        axis_tolerance: f64,
        match_threshold: f64,
    ) -> Result<Self, ProtocolError> {
        if count == 0 {
            return Err(ProtocolError::NoParticles);
        }
        if !(axis_tolerance > 0.0 && axis_tolerance < std::f64::consts::FRAC_PI_2) {
            return Err(ProtocolError::InvalidAxisTolerance(axis_tolerance));
        }
        if !(match_threshold > 0.5 && match_threshold <= 1.0) {
            return Err(ProtocolError::InvalidMatchThreshold(match_threshold));
        }
        Ok(ProtocolAParams { count, axis_tolerance, match_threshold })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn axis_tolerance(&self) -> f64 {
        self.axis_tolerance
    }

    pub fn match_threshold(&self) -> f64 {
        self.match_threshold
    }

    /// Number of matching predictions that validates the demonstration.
    pub fn required_matches(&self) -> usize {
        required_count(self.count, self.match_threshold)
    }
}

/// Parameters of the prediction-margin dispute: ensemble size, the margin
/// over one half Charles commits to beating, and the accuracy he secretly
/// aims for (1.0 = predict as well as possible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolBParams {
    count: usize,
    margin: f64,
    disguise: DisguisePolicy,
}

impl ProtocolBParams {
    pub fn new(
        count: usize,
        margin: f64,
        charles_target_accuracy: f64,
    ) -> Result<Self, ProtocolError> {
        if count == 0 {
            return Err(ProtocolError::NoParticles);
        }
        if !(margin > 0.0 && margin < 0.5) {
            return Err(ProtocolError::InvalidMargin(margin));
        }
        let disguise = DisguisePolicy::new(charles_target_accuracy)?;
        Ok(ProtocolBParams { count, margin, disguise })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn charles_target_accuracy(&self) -> f64 {
        self.disguise.target_accuracy()
    }

    pub(crate) fn disguise(&self) -> DisguisePolicy {
        self.disguise
    }

    /// Matches Charles needs: the smallest count reaching fraction
    /// `1/2 + margin`.
    pub fn required_matches(&self) -> usize {
        required_count(self.count, 0.5 + self.margin)
    }
}

/// Which party the judge ruled for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Alice,
    Charles,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Alice => "alice",
            Winner::Charles => "charles",
        })
    }
}

/// The judge's ruling with its quantitative basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub winner: Winner,
    /// Predictions that matched the judge's measured outcomes.
    pub match_count: usize,
    /// Matches the protocol demanded.
    pub required_matches: usize,
    /// Angle between the two declared axes (axis dispute only).
    pub axis_angle: Option<f64>,
}

/// One move in a protocol run, in the order it happened.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    AliceDeclaredAxis(Axis),
    CharlesDeclaredAxis(Axis),
    AliceChoseDirection(Direction),
    CharlesPredicted(Vec<Sign>),
    JudgeMeasured {
        direction: Direction,
        outcomes: Vec<Sign>,
    },
    VerdictIssued(Verdict),
}

impl Event {
    /// Stable tag naming the event kind in logs.
    pub fn kind(&self) -> &'static str {
        match self {
            Event::AliceDeclaredAxis(_) => "alice_axis",
            Event::CharlesDeclaredAxis(_) => "charles_axis",
            Event::AliceChoseDirection(_) => "alice_direction",
            Event::CharlesPredicted(_) => "charles_predictions",
            Event::JudgeMeasured { .. } => "judge_measurement",
            Event::VerdictIssued(_) => "verdict",
        }
    }
}

fn signs_to_string(signs: &[Sign]) -> String {
    signs.iter().map(Sign::to_string).collect()
}

/// The ordered record of one protocol run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Serializes the run as a line-delimited log: one event per line,
    /// fields tab-separated —
    /// `seq<TAB>kind<TAB>payload...`. Directions and axes appear as three
    /// components, prediction and outcome lists as strings of `+`/`-`, and
    /// the verdict as winner, match count, required count, and axis angle
    /// (`-` when the protocol has none).
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for (seq, event) in self.events.iter().enumerate() {
            out.push_str(&seq.to_string());
            out.push('\t');
            out.push_str(event.kind());
            match event {
                Event::AliceDeclaredAxis(axis) | Event::CharlesDeclaredAxis(axis) => {
                    for c in axis.representative().components() {
                        out.push('\t');
                        out.push_str(&c.to_string());
                    }
                }
                Event::AliceChoseDirection(direction) => {
                    for c in direction.components() {
                        out.push('\t');
                        out.push_str(&c.to_string());
                    }
                }
                Event::CharlesPredicted(signs) => {
                    out.push('\t');
                    out.push_str(&signs_to_string(signs));
                }
                Event::JudgeMeasured { direction, outcomes } => {
                    for c in direction.components() {
                        out.push('\t');
                        out.push_str(&c.to_string());
                    }
                    out.push('\t');
                    out.push_str(&signs_to_string(outcomes));
                }
                Event::VerdictIssued(v) => {
                    out.push('\t');
                    out.push_str(&v.winner.to_string());
                    out.push('\t');
                    out.push_str(&v.match_count.to_string());
                    out.push('\t');
                    out.push_str(&v.required_matches.to_string());
                    out.push('\t');
                    match v.axis_angle {
                        Some(angle) => out.push_str(&angle.to_string()),
                        None => out.push('-'),
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// The axis a party declares when asked: read from its knowledge if it has
/// any, guessed uniformly otherwise.
fn declared_axis<R: Rng + ?Sized>(view: &KnowledgeView, rng: &mut R) -> Axis {
    match view {
        KnowledgeView::Full(notebook) => notebook.axis(),
        KnowledgeView::BasisOnly(axis) => *axis,
        KnowledgeView::NoKnowledge => impostor_axis_guess(rng),
    }
}

fn count_matches(predictions: &[Sign], outcomes: &[Sign]) -> usize {
    predictions
        .iter()
        .zip(outcomes)
        .filter(|(p, o)| p == o)
        .count()
}

/// Runs the axis dispute.
///
/// Order of moves (and RNG draws): Alice commits her axis, Charles declares
/// his and predicts outcomes along it, the judge measures every particle
/// along Charles's axis, counts matches, and issues the verdict. Alice wins
/// exactly when the demonstration validates and her committed axis lies
/// within tolerance of Charles's.
pub fn run_protocol_a<R: Rng + ?Sized>(
    alice: &KnowledgeView,
    charles: &KnowledgeView,
    mut ensemble: Ensemble,
    params: &ProtocolAParams,
    rng: &mut R,
) -> Result<(Verdict, Transcript), ProtocolError> {
    if ensemble.len() != params.count() {
        return Err(ProtocolError::EnsembleSizeMismatch {
            expected: params.count(),
            actual: ensemble.len(),
        });
    }
    let mut transcript = Transcript::default();
    let alice_axis = declared_axis(alice, rng);
    transcript.push(Event::AliceDeclaredAxis(alice_axis));
    let charles_axis = declared_axis(charles, rng);
    transcript.push(Event::CharlesDeclaredAxis(charles_axis));
    let direction = charles_axis.representative();
    let predictions = predict_for_view(charles, Sign::Plus, direction, params.count(), rng)?;
    transcript.push(Event::CharlesPredicted(predictions.clone()));
    let outcomes = ensemble.measure_all(direction, rng)?;
    transcript.push(Event::JudgeMeasured { direction, outcomes: outcomes.clone() });
    let match_count = count_matches(&predictions, &outcomes);
    let validated = match_count >= params.required_matches();
    let axis_angle = alice_axis.angle_to(charles_axis);
    let winner = if validated && axis_angle <= params.axis_tolerance() {
        Winner::Alice
    } else {
        Winner::Charles
    };
    let verdict = Verdict {
        winner,
        match_count,
        required_matches: params.required_matches(),
        axis_angle: Some(axis_angle),
    };
    transcript.push(Event::VerdictIssued(verdict));
    Ok((verdict, transcript))
}

/// Runs the prediction-margin dispute with Alice choosing the measurement
/// direction according to her knowledge: perpendicular to the axis if she
/// knows it, uniformly random if she knows nothing.
pub fn run_protocol_b<R: Rng + ?Sized>(
    alice: &KnowledgeView,
    charles: &KnowledgeView,
    ensemble: Ensemble,
    params: &ProtocolBParams,
    rng: &mut R,
) -> Result<(Verdict, Transcript), ProtocolError> {
    let direction = match alice {
        KnowledgeView::Full(notebook) => choose_perpendicular(notebook.axis(), rng),
        KnowledgeView::BasisOnly(axis) => choose_perpendicular(*axis, rng),
        KnowledgeView::NoKnowledge => uniform_direction(rng),
    };
    run_protocol_b_with_direction(direction, charles, ensemble, params, rng)
}

/// Runs the prediction-margin dispute with an explicitly chosen
/// measurement direction (for angle sweeps and adversarial analyses).
///
/// Charles predicts through his disguise policy when he holds the notebook
/// and by coin flips otherwise; the judge measures along `direction` and
/// rules for Charles exactly when his matches reach the committed margin.
pub fn run_protocol_b_with_direction<R: Rng + ?Sized>(
    direction: Direction,
    charles: &KnowledgeView,
    mut ensemble: Ensemble,
    params: &ProtocolBParams,
    rng: &mut R,
) -> Result<(Verdict, Transcript), ProtocolError> {
    if ensemble.len() != params.count() {
        return Err(ProtocolError::EnsembleSizeMismatch {
            expected: params.count(),
            actual: ensemble.len(),
        });
    }
    let mut transcript = Transcript::default();
    transcript.push(Event::AliceChoseDirection(direction));
    let predictions = match charles {
        KnowledgeView::Full(notebook) => {
            if notebook.len() < params.count() {
                return Err(ProtocolError::Strategy(StrategyError::NotebookTooShort {
                    notebook: notebook.len(),
                    requested: params.count(),
                }));
            }
            let mut all = disguised_predict(notebook, direction, params.disguise(), rng);
            all.truncate(params.count());
            all
        }
        other => predict_for_view(other, Sign::Plus, direction, params.count(), rng)?,
    };
    transcript.push(Event::CharlesPredicted(predictions.clone()));
    let outcomes = ensemble.measure_all(direction, rng)?;
    transcript.push(Event::JudgeMeasured { direction, outcomes: outcomes.clone() });
    let match_count = count_matches(&predictions, &outcomes);
    let winner = if match_count >= params.required_matches() {
        Winner::Charles
    } else {
        Winner::Alice
    };
    let verdict = Verdict {
        winner,
        match_count,
        required_matches: params.required_matches(),
        axis_angle: None,
    };
    transcript.push(Event::VerdictIssued(verdict));
    Ok((verdict, transcript))
}

/// Probability that a blindly guessing impostor survives the axis dispute:
/// the fraction of uniformly random axes within `axis_tolerance` of a fixed
/// axis, `1 - cos(axis_tolerance)` for tolerances in `(0, pi/2)`.
pub fn soundness_protocol_a(axis_tolerance: f64) -> f64 {
    1.0 - axis_tolerance.cos()
}

/// Closed-form probability that Charles wins the prediction-margin dispute
/// when the judge's direction sits at polar angle `theta` from the
/// preparation axis.
///
/// Charles's per-particle hit probability is
/// `min(target, (1 + |cos theta|)/2)`; the win probability is the exact
/// binomial tail of reaching his required matches at that rate.
pub fn charles_win_probability_b(params: &ProtocolBParams, theta: f64) -> f64 {
    let best = (1.0 + theta.cos().abs()) / 2.0;
    let per_particle = params.charles_target_accuracy().min(best);
    binomial_tail(
        params.count() as u64,
        params.required_matches() as u64,
        per_particle,
    )
    .expect("per-particle probability and threshold are in range by construction")
}

/// [`charles_win_probability_b`] averaged over a uniformly random judge
/// direction.
///
/// For a uniform direction, `u = |cos theta|` is uniform on `[0, 1]`; the
/// average is a 1-D integral of a polynomial in `u`, evaluated with
/// composite Simpson quadrature (4096 panels — error orders of magnitude
/// below Monte Carlo resolution).
pub fn charles_win_probability_b_sphere_average(params: &ProtocolBParams) -> f64 {
    let panels = 4096usize;
    let h = 1.0 / panels as f64;
    let f = |u: f64| {
        let per_particle = params.charles_target_accuracy().min((1.0 + u) / 2.0);
        binomial_tail(
            params.count() as u64,
            params.required_matches() as u64,
            per_particle,
        )
        .expect("per-particle probability and threshold are in range by construction")
    };
    let mut sum = f(0.0) + f(1.0);
    for i in 1..panels {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(i as f64 * h);
    }
    sum * h / 3.0
}

//! Outcome-prediction strategies for each level of preparation knowledge.
//!
//! A party holding the notebook predicts each outcome optimally from the
//! recorded sign and the angle between preparation axis and measurement
//! direction; a party knowing only the axis (or nothing) can do no better
//! than a fair coin, because each particle alone carries the maximally
//! mixed state. The module also covers two deliberately non-optimal moves:
//! *disguising* (hitting a chosen accuracy below one's best) and guessing
//! an axis with no information at all.

use rand::Rng;
use thiserror::Error;

use crate::ensemble::{KnowledgeView, Notebook, ViewKind};
use crate::quantum::{Axis, Direction, Sign, UNIT_TOL};
use crate::stats::uniform_axis;

/// Errors from prediction strategies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    /// Asked to predict more particles than the notebook records.
    #[error("notebook records {notebook} particles, asked to predict {requested}")]
    NotebookTooShort { notebook: usize, requested: usize },
    /// A disguise target accuracy must lie in `[0.5, 1]`.
    #[error("target accuracy {0} outside [0.5, 1]")]
    InvalidTargetAccuracy(f64),
}

/// Orientation of a direction relative to its unoriented axis: `Plus` when
/// the direction is the canonical representative, `Minus` when it is the
/// antipode.
fn orientation(direction: Direction) -> Sign {
    for c in direction.components() {
        if c.abs() > UNIT_TOL {
            return Sign::from_bool(c > 0.0);
        }
    }
    Sign::Plus
}

/// The optimal guess for one particle: propagate the recorded sign through
/// the geometry (`sign` if the measurement leans along the preparation
/// direction, `-sign` if against). Exactly perpendicular measurements carry
/// no information; the guess is then `tie_rule` adjusted for the
/// measurement's orientation, so that flipping the measurement direction
/// flips the guess there too.
fn optimal_guess(axis_rep: Direction, sign: Sign, measurement: Direction, tie_rule: Sign) -> Sign {
    let cos = measurement.dot(axis_rep);
    if cos > 0.0 {
        sign
    } else if cos < 0.0 {
        -sign
    } else {
        tie_rule.compose(orientation(measurement))
    }
}

/// Predictions for the first `count` particles under `view`, against a
/// spin measurement along `measurement`.
///
/// Sees only the view and the announced direction — never hidden ensemble
/// state. Full knowledge predicts each particle optimally; axis-only and
/// no knowledge fall back to independent fair coin flips (one RNG draw per
/// particle).
pub(crate) fn predict_for_view<R: Rng + ?Sized>(
    view: &KnowledgeView,
    tie_rule: Sign,
    measurement: Direction,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Sign>, StrategyError> {
    match view {
        KnowledgeView::Full(notebook) => {
            if notebook.len() < count {
                return Err(StrategyError::NotebookTooShort {
                    notebook: notebook.len(),
                    requested: count,
                });
            }
            let axis_rep = notebook.axis().representative();
            Ok(notebook.signs()[..count]
                .iter()
                .map(|s| optimal_guess(axis_rep, *s, measurement, tie_rule))
                .collect())
        }
        KnowledgeView::BasisOnly(_) | KnowledgeView::NoKnowledge => Ok((0..count)
            .map(|_| Sign::from_bool(rng.random::<bool>()))
            .collect()),
    }
}

/// A per-party outcome predictor bound to one knowledge view.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    view: KnowledgeView,
    tie_rule: Sign,
}

impl Predictor {
    /// A predictor with the default tie rule (`Plus` at exactly
    /// perpendicular measurements).
    pub fn new(view: KnowledgeView) -> Self {
        Predictor { view, tie_rule: Sign::Plus }
    }

    /// Overrides the tie rule used when the measurement carries no
    /// information about the recorded sign.
    pub fn with_tie_rule(view: KnowledgeView, tie_rule: Sign) -> Self {
        Predictor { view, tie_rule }
    }

    pub fn view(&self) -> &KnowledgeView {
        &self.view
    }

    pub fn tie_rule(&self) -> Sign {
        self.tie_rule
    }

    /// Predicts outcomes for the first `count` particles measured along
    /// `measurement`.
    pub fn predict<R: Rng + ?Sized>(
        &self,
        measurement: Direction,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Sign>, StrategyError> {
        predict_for_view(&self.view, self.tie_rule, measurement, count, rng)
    }
}

/// Expected per-particle prediction accuracy at angle `theta` between the
/// preparation axis and the measurement direction: `(1 + |cos theta|)/2`
/// with the notebook, one half otherwise.
pub fn expected_accuracy(kind: ViewKind, theta: f64) -> f64 {
    match kind {
        ViewKind::Full => (1.0 + theta.cos().abs()) / 2.0,
        ViewKind::BasisOnly | ViewKind::NoKnowledge => 0.5,
    }
}

/// Expected accuracy when the measurement direction is drawn uniformly
/// from the sphere: the average of `(1 + |cos|)/2` is 3/4 with the
/// notebook, one half otherwise.
pub fn expected_accuracy_random_direction(kind: ViewKind) -> f64 {
    match kind {
        ViewKind::Full => 0.75,
        ViewKind::BasisOnly | ViewKind::NoKnowledge => 0.5,
    }
}

/// A deliberate under-performance policy: predict so that per-particle
/// accuracy lands on `target_accuracy` (or on the best achievable accuracy
/// if the target exceeds it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisguisePolicy {
    target_accuracy: f64,
}

impl DisguisePolicy {
    pub fn new(target_accuracy: f64) -> Result<Self, StrategyError> {
        if !(0.5..=1.0).contains(&target_accuracy) {
            return Err(StrategyError::InvalidTargetAccuracy(target_accuracy));
        }
        Ok(DisguisePolicy { target_accuracy })
    }

    pub fn target_accuracy(&self) -> f64 {
        self.target_accuracy
    }
}

/// Full-knowledge predictions watered down to the policy's target accuracy.
///
/// Each particle independently keeps the optimal guess with probability `q`
/// and flips it otherwise, where `q` solves
/// `q·a + (1-q)·(1-a) = min(target, a)` for the optimal accuracy
/// `a = (1 + |cos theta|)/2`. One RNG draw per particle. When the
/// measurement is (numerically) perpendicular, every guess is a coin flip
/// anyway and the optimal guesses are kept.
pub fn disguised_predict<R: Rng + ?Sized>(
    notebook: &Notebook,
    measurement: Direction,
    policy: DisguisePolicy,
    rng: &mut R,
) -> Vec<Sign> {
    let axis_rep = notebook.axis().representative();
    let cos = measurement.dot(axis_rep);
    let a = (1.0 + cos.abs()) / 2.0;
    let keep = if a - 0.5 > 1e-12 {
        let t = policy.target_accuracy().min(a);
        (t + a - 1.0) / (2.0 * a - 1.0)
    } else {
        1.0
    };
    notebook
        .signs()
        .iter()
        .map(|s| {
            let opt = optimal_guess(axis_rep, *s, measurement, Sign::Plus);
            if rng.random::<f64>() < keep {
                opt
            } else {
                -opt
            }
        })
        .collect()
}

/// A direction exactly perpendicular to `axis`, with uniformly random
/// azimuth around it.
pub fn choose_perpendicular<R: Rng + ?Sized>(axis: Axis, rng: &mut R) -> Direction {
    let (u, v) = axis.representative().tangent_frame();
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (s, c) = phi.sin_cos();
    Direction::new(
        c * u.x() + s * v.x(),
        c * u.y() + s * v.y(),
        c * u.z() + s * v.z(),
    )
    .expect("combination of orthonormal tangents is unit length")
}

/// The best an impostor can do when challenged for the preparation axis:
/// guess one uniformly at random.
pub fn impostor_axis_guess<R: Rng + ?Sized>(rng: &mut R) -> Axis {
    uniform_axis(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::PreparationSpec;
    use crate::stats::direction_at_polar_angle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn notebook(seed: u64, n: usize) -> Notebook {
        PreparationSpec::unbiased(Axis::Z, n, seed).unwrap().prepare().1
    }

    #[test]
    fn full_knowledge_reads_aligned_measurements_off_the_notebook() {
        let nb = notebook(1, 100);
        let p = Predictor::new(KnowledgeView::Full(nb.clone()));
        let up = p.predict(Direction::Z, 100, &mut rng(0)).unwrap();
        assert_eq!(up, nb.signs());
        // Measuring the opposite direction flips every prediction.
        let down = p.predict(-Direction::Z, 100, &mut rng(0)).unwrap();
        let flipped: Vec<Sign> = nb.signs().iter().map(|s| -*s).collect();
        assert_eq!(down, flipped);
    }

    #[test]
    fn full_knowledge_is_covariant_under_measurement_flip() {
        let nb = notebook(2, 64);
        let p = Predictor::new(KnowledgeView::Full(nb));
        // Including at exactly perpendicular measurements, where the tie
        // rule decides.
        for m in [
            Direction::X,
            -Direction::X,
            Direction::normalized(0.3, -0.2, 0.7).unwrap(),
        ] {
            let a = p.predict(m, 64, &mut rng(0)).unwrap();
            let b = p.predict(-m, 64, &mut rng(0)).unwrap();
            let flipped: Vec<Sign> = a.iter().map(|s| -*s).collect();
            assert_eq!(b, flipped);
        }
    }

    #[test]
    fn tie_rule_selects_perpendicular_guess() {
        let nb = notebook(3, 16);
        let plus = Predictor::new(KnowledgeView::Full(nb.clone()));
        let minus = Predictor::with_tie_rule(KnowledgeView::Full(nb), Sign::Minus);
        assert_eq!(minus.tie_rule(), Sign::Minus);
        let a = plus.predict(Direction::X, 16, &mut rng(0)).unwrap();
        let b = minus.predict(Direction::X, 16, &mut rng(0)).unwrap();
        assert!(a.iter().all(|s| *s == Sign::Plus));
        assert!(b.iter().all(|s| *s == Sign::Minus));
    }

    #[test]
    fn notebook_too_short_is_an_error() {
        let p = Predictor::new(KnowledgeView::Full(notebook(4, 10)));
        assert!(matches!(
            p.predict(Direction::Z, 11, &mut rng(0)),
            Err(StrategyError::NotebookTooShort { notebook: 10, requested: 11 })
        ));
        assert_eq!(p.predict(Direction::Z, 7, &mut rng(0)).unwrap().len(), 7);
    }

    #[test]
    fn coin_flip_views_draw_from_the_rng() {
        let p = Predictor::new(KnowledgeView::BasisOnly(Axis::Z));
        let a = p.predict(Direction::Z, 10_000, &mut rng(8)).unwrap();
        let plus = a.iter().filter(|s| **s == Sign::Plus).count();
        assert!((plus as f64 - 5000.0).abs() < 4.0 * 50.0);
        // Reproducible given the seed, view payload irrelevant.
        let q = Predictor::new(KnowledgeView::NoKnowledge);
        let b = q.predict(Direction::Z, 10_000, &mut rng(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn accuracy_laws() {
        assert_eq!(expected_accuracy(ViewKind::Full, 0.0), 1.0);
        let t = 60f64.to_radians();
        assert!((expected_accuracy(ViewKind::Full, t) - 0.75).abs() < 1e-15);
        // |cos| folds angles beyond a quarter turn.
        assert!(
            (expected_accuracy(ViewKind::Full, std::f64::consts::PI) - 1.0).abs() < 1e-15
        );
        assert_eq!(expected_accuracy(ViewKind::BasisOnly, 0.3), 0.5);
        assert_eq!(expected_accuracy_random_direction(ViewKind::Full), 0.75);
        assert_eq!(expected_accuracy_random_direction(ViewKind::NoKnowledge), 0.5);
    }

    #[test]
    fn full_knowledge_empirical_accuracy_matches_the_law() {
        let n = 40_000usize;
        let theta = 40f64.to_radians();
        let spec = PreparationSpec::unbiased(Axis::Z, n, 11).unwrap();
        let (mut ensemble, nb) = spec.prepare();
        let mut r = rng(12);
        let m = direction_at_polar_angle(Axis::Z, theta, &mut r);
        let p = Predictor::new(KnowledgeView::Full(nb));
        let guesses = p.predict(m, n, &mut r).unwrap();
        let outcomes = ensemble.measure_all(m, &mut r).unwrap();
        let hits = guesses
            .iter()
            .zip(&outcomes)
            .filter(|(g, o)| g == o)
            .count();
        let a = expected_accuracy(ViewKind::Full, theta);
        let sigma = (a * (1.0 - a) / n as f64).sqrt();
        assert!(
            (hits as f64 / n as f64 - a).abs() < 4.0 * sigma,
            "accuracy {} vs {a}",
            hits as f64 / n as f64
        );
    }

    #[test]
    fn disguise_hits_requested_accuracy() {
        let n = 40_000usize;
        let spec = PreparationSpec::unbiased(Axis::Z, n, 21).unwrap();
        let (mut ensemble, nb) = spec.prepare();
        let mut r = rng(22);
        let policy = DisguisePolicy::new(0.6).unwrap();
        // Aligned measurement: optimal accuracy 1, disguised to 0.6.
        let guesses = disguised_predict(&nb, Direction::Z, policy, &mut r);
        let outcomes = ensemble.measure_all(Direction::Z, &mut r).unwrap();
        let hits = guesses
            .iter()
            .zip(&outcomes)
            .filter(|(g, o)| g == o)
            .count();
        let sigma = (0.6 * 0.4 / n as f64).sqrt();
        assert!(
            (hits as f64 / n as f64 - 0.6).abs() < 4.0 * sigma,
            "accuracy {}",
            hits as f64 / n as f64
        );
    }

    #[test]
    fn disguise_caps_at_achievable_accuracy() {
        let n = 40_000usize;
        let theta = 70f64.to_radians();
        let spec = PreparationSpec::unbiased(Axis::Z, n, 31).unwrap();
        let (mut ensemble, nb) = spec.prepare();
        let mut r = rng(32);
        let m = direction_at_polar_angle(Axis::Z, theta, &mut r);
        // Target far above what theta = 70 degrees allows: cap at
        // a = (1 + cos 70)/2 ~ 0.671.
        let policy = DisguisePolicy::new(0.99).unwrap();
        let guesses = disguised_predict(&nb, m, policy, &mut r);
        let outcomes = ensemble.measure_all(m, &mut r).unwrap();
        let hits = guesses
            .iter()
            .zip(&outcomes)
            .filter(|(g, o)| g == o)
            .count();
        let a = expected_accuracy(ViewKind::Full, theta);
        let sigma = (a * (1.0 - a) / n as f64).sqrt();
        assert!(
            (hits as f64 / n as f64 - a).abs() < 4.0 * sigma,
            "accuracy {} vs cap {a}",
            hits as f64 / n as f64
        );
    }

    #[test]
    fn disguise_validates_target() {
        assert!(DisguisePolicy::new(0.49).is_err());
        assert!(DisguisePolicy::new(1.01).is_err());
        assert!(DisguisePolicy::new(0.5).is_ok());
        assert!(DisguisePolicy::new(1.0).is_ok());
    }

    #[test]
    fn perpendicular_choice_is_orthogonal_and_spread() {
        let mut r = rng(41);
        let axis = Axis::new(Direction::normalized(1.0, 2.0, -0.5).unwrap());
        let (u, v) = axis.representative().tangent_frame();
        let n = 20_000;
        let mut quadrants = [0u32; 4];
        for _ in 0..n {
            let d = choose_perpendicular(axis, &mut r);
            assert!(d.dot(axis.representative()).abs() < 1e-12);
            let idx = ((d.dot(u) > 0.0) as usize) | (((d.dot(v) > 0.0) as usize) << 1);
            quadrants[idx] += 1;
        }
        let expected = n as f64 / 4.0;
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for &c in &quadrants {
            assert!((c as f64 - expected).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn impostor_guess_is_rarely_close() {
        // P[angle <= 10 degrees] = 1 - cos(10 degrees) ~ 0.0152.
        let mut r = rng(51);
        let n = 50_000;
        let tol = 10f64.to_radians();
        let close = (0..n)
            .filter(|_| impostor_axis_guess(&mut r).angle_to(Axis::Z) <= tol)
            .count();
        let p = 1.0 - tol.cos();
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((close as f64 - n as f64 * p).abs() < 4.0 * sigma, "close {close}");
    }
}

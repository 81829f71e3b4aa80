//! Coin-toss preparation of qubit ensembles and records of that
//! preparation.
//!
//! A preparer fixes an axis and a bias, then for each of `N` particles
//! tosses a (possibly biased) coin and prepares the spin up or down that
//! axis, writing the drawn sign into a *notebook*. The ensemble keeps its
//! microscopic states strictly private — the only way to learn anything
//! about a particle is to measure it, and each particle can be measured
//! exactly once. Different parties hold different [`KnowledgeView`]s of the
//! preparation: the full notebook, just the axis, or nothing at all.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::quantum::{sample_outcome, Axis, DensityMatrix, Direction, QubitPureState, Sign};

/// Errors from preparing, measuring, or verifying ensembles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    /// Preparation bias must be a probability.
    #[error("bias {0} outside [0, 1]")]
    InvalidBias(f64),
    /// An ensemble must hold at least one particle.
    #[error("an ensemble needs at least one particle")]
    Empty,
    /// Each particle supports exactly one measurement.
    #[error("particle {0} was already measured")]
    AlreadyMeasured(usize),
    /// Particle index beyond the ensemble size.
    #[error("particle index {index} out of range for {len} particles")]
    IndexOutOfRange { index: usize, len: usize },
    /// A notebook can only be checked against an ensemble of the same size.
    #[error("notebook records {notebook} particles, ensemble holds {ensemble}")]
    SizeMismatch { notebook: usize, ensemble: usize },
}

/// A recipe for preparing an ensemble: axis, up-probability, size, and the
/// seed that makes the preparation reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparationSpec {
    axis: Axis,
    bias: f64,
    count: usize,
    seed: u64,
}

impl PreparationSpec {
    /// Builds a spec; `bias` is the probability of preparing the `+` state
    /// along `axis`.
    pub fn new(axis: Axis, bias: f64, count: usize, seed: u64) -> Result<Self, EnsembleError> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(EnsembleError::InvalidBias(bias));
        }
        if count == 0 {
            return Err(EnsembleError::Empty);
        }
        Ok(PreparationSpec { axis, bias, count, seed })
    }

    /// A fair-coin spec (bias one half), the canonical preparation.
    pub fn unbiased(axis: Axis, count: usize, seed: u64) -> Result<Self, EnsembleError> {
        PreparationSpec::new(axis, 0.5, count, seed)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The density matrix every particle of this preparation carries:
    /// Bloch vector `(2·bias - 1)` along the axis. A fair coin gives the
    /// maximally mixed state exactly.
    pub fn density(&self) -> DensityMatrix {
        let len = 2.0 * self.bias - 1.0;
        let a = self.axis.representative().components();
        DensityMatrix::new([len * a[0], len * a[1], len * a[2]])
            .expect("Bloch vector of length |2b-1| <= 1 is valid")
    }

    /// Prepares the ensemble with this spec's own seed. Equivalent to
    /// [`Ensemble::prepare`] with a ChaCha12 RNG seeded from `self.seed()`.
    pub fn prepare(&self) -> (Ensemble, Notebook) {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        Ensemble::prepare(self, &mut rng)
    }
}

/// The preparer's record: the preparation axis and the sign drawn for each
/// particle, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Notebook {
    axis: Axis,
    signs: Vec<Sign>,
}

impl Notebook {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

/// Whether an ensemble is the one originally handed over or a replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Original,
    Substituted,
}

/// A sequence of privately prepared qubits, each measurable exactly once.
///
/// The underlying pure states are deliberately inaccessible: no getter
/// exposes them, so code built on this type can only learn what physics
/// allows it to learn.
#[derive(Debug, Clone)]
pub struct Ensemble {
    states: Vec<QubitPureState>,
    measured: Vec<bool>,
    provenance: Provenance,
}

impl Ensemble {
    /// Prepares `spec.count()` particles by independent coin tosses from
    /// `rng` (one draw per particle), returning the ensemble and the
    /// preparer's notebook.
    pub fn prepare<R: Rng + ?Sized>(spec: &PreparationSpec, rng: &mut R) -> (Ensemble, Notebook) {
        let axis_dir = spec.axis().representative();
        let mut states = Vec::with_capacity(spec.count());
        let mut signs = Vec::with_capacity(spec.count());
        for _ in 0..spec.count() {
            let sign = Sign::from_bool(rng.random_bool(spec.bias()));
            states.push(QubitPureState::along(axis_dir, sign));
            signs.push(sign);
        }
        (
            Ensemble {
                measured: vec![false; states.len()],
                states,
                provenance: Provenance::Original,
            },
            Notebook { axis: spec.axis(), signs },
        )
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// How many particles are still unmeasured.
    pub fn remaining(&self) -> usize {
        self.measured.iter().filter(|m| !**m).count()
    }

    /// Whether a particle has been consumed by a measurement.
    pub fn is_measured(&self, index: usize) -> Result<bool, EnsembleError> {
        self.measured
            .get(index)
            .copied()
            .ok_or(EnsembleError::IndexOutOfRange { index, len: self.states.len() })
    }

    /// Measures one particle along `direction`, consuming its one
    /// measurement and collapsing it onto the outcome eigenstate.
    pub fn measure_particle<R: Rng + ?Sized>(
        &mut self,
        index: usize,
        direction: Direction,
        rng: &mut R,
    ) -> Result<Sign, EnsembleError> {
        let len = self.states.len();
        let state = self
            .states
            .get_mut(index)
            .ok_or(EnsembleError::IndexOutOfRange { index, len })?;
        if self.measured[index] {
            return Err(EnsembleError::AlreadyMeasured(index));
        }
        let outcome = sample_outcome(*state, direction, rng);
        *state = QubitPureState::along(direction, outcome);
        self.measured[index] = true;
        Ok(outcome)
    }

    /// Measures every particle along the same direction, in index order
    /// (one RNG draw per particle). Fails without measuring anything if any
    /// particle was already consumed.
    pub fn measure_all<R: Rng + ?Sized>(
        &mut self,
        direction: Direction,
        rng: &mut R,
    ) -> Result<Vec<Sign>, EnsembleError> {
        if let Some(i) = self.measured.iter().position(|m| *m) {
            return Err(EnsembleError::AlreadyMeasured(i));
        }
        let outcomes = (0..self.states.len())
            .map(|i| {
                let outcome = sample_outcome(self.states[i], direction, rng);
                self.states[i] = QubitPureState::along(direction, outcome);
                self.measured[i] = true;
                outcome
            })
            .collect();
        Ok(outcomes)
    }

    /// Discards this ensemble and prepares a fresh one from `replacement`,
    /// marked [`Provenance::Substituted`]. This is the tamper move: the
    /// original particles are consumed unmeasured.
    pub fn substitute<R: Rng + ?Sized>(
        self,
        replacement: &PreparationSpec,
        rng: &mut R,
    ) -> Ensemble {
        let (mut fresh, _) = Ensemble::prepare(replacement, rng);
        fresh.provenance = Provenance::Substituted;
        fresh
    }

    /// Checks the ensemble against a notebook: measures every particle
    /// along the notebook's axis and counts outcomes equal to the recorded
    /// signs.
    ///
    /// An untampered ensemble matches on all `N` particles with certainty;
    /// an ensemble prepared along an orthogonal axis matches like `N` fair
    /// coin tosses.
    pub fn verify_against_notebook<R: Rng + ?Sized>(
        &mut self,
        notebook: &Notebook,
        rng: &mut R,
    ) -> Result<usize, EnsembleError> {
        if notebook.len() != self.states.len() {
            return Err(EnsembleError::SizeMismatch {
                notebook: notebook.len(),
                ensemble: self.states.len(),
            });
        }
        let outcomes = self.measure_all(notebook.axis().representative(), rng)?;
        Ok(outcomes
            .iter()
            .zip(notebook.signs())
            .filter(|(o, s)| o == s)
            .count())
    }
}

/// What a party knows about how an ensemble was prepared.
#[derive(Debug, Clone, PartialEq)]
pub enum KnowledgeView {
    /// The whole notebook: axis and every drawn sign.
    Full(Notebook),
    /// Only the preparation axis; the signs stay unknown.
    BasisOnly(Axis),
    /// Nothing about the preparation.
    NoKnowledge,
}

impl KnowledgeView {
    pub fn kind(&self) -> ViewKind {
        match self {
            KnowledgeView::Full(_) => ViewKind::Full,
            KnowledgeView::BasisOnly(_) => ViewKind::BasisOnly,
            KnowledgeView::NoKnowledge => ViewKind::NoKnowledge,
        }
    }
}

/// The three levels of preparation knowledge, without their payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViewKind {
    Full,
    BasisOnly,
    NoKnowledge,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::trace_distance;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn spec_validates_inputs() {
        assert!(matches!(
            PreparationSpec::new(Axis::Z, 1.2, 10, 0),
            Err(EnsembleError::InvalidBias(_))
        ));
        assert!(matches!(
            PreparationSpec::new(Axis::Z, 0.5, 0, 0),
            Err(EnsembleError::Empty)
        ));
    }

    #[test]
    fn fair_coin_density_is_maximally_mixed_for_any_axis() {
        let z = PreparationSpec::unbiased(Axis::Z, 10, 0).unwrap();
        let x = PreparationSpec::unbiased(Axis::X, 10, 0).unwrap();
        assert_eq!(z.density().bloch_vector(), [0.0, 0.0, 0.0]);
        assert_eq!(trace_distance(z.density(), x.density()), 0.0);
        // Biased spec points along the axis.
        let biased = PreparationSpec::new(Axis::Z, 0.8, 10, 0).unwrap();
        let r = biased.density().bloch_vector();
        assert!((r[2] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn preparation_is_reproducible_from_spec_seed() {
        let spec = PreparationSpec::unbiased(Axis::Z, 64, 1234).unwrap();
        let (_, nb1) = spec.prepare();
        let (_, nb2) = spec.prepare();
        assert_eq!(nb1, nb2);
        // Different seed, almost surely different record.
        let other = PreparationSpec::unbiased(Axis::Z, 64, 1235).unwrap();
        let (_, nb3) = other.prepare();
        assert_ne!(nb1.signs(), nb3.signs());
    }

    #[test]
    fn notebook_signs_are_roughly_balanced_for_fair_coin() {
        let spec = PreparationSpec::unbiased(Axis::Z, 100_000, 7).unwrap();
        let (_, nb) = spec.prepare();
        let plus = nb.signs().iter().filter(|s| **s == Sign::Plus).count();
        let sigma = (100_000f64 * 0.25).sqrt();
        assert!((plus as f64 - 50_000.0).abs() < 4.0 * sigma);
    }

    #[test]
    fn measuring_along_preparation_axis_reproduces_notebook() {
        let spec = PreparationSpec::unbiased(Axis::Z, 500, 42).unwrap();
        let (mut ensemble, nb) = spec.prepare();
        let outcomes = ensemble.measure_all(Direction::Z, &mut rng(1)).unwrap();
        assert_eq!(outcomes, nb.signs());
    }

    #[test]
    fn each_particle_is_measured_once() {
        let spec = PreparationSpec::unbiased(Axis::Z, 3, 0).unwrap();
        let (mut ensemble, _) = spec.prepare();
        let mut r = rng(2);
        ensemble.measure_particle(1, Direction::X, &mut r).unwrap();
        assert!(matches!(
            ensemble.measure_particle(1, Direction::X, &mut r),
            Err(EnsembleError::AlreadyMeasured(1))
        ));
        assert!(matches!(
            ensemble.measure_particle(5, Direction::X, &mut r),
            Err(EnsembleError::IndexOutOfRange { index: 5, len: 3 })
        ));
        assert!(matches!(
            ensemble.measure_all(Direction::Z, &mut r),
            Err(EnsembleError::AlreadyMeasured(1))
        ));
        assert_eq!(ensemble.remaining(), 2);
        assert!(ensemble.is_measured(1).unwrap());
        assert!(!ensemble.is_measured(0).unwrap());
    }

    #[test]
    fn verification_of_untampered_ensemble_matches_everywhere() {
        for seed in 0..20u64 {
            let spec = PreparationSpec::unbiased(Axis::X, 200, seed).unwrap();
            let (mut ensemble, nb) = spec.prepare();
            let matches = ensemble
                .verify_against_notebook(&nb, &mut rng(seed ^ 0xABCD))
                .unwrap();
            assert_eq!(matches, 200);
        }
    }

    #[test]
    fn verification_of_substituted_ensemble_looks_like_coin_tosses() {
        let n = 50_000usize;
        let spec = PreparationSpec::unbiased(Axis::Z, n, 3).unwrap();
        let (ensemble, nb) = spec.prepare();
        let replacement = PreparationSpec::unbiased(Axis::X, n, 4).unwrap();
        let mut r = rng(5);
        let mut swapped = ensemble.substitute(&replacement, &mut r);
        assert_eq!(swapped.provenance(), Provenance::Substituted);
        let matches = swapped.verify_against_notebook(&nb, &mut r).unwrap();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!(
            (matches as f64 - n as f64 / 2.0).abs() < 4.0 * sigma,
            "matches {matches}"
        );
    }

    #[test]
    fn verification_requires_matching_sizes() {
        let spec = PreparationSpec::unbiased(Axis::Z, 10, 0).unwrap();
        let (mut ensemble, _) = spec.prepare();
        let other = PreparationSpec::unbiased(Axis::Z, 11, 0).unwrap();
        let (_, nb) = other.prepare();
        assert!(matches!(
            ensemble.verify_against_notebook(&nb, &mut rng(0)),
            Err(EnsembleError::SizeMismatch { notebook: 11, ensemble: 10 })
        ));
    }

    #[test]
    fn substitution_consumes_the_original() {
        // The move is by-value: after substitution only the fresh ensemble
        // exists, with its own size.
        let spec = PreparationSpec::unbiased(Axis::Z, 10, 0).unwrap();
        let (ensemble, _) = spec.prepare();
        let replacement = PreparationSpec::unbiased(Axis::X, 25, 1).unwrap();
        let swapped = ensemble.substitute(&replacement, &mut rng(9));
        assert_eq!(swapped.len(), 25);
        assert_eq!(swapped.remaining(), 25);
    }

    #[test]
    fn view_kinds_classify_views() {
        let spec = PreparationSpec::unbiased(Axis::Z, 4, 0).unwrap();
        let (_, nb) = spec.prepare();
        assert_eq!(KnowledgeView::Full(nb).kind(), ViewKind::Full);
        assert_eq!(KnowledgeView::BasisOnly(Axis::Z).kind(), ViewKind::BasisOnly);
        assert_eq!(KnowledgeView::NoKnowledge.kind(), ViewKind::NoKnowledge);
    }
}

//! Single-qubit state algebra on the Bloch sphere.
//!
//! A pure state is a unit Bloch vector `s`; a mixed state is a Bloch vector
//! `r` with `|r| <= 1`, standing for the density matrix
//! `rho = (I + r·sigma)/2`. A projective spin measurement is a unit direction
//! `m`, with Born rule `P[+1] = (1 + s·m)/2`. Generalized measurements are
//! lists of positive effects `E = e0·I + e·sigma` summing to the identity.
//!
//! Keeping everything in Pauli coordinates makes the operations exact where
//! they should be exact: the trace distance between two mixed states is half
//! the Euclidean distance between their Bloch vectors, and two preparations
//! with the same Bloch vector are *the same* density matrix, bit for bit.

use std::fmt;
use std::ops::Neg;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Tolerance for unit-norm checks when constructing directions and for
/// recognizing a zero component during axis canonicalization.
pub const UNIT_TOL: f64 = 1e-12;

/// Tolerance for positivity and completeness checks on measurement effects.
pub const EFFECT_TOL: f64 = 1e-10;

/// Tolerance for mixture weights summing to one.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Errors from constructing or combining states and measurements.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    /// A vector supposed to be unit length was not (carries its norm).
    #[error("expected a unit vector, got norm {0}")]
    NotUnit(f64),
    /// A vector with no direction (norm ~ 0) cannot be normalized.
    #[error("cannot normalize a near-zero vector (norm {0})")]
    ZeroVector(f64),
    /// A Bloch vector for a density matrix must satisfy `|r| <= 1`.
    #[error("Bloch vector norm {0} exceeds 1")]
    BlochNormTooLarge(f64),
    /// Mixture weights must be nonnegative.
    #[error("mixture weight {0} is negative")]
    NegativeWeight(f64),
    /// Mixture weights must sum to one.
    #[error("mixture weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    /// An effect `e0·I + e·sigma` is positive semidefinite only if
    /// `e0 >= |e|`; both eigenvalues `e0 ± |e|` must be `>= 0`.
    #[error("effect not positive semidefinite: weight {weight}, bias norm {bias_norm}")]
    EffectNotPositive { weight: f64, bias_norm: f64 },
    /// Effects of a generalized measurement must sum to the identity.
    #[error("effects sum to {weight_sum}·I + (bias norm {bias_sum})·sigma, expected exactly I")]
    EffectsNotComplete { weight_sum: f64, bias_sum: f64 },
    /// A matrix supposed to be Hermitian was not.
    #[error("matrix is not Hermitian (max asymmetry {0})")]
    NotHermitian(f64),
    /// A generalized measurement needs at least one effect.
    #[error("a measurement needs at least one effect")]
    NoEffects,
}

/// A binary spin outcome (or preparation sign): `+1` or `-1` along some axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// The outcome as `+1` or `-1`.
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// The outcome as `+1.0` or `-1.0`.
    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// `Plus` for `true`, `Minus` for `false`.
    pub fn from_bool(plus: bool) -> Self {
        if plus {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Sign product: `Plus` acts as identity, `Minus` flips.
    pub fn compose(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A unit vector on the Bloch sphere: a spin direction.
///
/// Construction validates the norm, so every `Direction` in circulation is
/// unit length to within [`UNIT_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    /// The +x direction.
    pub const X: Direction = Direction { x: 1.0, y: 0.0, z: 0.0 };
    /// The +y direction.
    pub const Y: Direction = Direction { x: 0.0, y: 1.0, z: 0.0 };
    /// The +z direction.
    pub const Z: Direction = Direction { x: 0.0, y: 0.0, z: 1.0 };

    /// Builds a direction from components that must already be unit length.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, QuantumError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(QuantumError::NotUnit(norm));
        }
        Ok(Direction { x, y, z })
    }

    /// Builds a direction by normalizing an arbitrary nonzero vector.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self, QuantumError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if norm < UNIT_TOL {
            return Err(QuantumError::ZeroVector(norm));
        }
        Ok(Direction { x: x / norm, y: y / norm, z: z / norm })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Components as an array `[x, y, z]`.
    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Euclidean dot product with another direction (the cosine of the angle
    /// between them).
    pub fn dot(&self, other: Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Angle to another direction, in radians, in `[0, pi]`. Exactly zero
    /// for componentwise-equal directions (the self-dot-product of a unit
    /// vector can land one ulp below 1, and acos amplifies that to ~1e-8).
    pub fn angle_to(&self, other: Direction) -> f64 {
        if *self == other {
            return 0.0;
        }
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    /// An orthonormal pair `(u, v)` spanning the tangent plane, so that
    /// `(self, u, v)` is a right-handed frame. Deterministic in the input.
    pub fn tangent_frame(&self) -> (Direction, Direction) {
        // Seed with the coordinate axis least aligned with self, then
        // Gram-Schmidt. The seed axis is never parallel to self, so the
        // projection below has norm >= sqrt(2/3).
        let a = [self.x.abs(), self.y.abs(), self.z.abs()];
        let seed = if a[0] <= a[1] && a[0] <= a[2] {
            [1.0, 0.0, 0.0]
        } else if a[1] <= a[2] {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let d = seed[0] * self.x + seed[1] * self.y + seed[2] * self.z;
        let ux = seed[0] - d * self.x;
        let uy = seed[1] - d * self.y;
        let uz = seed[2] - d * self.z;
        let un = (ux * ux + uy * uy + uz * uz).sqrt();
        let u = Direction { x: ux / un, y: uy / un, z: uz / un };
        // v = self × u is unit because self ⟂ u.
        let v = Direction {
            x: self.y * u.z - self.z * u.y,
            y: self.z * u.x - self.x * u.z,
            z: self.x * u.y - self.y * u.x,
        };
        (u, v)
    }
}

impl Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction { x: -self.x, y: -self.y, z: -self.z }
    }
}

/// An unoriented spin axis: the directions `d` and `-d` name the same axis.
///
/// Internally stored as a canonical representative (first component larger
/// than [`UNIT_TOL`] in magnitude is positive), so equality of axes is plain
/// equality of representatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    representative: Direction,
}

impl Axis {
    /// The x axis.
    pub const X: Axis = Axis { representative: Direction::X };
    /// The y axis.
    pub const Y: Axis = Axis { representative: Direction::Y };
    /// The z axis.
    pub const Z: Axis = Axis { representative: Direction::Z };

    /// Wraps a direction, forgetting its orientation.
    pub fn new(direction: Direction) -> Self {
        let c = direction.components();
        let lead = c.iter().find(|v| v.abs() > UNIT_TOL);
        let flip = matches!(lead, Some(v) if *v < 0.0);
        Axis { representative: if flip { -direction } else { direction } }
    }

    /// The canonical unit vector of this axis.
    pub fn representative(&self) -> Direction {
        self.representative
    }

    /// Angle between two axes, in radians, in `[0, pi/2]`. Exactly zero for
    /// equal axes.
    pub fn angle_to(&self, other: Axis) -> f64 {
        if self.representative == other.representative {
            return 0.0;
        }
        self.representative
            .dot(other.representative)
            .abs()
            .clamp(0.0, 1.0)
            .acos()
    }
}

/// A pure qubit state, i.e. a point on the surface of the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPureState {
    bloch: Direction,
}

impl QubitPureState {
    /// The pure state with the given Bloch vector.
    pub fn new(bloch: Direction) -> Self {
        QubitPureState { bloch }
    }

    /// The spin eigenstate along `axis_direction` with eigenvalue `sign`.
    pub fn along(direction: Direction, sign: Sign) -> Self {
        QubitPureState {
            bloch: match sign {
                Sign::Plus => direction,
                Sign::Minus => -direction,
            },
        }
    }

    /// Bloch vector of the state.
    pub fn bloch(&self) -> Direction {
        self.bloch
    }

    /// The state as a (rank-one) density matrix.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { r: self.bloch.components() }
    }
}

/// A mixed state, stored as its Bloch vector `r` (`|r| <= 1`):
/// `rho = (I + r·sigma)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    r: [f64; 3],
}

impl DensityMatrix {
    /// Builds a density matrix from a Bloch vector with `|r| <= 1`
    /// (up to [`UNIT_TOL`]).
    pub fn new(r: [f64; 3]) -> Result<Self, QuantumError> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + UNIT_TOL {
            return Err(QuantumError::BlochNormTooLarge(norm));
        }
        Ok(DensityMatrix { r })
    }

    /// The maximally mixed state `I/2` (Bloch vector zero).
    pub fn maximally_mixed() -> Self {
        DensityMatrix { r: [0.0; 3] }
    }

    /// The Bloch vector.
    pub fn bloch_vector(&self) -> [f64; 3] {
        self.r
    }

    /// `tr(rho^2) = (1 + |r|^2) / 2`; equals 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        (1.0 + self.r[0] * self.r[0] + self.r[1] * self.r[1] + self.r[2] * self.r[2]) / 2.0
    }

    /// Eigenvalues `((1 + |r|)/2, (1 - |r|)/2)`, largest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let norm = (self.r[0] * self.r[0] + self.r[1] * self.r[1] + self.r[2] * self.r[2]).sqrt();
        ((1.0 + norm) / 2.0, (1.0 - norm) / 2.0)
    }

    /// The 2x2 complex matrix `(I + r·sigma)/2`, row-major.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let [x, y, z] = self.r;
        [
            [
                Complex64::new((1.0 + z) / 2.0, 0.0),
                Complex64::new(x / 2.0, -y / 2.0),
            ],
            [
                Complex64::new(x / 2.0, y / 2.0),
                Complex64::new((1.0 - z) / 2.0, 0.0),
            ],
        ]
    }
}

/// One outcome of a generalized measurement, in Pauli form
/// `E = weight·I + bias·sigma`.
///
/// Positivity (`weight >= |bias|`) is checked at construction; that the
/// effects of a measurement sum to the identity is checked by
/// [`GeneralizedMeasurement::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effect {
    weight: f64,
    bias: [f64; 3],
}

impl Effect {
    /// Builds an effect, rejecting non-positive-semidefinite inputs
    /// (eigenvalues of `E` are `weight ± |bias|`).
    pub fn new(weight: f64, bias: [f64; 3]) -> Result<Self, QuantumError> {
        let bias_norm = (bias[0] * bias[0] + bias[1] * bias[1] + bias[2] * bias[2]).sqrt();
        if weight - bias_norm < -EFFECT_TOL {
            return Err(QuantumError::EffectNotPositive { weight, bias_norm });
        }
        Ok(Effect { weight, bias })
    }

    /// Decomposes a Hermitian 2x2 matrix into Pauli form and validates
    /// positivity.
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Result<Self, QuantumError> {
        let herm_defect = [
            (m[0][0].im).abs(),
            (m[1][1].im).abs(),
            (m[0][1].re - m[1][0].re).abs(),
            (m[0][1].im + m[1][0].im).abs(),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        if herm_defect > EFFECT_TOL {
            return Err(QuantumError::NotHermitian(herm_defect));
        }
        let weight = (m[0][0].re + m[1][1].re) / 2.0;
        let bias = [m[1][0].re, m[1][0].im, (m[0][0].re - m[1][1].re) / 2.0];
        Effect::new(weight, bias)
    }

    /// Coefficient of the identity.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Pauli-vector part.
    pub fn bias(&self) -> [f64; 3] {
        self.bias
    }

    /// The 2x2 complex matrix `weight·I + bias·sigma`, row-major.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let [x, y, z] = self.bias;
        [
            [
                Complex64::new(self.weight + z, 0.0),
                Complex64::new(x, -y),
            ],
            [
                Complex64::new(x, y),
                Complex64::new(self.weight - z, 0.0),
            ],
        ]
    }

    /// Born probability `tr(E·rho) = weight + bias·r`, clamped to `[0, 1]`
    /// to absorb roundoff at the boundary.
    pub fn probability(&self, rho: DensityMatrix) -> f64 {
        let r = rho.bloch_vector();
        let p = self.weight + self.bias[0] * r[0] + self.bias[1] * r[1] + self.bias[2] * r[2];
        p.clamp(0.0, 1.0)
    }
}

/// A generalized (POVM) measurement: positive effects summing to the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMeasurement {
    effects: Vec<Effect>,
}

impl GeneralizedMeasurement {
    /// Validates completeness: effect weights sum to 1 and Pauli parts
    /// cancel, both to within [`EFFECT_TOL`].
    pub fn new(effects: Vec<Effect>) -> Result<Self, QuantumError> {
        if effects.is_empty() {
            return Err(QuantumError::NoEffects);
        }
        let weight_sum: f64 = effects.iter().map(|e| e.weight).sum();
        let mut bias_sum = [0.0f64; 3];
        for e in &effects {
            bias_sum[0] += e.bias[0];
            bias_sum[1] += e.bias[1];
            bias_sum[2] += e.bias[2];
        }
        let bias_norm =
            (bias_sum[0] * bias_sum[0] + bias_sum[1] * bias_sum[1] + bias_sum[2] * bias_sum[2])
                .sqrt();
        if (weight_sum - 1.0).abs() > EFFECT_TOL || bias_norm > EFFECT_TOL {
            return Err(QuantumError::EffectsNotComplete { weight_sum, bias_sum: bias_norm });
        }
        Ok(GeneralizedMeasurement { effects })
    }

    /// The two-effect measurement `{(I ± m·sigma)/2}` of spin along `m`,
    /// outcome order `[+1, -1]`.
    pub fn projective(direction: Direction) -> Self {
        let [x, y, z] = direction.components();
        GeneralizedMeasurement {
            effects: vec![
                Effect { weight: 0.5, bias: [x / 2.0, y / 2.0, z / 2.0] },
                Effect { weight: 0.5, bias: [-x / 2.0, -y / 2.0, -z / 2.0] },
            ],
        }
    }

    /// Draws a random measurement with `outcomes >= 2` effects.
    ///
    /// The first `outcomes - 1` effects get uniformly random Pauli parts and
    /// weights, scaled so the closing effect `I - sum` stays positive; the
    /// result is exactly complete by construction.
    pub fn random<R: Rng + ?Sized>(outcomes: usize, rng: &mut R) -> Self {
        let outcomes = outcomes.max(2);
        let raw: Vec<(f64, [f64; 3])> = (0..outcomes - 1)
            .map(|_| {
                let w: f64 = rng.random::<f64>();
                // Random Pauli part inside the positivity cone: |bias| <= w.
                let frac: f64 = rng.random::<f64>();
                let costh = rng.random_range(-1.0..=1.0f64);
                let sinth = (1.0 - costh * costh).sqrt();
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                let b = w * frac;
                (w, [b * sinth * phi.cos(), b * sinth * phi.sin(), b * costh])
            })
            .collect();
        let weight_sum: f64 = raw.iter().map(|r| r.0).sum();
        let mut bias_sum = [0.0f64; 3];
        for r in &raw {
            bias_sum[0] += r.1[0];
            bias_sum[1] += r.1[1];
            bias_sum[2] += r.1[2];
        }
        let bias_sum_norm =
            (bias_sum[0] * bias_sum[0] + bias_sum[1] * bias_sum[1] + bias_sum[2] * bias_sum[2])
                .sqrt();
        // Shrink so the closing effect I·(1 - s·weight_sum) - s·bias_sum is
        // positive: need 1 - s·weight_sum >= s·|bias_sum|. Halve for margin.
        let scale = 0.5 / (weight_sum + bias_sum_norm).max(1.0);
        let mut effects: Vec<Effect> = raw
            .into_iter()
            .map(|(w, b)| Effect {
                weight: scale * w,
                bias: [scale * b[0], scale * b[1], scale * b[2]],
            })
            .collect();
        effects.push(Effect {
            weight: 1.0 - scale * weight_sum,
            bias: [
                -scale * bias_sum[0],
                -scale * bias_sum[1],
                -scale * bias_sum[2],
            ],
        });
        GeneralizedMeasurement { effects }
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

/// Born rule for a projective spin measurement: `P[+1] = (1 + s·m)/2`,
/// clamped to `[0, 1]` against roundoff.
pub fn born_probability(state: QubitPureState, measurement: Direction) -> f64 {
    ((1.0 + state.bloch().dot(measurement)) / 2.0).clamp(0.0, 1.0)
}

/// Samples one outcome of measuring `state` along `measurement`.
///
/// Draws a single uniform variate and returns `Plus` iff it falls below the
/// Born probability, so aligned states yield `Plus` with certainty and
/// anti-aligned states never do.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: QubitPureState,
    measurement: Direction,
    rng: &mut R,
) -> Sign {
    let p = born_probability(state, measurement);
    // random::<f64>() is uniform on [0, 1): p = 0 can never fire, p = 1
    // always does.
    Sign::from_bool(rng.random::<f64>() < p)
}

/// Density matrix of a statistical mixture of pure states.
///
/// Weights must be nonnegative and sum to one (within [`WEIGHT_TOL`]); the
/// result's Bloch vector is the weighted average of the components'.
pub fn density_of_mixture(
    components: &[(f64, QubitPureState)],
) -> Result<DensityMatrix, QuantumError> {
    let mut total = 0.0f64;
    let mut r = [0.0f64; 3];
    for (w, state) in components {
        if *w < 0.0 {
            return Err(QuantumError::NegativeWeight(*w));
        }
        total += w;
        let b = state.bloch().components();
        r[0] += w * b[0];
        r[1] += w * b[1];
        r[2] += w * b[2];
    }
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(QuantumError::WeightsNotNormalized(total));
    }
    // |r| <= sum of weights = 1 up to roundoff; clamp instead of erroring.
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm > 1.0 {
        for c in &mut r {
            *c /= norm;
        }
    }
    Ok(DensityMatrix { r })
}

/// `P[+1]` when measuring the mixed state `rho` along `measurement`:
/// `(1 + r·m)/2`, clamped to `[0, 1]`.
pub fn outcome_distribution(rho: DensityMatrix, measurement: Direction) -> f64 {
    let r = rho.bloch_vector();
    let m = measurement.components();
    ((1.0 + r[0] * m[0] + r[1] * m[1] + r[2] * m[2]) / 2.0).clamp(0.0, 1.0)
}

/// Outcome probabilities of a generalized measurement on `rho`, one per
/// effect, each clamped to `[0, 1]`. Sums to 1 up to the completeness
/// tolerance of the measurement.
pub fn generalized_distribution(
    rho: DensityMatrix,
    measurement: &GeneralizedMeasurement,
) -> Vec<f64> {
    measurement
        .effects()
        .iter()
        .map(|e| e.probability(rho))
        .collect()
}

/// Trace distance between two qubit density matrices: half the Euclidean
/// distance between their Bloch vectors. Equal Bloch vectors give exactly 0.
pub fn trace_distance(a: DensityMatrix, b: DensityMatrix) -> f64 {
    let ra = a.bloch_vector();
    let rb = b.bloch_vector();
    let dx = ra[0] - rb[0];
    let dy = ra[1] - rb[1];
    let dz = ra[2] - rb[2];
    (dx * dx + dy * dy + dz * dz).sqrt() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn direction_rejects_non_unit() {
        assert!(matches!(
            Direction::new(1.0, 1.0, 0.0),
            Err(QuantumError::NotUnit(_))
        ));
        assert!(Direction::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0).is_ok());
        assert!(matches!(
            Direction::normalized(0.0, 0.0, 0.0),
            Err(QuantumError::ZeroVector(_))
        ));
    }

    #[test]
    fn direction_normalizes() {
        let d = Direction::normalized(0.0, 0.0, -3.5).unwrap();
        assert_eq!(d.components(), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn axis_identifies_antipodes() {
        let up = Axis::new(Direction::Z);
        let down = Axis::new(-Direction::Z);
        assert_eq!(up, down);
        assert_eq!(up.representative().components(), [0.0, 0.0, 1.0]);
        // Leading negative component gets flipped even when a later one is
        // positive.
        let tilted = Direction::normalized(-1.0, 0.0, 1.0).unwrap();
        let axis = Axis::new(tilted);
        assert!(axis.representative().x() > 0.0);
        assert!(axis.representative().z() < 0.0);
    }

    #[test]
    fn axis_angle_folds_to_quarter_turn() {
        let z = Axis::Z;
        let x = Axis::X;
        assert!((z.angle_to(x) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // 170 degrees between directions is 10 degrees between axes.
        let theta: f64 = 170f64.to_radians();
        let d = Direction::new(theta.sin(), 0.0, theta.cos()).unwrap();
        let expected = 10f64.to_radians();
        assert!((Axis::new(d).angle_to(z) - expected).abs() < 1e-12);
        assert_eq!(z.angle_to(z), 0.0);
    }

    #[test]
    fn born_probability_matches_half_angle_law() {
        let plus_z = QubitPureState::new(Direction::Z);
        assert_eq!(born_probability(plus_z, Direction::Z), 1.0);
        assert_eq!(born_probability(plus_z, -Direction::Z), 0.0);
        assert_eq!(born_probability(plus_z, Direction::X), 0.5);
        // 60 degrees off axis: (1 + cos 60°)/2 = 0.75.
        let m = Direction::new(0.75f64.sqrt(), 0.0, 0.5).unwrap();
        assert!((born_probability(plus_z, m) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_exact_at_boundary_probabilities() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let plus_z = QubitPureState::new(Direction::Z);
        for _ in 0..200 {
            assert_eq!(sample_outcome(plus_z, Direction::Z, &mut rng), Sign::Plus);
            assert_eq!(sample_outcome(plus_z, -Direction::Z, &mut rng), Sign::Minus);
        }
    }

    #[test]
    fn sampling_frequency_tracks_born_probability() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let state = QubitPureState::new(Direction::Z);
        let m = Direction::new(0.75f64.sqrt(), 0.0, 0.5).unwrap();
        let n = 100_000;
        let plus = (0..n)
            .filter(|_| sample_outcome(state, m, &mut rng) == Sign::Plus)
            .count();
        let freq = plus as f64 / n as f64;
        // 3 sigma around p = 0.75.
        let sigma = (0.75 * 0.25 / n as f64).sqrt();
        assert!((freq - 0.75).abs() < 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn equal_mixture_of_opposites_is_maximally_mixed() {
        let up = QubitPureState::new(Direction::Z);
        let down = QubitPureState::new(-Direction::Z);
        let rho = density_of_mixture(&[(0.5, up), (0.5, down)]).unwrap();
        assert_eq!(rho.bloch_vector(), [0.0, 0.0, 0.0]);
        assert_eq!(rho, DensityMatrix::maximally_mixed());
        // Same for x: the two ensembles are the same density matrix.
        let left = QubitPureState::new(Direction::X);
        let right = QubitPureState::new(-Direction::X);
        let rho_x = density_of_mixture(&[(0.5, left), (0.5, right)]).unwrap();
        assert_eq!(trace_distance(rho, rho_x), 0.0);
    }

    #[test]
    fn mixture_validates_weights() {
        let up = QubitPureState::new(Direction::Z);
        assert!(matches!(
            density_of_mixture(&[(0.3, up), (0.3, up)]),
            Err(QuantumError::WeightsNotNormalized(_))
        ));
        assert!(matches!(
            density_of_mixture(&[(-0.5, up), (1.5, up)]),
            Err(QuantumError::NegativeWeight(_))
        ));
    }

    #[test]
    fn biased_mixture_shrinks_bloch_vector() {
        let up = QubitPureState::new(Direction::Z);
        let down = QubitPureState::new(-Direction::Z);
        let rho = density_of_mixture(&[(0.8, up), (0.2, down)]).unwrap();
        let r = rho.bloch_vector();
        assert!((r[2] - 0.6).abs() < 1e-15);
        assert!((rho.purity() - (1.0 + 0.36) / 2.0).abs() < 1e-15);
        let (hi, lo) = rho.eigenvalues();
        assert!((hi - 0.8).abs() < 1e-15);
        assert!((lo - 0.2).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_entries_match_pauli_expansion() {
        let rho = DensityMatrix::new([0.3, -0.4, 0.5]).unwrap();
        let m = rho.matrix();
        assert!((m[0][0].re - 0.75).abs() < 1e-15);
        assert!((m[1][1].re - 0.25).abs() < 1e-15);
        assert!((m[0][1] - Complex64::new(0.15, 0.2)).norm() < 1e-15);
        assert!((m[1][0] - Complex64::new(0.15, -0.2)).norm() < 1e-15);
        // trace 1, Hermitian by construction.
        assert!((m[0][0].re + m[1][1].re - 1.0).abs() < 1e-15);
        assert!(DensityMatrix::new([0.8, 0.8, 0.0]).is_err());
    }

    #[test]
    fn outcome_distribution_interpolates_with_mixedness() {
        let rho = DensityMatrix::new([0.0, 0.0, 0.6]).unwrap();
        assert!((outcome_distribution(rho, Direction::Z) - 0.8).abs() < 1e-15);
        assert_eq!(
            outcome_distribution(DensityMatrix::maximally_mixed(), Direction::X),
            0.5
        );
    }

    #[test]
    fn effect_positivity_is_enforced() {
        assert!(Effect::new(0.5, [0.0, 0.0, 0.5]).is_ok());
        assert!(matches!(
            Effect::new(0.3, [0.0, 0.0, 0.5]),
            Err(QuantumError::EffectNotPositive { .. })
        ));
    }

    #[test]
    fn effect_matrix_roundtrip() {
        let e = Effect::new(0.4, [0.1, -0.2, 0.3]).unwrap();
        let back = Effect::from_matrix(e.matrix()).unwrap();
        assert!((back.weight() - 0.4).abs() < 1e-15);
        let b = back.bias();
        assert!((b[0] - 0.1).abs() < 1e-15);
        assert!((b[1] + 0.2).abs() < 1e-15);
        assert!((b[2] - 0.3).abs() < 1e-15);
        // Non-Hermitian input is rejected.
        let mut m = e.matrix();
        m[0][1] += Complex64::new(0.0, 0.5);
        assert!(matches!(
            Effect::from_matrix(m),
            Err(QuantumError::NotHermitian(_))
        ));
    }

    #[test]
    fn projective_measurement_is_complete_and_matches_born() {
        let m = GeneralizedMeasurement::projective(Direction::X);
        assert_eq!(m.len(), 2);
        let rho = QubitPureState::new(Direction::Z).density();
        let p = generalized_distribution(rho, &m);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
        let aligned = QubitPureState::new(Direction::X).density();
        let q = generalized_distribution(aligned, &m);
        assert!((q[0] - 1.0).abs() < 1e-15);
        assert!(q[1].abs() < 1e-15);
    }

    #[test]
    fn incomplete_effects_are_rejected() {
        let half = Effect::new(0.5, [0.0, 0.0, 0.25]).unwrap();
        assert!(matches!(
            GeneralizedMeasurement::new(vec![half, half]),
            Err(QuantumError::EffectsNotComplete { .. })
        ));
        let other = Effect::new(0.5, [0.0, 0.0, -0.25]).unwrap();
        assert!(GeneralizedMeasurement::new(vec![half, other]).is_ok());
        assert!(matches!(
            GeneralizedMeasurement::new(vec![]),
            Err(QuantumError::NoEffects)
        ));
    }

    #[test]
    fn random_measurements_are_valid_and_sum_to_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let rho = DensityMatrix::new([0.2, 0.1, -0.7]).unwrap();
        for outcomes in [2usize, 3, 5, 8] {
            for _ in 0..50 {
                let m = GeneralizedMeasurement::random(outcomes, &mut rng);
                assert_eq!(m.len(), outcomes);
                // Re-validate through the checking constructor.
                let checked = GeneralizedMeasurement::new(m.effects().to_vec());
                assert!(checked.is_ok());
                let p = generalized_distribution(rho, &m);
                let total: f64 = p.iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "total {total}");
                assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }
    }

    #[test]
    fn trace_distance_is_half_bloch_distance() {
        let up = QubitPureState::new(Direction::Z).density();
        let down = QubitPureState::new(-Direction::Z).density();
        assert_eq!(trace_distance(up, down), 1.0);
        let x = QubitPureState::new(Direction::X).density();
        assert!((trace_distance(up, x) - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(trace_distance(up, up), 0.0);
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let costh = rng.random_range(-1.0..=1.0f64);
            let sinth = (1.0 - costh * costh).sqrt();
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let d =
                Direction::new(sinth * phi.cos(), sinth * phi.sin(), costh).unwrap();
            let (u, v) = d.tangent_frame();
            assert!(d.dot(u).abs() < 1e-12);
            assert!(d.dot(v).abs() < 1e-12);
            assert!(u.dot(v).abs() < 1e-12);
            let vn = v.components();
            assert!((vn[0] * vn[0] + vn[1] * vn[1] + vn[2] * vn[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_algebra() {
        assert_eq!(-Sign::Plus, Sign::Minus);
        assert_eq!(Sign::Plus.compose(Sign::Minus), Sign::Minus);
        assert_eq!(Sign::Minus.compose(Sign::Minus), Sign::Plus);
        assert_eq!(Sign::Minus.value(), -1);
        assert_eq!(format!("{}{}", Sign::Plus, Sign::Minus), "+-");
    }
}

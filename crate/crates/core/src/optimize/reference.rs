use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::TrajectoryDataset;
use crate::dynamics::ThreeBody;
use crate::error::Result;
use crate::solvers::Solver;
use crate::vector::{ParameterVector, StateVector};

/// Masses of the reference system in solar masses.
pub const REFERENCE_MASSES: [f64; 3] = [1.0, 2.0, 3.0];

/// Gravitational constant of the reference system (N-body units).
///
/// With `G = 4π²` (AU, years, solar masses) bodies starting in a unit box complete several orbits
/// per year, and the fitting loss in the masses becomes too multimodal to fit from a distant start.
pub const REFERENCE_G: f64 = 1.0;

/// Seed of the committed reference initial condition.
pub const REFERENCE_SEED: u64 = 7;

/// The committed reference trajectory: 2001 samples, `t = k / 1000` years for `k = 0..=2000`.
pub const REFERENCE_FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/three_body_reference.csv"
);

/// Standard deviation of the random velocity perturbation, AU / year.
const VELOCITY_SCALE: f64 = 0.2;

/// Fraction of the circular-orbit angular velocity given to the initial rigid rotation.
const ROTATION_FACTOR: f64 = 0.5;

fn recentre(block: &mut [f64], masses: &[f64; 3]) {
    let total: f64 = masses.iter().sum();
    for axis in 0..3 {
        let centre: f64 = (0..3).map(|b| masses[b] * block[3 * b + axis]).sum::<f64>() / total;
        for b in 0..3 {
            block[3 * b + axis] -= centre;
        }
    }
}

/// A three-body system with known masses, used to generate training data.
#[derive(Clone, Debug)]
pub struct ReferenceSystem {
    pub dynamics: ThreeBody,
    pub initial_state: StateVector,
    pub masses: ParameterVector,
}

impl ReferenceSystem {
    /// Positions uniform in a unit box, shifted to the centre-of-mass frame, moving with a rigid
    /// rotation about the z axis at roughly circular-orbit speed plus a small Gaussian velocity
    /// perturbation (removed again from the centre of mass).
    pub fn from_seed(seed: u64) -> Self {
        let masses = REFERENCE_MASSES;
        let total: f64 = masses.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, VELOCITY_SCALE).expect("valid sigma");
        let mut z = vec![0.0; 18];
        for x in &mut z[..9] {
            *x = rng.random_range(-0.5..0.5);
        }
        for v in &mut z[9..] {
            *v = normal.sample(&mut rng);
        }
        recentre(&mut z[..9], &masses);
        let spread = (0..3)
            .map(|b| masses[b] * (z[3 * b].powi(2) + z[3 * b + 1].powi(2)))
            .sum::<f64>()
            / total;
        let omega = (REFERENCE_G * total / spread.sqrt().powi(3)).sqrt() * ROTATION_FACTOR;
        for b in 0..3 {
            z[9 + 3 * b] -= omega * z[3 * b + 1];
            z[9 + 3 * b + 1] += omega * z[3 * b];
        }
        recentre(&mut z[9..], &masses);
        Self {
            dynamics: ThreeBody::new(REFERENCE_G),
            initial_state: StateVector::from_trusted(z),
            masses: ParameterVector::from_trusted(masses.to_vec()),
        }
    }

    pub fn canonical() -> Self {
        Self::from_seed(REFERENCE_SEED)
    }

    /// `k / per_year` for `k = 0..=years·per_year`.
    pub fn sample_times(per_year: usize, years: usize) -> Vec<f64> {
        (0..=per_year * years)
            .map(|k| k as f64 / per_year as f64)
            .collect()
    }

    /// The solver used for ground truth: Dormand–Prince at `rtol = atol = 1e-10`.
    pub fn generation_solver() -> Solver {
        Solver::dopri5(1e-10)
    }

    /// Integrates segment by segment between consecutive sample times.
    pub fn generate(&self, times: &[f64], solver: &Solver) -> Result<TrajectoryDataset> {
        let mut states = vec![self.initial_state.clone()];
        for w in times.windows(2) {
            let prev = states.last().expect("initial state present");
            let (z, _) = solver.integrate(&self.dynamics, prev, &self.masses, w[0], w[1])?;
            states.push(z);
        }
        TrajectoryDataset::new(times.to_vec(), states)
    }

    /// Regenerates the committed fixture's contents.
    pub fn reference_dataset() -> Result<TrajectoryDataset> {
        Self::canonical().generate(&Self::sample_times(1000, 2), &Self::generation_solver())
    }

    pub fn load_fixture() -> Result<TrajectoryDataset> {
        TrajectoryDataset::load(REFERENCE_FIXTURE)
    }
}

//! Phase-space algebra of canonical type: per-particle noncommutativity
//! parameters and the antisymmetric structure matrix they generate.
//!
//! Each particle lives in a 4-dimensional phase space `(x1, x2, p1, p2)`
//! with brackets `{x1, x2} = theta`, `{x_i, p_j} = delta_ij` and
//! `{p1, p2} = eta`. Brackets between different particles vanish. Units are
//! dimensionless with hbar = 1; `theta` and `eta` may carry either sign.

use crate::error::{Error, Result};

/// Number of phase-space components per particle: `(x1, x2, p1, p2)`.
pub const COMPONENTS_PER_PARTICLE: usize = 4;

/// Flat index of `x1` for particle `a`.
#[inline]
pub const fn x1_index(a: usize) -> usize {
    COMPONENTS_PER_PARTICLE * a
}

/// Flat index of `x2` for particle `a`.
#[inline]
pub const fn x2_index(a: usize) -> usize {
    COMPONENTS_PER_PARTICLE * a + 1
}

/// Flat index of `p1` for particle `a`.
#[inline]
pub const fn p1_index(a: usize) -> usize {
    COMPONENTS_PER_PARTICLE * a + 2
}

/// Flat index of `p2` for particle `a`.
#[inline]
pub const fn p2_index(a: usize) -> usize {
    COMPONENTS_PER_PARTICLE * a + 3
}

/// A point particle together with the noncommutativity parameters of the
/// phase-space algebra it satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    mass: f64,
    theta: f64,
    eta: f64,
}

impl Particle {
    /// Creates a particle of mass `mass` whose coordinates and momenta obey
    /// `{x1, x2} = theta` and `{p1, p2} = eta`.
    pub fn new(mass: f64, theta: f64, eta: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidMass(mass));
        }
        if !theta.is_finite() {
            return Err(Error::NonFiniteInput {
                name: "theta",
                value: theta,
            });
        }
        if !eta.is_finite() {
            return Err(Error::NonFiniteInput {
                name: "eta",
                value: eta,
            });
        }
        Ok(Self { mass, theta, eta })
    }

    /// A particle in ordinary (commutative) phase space.
    pub fn commutative(mass: f64) -> Result<Self> {
        Self::new(mass, 0.0, 0.0)
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        self.mass
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Momentum rotation frequency `eta / mass`.
    #[inline]
    pub fn omega(&self) -> f64 {
        self.eta / self.mass
    }
}

/// Full phase point of an N-particle system at a given time.
///
/// Coordinates are stored flat, `(x1, x2, p1, p2)` per particle, so the
/// vector has length `4 N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    time: f64,
    coords: Vec<f64>,
}

impl SystemState {
    /// Builds a state from a flat phase vector. The vector length must be a
    /// positive multiple of 4 and every entry finite.
    pub fn new(time: f64, coords: Vec<f64>) -> Result<Self> {
        if !time.is_finite() {
            return Err(Error::NonFiniteInput {
                name: "time",
                value: time,
            });
        }
        if coords.is_empty() || !coords.len().is_multiple_of(COMPONENTS_PER_PARTICLE) {
            return Err(Error::BadPhaseVectorLength(coords.len()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteValue {
                context: "phase vector",
                index: i,
            });
        }
        Ok(Self { time, coords })
    }

    /// Builds a state from per-particle tuples `(x1, x2, p1, p2)`.
    pub fn from_parts(time: f64, parts: &[[f64; 4]]) -> Result<Self> {
        let coords = parts.iter().flatten().copied().collect();
        Self::new(time, coords)
    }

    /// Internal constructor that skips the finiteness scan. Callers must
    /// guarantee validity.
    pub(crate) fn unchecked(time: f64, coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.len().is_multiple_of(COMPONENTS_PER_PARTICLE));
        Self { time, coords }
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    pub fn n_particles(&self) -> usize {
        self.coords.len() / COMPONENTS_PER_PARTICLE
    }

    /// Phase-space dimension `4 N`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn x1(&self, a: usize) -> f64 {
        self.coords[x1_index(a)]
    }

    #[inline]
    pub fn x2(&self, a: usize) -> f64 {
        self.coords[x2_index(a)]
    }

    #[inline]
    pub fn p1(&self, a: usize) -> f64 {
        self.coords[p1_index(a)]
    }

    #[inline]
    pub fn p2(&self, a: usize) -> f64 {
        self.coords[p2_index(a)]
    }
}

/// Antisymmetric matrix of pairwise brackets of the flat phase variables,
/// `omega[i][j] = {z_i, z_j}`. Generates dynamics through `zdot = omega * grad H`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrix {
    particles: Vec<Particle>,
    entries: Vec<f64>,
}

impl StructureMatrix {
    /// Assembles the structure matrix for a list of particles.
    ///
    /// The matrix is block diagonal over particles; the 4x4 block of
    /// particle `a` reads, in the order `(x1, x2, p1, p2)`:
    ///
    /// ```text
    ///  0      theta_a   1       0
    /// -theta_a  0       0       1
    /// -1        0       0     eta_a
    ///  0       -1    -eta_a     0
    /// ```
    pub fn build(particles: &[Particle]) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::EmptyParticleList);
        }
        let dim = COMPONENTS_PER_PARTICLE * particles.len();
        let mut entries = vec![0.0; dim * dim];
        let mut set = |i: usize, j: usize, v: f64| {
            entries[i * dim + j] = v;
            entries[j * dim + i] = -v;
        };
        for (a, p) in particles.iter().enumerate() {
            set(x1_index(a), x2_index(a), p.theta());
            set(x1_index(a), p1_index(a), 1.0);
            set(x2_index(a), p2_index(a), 1.0);
            set(p1_index(a), p2_index(a), p.eta());
        }
        Ok(Self {
            particles: particles.to_vec(),
            entries,
        })
    }

    #[inline]
    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        COMPONENTS_PER_PARTICLE * self.particles.len()
    }

    #[inline]
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    /// Bracket `{z_i, z_j}` of the i-th and j-th flat phase variables.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    /// Matrix-vector product `omega * v`, exploiting the block-diagonal
    /// structure.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "structure matrix apply",
                expected: self.dim(),
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        for (a, p) in self.particles.iter().enumerate() {
            let (theta, eta) = (p.theta(), p.eta());
            let (ix1, ix2, ip1, ip2) = (x1_index(a), x2_index(a), p1_index(a), p2_index(a));
            out[ix1] = theta * v[ix2] + v[ip1];
            out[ix2] = -theta * v[ix1] + v[ip2];
            out[ip1] = -v[ix1] + eta * v[ip2];
            out[ip2] = -v[ix2] - eta * v[ip1];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn particle_rejects_bad_mass() {
        assert!(matches!(
            Particle::new(0.0, 0.0, 0.0),
            Err(Error::InvalidMass(_))
        ));
        assert!(matches!(
            Particle::new(-1.0, 0.0, 0.0),
            Err(Error::InvalidMass(_))
        ));
        assert!(Particle::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn particle_accepts_negative_parameters() {
        let p = Particle::new(2.0, -0.3, -0.7).unwrap();
        assert_eq!(p.theta(), -0.3);
        assert_eq!(p.eta(), -0.7);
    }

    #[test]
    fn state_layout_and_accessors() {
        let s =
            SystemState::from_parts(0.5, &[[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]]).unwrap();
        assert_eq!(s.n_particles(), 2);
        assert_eq!(s.dim(), 8);
        assert_eq!(s.x1(0), 1.0);
        assert_eq!(s.x2(0), 2.0);
        assert_eq!(s.p1(0), 3.0);
        assert_eq!(s.p2(0), 4.0);
        assert_eq!(s.x1(1), 5.0);
        assert_eq!(s.p2(1), 8.0);
    }

    #[test]
    fn state_rejects_non_finite_entries() {
        let err = SystemState::new(0.0, vec![0.0, 1.0, f64::INFINITY, 2.0]).unwrap_err();
        assert_eq!(
            err,
            Error::NonFiniteValue {
                context: "phase vector",
                index: 2
            }
        );
    }

    #[test]
    fn state_rejects_bad_length() {
        assert!(SystemState::new(0.0, vec![]).is_err());
        assert!(SystemState::new(0.0, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn commutative_limit_is_the_canonical_symplectic_block() {
        let p = Particle::commutative(1.0).unwrap();
        let omega = StructureMatrix::build(&[p]).unwrap();
        // {x1,p1} = {x2,p2} = 1, every other independent bracket 0.
        assert_eq!(omega.get(x1_index(0), p1_index(0)), 1.0);
        assert_eq!(omega.get(x2_index(0), p2_index(0)), 1.0);
        assert_eq!(omega.get(x1_index(0), x2_index(0)), 0.0);
        assert_eq!(omega.get(p1_index(0), p2_index(0)), 0.0);
        assert_eq!(omega.get(x1_index(0), p2_index(0)), 0.0);
        assert_eq!(omega.get(x2_index(0), p1_index(0)), 0.0);
    }

    #[test]
    fn deformed_single_particle_block() {
        let p = Particle::new(1.0, 0.3, 0.2).unwrap();
        let omega = StructureMatrix::build(&[p]).unwrap();
        assert_eq!(omega.get(x1_index(0), x2_index(0)), 0.3);
        assert_eq!(omega.get(p1_index(0), p2_index(0)), 0.2);
        assert_eq!(omega.get(x1_index(0), p1_index(0)), 1.0);
        assert_eq!(omega.get(x2_index(0), p2_index(0)), 1.0);
        assert_eq!(omega.get(x1_index(0), p2_index(0)), 0.0);
    }

    #[test]
    fn two_particle_blocks_do_not_couple() {
        let pa = Particle::new(1.0, 0.4, 0.1).unwrap();
        let pb = Particle::new(2.0, -0.2, 0.5).unwrap();
        let omega = StructureMatrix::build(&[pa, pb]).unwrap();
        assert_eq!(omega.dim(), 8);
        for i in 0..4 {
            for j in 4..8 {
                assert_eq!(omega.get(i, j), 0.0);
                assert_eq!(omega.get(j, i), 0.0);
            }
        }
        assert_eq!(omega.get(x1_index(1), x2_index(1)), -0.2);
        assert_eq!(omega.get(p1_index(1), p2_index(1)), 0.5);
    }

    #[test]
    fn antisymmetry_is_exact_by_construction() {
        let particles = [
            Particle::new(0.7, 0.9, -0.4).unwrap(),
            Particle::new(3.0, -1.0, 1.0).unwrap(),
            Particle::new(1.5, 0.0, 0.25).unwrap(),
        ];
        let omega = StructureMatrix::build(&particles).unwrap();
        for i in 0..omega.dim() {
            for j in 0..omega.dim() {
                assert_eq!(omega.get(i, j), -omega.get(j, i));
            }
        }
    }

    #[test]
    fn empty_particle_list_is_a_configuration_error() {
        assert_eq!(
            StructureMatrix::build(&[]).unwrap_err(),
            Error::EmptyParticleList
        );
    }

    #[test]
    fn apply_matches_dense_product() {
        let particles = [
            Particle::new(1.0, 0.3, 0.2).unwrap(),
            Particle::new(2.0, -0.1, 0.7).unwrap(),
        ];
        let omega = StructureMatrix::build(&particles).unwrap();
        let v: Vec<f64> = (0..8).map(|i| (i as f64) * 0.5 - 1.0).collect();
        let fast = omega.apply(&v).unwrap();
        for (i, entry) in fast.iter().enumerate() {
            let dense: f64 = (0..8).map(|j| omega.get(i, j) * v[j]).sum();
            assert!((entry - dense).abs() < 1e-15);
        }
    }
}

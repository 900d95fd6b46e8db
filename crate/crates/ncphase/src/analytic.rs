//! Closed-form free-particle motion.
//!
//! Momentum noncommutativity turns the free momentum flow into a rotation at
//! frequency `omega = eta / m`, so velocities rotate and positions trace
//! circular arcs:
//!
//! ```text
//! x1(t) = x01 + t (v01 s(u) + v02 q(u))        u = eta t / m
//! x2(t) = x02 + t (v02 s(u) - v01 q(u))
//! v1(t) = v01 cos u + v02 sin u
//! v2(t) = v02 cos u - v01 sin u
//! ```
//!
//! with the kernels `s(u) = sin(u)/u` and `q(u) = (1 - cos u)/u`. The kernels
//! make `eta = 0` an ordinary input: `s(0) = 1`, `q(0) = 0` give the straight
//! line `x = x0 + v0 t` exactly.

use crate::algebra::Particle;
use crate::error::{Error, Result};

/// Below this argument the kernels switch to their Taylor forms.
const KERNEL_TAYLOR_CUTOFF: f64 = 1e-4;

/// `sin(u) / u`, continuous at zero.
pub fn sinc_kernel(u: f64) -> f64 {
    if u.abs() < KERNEL_TAYLOR_CUTOFF {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// `(1 - cos(u)) / u`, continuous at zero.
pub fn versine_kernel(u: f64) -> f64 {
    if u.abs() < KERNEL_TAYLOR_CUTOFF {
        let u2 = u * u;
        u / 2.0 - u * u2 / 24.0
    } else {
        (1.0 - u.cos()) / u
    }
}

/// Initial conditions for a single free particle: mass, momentum
/// noncommutativity parameter, initial position and initial velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParticleIc {
    mass: f64,
    eta: f64,
    x0: [f64; 2],
    v0: [f64; 2],
}

impl FreeParticleIc {
    pub fn new(mass: f64, eta: f64, x0: [f64; 2], v0: [f64; 2]) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidMass(mass));
        }
        for (name, v) in [
            ("eta", eta),
            ("x01", x0[0]),
            ("x02", x0[1]),
            ("v01", v0[0]),
            ("v02", v0[1]),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFiniteInput { name, value: v });
            }
        }
        Ok(Self { mass, eta, x0, v0 })
    }

    /// Initial conditions matching a particle's parameters.
    pub fn for_particle(p: &Particle, x0: [f64; 2], v0: [f64; 2]) -> Result<Self> {
        Self::new(p.mass(), p.eta(), x0, v0)
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        self.mass
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    pub fn x0(&self) -> [f64; 2] {
        self.x0
    }

    #[inline]
    pub fn v0(&self) -> [f64; 2] {
        self.v0
    }

    /// Momentum rotation frequency `eta / m`.
    #[inline]
    pub fn omega(&self) -> f64 {
        self.eta / self.mass
    }
}

/// Position and velocity of a free particle at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParticlePoint {
    pub x: [f64; 2],
    pub v: [f64; 2],
}

impl FreeParticlePoint {
    /// Momenta `p_i = m v_i` of the free particle.
    pub fn momenta(&self, mass: f64) -> [f64; 2] {
        [mass * self.v[0], mass * self.v[1]]
    }
}

/// Exact free-particle state at time `t`. Valid for any real `t`, either
/// sign of `eta`, and stable through `eta = 0`.
pub fn free_particle_state(ic: &FreeParticleIc, t: f64) -> FreeParticlePoint {
    let u = ic.omega() * t;
    let (s, q) = (sinc_kernel(u), versine_kernel(u));
    let [x01, x02] = ic.x0;
    let [v01, v02] = ic.v0;
    let (cu, su) = (u.cos(), u.sin());
    FreeParticlePoint {
        x: [x01 + t * (v01 * s + v02 * q), x02 + t * (v02 * s - v01 * q)],
        v: [v01 * cu + v02 * su, v02 * cu - v01 * su],
    }
}

/// Velocities at time `t` of free particles that shared the initial
/// velocity `v0`. Particle `a` rotates at its own frequency
/// `omega_a = eta_a / m_a`.
pub fn system_velocities(particles: &[Particle], v0: [f64; 2], t: f64) -> Vec<[f64; 2]> {
    particles
        .iter()
        .map(|p| {
            let u = p.omega() * t;
            let (cu, su) = (u.cos(), u.sin());
            [v0[0] * cu + v0[1] * su, v0[1] * cu - v0[0] * su]
        })
        .collect()
}

/// Center-of-mass position at time `t` for free particles with common
/// initial velocity `v0` and per-particle initial positions `x0`.
///
/// Implements the mass-weighted sum of the closed forms directly:
/// `cm_i(t) = sum_a mu_a [x0_i^(a) + t (v s(u_a) +/- v q(u_a))]`.
pub fn cm_trajectory(particles: &[Particle], v0: [f64; 2], x0: &[[f64; 2]], t: f64) -> [f64; 2] {
    assert!(!particles.is_empty(), "cm_trajectory needs particles");
    assert_eq!(
        particles.len(),
        x0.len(),
        "one initial position per particle"
    );
    let total_mass: f64 = particles.iter().map(Particle::mass).sum();
    let mut cm = [0.0, 0.0];
    for (p, x0a) in particles.iter().zip(x0.iter()) {
        let mu = p.mass() / total_mass;
        let u = p.omega() * t;
        let (s, q) = (sinc_kernel(u), versine_kernel(u));
        cm[0] += mu * (x0a[0] + t * (v0[0] * s + v0[1] * q));
        cm[1] += mu * (x0a[1] + t * (v0[1] * s - v0[0] * q));
    }
    cm
}

/// Relative coordinates `x^(a)(t) - cm(t)` of particle `a` under the common
/// initial velocity scenario.
pub fn relative_trajectory(
    particles: &[Particle],
    v0: [f64; 2],
    x0: &[[f64; 2]],
    a: usize,
    t: f64,
) -> [f64; 2] {
    assert!(a < particles.len(), "particle index out of range");
    let ic = FreeParticleIc::new(particles[a].mass(), particles[a].eta(), x0[a], v0)
        .expect("particle parameters are validated at construction");
    let own = free_particle_state(&ic, t).x;
    let cm = cm_trajectory(particles, v0, x0, t);
    [own[0] - cm[0], own[1] - cm[1]]
}

/// Trajectory of any free particle when every particle satisfies
/// `eta_a / m_a = alpha`: the motion is mass-independent.
pub fn common_motion_trajectory(alpha: f64, v0: [f64; 2], x0: [f64; 2], t: f64) -> [f64; 2] {
    let u = alpha * t;
    let (s, q) = (sinc_kernel(u), versine_kernel(u));
    [
        x0[0] + t * (v0[0] * s + v0[1] * q),
        x0[1] + t * (v0[1] * s - v0[0] * q),
    ]
}

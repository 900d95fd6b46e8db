//! Hamiltonians and fixed-step time evolution under the deformed bracket.
//!
//! The flow is `dz/dt = Omega grad H(z)` with `Omega` the structure matrix of
//! the deformed algebra. Two integrators are provided: classical RK4 and the
//! implicit midpoint rule, which preserves quadratic invariants of linear
//! flows up to its stage-solve tolerance. Every run records conserved-quantity
//! monitors (Hamiltonian, total momenta, primed total momenta) at each step.

use crate::algebra::{
    p1_index, p2_index, x1_index, x2_index, Particle, StructureMatrix, SystemState,
};
use crate::composite::primed_momenta;
use crate::error::{Error, Result};
use crate::observable::Observable;

/// Central pairwise potential; enters a Hamiltonian as
/// `U = sum over pairs a < b of u(|x^(a) - x^(b)|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// `u(r) = k r^2 / 2`
    Harmonic { k: f64 },
    /// `u(r) = coeff r^power`
    PowerLaw { coeff: f64, power: f64 },
}

impl Potential {
    fn validate(&self) -> Result<()> {
        let checks: &[(&'static str, f64)] = match self {
            Potential::Harmonic { k } => &[("spring constant", *k)],
            Potential::PowerLaw { coeff, power } => &[
                ("power-law coefficient", *coeff),
                ("power-law exponent", *power),
            ],
        };
        for &(name, v) in checks {
            if !v.is_finite() {
                return Err(Error::NonFiniteInput { name, value: v });
            }
        }
        Ok(())
    }

    fn energy(&self, r: f64) -> f64 {
        match *self {
            Potential::Harmonic { k } => 0.5 * k * r * r,
            Potential::PowerLaw { coeff, power } => coeff * r.powf(power),
        }
    }

    /// `u'(r) / r`, the factor multiplying `x^(a) - x^(b)` in the gradient.
    fn force_factor(&self, r: f64) -> f64 {
        match *self {
            Potential::Harmonic { k } => k,
            Potential::PowerLaw { coeff, power } => coeff * power * r.powf(power - 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Free {
        masses: Vec<f64>,
    },
    Pairwise {
        masses: Vec<f64>,
        potential: Potential,
    },
    Magnetic {
        mass: f64,
        theta: f64,
        eta: f64,
        field_strength: f64,
    },
}

/// Generator of the time evolution.
///
/// Three families are supported: the free N-particle Hamiltonian
/// `sum_a (p1_a^2 + p2_a^2) / (2 m_a)`, the same kinetic term plus a pairwise
/// central potential, and the single-particle magnetic form
/// `((p1 + b x2)^2 + (p2 - b x1)^2) / (2 m)` whose coordinates are read as
/// the primed variables of a noncommutative particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    kind: Kind,
}

impl Hamiltonian {
    pub fn free(masses: Vec<f64>) -> Result<Self> {
        validate_masses(&masses)?;
        Ok(Self {
            kind: Kind::Free { masses },
        })
    }

    /// Free Hamiltonian with the masses of the given particles.
    pub fn free_for(particles: &[Particle]) -> Result<Self> {
        Self::free(particles.iter().map(Particle::mass).collect())
    }

    pub fn pairwise(masses: Vec<f64>, potential: Potential) -> Result<Self> {
        validate_masses(&masses)?;
        potential.validate()?;
        Ok(Self {
            kind: Kind::Pairwise { masses, potential },
        })
    }

    /// Constructed through the magnetic-equivalence builder, which derives
    /// `field_strength` from the noncommutativity parameters.
    pub(crate) fn magnetic(mass: f64, theta: f64, eta: f64, field_strength: f64) -> Self {
        Self {
            kind: Kind::Magnetic {
                mass,
                theta,
                eta,
                field_strength,
            },
        }
    }

    /// Label of the Hamiltonian family, used in reports.
    pub fn kind(&self) -> &'static str {
        match &self.kind {
            Kind::Free { masses } if masses.len() == 1 => "free_single",
            Kind::Free { .. } => "free_system",
            Kind::Pairwise { .. } => "pairwise_potential",
            Kind::Magnetic { .. } => "magnetic_equivalent",
        }
    }

    /// True for the purely kinetic Hamiltonian (either particle count).
    pub fn is_free(&self) -> bool {
        matches!(self.kind, Kind::Free { .. })
    }

    pub fn n_particles(&self) -> usize {
        match &self.kind {
            Kind::Free { masses } | Kind::Pairwise { masses, .. } => masses.len(),
            Kind::Magnetic { .. } => 1,
        }
    }

    /// Effective magnetic field strength `eta (1 - eta theta)`, present only
    /// for the magnetic form.
    pub fn field_strength(&self) -> Option<f64> {
        match &self.kind {
            Kind::Magnetic { field_strength, .. } => Some(*field_strength),
            _ => None,
        }
    }

    /// Noncommutativity parameters behind the magnetic form.
    pub fn magnetic_parameters(&self) -> Option<(f64, f64)> {
        match &self.kind {
            Kind::Magnetic { theta, eta, .. } => Some((*theta, *eta)),
            _ => None,
        }
    }

    pub fn value(&self, state: &SystemState) -> f64 {
        assert_eq!(
            state.n_particles(),
            self.n_particles(),
            "state does not match the Hamiltonian's particle count"
        );
        match &self.kind {
            Kind::Free { masses } => kinetic_energy(masses, state),
            Kind::Pairwise { masses, potential } => {
                kinetic_energy(masses, state) + potential_energy(potential, state)
            }
            Kind::Magnetic {
                mass,
                field_strength,
                ..
            } => {
                let a = state.p1(0) + field_strength * state.x2(0);
                let b = state.p2(0) - field_strength * state.x1(0);
                (a * a + b * b) / (2.0 * mass)
            }
        }
    }

    /// Exact gradient with respect to the flat phase vector.
    pub fn gradient(&self, state: &SystemState) -> Vec<f64> {
        assert_eq!(
            state.n_particles(),
            self.n_particles(),
            "state does not match the Hamiltonian's particle count"
        );
        let mut grad = vec![0.0; state.dim()];
        match &self.kind {
            Kind::Free { masses } => kinetic_gradient(masses, state, &mut grad),
            Kind::Pairwise { masses, potential } => {
                kinetic_gradient(masses, state, &mut grad);
                potential_gradient(potential, state, &mut grad);
            }
            Kind::Magnetic {
                mass,
                field_strength,
                ..
            } => {
                let a = state.p1(0) + field_strength * state.x2(0);
                let b = state.p2(0) - field_strength * state.x1(0);
                grad[x1_index(0)] = -field_strength * b / mass;
                grad[x2_index(0)] = field_strength * a / mass;
                grad[p1_index(0)] = a / mass;
                grad[p2_index(0)] = b / mass;
            }
        }
        grad
    }

    /// The Hamiltonian as a phase-space observable with analytic gradient.
    pub fn observable(&self) -> Observable {
        let value = self.clone();
        let grad = self.clone();
        Observable::with_gradient(
            move |s: &SystemState| value.value(s),
            move |s: &SystemState| grad.gradient(s),
        )
    }
}

fn validate_masses(masses: &[f64]) -> Result<()> {
    if masses.is_empty() {
        return Err(Error::EmptyParticleList);
    }
    for &m in masses {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidMass(m));
        }
    }
    Ok(())
}

fn kinetic_energy(masses: &[f64], state: &SystemState) -> f64 {
    masses
        .iter()
        .enumerate()
        .map(|(a, m)| (state.p1(a).powi(2) + state.p2(a).powi(2)) / (2.0 * m))
        .sum()
}

fn kinetic_gradient(masses: &[f64], state: &SystemState, grad: &mut [f64]) {
    for (a, m) in masses.iter().enumerate() {
        grad[p1_index(a)] = state.p1(a) / m;
        grad[p2_index(a)] = state.p2(a) / m;
    }
}

fn potential_energy(potential: &Potential, state: &SystemState) -> f64 {
    let n = state.n_particles();
    let mut u = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let r = pair_distance(state, a, b);
            u += potential.energy(r);
        }
    }
    u
}

fn potential_gradient(potential: &Potential, state: &SystemState, grad: &mut [f64]) {
    let n = state.n_particles();
    for a in 0..n {
        for b in (a + 1)..n {
            let d1 = state.x1(a) - state.x1(b);
            let d2 = state.x2(a) - state.x2(b);
            let f = potential.force_factor(pair_distance(state, a, b));
            grad[x1_index(a)] += f * d1;
            grad[x2_index(a)] += f * d2;
            grad[x1_index(b)] -= f * d1;
            grad[x2_index(b)] -= f * d2;
        }
    }
}

fn pair_distance(state: &SystemState, a: usize, b: usize) -> f64 {
    let d1 = state.x1(a) - state.x1(b);
    let d2 = state.x2(a) - state.x2(b);
    d1.hypot(d2)
}

/// Fixed-step integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrationMethod {
    #[default]
    Rk4,
    ImplicitMidpoint,
}

impl IntegrationMethod {
    pub fn name(self) -> &'static str {
        match self {
            IntegrationMethod::Rk4 => "rk4",
            IntegrationMethod::ImplicitMidpoint => "implicit_midpoint",
        }
    }
}

impl std::str::FromStr for IntegrationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(IntegrationMethod::Rk4),
            "implicit_midpoint" => Ok(IntegrationMethod::ImplicitMidpoint),
            _ => Err(Error::InvalidIntegration(
                "unknown method, expected rk4 or implicit_midpoint",
            )),
        }
    }
}

/// Conserved-quantity time series recorded at every trajectory sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Monitors {
    pub hamiltonian: Vec<f64>,
    /// Components of the traditional total momentum, sum of p_i over particles.
    pub total_momentum: [Vec<f64>; 2],
    /// Components of the primed total momentum, which absorbs the momentum
    /// noncommutativity.
    pub primed_momentum: [Vec<f64>; 2],
}

impl Monitors {
    pub fn hamiltonian_drift(&self) -> f64 {
        series_drift(&self.hamiltonian)
    }

    pub fn total_momentum_drift(&self) -> [f64; 2] {
        [
            series_drift(&self.total_momentum[0]),
            series_drift(&self.total_momentum[1]),
        ]
    }

    pub fn primed_momentum_drift(&self) -> [f64; 2] {
        [
            series_drift(&self.primed_momentum[0]),
            series_drift(&self.primed_momentum[1]),
        ]
    }
}

fn series_drift(values: &[f64]) -> f64 {
    match values.first() {
        None => 0.0,
        Some(&first) => values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max),
    }
}

/// Result of a fixed-step integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<SystemState>,
    integrator_id: &'static str,
    step: f64,
    monitors: Monitors,
}

impl Trajectory {
    /// Time-ordered samples; the first one is the initial state exactly.
    pub fn samples(&self) -> &[SystemState] {
        &self.samples
    }

    pub fn integrator_id(&self) -> &'static str {
        self.integrator_id
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn monitors(&self) -> &Monitors {
        &self.monitors
    }

    pub fn final_state(&self) -> &SystemState {
        self.samples.last().expect("trajectory is never empty")
    }
}

/// An observable evaluated along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSeries {
    pub values: Vec<f64>,
    /// `max over t of |f(z(t)) - f(z(0))|`.
    pub max_drift: f64,
}

/// Right-hand side `Omega grad H` of the deformed Hamilton equations.
///
/// For a single free particle this is
/// `(p1/m, p2/m, eta p2/m, -eta p1/m)`: positions follow the momenta while
/// the momentum vector rotates at frequency `eta/m`.
pub fn eom_rhs(h: &Hamiltonian, state: &SystemState, omega: &StructureMatrix) -> Result<Vec<f64>> {
    check_dimensions(h, state, omega)?;
    rhs_unchecked(h, omega, state.time(), state.coords())
}

fn check_dimensions(h: &Hamiltonian, state: &SystemState, omega: &StructureMatrix) -> Result<()> {
    if h.n_particles() != state.n_particles() {
        return Err(Error::DimensionMismatch {
            context: "hamiltonian particle count",
            expected: h.n_particles(),
            actual: state.n_particles(),
        });
    }
    if omega.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            context: "structure matrix dimension",
            expected: omega.dim(),
            actual: state.dim(),
        });
    }
    Ok(())
}

fn rhs_unchecked(
    h: &Hamiltonian,
    omega: &StructureMatrix,
    time: f64,
    coords: &[f64],
) -> Result<Vec<f64>> {
    let state = SystemState::unchecked(time, coords.to_vec());
    let grad = h.gradient(&state);
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteValue {
            context: "hamiltonian gradient",
            index: i,
        });
    }
    omega.apply(&grad)
}

const MIDPOINT_RESIDUAL_TOL: f64 = 1e-12;
const MIDPOINT_MAX_ITERATIONS: usize = 50;

/// Integrates the deformed Hamilton equations with a fixed step.
///
/// Returns `n_steps + 1` samples at times `t0 + i * step` with monitors
/// recorded at every sample. The implicit midpoint stage equation is solved
/// by fixed-point iteration to an update residual below 1e-12. Step
/// increments are accumulated with compensated summation so rounding error
/// stays at the few-ulp level instead of growing with the step count.
pub fn integrate(
    h: &Hamiltonian,
    initial: &SystemState,
    omega: &StructureMatrix,
    step: f64,
    n_steps: usize,
    method: IntegrationMethod,
) -> Result<Trajectory> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidIntegration(
            "step must be positive and finite",
        ));
    }
    if n_steps == 0 {
        return Err(Error::InvalidIntegration("n_steps must be at least 1"));
    }
    check_dimensions(h, initial, omega)?;

    let t0 = initial.time();
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut monitors = Monitors::default();
    record_monitors(&mut monitors, h, omega, initial)?;
    samples.push(initial.clone());

    let mut coords = initial.coords().to_vec();
    let mut compensation = vec![0.0; coords.len()];
    for i in 0..n_steps {
        let t = t0 + i as f64 * step;
        let increment = match method {
            IntegrationMethod::Rk4 => rk4_increment(h, omega, t, &coords, step)?,
            IntegrationMethod::ImplicitMidpoint => {
                midpoint_increment(h, omega, t, &coords, step, i)?
            }
        };
        for (k, inc) in increment.iter().enumerate() {
            let adjusted = inc - compensation[k];
            let updated = coords[k] + adjusted;
            compensation[k] = (updated - coords[k]) - adjusted;
            coords[k] = updated;
        }
        let state =
            SystemState::new(t0 + (i + 1) as f64 * step, coords.clone()).map_err(|e| match e {
                Error::NonFiniteValue { index, .. } => Error::NonFiniteValue {
                    context: "integrated state",
                    index,
                },
                other => other,
            })?;
        record_monitors(&mut monitors, h, omega, &state)?;
        samples.push(state);
    }

    Ok(Trajectory {
        samples,
        integrator_id: method.name(),
        step,
        monitors,
    })
}

fn record_monitors(
    monitors: &mut Monitors,
    h: &Hamiltonian,
    omega: &StructureMatrix,
    state: &SystemState,
) -> Result<()> {
    monitors.hamiltonian.push(h.value(state));
    let (mut pt1, mut pt2) = (0.0, 0.0);
    for a in 0..state.n_particles() {
        pt1 += state.p1(a);
        pt2 += state.p2(a);
    }
    monitors.total_momentum[0].push(pt1);
    monitors.total_momentum[1].push(pt2);
    let pp = primed_momenta(state, omega.particles())?;
    monitors.primed_momentum[0].push(pp[0]);
    monitors.primed_momentum[1].push(pp[1]);
    Ok(())
}

fn rk4_increment(
    h: &Hamiltonian,
    omega: &StructureMatrix,
    t: f64,
    y: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let half = 0.5 * step;
    let k1 = rhs_unchecked(h, omega, t, y)?;
    let k2 = rhs_unchecked(h, omega, t + half, &axpy(y, &k1, half))?;
    let k3 = rhs_unchecked(h, omega, t + half, &axpy(y, &k2, half))?;
    let k4 = rhs_unchecked(h, omega, t + step, &axpy(y, &k3, step))?;
    Ok((0..y.len())
        .map(|i| step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn midpoint_increment(
    h: &Hamiltonian,
    omega: &StructureMatrix,
    t: f64,
    y: &[f64],
    step: f64,
    step_index: usize,
) -> Result<Vec<f64>> {
    let t_mid = t + 0.5 * step;
    let k0 = rhs_unchecked(h, omega, t, y)?;
    let mut increment: Vec<f64> = k0.iter().map(|k| step * k).collect();
    for _ in 0..MIDPOINT_MAX_ITERATIONS {
        let mid: Vec<f64> = y
            .iter()
            .zip(&increment)
            .map(|(a, inc)| a + 0.5 * inc)
            .collect();
        let k = rhs_unchecked(h, omega, t_mid, &mid)?;
        let candidate: Vec<f64> = k.iter().map(|k| step * k).collect();
        let residual = increment
            .iter()
            .zip(&candidate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        increment = candidate;
        if residual < MIDPOINT_RESIDUAL_TOL {
            return Ok(increment);
        }
    }
    Err(Error::ImplicitSolveFailed {
        step: step_index,
        max_iterations: MIDPOINT_MAX_ITERATIONS,
    })
}

fn axpy(y: &[f64], k: &[f64], c: f64) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + c * b).collect()
}

/// Evaluates `f` at every trajectory sample and reports the maximum drift
/// from its initial value.
pub fn monitor_observable(traj: &Trajectory, f: &Observable) -> MonitorSeries {
    let values: Vec<f64> = traj.samples().iter().map(|s| f.value(s)).collect();
    let max_drift = series_drift(&values);
    MonitorSeries { values, max_drift }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{free_particle_state, FreeParticleIc};
    use crate::observable::{poisson_bracket, Observable};

    fn single(m: f64, theta: f64, eta: f64) -> StructureMatrix {
        StructureMatrix::build(&[Particle::new(m, theta, eta).unwrap()]).unwrap()
    }

    fn state1(x1: f64, x2: f64, p1: f64, p2: f64) -> SystemState {
        SystemState::new(0.0, vec![x1, x2, p1, p2]).unwrap()
    }

    #[test]
    fn commutative_free_particle_moves_in_a_straight_line_direction() {
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.0, 0.0);
        let rhs = eom_rhs(&h, &state1(0.0, 0.0, 1.0, 2.0), &omega).unwrap();
        assert_eq!(rhs, vec![1.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn momentum_noncommutativity_rotates_the_momentum() {
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.0, 0.5);
        let rhs = eom_rhs(&h, &state1(0.3, -0.4, 1.0, 0.0), &omega).unwrap();
        assert_eq!(rhs, vec![1.0, 0.0, 0.0, -0.5]);
    }

    #[test]
    fn rhs_scales_with_mass_and_eta() {
        let h = Hamiltonian::free(vec![2.0]).unwrap();
        let omega = single(2.0, 0.0, 1.0);
        let rhs = eom_rhs(&h, &state1(0.0, 0.0, 0.0, 2.0), &omega).unwrap();
        assert_eq!(rhs, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn free_hamiltonian_value_and_gradient_are_the_quadratic_form() {
        let h = Hamiltonian::free(vec![1.0, 2.0]).unwrap();
        let s = SystemState::new(0.0, vec![0.1, 0.2, 3.0, 4.0, 0.5, 0.6, 1.0, 2.0]).unwrap();
        assert!((h.value(&s) - (9.0 + 16.0) / 2.0 - (1.0 + 4.0) / 4.0).abs() < 1e-15);
        let g = h.gradient(&s);
        assert_eq!(g, vec![0.0, 0.0, 3.0, 4.0, 0.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn kind_labels_follow_the_particle_count_and_family() {
        assert_eq!(Hamiltonian::free(vec![1.0]).unwrap().kind(), "free_single");
        assert_eq!(
            Hamiltonian::free(vec![1.0, 2.0]).unwrap().kind(),
            "free_system"
        );
        let hp = Hamiltonian::pairwise(vec![1.0, 2.0], Potential::Harmonic { k: 1.0 }).unwrap();
        assert_eq!(hp.kind(), "pairwise_potential");
        assert!(!hp.is_free());
    }

    #[test]
    fn commutative_limit_reduces_to_hamilton_equations_with_a_potential() {
        // Two unit masses at (0,0) and (1,0) joined by a unit spring: the
        // force pulls them together along the first axis.
        let parts = [
            Particle::commutative(1.0).unwrap(),
            Particle::commutative(1.0).unwrap(),
        ];
        let omega = StructureMatrix::build(&parts).unwrap();
        let h = Hamiltonian::pairwise(vec![1.0, 1.0], Potential::Harmonic { k: 1.0 }).unwrap();
        let s = SystemState::new(0.0, vec![0.0, 0.0, 0.2, -0.1, 1.0, 0.0, 0.0, 0.3]).unwrap();
        let rhs = eom_rhs(&h, &s, &omega).unwrap();
        // dx = p/m for both particles.
        assert_eq!(&rhs[0..2], &[0.2, -0.1]);
        assert_eq!(&rhs[4..6], &[0.0, 0.3]);
        // dp = -grad U: particle 0 is pulled toward particle 1.
        assert!((rhs[2] - 1.0).abs() < 1e-15);
        assert!(rhs[3].abs() < 1e-15);
        assert!((rhs[6] + 1.0).abs() < 1e-15);
        assert!(rhs[7].abs() < 1e-15);
    }

    #[test]
    fn coincident_particles_under_an_inverse_law_report_a_numeric_error() {
        let parts = [
            Particle::commutative(1.0).unwrap(),
            Particle::commutative(1.0).unwrap(),
        ];
        let omega = StructureMatrix::build(&parts).unwrap();
        let h = Hamiltonian::pairwise(
            vec![1.0, 1.0],
            Potential::PowerLaw {
                coeff: 1.0,
                power: -1.0,
            },
        )
        .unwrap();
        let s = SystemState::new(0.0, vec![0.0; 8]).unwrap();
        let err = eom_rhs(&h, &s, &omega).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
    }

    #[test]
    fn dimension_mismatches_are_reported() {
        let h = Hamiltonian::free(vec![1.0, 1.0]).unwrap();
        let omega = single(1.0, 0.0, 0.0);
        let err = eom_rhs(&h, &state1(0.0, 0.0, 0.0, 0.0), &omega).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn invalid_setup_is_rejected_before_integrating() {
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.0, 0.0);
        let s = state1(0.0, 0.0, 1.0, 0.0);
        assert!(matches!(
            integrate(&h, &s, &omega, 0.0, 10, IntegrationMethod::Rk4),
            Err(Error::InvalidIntegration(_))
        ));
        assert!(matches!(
            integrate(&h, &s, &omega, 0.1, 0, IntegrationMethod::Rk4),
            Err(Error::InvalidIntegration(_))
        ));
        assert!(matches!(
            Hamiltonian::free(vec![]),
            Err(Error::EmptyParticleList)
        ));
        assert!(matches!(
            Hamiltonian::free(vec![-1.0]),
            Err(Error::InvalidMass(_))
        ));
    }

    #[test]
    fn trajectory_shape_and_first_sample_are_exact() {
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.1, 0.2);
        let s = state1(0.4, -0.3, 1.0, 0.5);
        let traj = integrate(&h, &s, &omega, 0.01, 100, IntegrationMethod::Rk4).unwrap();
        assert_eq!(traj.samples().len(), 101);
        assert_eq!(traj.samples()[0], s);
        assert_eq!(traj.integrator_id(), "rk4");
        for w in traj.samples().windows(2) {
            assert!(w[1].time() > w[0].time());
        }
        assert!((traj.final_state().time() - 1.0).abs() < 1e-12);
        assert_eq!(traj.monitors().hamiltonian.len(), 101);
    }

    #[test]
    fn rk4_reproduces_straight_line_motion_without_noncommutativity() {
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.0, 0.0);
        let s = state1(0.0, 0.0, 1.0, 2.0);
        let traj = integrate(&h, &s, &omega, 1e-3, 1000, IntegrationMethod::Rk4).unwrap();
        let end = traj.final_state();
        assert!((end.x1(0) - 1.0).abs() < 1e-12);
        assert!((end.x2(0) - 2.0).abs() < 1e-12);
        assert!((end.p1(0) - 1.0).abs() < 1e-15);
        assert!((end.p2(0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rk4_matches_the_closed_form_solution() {
        let (m, eta) = (1.0, 0.1);
        let h = Hamiltonian::free(vec![m]).unwrap();
        let omega = single(m, 0.0, eta);
        let s = state1(0.0, 0.0, 1.0, 0.0);
        let traj = integrate(&h, &s, &omega, 1e-3, 1000, IntegrationMethod::Rk4).unwrap();
        let ic = FreeParticleIc::new(m, eta, [0.0, 0.0], [1.0, 0.0]).unwrap();
        for sample in traj.samples().iter().step_by(100) {
            let exact = free_particle_state(&ic, sample.time());
            assert!((sample.x1(0) - exact.x[0]).abs() < 1e-9);
            assert!((sample.x2(0) - exact.x[1]).abs() < 1e-9);
            assert!((sample.p1(0) - m * exact.v[0]).abs() < 1e-9);
            assert!((sample.p2(0) - m * exact.v[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn hamiltonian_drift_stays_small_on_free_runs() {
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.0, 0.5);
        let s = state1(0.0, 0.0, 1.0, 0.5);
        for method in [IntegrationMethod::Rk4, IntegrationMethod::ImplicitMidpoint] {
            let traj = integrate(&h, &s, &omega, 1e-2, 1000, method).unwrap();
            let h0 = traj.monitors().hamiltonian[0];
            assert!(
                traj.monitors().hamiltonian_drift() < 1e-8 * h0.abs(),
                "{} drift {}",
                method.name(),
                traj.monitors().hamiltonian_drift()
            );
        }
    }

    #[test]
    fn implicit_midpoint_preserves_the_momentum_magnitude() {
        // The free momentum flow is linear, so the midpoint rule conserves
        // p1^2 + p2^2 up to the stage-solve tolerance.
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.0, 0.8);
        let s = state1(0.0, 0.0, 0.6, -0.8);
        let traj = integrate(
            &h,
            &s,
            &omega,
            0.01,
            1000,
            IntegrationMethod::ImplicitMidpoint,
        )
        .unwrap();
        let p_sq = Observable::new(|s: &SystemState| s.p1(0).powi(2) + s.p2(0).powi(2));
        let series = monitor_observable(&traj, &p_sq);
        assert!(series.max_drift < 1e-9, "drift {}", series.max_drift);
    }

    #[test]
    fn implicit_midpoint_is_second_order_against_the_closed_form() {
        let (m, eta) = (1.0, 0.1);
        let h = Hamiltonian::free(vec![m]).unwrap();
        let omega = single(m, 0.0, eta);
        let s = state1(0.0, 0.0, 1.0, 0.0);
        let traj = integrate(
            &h,
            &s,
            &omega,
            1e-3,
            1000,
            IntegrationMethod::ImplicitMidpoint,
        )
        .unwrap();
        let ic = FreeParticleIc::new(m, eta, [0.0, 0.0], [1.0, 0.0]).unwrap();
        let exact = free_particle_state(&ic, 1.0);
        let end = traj.final_state();
        assert!((end.x1(0) - exact.x[0]).abs() < 1e-8);
        assert!((end.x2(0) - exact.x[1]).abs() < 1e-8);
    }

    #[test]
    fn implicit_solver_reports_non_convergence_with_the_step_index() {
        // Step far beyond the contraction threshold of the fixed-point
        // iteration for a fast momentum rotation.
        let h = Hamiltonian::free(vec![1.0]).unwrap();
        let omega = single(1.0, 0.0, 10.0);
        let s = state1(0.0, 0.0, 1.0, 0.0);
        let err =
            integrate(&h, &s, &omega, 1.0, 3, IntegrationMethod::ImplicitMidpoint).unwrap_err();
        assert_eq!(
            err,
            Error::ImplicitSolveFailed {
                step: 0,
                max_iterations: MIDPOINT_MAX_ITERATIONS
            }
        );
    }

    #[test]
    fn monitored_time_derivative_matches_the_bracket() {
        // d/dt f along the flow equals {f, H}; check with a central
        // difference in time on the monitored series.
        let parts = [
            Particle::new(1.0, 0.1, 0.2).unwrap(),
            Particle::new(2.0, 0.05, 0.1).unwrap(),
        ];
        let omega = StructureMatrix::build(&parts).unwrap();
        let h = Hamiltonian::pairwise(vec![1.0, 2.0], Potential::Harmonic { k: 0.7 }).unwrap();
        let s = SystemState::new(0.0, vec![0.0, 0.0, 1.0, 0.5, 1.5, -0.4, -0.2, 0.8]).unwrap();
        let step = 1e-3;
        let traj = integrate(&h, &s, &omega, step, 10, IntegrationMethod::Rk4).unwrap();
        let f = Observable::coordinate(p1_index(0), omega.dim());
        let series = monitor_observable(&traj, &f);
        let h_obs = h.observable();
        for k in 1..9 {
            let fd = (series.values[k + 1] - series.values[k - 1]) / (2.0 * step);
            let bracket = poisson_bracket(&f, &h_obs, &traj.samples()[k], &omega).unwrap();
            assert!((fd - bracket).abs() < 1e-5, "sample {k}: {fd} vs {bracket}");
        }
    }

    #[test]
    fn traditional_momentum_drifts_while_the_primed_momentum_does_not() {
        let (m, eta) = (1.0, 1.0);
        let h = Hamiltonian::free(vec![m]).unwrap();
        let omega = single(m, 0.0, eta);
        let s = state1(0.0, 0.0, 1.0, 0.0);
        // Half a rotation period: p1 swings from 1 to -1.
        let traj = integrate(&h, &s, &omega, 1e-3, 3142, IntegrationMethod::Rk4).unwrap();
        let monitors = traj.monitors();
        let total_drift = monitors.total_momentum_drift();
        assert!(
            (total_drift[0] - 2.0).abs() < 1e-3,
            "drift {}",
            total_drift[0]
        );
        let primed_drift = monitors.primed_momentum_drift();
        assert!(primed_drift[0] < 1e-8);
        assert!(primed_drift[1] < 1e-8);
    }

    #[test]
    fn method_names_parse_back_to_methods() {
        assert_eq!(
            "rk4".parse::<IntegrationMethod>().unwrap(),
            IntegrationMethod::Rk4
        );
        assert_eq!(
            "implicit_midpoint".parse::<IntegrationMethod>().unwrap(),
            IntegrationMethod::ImplicitMidpoint
        );
        assert!("euler".parse::<IntegrationMethod>().is_err());
        assert_eq!(IntegrationMethod::default(), IntegrationMethod::Rk4);
    }

    #[test]
    fn magnetic_form_value_and_gradient() {
        let h = Hamiltonian::magnetic(2.0, 0.3, 0.2, 0.188);
        assert_eq!(h.kind(), "magnetic_equivalent");
        assert_eq!(h.field_strength(), Some(0.188));
        assert_eq!(h.magnetic_parameters(), Some((0.3, 0.2)));
        let s = state1(1.0, -2.0, 0.5, 0.7);
        let a: f64 = 0.5 + 0.188 * (-2.0);
        let b: f64 = 0.7 - 0.188 * 1.0;
        assert!((h.value(&s) - (a * a + b * b) / 4.0).abs() < 1e-15);
        let g = h.gradient(&s);
        assert!((g[0] + 0.188 * b / 2.0).abs() < 1e-15);
        assert!((g[1] - 0.188 * a / 2.0).abs() < 1e-15);
        assert!((g[2] - a / 2.0).abs() < 1e-15);
        assert!((g[3] - b / 2.0).abs() < 1e-15);
    }
}

//! Center-of-mass machinery for N-particle systems.
//!
//! The center-of-mass variables `Xt_i = sum_a mu_a x_i^(a)` and
//! `Pt_i = sum_a p_i^(a)` obey the same deformed algebra as a single particle
//! with effective parameters `theta_tilde = sum_a mu_a^2 theta_a` and
//! `eta_tilde = sum_a eta_a`. This module computes those parameters, the
//! decomposition into center-of-mass and relative variables, the complete
//! bracket table between the two sectors, the parameter conditions that make
//! the sectors commute, the conserved primed momenta, the coordinates
//! conjugate to them, and the single-particle mapping onto a charged particle
//! in a uniform magnetic field.

use crate::algebra::{
    p1_index, p2_index, x1_index, x2_index, Particle, StructureMatrix, SystemState,
};
use crate::analytic::system_velocities;
use crate::dynamics::Hamiltonian;
use crate::error::{Error, Result};
use crate::observable::{poisson_bracket, Observable};

/// Relative spread below which a parameter condition counts as satisfied.
pub const DEFAULT_CONDITION_TOL: f64 = 1e-9;

/// `1 - eta_tilde * theta_tilde` closer to zero than this is treated as
/// singular.
const SINGULAR_TOL: f64 = 1e-12;

/// Deformation parameters obeyed by the center-of-mass variables.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveParams {
    pub theta_tilde: f64,
    pub eta_tilde: f64,
    pub total_mass: f64,
    /// Mass fractions `mu_a = m_a / M`; they sum to one.
    pub mu: Vec<f64>,
}

pub fn effective_params(particles: &[Particle]) -> Result<EffectiveParams> {
    if particles.is_empty() {
        return Err(Error::EmptyParticleList);
    }
    let total_mass: f64 = particles.iter().map(Particle::mass).sum();
    let mu: Vec<f64> = particles.iter().map(|p| p.mass() / total_mass).collect();
    let theta_tilde = particles
        .iter()
        .zip(&mu)
        .map(|(p, m)| m * m * p.theta())
        .sum();
    let eta_tilde = particles.iter().map(Particle::eta).sum();
    Ok(EffectiveParams {
        theta_tilde,
        eta_tilde,
        total_mass,
        mu,
    })
}

/// A phase point split into center-of-mass and relative variables.
///
/// By construction `sum_a rel_p^(a) = 0` and `sum_a mu_a rel_x^(a) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CmDecomposition {
    pub time: f64,
    pub cm_x: [f64; 2],
    pub cm_p: [f64; 2],
    pub rel_x: Vec<[f64; 2]>,
    pub rel_p: Vec<[f64; 2]>,
}

pub fn cm_decompose(state: &SystemState, particles: &[Particle]) -> Result<CmDecomposition> {
    let eff = matched_params(state, particles)?;
    let mut cm_x = [0.0, 0.0];
    let mut cm_p = [0.0, 0.0];
    for a in 0..particles.len() {
        cm_x[0] += eff.mu[a] * state.x1(a);
        cm_x[1] += eff.mu[a] * state.x2(a);
        cm_p[0] += state.p1(a);
        cm_p[1] += state.p2(a);
    }
    let mut rel_x = Vec::with_capacity(particles.len());
    let mut rel_p = Vec::with_capacity(particles.len());
    for a in 0..particles.len() {
        rel_x.push([state.x1(a) - cm_x[0], state.x2(a) - cm_x[1]]);
        rel_p.push([
            state.p1(a) - eff.mu[a] * cm_p[0],
            state.p2(a) - eff.mu[a] * cm_p[1],
        ]);
    }
    Ok(CmDecomposition {
        time: state.time(),
        cm_x,
        cm_p,
        rel_x,
        rel_p,
    })
}

pub fn cm_recompose(d: &CmDecomposition, particles: &[Particle]) -> Result<SystemState> {
    if d.rel_x.len() != particles.len() || d.rel_p.len() != particles.len() {
        return Err(Error::DimensionMismatch {
            context: "center-of-mass recomposition",
            expected: particles.len(),
            actual: d.rel_x.len(),
        });
    }
    let eff = effective_params(particles)?;
    let parts: Vec<[f64; 4]> = (0..particles.len())
        .map(|a| {
            [
                d.rel_x[a][0] + d.cm_x[0],
                d.rel_x[a][1] + d.cm_x[1],
                d.rel_p[a][0] + eff.mu[a] * d.cm_p[0],
                d.rel_p[a][1] + eff.mu[a] * d.cm_p[1],
            ]
        })
        .collect();
    SystemState::from_parts(d.time, &parts)
}

/// One bracket of the center-of-mass/relative table: computed value against
/// the prediction of the deformed algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketEntry {
    pub f: String,
    pub g: String,
    pub computed: f64,
    pub predicted: f64,
    pub error: f64,
    pub pass: bool,
}

/// Full pairwise bracket table over the center-of-mass and relative
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    pub entries: Vec<BracketEntry>,
    pub tol: f64,
    pub max_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CmVariable {
    /// Center-of-mass coordinate component (0 or 1).
    CmX(usize),
    /// Total momentum component.
    CmP(usize),
    /// Relative coordinate component of one particle.
    RelX(usize, usize),
    /// Relative momentum component of one particle.
    RelP(usize, usize),
}

impl CmVariable {
    fn label(self) -> String {
        match self {
            CmVariable::CmX(i) => format!("Xtilde{}", i + 1),
            CmVariable::CmP(i) => format!("Ptilde{}", i + 1),
            CmVariable::RelX(i, a) => format!("DeltaX{}({a})", i + 1),
            CmVariable::RelP(i, a) => format!("DeltaP{}({a})", i + 1),
        }
    }

    fn observable(self, eff: &EffectiveParams, dim: usize) -> Observable {
        let n = eff.mu.len();
        let mut coeffs = vec![0.0; dim];
        match self {
            CmVariable::CmX(i) => {
                for b in 0..n {
                    coeffs[x_idx(i, b)] = eff.mu[b];
                }
            }
            CmVariable::CmP(i) => {
                for b in 0..n {
                    coeffs[p_idx(i, b)] = 1.0;
                }
            }
            CmVariable::RelX(i, a) => {
                for b in 0..n {
                    coeffs[x_idx(i, b)] = kronecker(a, b) - eff.mu[b];
                }
            }
            CmVariable::RelP(i, a) => {
                for b in 0..n {
                    coeffs[p_idx(i, b)] = kronecker(a, b) - eff.mu[a];
                }
            }
        }
        Observable::linear(coeffs, 0.0)
    }
}

fn x_idx(component: usize, particle: usize) -> usize {
    match component {
        0 => x1_index(particle),
        _ => x2_index(particle),
    }
}

fn p_idx(component: usize, particle: usize) -> usize {
    match component {
        0 => p1_index(particle),
        _ => p2_index(particle),
    }
}

fn kronecker(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Antisymmetric symbol on the two components, `+1` for `(1,2)`.
fn eps(i: usize, j: usize) -> f64 {
    match (i, j) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

fn predicted_bracket(
    f: CmVariable,
    g: CmVariable,
    particles: &[Particle],
    eff: &EffectiveParams,
) -> f64 {
    use CmVariable::*;
    let mu = &eff.mu;
    let (tt, et) = (eff.theta_tilde, eff.eta_tilde);
    match (f, g) {
        (CmX(i), CmX(j)) => eps(i, j) * tt,
        (CmP(i), CmP(j)) => eps(i, j) * et,
        (CmX(i), CmP(j)) => kronecker(i, j),
        (CmP(i), CmX(j)) => -kronecker(i, j),
        (CmX(i), RelX(j, a)) | (RelX(i, a), CmX(j)) => {
            eps(i, j) * (mu[a] * particles[a].theta() - tt)
        }
        (CmP(i), RelP(j, a)) | (RelP(i, a), CmP(j)) => {
            eps(i, j) * (particles[a].eta() - mu[a] * et)
        }
        (CmX(..), RelP(..)) | (RelP(..), CmX(..)) => 0.0,
        (CmP(..), RelX(..)) | (RelX(..), CmP(..)) => 0.0,
        (RelX(i, a), RelX(j, b)) => {
            let same = if a == b { particles[a].theta() } else { 0.0 };
            eps(i, j) * (same - mu[a] * particles[a].theta() - mu[b] * particles[b].theta() + tt)
        }
        (RelP(i, a), RelP(j, b)) => {
            let same = if a == b { particles[a].eta() } else { 0.0 };
            eps(i, j)
                * (same - mu[b] * particles[a].eta() - mu[a] * particles[b].eta()
                    + mu[a] * mu[b] * et)
        }
        (RelX(i, a), RelP(j, b)) => kronecker(i, j) * (kronecker(a, b) - mu[b]),
        (RelP(i, a), RelX(j, b)) => -kronecker(i, j) * (kronecker(a, b) - mu[a]),
    }
}

/// Computes every ordered bracket among the center-of-mass and relative
/// variables via the structure matrix and compares it with the prediction of
/// the effective algebra. All observables involved are linear, so gradients
/// are exact and any discrepancy beyond rounding is a real mismatch.
pub fn bracket_table(particles: &[Particle], tol: f64) -> Result<BracketReport> {
    let eff = effective_params(particles)?;
    let omega = StructureMatrix::build(particles)?;
    let dim = omega.dim();
    let state = SystemState::new(0.0, vec![0.0; dim])?;

    let mut variables = Vec::with_capacity(4 + 4 * particles.len());
    for i in 0..2 {
        variables.push(CmVariable::CmX(i));
    }
    for i in 0..2 {
        variables.push(CmVariable::CmP(i));
    }
    for a in 0..particles.len() {
        for i in 0..2 {
            variables.push(CmVariable::RelX(i, a));
        }
        for i in 0..2 {
            variables.push(CmVariable::RelP(i, a));
        }
    }
    let observables: Vec<Observable> = variables.iter().map(|v| v.observable(&eff, dim)).collect();

    let mut entries = Vec::with_capacity(variables.len() * variables.len());
    let mut max_error: f64 = 0.0;
    for (vf, of) in variables.iter().zip(&observables) {
        for (vg, og) in variables.iter().zip(&observables) {
            let computed = poisson_bracket(of, og, &state, &omega)?;
            let predicted = predicted_bracket(*vf, *vg, particles, &eff);
            let error = (computed - predicted).abs();
            max_error = max_error.max(error);
            entries.push(BracketEntry {
                f: vf.label(),
                g: vg.label(),
                computed,
                predicted,
                error,
                pass: error <= tol,
            });
        }
    }
    let passed = entries.iter().all(|e| e.pass);
    Ok(BracketReport {
        entries,
        tol,
        max_error,
        passed,
    })
}

/// Status of the mass-dependence conditions `eta_a / m_a = alpha` and
/// `theta_a m_a = gamma` across the particle set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// Per-particle ratios `eta_a / m_a`.
    pub alpha_values: Vec<f64>,
    /// Per-particle products `theta_a m_a`.
    pub gamma_values: Vec<f64>,
    /// Common value of `eta_a / m_a` when the condition holds.
    pub alpha: Option<f64>,
    /// Common value of `theta_a m_a` when the condition holds.
    pub gamma: Option<f64>,
    pub eta_condition: bool,
    pub theta_condition: bool,
    pub tol: f64,
}

impl ConditionReport {
    /// True when both conditions hold.
    pub fn satisfied(&self) -> bool {
        self.eta_condition && self.theta_condition
    }
}

pub fn check_conditions(particles: &[Particle], tol: f64) -> Result<ConditionReport> {
    if particles.is_empty() {
        return Err(Error::EmptyParticleList);
    }
    let alpha_values: Vec<f64> = particles.iter().map(|p| p.eta() / p.mass()).collect();
    let gamma_values: Vec<f64> = particles.iter().map(|p| p.theta() * p.mass()).collect();
    let (eta_condition, alpha) = uniform(&alpha_values, tol);
    let (theta_condition, gamma) = uniform(&gamma_values, tol);
    Ok(ConditionReport {
        alpha_values,
        gamma_values,
        alpha,
        gamma,
        eta_condition,
        theta_condition,
        tol,
    })
}

/// Spread test: values count as uniform when `max - min <= tol * |mean|`.
fn uniform(values: &[f64], tol: f64) -> (bool, Option<f64>) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max - min <= tol * mean.abs() {
        (true, Some(mean))
    } else {
        (false, None)
    }
}

fn matched_params(state: &SystemState, particles: &[Particle]) -> Result<EffectiveParams> {
    if state.n_particles() != particles.len() {
        return Err(Error::DimensionMismatch {
            context: "state vs particle list",
            expected: particles.len(),
            actual: state.n_particles(),
        });
    }
    effective_params(particles)
}

/// The primed total momenta `(Pt1 - eta_tilde Xt2, Pt2 + eta_tilde Xt1)`.
///
/// These are integrals of the free motion whenever `eta_a / m_a` is the same
/// for all particles; the traditional total momentum is not.
pub fn primed_momenta(state: &SystemState, particles: &[Particle]) -> Result<[f64; 2]> {
    let eff = matched_params(state, particles)?;
    let mut cm_x = [0.0, 0.0];
    let mut cm_p = [0.0, 0.0];
    for a in 0..particles.len() {
        cm_x[0] += eff.mu[a] * state.x1(a);
        cm_x[1] += eff.mu[a] * state.x2(a);
        cm_p[0] += state.p1(a);
        cm_p[1] += state.p2(a);
    }
    Ok([
        cm_p[0] - eff.eta_tilde * cm_x[1],
        cm_p[1] + eff.eta_tilde * cm_x[0],
    ])
}

/// The primed momentum component (0 or 1) as a linear observable.
pub fn primed_momentum_observable(component: usize, particles: &[Particle]) -> Result<Observable> {
    assert!(component < 2, "component must be 0 or 1");
    let eff = effective_params(particles)?;
    let dim = 4 * particles.len();
    let mut coeffs = vec![0.0; dim];
    for b in 0..particles.len() {
        coeffs[p_idx(component, b)] = 1.0;
        // Pt'1 couples to -eta_tilde Xt2, Pt'2 to +eta_tilde Xt1.
        let sign = if component == 0 { -1.0 } else { 1.0 };
        coeffs[x_idx(1 - component, b)] = sign * eff.eta_tilde * eff.mu[b];
    }
    Ok(Observable::linear(coeffs, 0.0))
}

/// Center-of-mass coordinates conjugate to the primed momenta,
/// `Xt'_i = Xt_i / (1 - eta_tilde theta_tilde)`.
pub fn conjugate_cm_coords(state: &SystemState, particles: &[Particle]) -> Result<[f64; 2]> {
    let eff = matched_params(state, particles)?;
    let denom = conjugate_denominator(&eff)?;
    let mut cm_x = [0.0, 0.0];
    for a in 0..particles.len() {
        cm_x[0] += eff.mu[a] * state.x1(a);
        cm_x[1] += eff.mu[a] * state.x2(a);
    }
    Ok([cm_x[0] / denom, cm_x[1] / denom])
}

/// The conjugate coordinate component (0 or 1) as a linear observable.
pub fn conjugate_position_observable(
    component: usize,
    particles: &[Particle],
) -> Result<Observable> {
    assert!(component < 2, "component must be 0 or 1");
    let eff = effective_params(particles)?;
    let denom = conjugate_denominator(&eff)?;
    let dim = 4 * particles.len();
    let mut coeffs = vec![0.0; dim];
    for b in 0..particles.len() {
        coeffs[x_idx(component, b)] = eff.mu[b] / denom;
    }
    Ok(Observable::linear(coeffs, 0.0))
}

fn conjugate_denominator(eff: &EffectiveParams) -> Result<f64> {
    let denom = 1.0 - eff.eta_tilde * eff.theta_tilde;
    if denom.abs() <= SINGULAR_TOL {
        return Err(Error::SingularParameters(denom));
    }
    Ok(denom)
}

/// Hamiltonian of a charged particle in a uniform magnetic field equivalent
/// to the free particle on the noncommutative phase space, expressed in the
/// primed variables. The field strength is `eta (1 - eta theta)`.
pub fn magnetic_hamiltonian(mass: f64, theta: f64, eta: f64) -> Result<Hamiltonian> {
    // Reuses the particle validation for mass and parameter ranges.
    let p = Particle::new(mass, theta, eta)?;
    let denom = 1.0 - eta * theta;
    if denom.abs() <= SINGULAR_TOL {
        return Err(Error::SingularParameters(denom));
    }
    Ok(Hamiltonian::magnetic(p.mass(), theta, eta, eta * denom))
}

/// Maps a single-particle state to its primed variables
/// `(X'1, X'2, P'1, P'2) = (x1/(1-eta theta), x2/(1-eta theta),
/// p1 - eta x2, p2 + eta x1)`.
pub fn primed_state_single(state: &SystemState, theta: f64, eta: f64) -> Result<SystemState> {
    if state.n_particles() != 1 {
        return Err(Error::DimensionMismatch {
            context: "primed single-particle state",
            expected: 1,
            actual: state.n_particles(),
        });
    }
    for (name, v) in [("theta", theta), ("eta", eta)] {
        if !v.is_finite() {
            return Err(Error::NonFiniteInput { name, value: v });
        }
    }
    let denom = 1.0 - eta * theta;
    if denom.abs() <= SINGULAR_TOL {
        return Err(Error::SingularParameters(denom));
    }
    SystemState::new(
        state.time(),
        vec![
            state.x1(0) / denom,
            state.x2(0) / denom,
            state.p1(0) - eta * state.x2(0),
            state.p2(0) + eta * state.x1(0),
        ],
    )
}

/// Rate of change of the traditional total momentum, evaluated two ways.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDriftReport {
    /// Closed-form `{Pt_i, H}` in terms of effective parameters and relative
    /// momenta.
    pub predicted: [f64; 2],
    /// The same bracket evaluated through the structure matrix.
    pub bracket: [f64; 2],
    pub max_difference: f64,
}

/// `d Pt / dt` along the free flow: the closed form
/// `{Pt1, H} = eta_tilde Pt2 / M + sum_a (dP2^(a)/m_a)(eta_a - mu_a eta_tilde)`
/// (mirrored with opposite sign for the second component) against the direct
/// bracket evaluation.
pub fn traditional_momentum_drift(
    state: &SystemState,
    particles: &[Particle],
    h: &Hamiltonian,
) -> Result<MomentumDriftReport> {
    if !h.is_free() {
        return Err(Error::UnsupportedScenario(
            "traditional momentum drift is defined for the free Hamiltonian",
        ));
    }
    if h.n_particles() != particles.len() {
        return Err(Error::DimensionMismatch {
            context: "hamiltonian vs particle list",
            expected: particles.len(),
            actual: h.n_particles(),
        });
    }
    let eff = matched_params(state, particles)?;
    let d = cm_decompose(state, particles)?;

    let mut coupling = [0.0, 0.0];
    for (a, p) in particles.iter().enumerate() {
        let weight = (p.eta() - eff.mu[a] * eff.eta_tilde) / p.mass();
        coupling[0] += weight * d.rel_p[a][1];
        coupling[1] += weight * d.rel_p[a][0];
    }
    let predicted = [
        eff.eta_tilde * d.cm_p[1] / eff.total_mass + coupling[0],
        -eff.eta_tilde * d.cm_p[0] / eff.total_mass - coupling[1],
    ];

    let omega = StructureMatrix::build(particles)?;
    let h_obs = h.observable();
    let dim = omega.dim();
    let mut bracket = [0.0, 0.0];
    for i in 0..2 {
        let mut coeffs = vec![0.0; dim];
        for b in 0..particles.len() {
            coeffs[p_idx(i, b)] = 1.0;
        }
        let pt = Observable::linear(coeffs, 0.0);
        bracket[i] = poisson_bracket(&pt, &h_obs, state, &omega)?;
    }

    let max_difference = (predicted[0] - bracket[0])
        .abs()
        .max((predicted[1] - bracket[1]).abs());
    Ok(MomentumDriftReport {
        predicted,
        bracket,
        max_difference,
    })
}

/// Largest pairwise velocity difference at time `t` for free particles
/// launched with the common velocity `v0`.
///
/// Zero for all `t` exactly when every `eta_a / m_a` coincides; otherwise the
/// system flies apart.
pub fn fly_apart_metric(particles: &[Particle], v0: [f64; 2], t: f64) -> f64 {
    let vs = system_velocities(particles, v0, t);
    let mut max: f64 = 0.0;
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            let d = (vs[i][0] - vs[j][0]).hypot(vs[i][1] - vs[j][1]);
            max = max.max(d);
        }
    }
    max
}

use crate::error::CliError;
use ncphase::{FreeParticleIc, Hamiltonian, Particle, Potential, SystemState};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A complete scenario description loaded from a TOML file.
///
/// `initial`, `run`, and `potential` are optional at parse time; subcommands
/// that need a section report a config error naming it when absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Products written by `simulate`; empty means trajectory + monitors.
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
    /// Seed for randomized checks; the --seed flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub particles: Vec<ParticleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Trajectory,
    Monitors,
    BracketTable,
    ConditionReport,
    FlyapartSeries,
    AnalyticComparison,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub mass: f64,
    pub theta: f64,
    pub eta: f64,
}

/// Initial data in exactly one of two forms: explicit per-particle phase
/// rows, or one shared velocity plus per-particle positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<[f64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    pub step: f64,
    #[serde(default = "default_method")]
    pub method: String,
}

fn default_method() -> String {
    "rk4".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// "harmonic" or "power_law".
    pub kind: String,
    pub strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ScenarioConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.particles.is_empty() {
            return Err(CliError::Config(
                "particles: at least one particle required".into(),
            ));
        }
        for (i, p) in self.particles.iter().enumerate() {
            if !p.mass.is_finite() || p.mass <= 0.0 {
                return Err(CliError::Config(format!(
                    "particles[{i}].mass: must be a positive real"
                )));
            }
            if !p.theta.is_finite() {
                return Err(CliError::Config(format!(
                    "particles[{i}].theta: must be finite"
                )));
            }
            if !p.eta.is_finite() {
                return Err(CliError::Config(format!(
                    "particles[{i}].eta: must be finite"
                )));
            }
        }

        let n = self.particles.len();
        if let Some(init) = &self.initial {
            match (&init.states, &init.velocity, &init.positions) {
                (Some(states), None, None) => {
                    if states.len() != n {
                        return Err(CliError::Config(format!(
                            "initial.states: expected {n} rows, found {}",
                            states.len()
                        )));
                    }
                    for (i, row) in states.iter().enumerate() {
                        if row.iter().any(|v| !v.is_finite()) {
                            return Err(CliError::Config(format!(
                                "initial.states[{i}]: entries must be finite"
                            )));
                        }
                    }
                }
                (None, Some(velocity), Some(positions)) => {
                    if velocity.iter().any(|v| !v.is_finite()) {
                        return Err(CliError::Config(
                            "initial.velocity: entries must be finite".into(),
                        ));
                    }
                    if positions.len() != n {
                        return Err(CliError::Config(format!(
                            "initial.positions: expected {n} rows, found {}",
                            positions.len()
                        )));
                    }
                    for (i, row) in positions.iter().enumerate() {
                        if row.iter().any(|v| !v.is_finite()) {
                            return Err(CliError::Config(format!(
                                "initial.positions[{i}]: entries must be finite"
                            )));
                        }
                    }
                }
                (Some(_), _, _) => {
                    return Err(CliError::Config(
                        "initial: give either states or velocity+positions, not both".into(),
                    ));
                }
                (None, None, None) => {
                    return Err(CliError::Config(
                        "initial: requires either states or both velocity and positions".into(),
                    ));
                }
                (None, _, _) => {
                    return Err(CliError::Config(
                        "initial.velocity and initial.positions must be given together".into(),
                    ));
                }
            }
        }

        if let Some(run) = &self.run {
            if !run.t_end.is_finite() || run.t_end <= 0.0 {
                return Err(CliError::Config(
                    "run.t_end: must be a positive real".into(),
                ));
            }
            if !run.step.is_finite() || run.step <= 0.0 {
                return Err(CliError::Config("run.step: must be a positive real".into()));
            }
            if run.step > run.t_end {
                return Err(CliError::Config(
                    "run.step: must not exceed run.t_end".into(),
                ));
            }
            run.method
                .parse::<ncphase::IntegrationMethod>()
                .map_err(|e| CliError::Config(format!("run.method: {e}")))?;
        }

        if let Some(pot) = &self.potential {
            if !pot.strength.is_finite() {
                return Err(CliError::Config(
                    "potential.strength: must be finite".into(),
                ));
            }
            match pot.kind.as_str() {
                "harmonic" => {
                    if pot.power.is_some() {
                        return Err(CliError::Config(
                            "potential.power: only valid for kind = \"power_law\"".into(),
                        ));
                    }
                }
                "power_law" => match pot.power {
                    Some(p) if p.is_finite() => {}
                    _ => {
                        return Err(CliError::Config(
                            "potential.power: required and finite for kind = \"power_law\"".into(),
                        ));
                    }
                },
                other => {
                    return Err(CliError::Config(format!(
                        "potential.kind: unknown kind '{other}', expected harmonic or power_law"
                    )));
                }
            }
        }

        Ok(())
    }

    pub fn build_particles(&self) -> Result<Vec<Particle>, CliError> {
        self.particles
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Particle::new(p.mass, p.theta, p.eta)
                    .map_err(|e| CliError::Config(format!("particles[{i}]: {e}")))
            })
            .collect()
    }

    pub fn initial_section(&self) -> Result<&InitialConfig, CliError> {
        self.initial
            .as_ref()
            .ok_or_else(|| CliError::Config("initial: section required by this command".into()))
    }

    pub fn run_section(&self) -> Result<&RunConfig, CliError> {
        self.run
            .as_ref()
            .ok_or_else(|| CliError::Config("run: section required by this command".into()))
    }

    pub fn n_steps(&self) -> Result<usize, CliError> {
        let run = self.run_section()?;
        Ok(((run.t_end / run.step).round() as usize).max(1))
    }

    pub fn initial_state(&self, particles: &[Particle]) -> Result<SystemState, CliError> {
        let init = self.initial_section()?;
        let parts: Vec<[f64; 4]> = if let Some(states) = &init.states {
            states.clone()
        } else {
            let velocity = init.velocity.expect("validated");
            let positions = init.positions.as_ref().expect("validated");
            particles
                .iter()
                .zip(positions)
                .map(|(p, x)| [x[0], x[1], p.mass() * velocity[0], p.mass() * velocity[1]])
                .collect()
        };
        SystemState::from_parts(0.0, &parts).map_err(|e| CliError::Config(format!("initial: {e}")))
    }

    /// The shared-velocity initial form, required by fly-apart products.
    pub fn common_velocity(&self) -> Result<([f64; 2], Vec<[f64; 2]>), CliError> {
        let init = self.initial_section()?;
        match (&init.velocity, &init.positions) {
            (Some(v), Some(x)) => Ok((*v, x.clone())),
            _ => Err(CliError::Config(
                "initial: this product requires the common-velocity form \
                 (initial.velocity and initial.positions)"
                    .into(),
            )),
        }
    }

    /// Per-particle closed-form initial data, accepted in either form.
    pub fn per_particle_ics(
        &self,
        particles: &[Particle],
    ) -> Result<Vec<FreeParticleIc>, CliError> {
        let init = self.initial_section()?;
        let mut ics = Vec::with_capacity(particles.len());
        if let Some(states) = &init.states {
            for (p, row) in particles.iter().zip(states) {
                let v = [row[2] / p.mass(), row[3] / p.mass()];
                ics.push(
                    FreeParticleIc::new(p.mass(), p.eta(), [row[0], row[1]], v)
                        .map_err(|e| CliError::Config(format!("initial: {e}")))?,
                );
            }
        } else {
            let velocity = init.velocity.expect("validated");
            let positions = init.positions.as_ref().expect("validated");
            for (p, x) in particles.iter().zip(positions) {
                ics.push(
                    FreeParticleIc::new(p.mass(), p.eta(), *x, velocity)
                        .map_err(|e| CliError::Config(format!("initial: {e}")))?,
                );
            }
        }
        Ok(ics)
    }

    pub fn build_hamiltonian(&self, particles: &[Particle]) -> Result<Hamiltonian, CliError> {
        let masses: Vec<f64> = particles.iter().map(Particle::mass).collect();
        match &self.potential {
            None => Hamiltonian::free(masses).map_err(CliError::from),
            Some(pot) => {
                let potential = match pot.kind.as_str() {
                    "harmonic" => Potential::Harmonic { k: pot.strength },
                    "power_law" => Potential::PowerLaw {
                        coeff: pot.strength,
                        power: pot.power.expect("validated"),
                    },
                    other => {
                        return Err(CliError::Config(format!(
                            "potential.kind: unknown kind '{other}'"
                        )))
                    }
                };
                Hamiltonian::pairwise(masses, potential).map_err(CliError::from)
            }
        }
    }

    /// Errors unless the scenario is potential-free.
    pub fn require_free(&self) -> Result<(), CliError> {
        if self.potential.is_some() {
            return Err(CliError::Config(
                "potential: this command requires a free scenario (remove the potential section)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// The scenario echoed as `# `-prefixed TOML, prepended to every output
    /// file so each product records the configuration that generated it.
    pub fn echo_header(&self) -> Result<String, CliError> {
        let text = toml::to_string(self)
            .map_err(|e| CliError::Config(format!("cannot echo configuration: {e}")))?;
        let mut out = String::from("# scenario configuration\n");
        for line in text.lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        Ok(out)
    }
}

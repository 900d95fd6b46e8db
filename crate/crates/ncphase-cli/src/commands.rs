use crate::config::{OutputKind, ScenarioConfig};
use crate::error::CliError;
use crate::output::{to_pretty_json, write_file};
use ncphase::{
    bracket_table, check_conditions, fly_apart_metric, free_particle_state, integrate,
    magnetic_hamiltonian, primed_state_single, Hamiltonian, IntegrationMethod, Particle,
    StructureMatrix, SystemState, Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

const MAGNETIC_SAMPLE_COUNT: usize = 1000;
const MAGNETIC_STATE_SCALE: f64 = 2.0;

/// Everything a subcommand needs: the parsed scenario plus flag values.
pub struct Ctx {
    pub config: ScenarioConfig,
    pub out: PathBuf,
    pub tol: f64,
    pub seed: Option<u64>,
}

pub fn simulate(ctx: &Ctx) -> Result<Vec<PathBuf>, CliError> {
    let config = &ctx.config;
    let particles = config.build_particles()?;
    let header = config.echo_header()?;
    let outputs: Vec<OutputKind> = if config.outputs.is_empty() {
        vec![OutputKind::Trajectory, OutputKind::Monitors]
    } else {
        config.outputs.clone()
    };

    let needs_trajectory = outputs
        .iter()
        .any(|o| matches!(o, OutputKind::Trajectory | OutputKind::Monitors));
    let trajectory = if needs_trajectory {
        Some(run_integration(config, &particles)?)
    } else {
        None
    };

    let mut written = Vec::new();
    for output in &outputs {
        let path = match output {
            OutputKind::Trajectory => write_file(
                &ctx.out,
                "trajectory.csv",
                &trajectory_csv(&header, trajectory.as_ref().expect("integrated")),
            )?,
            OutputKind::Monitors => write_file(
                &ctx.out,
                "monitors.csv",
                &monitors_csv(&header, trajectory.as_ref().expect("integrated")),
            )?,
            OutputKind::BracketTable => {
                let (json, _, _) = bracket_json(config, &particles, ctx.tol)?;
                write_file(&ctx.out, "bracket_table.json", &json)?
            }
            OutputKind::ConditionReport => write_file(
                &ctx.out,
                "condition_report.json",
                &condition_json(config, &particles, ctx.tol)?,
            )?,
            OutputKind::FlyapartSeries => write_file(
                &ctx.out,
                "flyapart_series.csv",
                &flyapart_csv(config, &particles, &header)?,
            )?,
            OutputKind::AnalyticComparison => write_file(
                &ctx.out,
                "analytic_comparison.json",
                &compare_json(config, &particles)?,
            )?,
        };
        written.push(path);
    }
    Ok(written)
}

pub fn analytic(ctx: &Ctx) -> Result<Vec<PathBuf>, CliError> {
    let config = &ctx.config;
    config.require_free()?;
    let particles = config.build_particles()?;
    let ics = config.per_particle_ics(&particles)?;
    let run = config.run_section()?;
    let n_steps = config.n_steps()?;

    let mut text = config.echo_header()?;
    text.push_str("t,particle_index,x1,x2,p1,p2\n");
    for i in 0..=n_steps {
        let t = i as f64 * run.step;
        for (a, ic) in ics.iter().enumerate() {
            let point = free_particle_state(ic, t);
            let [p1, p2] = point.momenta(ic.mass());
            writeln!(
                text,
                "{:?},{a},{:?},{:?},{:?},{:?}",
                t, point.x[0], point.x[1], p1, p2
            )
            .expect("writing to a string cannot fail");
        }
    }
    Ok(vec![write_file(
        &ctx.out,
        "analytic_trajectory.csv",
        &text,
    )?])
}

pub fn brackets(ctx: &Ctx) -> Result<Vec<PathBuf>, CliError> {
    let particles = ctx.config.build_particles()?;
    let (json, passed, max_difference) = bracket_json(&ctx.config, &particles, ctx.tol)?;
    let path = write_file(&ctx.out, "bracket_table.json", &json)?;
    if !passed {
        return Err(CliError::Verification(format!(
            "bracket table mismatch: max difference {max_difference:e} exceeds tolerance {:e}",
            ctx.tol
        )));
    }
    Ok(vec![path])
}

pub fn conditions(ctx: &Ctx) -> Result<Vec<PathBuf>, CliError> {
    let particles = ctx.config.build_particles()?;
    let json = condition_json(&ctx.config, &particles, ctx.tol)?;
    Ok(vec![write_file(&ctx.out, "condition_report.json", &json)?])
}

pub fn flyapart(ctx: &Ctx) -> Result<Vec<PathBuf>, CliError> {
    let config = &ctx.config;
    let particles = config.build_particles()?;
    let header = config.echo_header()?;
    let csv = flyapart_csv(config, &particles, &header)?;
    Ok(vec![write_file(&ctx.out, "flyapart_series.csv", &csv)?])
}

pub fn compare(ctx: &Ctx) -> Result<Vec<PathBuf>, CliError> {
    let config = &ctx.config;
    let particles = config.build_particles()?;
    let json = compare_json(config, &particles)?;
    Ok(vec![write_file(
        &ctx.out,
        "analytic_comparison.json",
        &json,
    )?])
}

pub fn magnetic_check(ctx: &Ctx) -> Result<Vec<PathBuf>, CliError> {
    let config = &ctx.config;
    config.require_free()?;
    let particles = config.build_particles()?;
    if particles.len() != 1 {
        return Err(CliError::Config(format!(
            "particles: magnetic-check requires exactly one particle, found {}",
            particles.len()
        )));
    }
    let particle = &particles[0];
    let magnetic = magnetic_hamiltonian(particle.mass(), particle.theta(), particle.eta())?;
    let free = Hamiltonian::free(vec![particle.mass()])?;

    let seed = ctx.seed.or(config.seed).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_violation: f64 = 0.0;
    for _ in 0..MAGNETIC_SAMPLE_COUNT {
        let coords = (0..4)
            .map(|_| rng.gen_range(-MAGNETIC_STATE_SCALE..MAGNETIC_STATE_SCALE))
            .collect();
        let state = SystemState::new(0.0, coords)?;
        let primed = primed_state_single(&state, particle.theta(), particle.eta())?;
        max_violation = max_violation.max((magnetic.value(&primed) - free.value(&state)).abs());
    }
    let passed = max_violation < ctx.tol;

    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a ScenarioConfig,
        seed: u64,
        n_states: usize,
        field_strength: f64,
        tol: f64,
        max_violation: f64,
        passed: bool,
    }
    let doc = Doc {
        config,
        seed,
        n_states: MAGNETIC_SAMPLE_COUNT,
        field_strength: magnetic.field_strength().expect("magnetic kind"),
        tol: ctx.tol,
        max_violation,
        passed,
    };
    let path = write_file(&ctx.out, "magnetic_check.json", &to_pretty_json(&doc)?)?;
    if !passed {
        return Err(CliError::Verification(format!(
            "magnetic identity violated: max violation {max_violation:e} exceeds tolerance {:e}",
            ctx.tol
        )));
    }
    Ok(vec![path])
}

fn run_integration(
    config: &ScenarioConfig,
    particles: &[Particle],
) -> Result<Trajectory, CliError> {
    let run = config.run_section()?;
    let method: IntegrationMethod = run
        .method
        .parse()
        .map_err(|e| CliError::Config(format!("run.method: {e}")))?;
    let omega = StructureMatrix::build(particles)?;
    let hamiltonian = config.build_hamiltonian(particles)?;
    let initial = config.initial_state(particles)?;
    Ok(integrate(
        &hamiltonian,
        &initial,
        &omega,
        run.step,
        config.n_steps()?,
        method,
    )?)
}

fn trajectory_csv(header: &str, trajectory: &Trajectory) -> String {
    let mut text = String::from(header);
    text.push_str("t,particle_index,x1,x2,p1,p2\n");
    for sample in trajectory.samples() {
        for a in 0..sample.n_particles() {
            writeln!(
                text,
                "{:?},{a},{:?},{:?},{:?},{:?}",
                sample.time(),
                sample.x1(a),
                sample.x2(a),
                sample.p1(a),
                sample.p2(a)
            )
            .expect("writing to a string cannot fail");
        }
    }
    text
}

fn monitors_csv(header: &str, trajectory: &Trajectory) -> String {
    let monitors = trajectory.monitors();
    let mut text = String::from(header);
    text.push_str("t,H,Ptilde1,Ptilde2,Pprime1,Pprime2\n");
    for (i, sample) in trajectory.samples().iter().enumerate() {
        writeln!(
            text,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            sample.time(),
            monitors.hamiltonian[i],
            monitors.total_momentum[0][i],
            monitors.total_momentum[1][i],
            monitors.primed_momentum[0][i],
            monitors.primed_momentum[1][i]
        )
        .expect("writing to a string cannot fail");
    }
    text
}

fn flyapart_csv(
    config: &ScenarioConfig,
    particles: &[Particle],
    header: &str,
) -> Result<String, CliError> {
    config.require_free()?;
    let (velocity, _) = config.common_velocity()?;
    let run = config.run_section()?;
    let n_steps = config.n_steps()?;
    let mut text = String::from(header);
    text.push_str("t,velocity_gap\n");
    for i in 0..=n_steps {
        let t = i as f64 * run.step;
        writeln!(
            text,
            "{:?},{:?}",
            t,
            fly_apart_metric(particles, velocity, t)
        )
        .expect("writing to a string cannot fail");
    }
    Ok(text)
}

fn bracket_json(
    config: &ScenarioConfig,
    particles: &[Particle],
    tol: f64,
) -> Result<(String, bool, f64), CliError> {
    let report = bracket_table(particles, tol)?;

    #[derive(Serialize)]
    struct Row<'a> {
        f: &'a str,
        g: &'a str,
        computed: f64,
        predicted: f64,
        difference: f64,
        pass: bool,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a ScenarioConfig,
        tol: f64,
        max_difference: f64,
        passed: bool,
        entries: Vec<Row<'a>>,
    }
    let entries = report
        .entries
        .iter()
        .map(|e| Row {
            f: &e.f,
            g: &e.g,
            computed: e.computed,
            predicted: e.predicted,
            difference: e.error,
            pass: e.pass,
        })
        .collect();
    let doc = Doc {
        config,
        tol: report.tol,
        max_difference: report.max_error,
        passed: report.passed,
        entries,
    };
    Ok((to_pretty_json(&doc)?, report.passed, report.max_error))
}

fn condition_json(
    config: &ScenarioConfig,
    particles: &[Particle],
    tol: f64,
) -> Result<String, CliError> {
    let report = check_conditions(particles, tol)?;
    let mean = |values: &[f64]| values.iter().sum::<f64>() / values.len() as f64;
    let alpha_mean = mean(&report.alpha_values);
    let gamma_mean = mean(&report.gamma_values);

    #[derive(Serialize)]
    struct Row {
        quantity: &'static str,
        particle_index: usize,
        computed: f64,
        predicted: f64,
        difference: f64,
        pass: bool,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a ScenarioConfig,
        tol: f64,
        alpha: Option<f64>,
        gamma: Option<f64>,
        eta_condition: bool,
        theta_condition: bool,
        satisfied: bool,
        rows: Vec<Row>,
    }

    let mut rows = Vec::new();
    for (quantity, values, predicted) in [
        ("eta_over_mass", &report.alpha_values, alpha_mean),
        ("mass_times_theta", &report.gamma_values, gamma_mean),
    ] {
        for (i, &computed) in values.iter().enumerate() {
            let difference = (computed - predicted).abs();
            rows.push(Row {
                quantity,
                particle_index: i,
                computed,
                predicted,
                difference,
                pass: difference <= tol * predicted.abs(),
            });
        }
    }

    let doc = Doc {
        config,
        tol: report.tol,
        alpha: report.alpha,
        gamma: report.gamma,
        eta_condition: report.eta_condition,
        theta_condition: report.theta_condition,
        satisfied: report.satisfied(),
        rows,
    };
    to_pretty_json(&doc)
}

fn compare_json(config: &ScenarioConfig, particles: &[Particle]) -> Result<String, CliError> {
    config.require_free()?;
    let run = config.run_section()?;
    let method: IntegrationMethod = run
        .method
        .parse()
        .map_err(|e| CliError::Config(format!("run.method: {e}")))?;
    let n_steps = config.n_steps()?;
    let ics = config.per_particle_ics(particles)?;
    let omega = StructureMatrix::build(particles)?;
    let hamiltonian = config.build_hamiltonian(particles)?;
    let initial = config.initial_state(particles)?;

    let deviations = |step: f64, n: usize| -> Result<Vec<f64>, CliError> {
        let trajectory = integrate(&hamiltonian, &initial, &omega, step, n, method)?;
        let mut devs = vec![0.0f64; particles.len()];
        for sample in trajectory.samples() {
            for (a, ic) in ics.iter().enumerate() {
                let exact = free_particle_state(ic, sample.time());
                devs[a] = devs[a]
                    .max((sample.x1(a) - exact.x[0]).abs())
                    .max((sample.x2(a) - exact.x[1]).abs());
            }
        }
        Ok(devs)
    };
    let coarse = deviations(run.step, n_steps)?;
    let fine = deviations(run.step / 2.0, n_steps * 2)?;

    #[derive(Serialize)]
    struct Row {
        particle_index: usize,
        max_deviation: f64,
        halved_max_deviation: f64,
        ratio: Option<f64>,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a ScenarioConfig,
        method: &'a str,
        step: f64,
        halved_step: f64,
        rows: Vec<Row>,
        max_deviation: f64,
        halved_max_deviation: f64,
        ratio: Option<f64>,
    }

    let ratio_of = |c: f64, f: f64| if f > 0.0 { Some(c / f) } else { None };
    let rows: Vec<Row> = coarse
        .iter()
        .zip(&fine)
        .enumerate()
        .map(|(a, (&c, &f))| Row {
            particle_index: a,
            max_deviation: c,
            halved_max_deviation: f,
            ratio: ratio_of(c, f),
        })
        .collect();
    let max_deviation = coarse.iter().cloned().fold(0.0, f64::max);
    let halved_max_deviation = fine.iter().cloned().fold(0.0, f64::max);
    let doc = Doc {
        config,
        method: method.name(),
        step: run.step,
        halved_step: run.step / 2.0,
        rows,
        max_deviation,
        halved_max_deviation,
        ratio: ratio_of(max_deviation, halved_max_deviation),
    };
    to_pretty_json(&doc)
}

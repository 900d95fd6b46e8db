//! Integrates one deformed free particle and checks the endpoint against the
//! closed-form trajectory.

use ncphase::{
    free_particle_state, integrate, FreeParticleIc, Hamiltonian, IntegrationMethod, Particle,
    StructureMatrix, SystemState,
};

fn main() -> ncphase::Result<()> {
    let particles = vec![Particle::new(1.0, 0.0, 0.1)?];
    let omega = StructureMatrix::build(&particles)?;
    let h = Hamiltonian::free_for(&particles)?;
    let initial = SystemState::new(0.0, vec![0.0, 0.0, 1.0, 0.0])?;

    let trajectory = integrate(&h, &initial, &omega, 1e-3, 10_000, IntegrationMethod::Rk4)?;

    let ic = FreeParticleIc::new(1.0, 0.1, [0.0, 0.0], [1.0, 0.0])?;
    let exact = free_particle_state(&ic, 10.0);
    let end = trajectory.final_state();
    println!(
        "integrated ({:+.12}, {:+.12}), closed form ({:+.12}, {:+.12})",
        end.x1(0),
        end.x2(0),
        exact.x[0],
        exact.x[1]
    );
    assert!((end.x1(0) - exact.x[0]).abs() < 1e-9);
    assert!((end.x2(0) - exact.x[1]).abs() < 1e-9);
    Ok(())
}

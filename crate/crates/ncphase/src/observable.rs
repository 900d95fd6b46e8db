//! Scalar observables on the phase space and the bracket evaluator.
//!
//! The bracket of two general observables is the bilinear extension of the
//! canonical-variable relations: `{f, g} = grad(f)^T omega grad(g)`. For a
//! constant antisymmetric structure matrix this rule is antisymmetric,
//! satisfies Leibniz and the Jacobi identity, and reproduces the defining
//! brackets on coordinate observables.

use std::sync::Arc;

use crate::algebra::{StructureMatrix, SystemState};
use crate::error::{Error, Result};

type ValueFn = Arc<dyn Fn(&SystemState) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&SystemState) -> Vec<f64> + Send + Sync>;

/// Central-difference step scale, cbrt(machine epsilon).
fn fd_step_scale() -> f64 {
    f64::EPSILON.cbrt()
}

/// A scalar function of the phase point, with an analytic gradient when one
/// is supplied and a central finite-difference gradient otherwise.
#[derive(Clone)]
pub struct Observable {
    value: ValueFn,
    gradient: Option<GradientFn>,
    linear: bool,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable")
            .field("analytic_gradient", &self.gradient.is_some())
            .field("linear", &self.linear)
            .finish()
    }
}

impl Observable {
    /// Observable with finite-difference gradients.
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(&SystemState) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            gradient: None,
            linear: false,
        }
    }

    /// Observable with a supplied analytic gradient.
    pub fn with_gradient<F, G>(value: F, gradient: G) -> Self
    where
        F: Fn(&SystemState) -> f64 + Send + Sync + 'static,
        G: Fn(&SystemState) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
            linear: false,
        }
    }

    /// Linear observable `sum_i coeffs[i] * z_i + constant` with exact
    /// gradient.
    pub fn linear(coeffs: Vec<f64>, constant: f64) -> Self {
        let coeffs = Arc::new(coeffs);
        let c_value = Arc::clone(&coeffs);
        let c_grad = Arc::clone(&coeffs);
        Self {
            value: Arc::new(move |s: &SystemState| {
                assert_eq!(s.dim(), c_value.len(), "linear observable dimension");
                s.coords()
                    .iter()
                    .zip(c_value.iter())
                    .map(|(z, c)| z * c)
                    .sum::<f64>()
                    + constant
            }),
            gradient: Some(Arc::new(move |_s: &SystemState| c_grad.to_vec())),
            linear: true,
        }
    }

    /// The coordinate observable `z_i` on a phase space of dimension `dim`.
    pub fn coordinate(index: usize, dim: usize) -> Self {
        assert!(index < dim);
        let mut coeffs = vec![0.0; dim];
        coeffs[index] = 1.0;
        Self::linear(coeffs, 0.0)
    }

    /// Pointwise product `f * g`, with the product-rule gradient when both
    /// factors carry analytic gradients.
    pub fn product(f: &Observable, g: &Observable) -> Self {
        let (fv, gv) = (Arc::clone(&f.value), Arc::clone(&g.value));
        let value = move |s: &SystemState| fv(s) * gv(s);
        match (&f.gradient, &g.gradient) {
            (Some(fg), Some(gg)) => {
                let (fv2, gv2) = (Arc::clone(&f.value), Arc::clone(&g.value));
                let (fg, gg) = (Arc::clone(fg), Arc::clone(gg));
                Self::with_gradient(value, move |s: &SystemState| {
                    let (a, b) = (fv2(s), gv2(s));
                    fg(s)
                        .iter()
                        .zip(gg(s).iter())
                        .map(|(df, dg)| df * b + a * dg)
                        .collect()
                })
            }
            _ => Self::new(value),
        }
    }

    /// True when the observable was built as a linear function of the phase
    /// vector.
    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn value(&self, state: &SystemState) -> f64 {
        (self.value)(state)
    }

    /// Gradient with respect to the flat phase vector; analytic when
    /// available, otherwise central differences with per-component step
    /// `cbrt(eps) * max(1, |z_i|)`.
    pub fn gradient(&self, state: &SystemState) -> Vec<f64> {
        if let Some(g) = &self.gradient {
            return g(state);
        }
        let scale = fd_step_scale();
        let base = state.coords();
        let mut grad = vec![0.0; base.len()];
        let mut work = base.to_vec();
        for i in 0..base.len() {
            let h = scale * base[i].abs().max(1.0);
            work[i] = base[i] + h;
            let fp = (self.value)(&SystemState::unchecked(state.time(), work.clone()));
            work[i] = base[i] - h;
            let fm = (self.value)(&SystemState::unchecked(state.time(), work.clone()));
            work[i] = base[i];
            grad[i] = (fp - fm) / (2.0 * h);
        }
        grad
    }
}

/// Evaluates the deformed Poisson bracket `{f, g} = grad(f)^T omega grad(g)`
/// at `state`.
pub fn poisson_bracket(
    f: &Observable,
    g: &Observable,
    state: &SystemState,
    omega: &StructureMatrix,
) -> Result<f64> {
    if state.dim() != omega.dim() {
        return Err(Error::DimensionMismatch {
            context: "poisson bracket state",
            expected: omega.dim(),
            actual: state.dim(),
        });
    }
    let gf = checked_gradient(f, state, omega.dim(), "gradient of f")?;
    let gg = checked_gradient(g, state, omega.dim(), "gradient of g")?;
    let og = omega.apply(&gg)?;
    Ok(gf.iter().zip(og.iter()).map(|(a, b)| a * b).sum())
}

fn checked_gradient(
    f: &Observable,
    state: &SystemState,
    dim: usize,
    context: &'static str,
) -> Result<Vec<f64>> {
    let g = f.gradient(state);
    if g.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "observable gradient",
            expected: dim,
            actual: g.len(),
        });
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { context, index: i });
    }
    Ok(g)
}

/// The bracket `{f, g}` packaged as an observable of the phase point.
pub fn bracket_observable(f: &Observable, g: &Observable, omega: &StructureMatrix) -> Observable {
    let (f, g, omega) = (f.clone(), g.clone(), omega.clone());
    Observable::new(move |s: &SystemState| poisson_bracket(&f, &g, s, &omega).unwrap_or(f64::NAN))
}

/// Structural diagnostics of the bracket evaluator against the defining
/// properties of a Poisson bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraCheck {
    /// Max over probe pairs of `|{f,g} + {g,f}|`.
    pub max_antisymmetry_violation: f64,
    /// Max over probe triples of `|{f, g*h} - g{f,h} - h{f,g}|`.
    pub max_leibniz_violation: f64,
    /// Max over linear probe triples of the Jacobi cyclic sum
    /// `|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|`.
    pub max_jacobi_violation: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks antisymmetry, the Leibniz rule and the Jacobi identity of the
/// bracket evaluator on the given probes. The Jacobi cyclic sum is taken
/// over triples of linear probes only, where nested brackets are constants
/// and the check is sharp.
pub fn check_algebra(
    omega: &StructureMatrix,
    probes: &[Observable],
    state: &SystemState,
    tol: f64,
) -> Result<AlgebraCheck> {
    if probes.is_empty() {
        return Err(Error::UnsupportedScenario("check_algebra needs probes"));
    }
    let mut anti: f64 = 0.0;
    for f in probes {
        for g in probes {
            let fg = poisson_bracket(f, g, state, omega)?;
            let gf = poisson_bracket(g, f, state, omega)?;
            anti = anti.max((fg + gf).abs());
        }
    }

    let mut leibniz: f64 = 0.0;
    for f in probes {
        for g in probes {
            for h in probes {
                let gh = Observable::product(g, h);
                let lhs = poisson_bracket(f, &gh, state, omega)?;
                let rhs = g.value(state) * poisson_bracket(f, h, state, omega)?
                    + h.value(state) * poisson_bracket(f, g, state, omega)?;
                leibniz = leibniz.max((lhs - rhs).abs());
            }
        }
    }

    let mut jacobi: f64 = 0.0;
    let linear: Vec<&Observable> = probes.iter().filter(|p| p.is_linear()).collect();
    for f in &linear {
        for g in &linear {
            for h in &linear {
                let gh = bracket_observable(g, h, omega);
                let hf = bracket_observable(h, f, omega);
                let fg = bracket_observable(f, g, omega);
                let sum = poisson_bracket(f, &gh, state, omega)?
                    + poisson_bracket(g, &hf, state, omega)?
                    + poisson_bracket(h, &fg, state, omega)?;
                jacobi = jacobi.max(sum.abs());
            }
        }
    }

    Ok(AlgebraCheck {
        max_antisymmetry_violation: anti,
        max_leibniz_violation: leibniz,
        max_jacobi_violation: jacobi,
        tol,
        passed: anti <= tol && leibniz <= tol && jacobi <= tol,
    })
}

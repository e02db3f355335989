//! The dual form of the Carleson condition:
//! `Σ λ_S a_S ≤ C ∫ sup_S a_S 1_S dμ` for every nonnegative test family `a`.

use serde::Serialize;

use super::{CoefficientFamily, TestFamily};
use crate::error::{Error, Result};
use crate::measure::StepFunction;
use crate::numeric::TOLERANCE;
use crate::set_system::SetSystem;

/// `Σ λ_S a_S`.
pub fn dual_pairing(lambda: &CoefficientFamily, a: &TestFamily) -> f64 {
    lambda
        .values()
        .iter()
        .zip(a.values())
        .map(|(l, x)| l * x)
        .sum()
}

/// `ã_S = λ_S a_S`.
pub fn change_of_variable(lambda: &CoefficientFamily, a: &TestFamily) -> Vec<f64> {
    lambda
        .values()
        .iter()
        .zip(a.values())
        .map(|(l, x)| l * x)
        .collect()
}

/// The pointwise maximum `sup_S a_S 1_S`, defined on every atom.
pub fn upper_envelope(system: &SetSystem, a: &TestFamily) -> StepFunction {
    let measure = system.measure();
    let mut env = vec![0.0f64; measure.len()];
    for (s, set) in system.sets().iter().enumerate() {
        let v = a.get(s);
        for &atom in set.members() {
            if v > env[atom] {
                env[atom] = v;
            }
        }
    }
    StepFunction::new(
        env.into_iter()
            .enumerate()
            .map(|(i, v)| (measure.atom_id(i).to_string(), v)),
    )
    .expect("envelope of nonnegative finite values")
}

/// `LHS / ∫ envelope`: 0 when the pairing vanishes, `+inf` when only the
/// integral does.
pub fn dual_ratio(lhs: f64, integral: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if integral == 0.0 {
        f64::INFINITY
    } else {
        lhs / integral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualCheck {
    /// `Σ λ_S a_S`.
    pub lhs: f64,
    /// `∫ sup_S a_S 1_S dμ` by the layer-cake formula.
    pub integral: f64,
    /// `C` times `integral`.
    #[serde(with = "crate::numeric::extended")]
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates both sides of the dual estimate at constant `c`.
///
/// Passes iff `lhs ≤ rhs + 1e-9·(1 + rhs)`. With `c = +inf` a zero integral
/// gives `rhs = 0`.
pub fn dual_estimate_check(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    a: &TestFamily,
    c: f64,
) -> Result<DualCheck> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidConstant(c));
    }
    let lhs = dual_pairing(lambda, a);
    let integral = system
        .measure()
        .layer_cake_integral(&upper_envelope(system, a))?;
    let rhs = if integral == 0.0 { 0.0 } else { c * integral };
    let pass = rhs.is_infinite() || lhs <= rhs + TOLERANCE * (1.0 + rhs);
    Ok(DualCheck {
        lhs,
        integral,
        rhs,
        pass,
    })
}

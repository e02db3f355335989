//! Per-cube forms of the Carleson condition on nested-or-disjoint families.

use serde::Serialize;

use super::{carleson_constant, carleson_ratio, CoefficientFamily};
use crate::error::{Error, Result};
use crate::numeric::{approx_eq, TOLERANCE};
use crate::set_system::SetSystem;

/// Errors unless every pair of sets is nested or disjoint.
pub fn ensure_dyadic(system: &SetSystem) -> Result<()> {
    match system.find_crossing_pair() {
        Some((a, b)) => Err(Error::NotDyadic(
            system.set(a).id.clone(),
            system.set(b).id.clone(),
        )),
        None => Ok(()),
    }
}

/// `λ′_R = λ_R · μ(R)`.
pub fn reweight_by_mass(system: &SetSystem, lambda: &CoefficientFamily) -> CoefficientFamily {
    let values = (0..system.len())
        .map(|r| lambda.get(r) * system.set_mass(r))
        .collect();
    CoefficientFamily::new(system, values).expect("products of nonnegative finite values")
}

/// `sup_Q (1/μ(Q)) Σ_{R⊆Q} λ_R μ(R)` over the cubes of a dyadic system.
pub fn f_infty_1_norm(system: &SetSystem, lambda: &CoefficientFamily) -> Result<f64> {
    ensure_dyadic(system)?;
    let mut best = 0.0f64;
    for q in 0..system.len() {
        let mass = system.set_mass(q);
        if mass <= 0.0 {
            return Err(Error::ZeroMassCube(system.set(q).id.clone()));
        }
        let inner: f64 = (0..system.len())
            .filter(|&r| system.is_subset(r, q))
            .map(|r| lambda.get(r) * system.set_mass(r))
            .sum();
        best = best.max(inner / mass);
    }
    Ok(best)
}

/// `sup_Q` of the subcollection ratio of `{S : S ⊆ Q}`.
pub fn per_cube_carleson_sup(system: &SetSystem, lambda: &CoefficientFamily) -> Result<f64> {
    ensure_dyadic(system)?;
    let mut best = 0.0f64;
    for q in 0..system.len() {
        let inside = system.maximal_subcollection_inside(system.set(q).members());
        best = best.max(carleson_ratio(system, lambda, &inside)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicReductionReport {
    #[serde(with = "crate::numeric::extended")]
    pub per_cube: f64,
    #[serde(with = "crate::numeric::extended")]
    pub constant: f64,
    pub pass: bool,
}

/// Compares the per-cube supremum with the full subcollection constant.
///
/// On a nested-or-disjoint family every union splits into its maximal
/// cubes, so the two agree.
pub fn dyadic_reduction_check(
    system: &SetSystem,
    lambda: &CoefficientFamily,
) -> Result<DyadicReductionReport> {
    let per_cube = per_cube_carleson_sup(system, lambda)?;
    let (constant, _) = carleson_constant(system, lambda)?;
    Ok(DyadicReductionReport {
        per_cube,
        constant,
        pass: approx_eq(per_cube, constant, TOLERANCE),
    })
}

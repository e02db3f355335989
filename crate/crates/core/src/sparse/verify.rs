use std::collections::HashSet;

use serde::Serialize;

use super::{SparseWitness, WitnessMode};
use crate::carleson::{for_each_subcollection, CertificateDoc, CoefficientFamily};
use crate::error::{Error, Result};
use crate::numeric::TOLERANCE;
use crate::set_system::SetSystem;

/// Slack on per-atom disjointness.
const OVERLAP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetRow {
    pub id: String,
    pub lambda: f64,
    /// μ(E_S).
    pub achieved_mass: f64,
    /// `C·μ(E_S) - λ_S`.
    pub slack: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessViolation {
    UnknownSet {
        set: String,
    },
    UnknownAtom {
        set: String,
        atom: String,
    },
    OutsideSet {
        set: String,
        atom: String,
    },
    FractionOutOfRange {
        set: String,
        atom: String,
        value: f64,
    },
    NotIntegral {
        set: String,
        atom: String,
        value: f64,
    },
    Overlap {
        atom: String,
        total: f64,
    },
    Deficit {
        set: String,
        lambda: f64,
        capacity: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub rows: Vec<SetRow>,
    pub violations: Vec<WitnessViolation>,
    pub feasible: bool,
    /// Filled in by producers that could not build a witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
}

/// Checks `E_S ⊆ S`, per-atom disjointness and `λ_S ≤ C·μ(E_S)`, collecting
/// every violation.
pub fn verify_witness(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    c: f64,
    witness: &SparseWitness,
) -> WitnessReport {
    let measure = system.measure();
    let mut violations = Vec::new();
    let mut achieved = vec![0.0f64; system.len()];
    let mut load = vec![0.0f64; measure.len()];

    for (set_id, atoms) in &witness.assignment {
        let set = match system.position(set_id) {
            Ok(s) => Some(s),
            Err(_) => {
                violations.push(WitnessViolation::UnknownSet {
                    set: set_id.clone(),
                });
                None
            }
        };
        for (atom_id, &f) in atoms {
            let atom = match measure.position(atom_id) {
                Ok(a) => a,
                Err(_) => {
                    violations.push(WitnessViolation::UnknownAtom {
                        set: set_id.clone(),
                        atom: atom_id.clone(),
                    });
                    continue;
                }
            };
            if !(0.0..=1.0).contains(&f) {
                violations.push(WitnessViolation::FractionOutOfRange {
                    set: set_id.clone(),
                    atom: atom_id.clone(),
                    value: f,
                });
            } else if witness.mode == WitnessMode::Integral && f != 0.0 && f != 1.0 {
                violations.push(WitnessViolation::NotIntegral {
                    set: set_id.clone(),
                    atom: atom_id.clone(),
                    value: f,
                });
            }
            if let Some(s) = set {
                if system.set(s).members().binary_search(&atom).is_err() {
                    violations.push(WitnessViolation::OutsideSet {
                        set: set_id.clone(),
                        atom: atom_id.clone(),
                    });
                }
                if f.is_finite() {
                    achieved[s] += f * measure.mass(atom);
                }
            }
            if f.is_finite() {
                load[atom] += f;
            }
        }
    }

    for (a, &total) in load.iter().enumerate() {
        if total > 1.0 + OVERLAP_EPS {
            violations.push(WitnessViolation::Overlap {
                atom: measure.atom_id(a).to_string(),
                total,
            });
        }
    }

    let mut rows = Vec::with_capacity(system.len());
    for (s, &got) in achieved.iter().enumerate() {
        let l = lambda.get(s);
        let capacity = c * got;
        let ok = l <= capacity + TOLERANCE * (1.0 + l);
        if !ok {
            violations.push(WitnessViolation::Deficit {
                set: system.set(s).id.clone(),
                lambda: l,
                capacity,
            });
        }
        rows.push(SetRow {
            id: system.set(s).id.clone(),
            lambda: l,
            achieved_mass: got,
            slack: capacity - l,
            ok,
        });
    }

    WitnessReport {
        feasible: violations.is_empty(),
        rows,
        violations,
        certificate: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainFailure {
    /// Atom ids of Ω.
    pub omega: Vec<String>,
    /// `Σ_{S⊆Ω} λ_S`.
    pub coefficients: f64,
    /// `C·Σ_{S⊆Ω} μ(E_S)`.
    pub witnessed: f64,
    /// `C·μ(Ω)`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub unions_checked: usize,
    pub failures: Vec<ChainFailure>,
    pub pass: bool,
}

/// For every union `Ω` of a nonempty subcollection, checks
/// `Σ_{S⊆Ω} λ_S ≤ C·Σ_{S⊆Ω} μ(E_S) ≤ C·μ(Ω)`.
pub fn sparse_implies_carleson_check(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    c: f64,
    witness: &SparseWitness,
    budget: usize,
) -> Result<ChainCheck> {
    if system.len() > budget {
        return Err(Error::BudgetExceeded {
            what: "set count",
            count: system.len(),
            budget,
        });
    }
    let measure = system.measure();
    let mut e_mass = vec![0.0f64; system.len()];
    for (set_id, atoms) in &witness.assignment {
        let s = system.position(set_id)?;
        for (atom_id, &f) in atoms {
            e_mass[s] += f * measure.mass(measure.position(atom_id)?);
        }
    }

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut failures = Vec::new();
    for_each_subcollection(system, |_, cover, _| {
        let omega: Vec<usize> = cover
            .iter()
            .enumerate()
            .filter_map(|(a, &k)| (k > 0).then_some(a))
            .collect();
        if seen.contains(&omega) {
            return;
        }
        let inside = system.maximal_subcollection_inside(&omega);
        let coefficients: f64 = inside.indices().iter().map(|&s| lambda.get(s)).sum();
        let witnessed = c * inside.indices().iter().map(|&s| e_mass[s]).sum::<f64>();
        let bound = c * measure.mass_of_indices(&omega);
        let first = coefficients <= witnessed + TOLERANCE * (1.0 + witnessed);
        let second = witnessed <= bound + TOLERANCE * (1.0 + bound);
        if !(first && second) {
            failures.push(ChainFailure {
                omega: omega
                    .iter()
                    .map(|&a| measure.atom_id(a).to_string())
                    .collect(),
                coefficients,
                witnessed,
                bound,
            });
        }
        seen.insert(omega);
    });
    Ok(ChainCheck {
        unions_checked: seen.len(),
        pass: failures.is_empty(),
        failures,
    })
}

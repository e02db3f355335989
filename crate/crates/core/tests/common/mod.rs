#![allow(dead_code)]

use carleson_sparse::{CoefficientFamily, DiscreteMeasure, Mode, SetSystem};
use rand::Rng;

/// Random instance: every set gets at least one atom, masses and
/// coefficients uniform in `[0, 1)`.
pub fn random_instance(
    rng: &mut impl Rng,
    max_sets: usize,
    max_atoms: usize,
    mode: Mode,
) -> (SetSystem, CoefficientFamily) {
    let n_atoms = rng.gen_range(1..=max_atoms);
    let n_sets = rng.gen_range(1..=max_sets);
    let masses: Vec<f64> = (0..n_atoms).map(|_| rng.gen::<f64>()).collect();
    let measure = DiscreteMeasure::from_masses(mode, &masses).unwrap();
    let sets: Vec<(String, Option<String>, Vec<String>)> = (0..n_sets)
        .map(|s| {
            let p = rng.gen_range(0.05..0.6);
            let mut members: Vec<usize> = (0..n_atoms).filter(|_| rng.gen_bool(p)).collect();
            if members.is_empty() {
                members.push(rng.gen_range(0..n_atoms));
            }
            let members = members.into_iter().map(|a| format!("a{a}")).collect();
            (format!("S{s:02}"), None, members)
        })
        .collect();
    let system = SetSystem::new(measure, sets).unwrap();
    let lambda =
        CoefficientFamily::new(&system, (0..n_sets).map(|_| rng.gen::<f64>()).collect()).unwrap();
    (system, lambda)
}

/// Builds a system from membership bitmasks over `masses.len()` atoms.
pub fn system_from_masks(masses: &[f64], masks: &[u64], mode: Mode) -> SetSystem {
    let measure = DiscreteMeasure::from_masses(mode, masses).unwrap();
    let sets: Vec<(String, Option<String>, Vec<String>)> = masks
        .iter()
        .enumerate()
        .map(|(s, &m)| {
            let members = (0..masses.len())
                .filter(|a| m >> a & 1 == 1)
                .map(|a| format!("a{a}"))
                .collect();
            (format!("S{s:02}"), None, members)
        })
        .collect();
    SetSystem::new(measure, sets).unwrap()
}

/// Member bitmask of every set, recomputed from the public accessors.
pub fn masks(system: &SetSystem) -> Vec<u64> {
    system
        .sets()
        .iter()
        .map(|s| s.members().iter().fold(0u64, |m, &a| m | 1 << a))
        .collect()
}

pub fn mask_mass(system: &SetSystem, mask: u64) -> f64 {
    (0..system.measure().len())
        .filter(|a| mask >> a & 1 == 1)
        .map(|a| system.measure().mass(a))
        .sum()
}

/// Brute-force Carleson constant: every nonempty subset of sets as a
/// bitmask, its union rebuilt from scratch.
pub fn oracle_constant(system: &SetSystem, lambda: &CoefficientFamily) -> f64 {
    let m = masks(system);
    let n = m.len();
    let mut best = 0.0f64;
    for choice in 1u64..(1 << n) {
        let mut union = 0u64;
        let mut num = 0.0;
        for (s, &mask) in m.iter().enumerate() {
            if choice >> s & 1 == 1 {
                union |= mask;
                num += lambda.get(s);
            }
        }
        let mass = mask_mass(system, union);
        let ratio = if num == 0.0 {
            0.0
        } else if mass == 0.0 {
            f64::INFINITY
        } else {
            num / mass
        };
        best = best.max(ratio);
    }
    best
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

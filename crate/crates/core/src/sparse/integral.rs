//! Exact search for witnesses that give each atom wholly to at most one set.
//!
//! No cut certificate exists for integral infeasibility in general, so the
//! search either returns a witness or reports that none exists.

use std::collections::HashSet;

use indexmap::IndexMap;

use super::{SparseWitness, WitnessMode};
use crate::carleson::CoefficientFamily;
use crate::error::{Error, Result};
use crate::numeric::TOLERANCE;
use crate::set_system::SetSystem;

/// The search runs when the atom count is within this budget...
pub const INTEGRAL_ATOM_BUDGET: usize = 20;
/// ...or the set count is within this one.
pub const INTEGRAL_SET_BUDGET: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum IntegralOutcome {
    Feasible(SparseWitness),
    Infeasible,
}

struct Search<'a> {
    /// Atoms in search order (mass descending, then atom order).
    order: Vec<usize>,
    /// Positive-demand sets containing each atom, in set order.
    owners: Vec<Vec<usize>>,
    /// `avail[k][j]`: mass of atoms `order[k..]` inside demand set `j`.
    avail: Vec<Vec<f64>>,
    masses: &'a [f64],
    failed: HashSet<(usize, Vec<u64>)>,
    choice: Vec<Option<usize>>,
}

impl Search<'_> {
    fn satisfied(remaining: f64) -> bool {
        remaining <= 0.0
    }

    fn run(&mut self, k: usize, remaining: &mut Vec<f64>) -> bool {
        if remaining.iter().all(|&r| Self::satisfied(r)) {
            return true;
        }
        if k == self.order.len() {
            return false;
        }
        for (j, &r) in remaining.iter().enumerate() {
            if !Self::satisfied(r) && self.avail[k][j] < r {
                return false;
            }
        }
        let key = (k, remaining.iter().map(|r| r.max(0.0).to_bits()).collect());
        if self.failed.contains(&key) {
            return false;
        }

        let atom = self.order[k];
        let mass = self.masses[atom];
        for idx in 0..self.owners[atom].len() {
            let j = self.owners[atom][idx];
            if Self::satisfied(remaining[j]) || mass <= 0.0 {
                continue;
            }
            let before = remaining[j];
            remaining[j] = before - mass;
            self.choice[atom] = Some(j);
            if self.run(k + 1, remaining) {
                return true;
            }
            remaining[j] = before;
        }
        self.choice[atom] = None;
        if self.run(k + 1, remaining) {
            return true;
        }
        self.failed.insert(key);
        false
    }
}

/// Decides whether disjoint atom sets `E_S ⊆ S` with `λ_S ≤ C·μ(E_S)` exist,
/// each atom going wholly to one set or none.
///
/// Works for either measure mode; the demand test uses the same tolerance as
/// [`verify_witness`](super::verify_witness).
pub fn sparse_witness_integral(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    c: f64,
) -> Result<IntegralOutcome> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidConstant(c));
    }
    let measure = system.measure();
    if measure.len() > INTEGRAL_ATOM_BUDGET && system.len() > INTEGRAL_SET_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "integral search size (atoms and sets)",
            count: measure.len(),
            budget: INTEGRAL_ATOM_BUDGET,
        });
    }
    if lambda.len() != system.len() {
        return Err(Error::LengthMismatch {
            expected: system.len(),
            got: lambda.len(),
        });
    }

    // Demand sets and the mass each still needs: C·μ(E_S) ≥ λ_S - tol·(1+λ_S).
    let demand_sets: Vec<usize> = (0..system.len()).filter(|&s| lambda.get(s) > 0.0).collect();
    let mut remaining: Vec<f64> = demand_sets
        .iter()
        .map(|&s| {
            let l = lambda.get(s);
            (l - TOLERANCE * (1.0 + l)) / c
        })
        .collect();

    let masses: Vec<f64> = measure.atoms().iter().map(|a| a.mass).collect();
    let mut owners = vec![Vec::new(); measure.len()];
    for (j, &s) in demand_sets.iter().enumerate() {
        for &a in system.set(s).members() {
            owners[a].push(j);
        }
    }
    let mut order: Vec<usize> = (0..measure.len())
        .filter(|&a| !owners[a].is_empty() && masses[a] > 0.0)
        .collect();
    order.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]).then(a.cmp(&b)));

    let mut avail = vec![vec![0.0; demand_sets.len()]; order.len() + 1];
    for k in (0..order.len()).rev() {
        avail[k] = avail[k + 1].clone();
        for &j in &owners[order[k]] {
            avail[k][j] += masses[order[k]];
        }
    }

    let mut search = Search {
        order,
        owners,
        avail,
        masses: &masses,
        failed: HashSet::new(),
        choice: vec![None; measure.len()],
    };
    if !search.run(0, &mut remaining) {
        return Ok(IntegralOutcome::Infeasible);
    }

    let mut assignment: IndexMap<String, IndexMap<String, f64>> = IndexMap::new();
    for (j, &s) in demand_sets.iter().enumerate() {
        let atoms: IndexMap<String, f64> = system
            .set(s)
            .members()
            .iter()
            .filter(|&&a| search.choice[a] == Some(j))
            .map(|&a| (measure.atom_id(a).to_string(), 1.0))
            .collect();
        if !atoms.is_empty() {
            assignment.insert(system.set(s).id.clone(), atoms);
        }
    }
    Ok(IntegralOutcome::Feasible(SparseWitness {
        mode: WitnessMode::Integral,
        c,
        assignment,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::gen_dyadic_cubes;
    use crate::measure::{DiscreteMeasure, Mode};
    use crate::sparse::tests::dirac;
    use crate::sparse::{sparse_witness_fractional, verify_witness, FractionalOutcome};

    #[test]
    fn point_mass_cannot_be_split() {
        let (sys, lam) = dirac(Mode::Indivisible);
        for c in [0.5, 1.0, 2.0, 10.0, 1000.0, 1e9] {
            assert_eq!(
                sparse_witness_integral(&sys, &lam, c).unwrap(),
                IntegralOutcome::Infeasible
            );
        }
    }

    #[test]
    fn disjoint_singletons_take_their_atoms() {
        let m = DiscreteMeasure::from_masses(Mode::Indivisible, &[0.4, 0.6]).unwrap();
        let sys = SetSystem::from_lists(m, &[("A", &["a0"]), ("B", &["a1"])]).unwrap();
        let lam = CoefficientFamily::by_mass(&sys);
        match sparse_witness_integral(&sys, &lam, 1.0).unwrap() {
            IntegralOutcome::Feasible(w) => {
                assert_eq!(w.fraction("A", "a0"), 1.0);
                assert_eq!(w.fraction("B", "a1"), 1.0);
                assert!(verify_witness(&sys, &lam, 1.0, &w).feasible);
            }
            IntegralOutcome::Infeasible => panic!("expected witness"),
        }
    }

    #[test]
    fn depth_one_tree_gap_between_modes() {
        // three positive demands, two atoms: 3^2 assignments, none works
        let sys = gen_dyadic_cubes(1, 1, None).unwrap();
        let lam = CoefficientFamily::by_mass(&sys);
        assert!(matches!(
            sparse_witness_fractional(&sys, &lam, 2.0).unwrap(),
            FractionalOutcome::Feasible(_)
        ));
        assert_eq!(
            sparse_witness_integral(&sys, &lam, 2.0).unwrap(),
            IntegralOutcome::Infeasible
        );
    }

    /// Tries every map atom → (set containing it | none).
    fn brute_force(sys: &SetSystem, lam: &CoefficientFamily, c: f64) -> bool {
        let n = sys.measure().len();
        let options: Vec<Vec<Option<usize>>> = (0..n)
            .map(|a| {
                let mut o = vec![None];
                o.extend(
                    (0..sys.len())
                        .filter(|&s| sys.set(s).members().contains(&a))
                        .map(Some),
                );
                o
            })
            .collect();
        let mut pick = vec![0usize; n];
        loop {
            let mut got = vec![0.0; sys.len()];
            for a in 0..n {
                if let Some(s) = options[a][pick[a]] {
                    got[s] += sys.measure().mass(a);
                }
            }
            if (0..sys.len()).all(|s| lam.get(s) <= c * got[s] + TOLERANCE * (1.0 + lam.get(s))) {
                return true;
            }
            let mut k = 0;
            loop {
                if k == n {
                    return false;
                }
                pick[k] += 1;
                if pick[k] < options[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n_atoms = rng.gen_range(1..=6);
            let n_sets = rng.gen_range(1..=4);
            let masses: Vec<f64> = (0..n_atoms).map(|_| rng.gen_range(0.0..1.0)).collect();
            let m = DiscreteMeasure::from_masses(Mode::Indivisible, &masses).unwrap();
            let sets: Vec<(String, Option<String>, Vec<String>)> = (0..n_sets)
                .map(|s| {
                    let members = (0..n_atoms)
                        .filter(|_| rng.gen_bool(0.5))
                        .map(|a| format!("a{a}"))
                        .collect();
                    (format!("S{s}"), None, members)
                })
                .collect();
            let sys = SetSystem::new(m, sets).unwrap();
            let lam = CoefficientFamily::new(
                &sys,
                (0..n_sets).map(|_| rng.gen_range(0.0..0.5)).collect(),
            )
            .unwrap();
            let c = rng.gen_range(0.5..3.0);
            let expected = brute_force(&sys, &lam, c);
            let got = sparse_witness_integral(&sys, &lam, c).unwrap();
            assert_eq!(matches!(got, IntegralOutcome::Feasible(_)), expected);
            if let IntegralOutcome::Feasible(w) = got {
                assert!(verify_witness(&sys, &lam, c, &w).feasible);
            }
        }
    }

    #[test]
    fn budget() {
        let sys = gen_dyadic_cubes(1, 5, None).unwrap();
        let lam = CoefficientFamily::by_mass(&sys);
        assert!(matches!(
            sparse_witness_integral(&sys, &lam, 6.0),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(sparse_witness_integral(&sys, &lam, 0.0).is_err());
    }
}

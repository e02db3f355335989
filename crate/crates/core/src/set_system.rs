//! Finite set systems over the atoms of a discrete measure.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// One member of the collection: an extensional list of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SetEntry {
    pub id: String,
    pub label: Option<String>,
    members: Vec<usize>,
}

impl SetEntry {
    /// Atom positions in ascending order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }
}

#[derive(Debug, Clone)]
pub struct SetSystem {
    measure: DiscreteMeasure,
    sets: Vec<SetEntry>,
    index: HashMap<String, usize>,
}

impl SetSystem {
    /// Builds a system from `(id, label, member atom ids)` triples.
    pub fn new<I, S>(measure: DiscreteMeasure, sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Option<String>, Vec<S>)>,
        S: AsRef<str>,
    {
        let mut entries = Vec::new();
        for (id, label, atoms) in sets {
            let mut members = Vec::with_capacity(atoms.len());
            for atom in &atoms {
                let atom = atom.as_ref();
                let pos = measure.position(atom).map_err(|_| Error::MissingAtom {
                    set: id.clone(),
                    atom: atom.to_string(),
                })?;
                members.push(pos);
            }
            members.sort_unstable();
            if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::RepeatedMember {
                    set: id,
                    atom: measure.atom_id(w[0]).to_string(),
                });
            }
            entries.push(SetEntry { id, label, members });
        }
        SetSystem::from_entries(measure, entries)
    }

    /// Builds a system from member positions; used by the generators.
    pub(crate) fn from_positions(
        measure: DiscreteMeasure,
        sets: Vec<(String, Option<String>, Vec<usize>)>,
    ) -> Result<Self> {
        let entries = sets
            .into_iter()
            .map(|(id, label, mut members)| {
                members.sort_unstable();
                members.dedup();
                SetEntry { id, label, members }
            })
            .collect();
        SetSystem::from_entries(measure, entries)
    }

    fn from_entries(measure: DiscreteMeasure, sets: Vec<SetEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(sets.len());
        for (i, s) in sets.iter().enumerate() {
            if let Some(&m) = s.members.last() {
                if m >= measure.len() {
                    return Err(Error::MissingAtom {
                        set: s.id.clone(),
                        atom: format!("#{m}"),
                    });
                }
            }
            if index.insert(s.id.clone(), i).is_some() {
                return Err(Error::DuplicateSet(s.id.clone()));
            }
        }
        Ok(SetSystem {
            measure,
            sets,
            index,
        })
    }

    /// Convenience constructor for unlabeled sets.
    pub fn from_lists(measure: DiscreteMeasure, sets: &[(&str, &[&str])]) -> Result<Self> {
        SetSystem::new(
            measure,
            sets.iter()
                .map(|(id, atoms)| (id.to_string(), None, atoms.to_vec())),
        )
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn sets(&self) -> &[SetEntry] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &SetEntry {
        &self.sets[i]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownSet(id.to_string()))
    }

    /// μ(S) for the set at position `i`.
    pub fn set_mass(&self, i: usize) -> f64 {
        self.measure.mass_of_indices(&self.sets[i].members)
    }

    /// Atom positions of ⋃ sub, ascending.
    pub fn union_of(&self, sub: &Subcollection) -> Result<Vec<usize>> {
        let mut hit = vec![false; self.measure.len()];
        for &s in &sub.sets {
            let entry = self
                .sets
                .get(s)
                .ok_or_else(|| Error::UnknownSet(format!("#{s}")))?;
            for &a in &entry.members {
                hit[a] = true;
            }
        }
        Ok(hit
            .iter()
            .enumerate()
            .filter_map(|(a, &h)| h.then_some(a))
            .collect())
    }

    /// μ(⋃ sub).
    pub fn union_mass(&self, sub: &Subcollection) -> Result<f64> {
        Ok(self.measure.mass_of_indices(&self.union_of(sub)?))
    }

    /// Every set whose members lie inside `omega` (atom positions).
    pub fn maximal_subcollection_inside(&self, omega: &[usize]) -> Subcollection {
        let mut inside = vec![false; self.measure.len()];
        for &a in omega {
            if let Some(slot) = inside.get_mut(a) {
                *slot = true;
            }
        }
        Subcollection {
            sets: (0..self.sets.len())
                .filter(|&s| self.sets[s].members.iter().all(|&a| inside[a]))
                .collect(),
        }
    }

    /// [`maximal_subcollection_inside`](Self::maximal_subcollection_inside) for atom ids.
    pub fn maximal_subcollection_inside_ids<'a, I>(&self, omega: I) -> Result<Subcollection>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let omega = omega
            .into_iter()
            .map(|id| self.measure.position(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.maximal_subcollection_inside(&omega))
    }

    /// `true` when `a`'s members are a subset of `b`'s.
    pub fn is_subset(&self, a: usize, b: usize) -> bool {
        is_sorted_subset(&self.sets[a].members, &self.sets[b].members)
    }

    /// `true` when the two sets share an atom.
    pub fn intersects(&self, a: usize, b: usize) -> bool {
        let (x, y) = (&self.sets[a].members, &self.sets[b].members);
        let (mut i, mut j) = (0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// First pair of sets that overlap without either containing the other.
    pub fn find_crossing_pair(&self) -> Option<(usize, usize)> {
        for a in 0..self.sets.len() {
            for b in a + 1..self.sets.len() {
                if self.intersects(a, b) && !self.is_subset(a, b) && !self.is_subset(b, a) {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut j = 0;
    for &x in small {
        while j < big.len() && big[j] < x {
            j += 1;
        }
        if j == big.len() || big[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// A subcollection 𝒮′ ⊆ 𝒮, held as ascending set positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Subcollection {
    sets: Vec<usize>,
}

impl Subcollection {
    pub fn from_indices(mut sets: Vec<usize>) -> Self {
        sets.sort_unstable();
        sets.dedup();
        Subcollection { sets }
    }

    pub fn from_ids<'a, I>(system: &SetSystem, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let sets = ids
            .into_iter()
            .map(|id| system.position(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subcollection::from_indices(sets))
    }

    pub fn all(system: &SetSystem) -> Self {
        Subcollection {
            sets: (0..system.len()).collect(),
        }
    }

    pub fn empty() -> Self {
        Subcollection::default()
    }

    pub fn singleton(set: usize) -> Self {
        Subcollection { sets: vec![set] }
    }

    pub fn indices(&self) -> &[usize] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, set: usize) -> bool {
        self.sets.binary_search(&set).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subcollection) -> bool {
        is_sorted_subset(&self.sets, &other.sets)
    }

    /// Set ids in system order.
    pub fn ids<'a>(&self, system: &'a SetSystem) -> Vec<&'a str> {
        self.sets
            .iter()
            .map(|&s| system.set(s).id.as_str())
            .collect()
    }

    /// Set ids sorted lexicographically; the key for deterministic tie-breaking.
    pub fn sorted_ids(&self, system: &SetSystem) -> Vec<String> {
        let mut ids: Vec<String> = self.ids(system).into_iter().map(String::from).collect();
        ids.sort();
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Mode;

    fn small() -> SetSystem {
        let m = DiscreteMeasure::from_masses(Mode::Divisible, &[0.5, 0.5]).unwrap();
        SetSystem::from_lists(m, &[("S1", &["a0"]), ("S2", &["a0", "a1"])]).unwrap()
    }

    #[test]
    fn union_examples() {
        let sys = small();
        assert!(sys.union_of(&Subcollection::empty()).unwrap().is_empty());
        let s1 = Subcollection::from_ids(&sys, ["S1"]).unwrap();
        assert_eq!(sys.union_of(&s1).unwrap(), vec![0]);
        let both = Subcollection::from_ids(&sys, ["S1", "S2"]).unwrap();
        assert_eq!(sys.union_of(&both).unwrap(), vec![0, 1]);
        assert!(matches!(
            Subcollection::from_ids(&sys, ["S9"]),
            Err(Error::UnknownSet(_))
        ));
        assert!(sys.union_of(&Subcollection::singleton(7)).is_err());
    }

    #[test]
    fn maximal_inside_examples() {
        let sys = small();
        assert_eq!(
            sys.maximal_subcollection_inside(&[0, 1]),
            Subcollection::all(&sys)
        );
        assert!(sys.maximal_subcollection_inside(&[]).is_empty());
        let only = sys.maximal_subcollection_inside_ids(["a0"]).unwrap();
        assert_eq!(only.ids(&sys), vec!["S1"]);
    }

    #[test]
    fn empty_sets_sit_inside_everything() {
        let m = DiscreteMeasure::from_masses(Mode::Divisible, &[1.0]).unwrap();
        let sys = SetSystem::from_lists(m, &[("E", &[]), ("S", &["a0"])]).unwrap();
        assert_eq!(sys.maximal_subcollection_inside(&[]).ids(&sys), vec!["E"]);
    }

    #[test]
    fn validation_errors() {
        let m = DiscreteMeasure::from_masses(Mode::Divisible, &[1.0]).unwrap();
        match SetSystem::from_lists(m.clone(), &[("S", &["a0", "ghost"])]) {
            Err(Error::MissingAtom { set, atom }) => {
                assert_eq!(set, "S");
                assert_eq!(atom, "ghost");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            SetSystem::from_lists(m.clone(), &[("S", &["a0"]), ("S", &["a0"])]),
            Err(Error::DuplicateSet(_))
        ));
        assert!(matches!(
            SetSystem::from_lists(m, &[("S", &["a0", "a0"])]),
            Err(Error::RepeatedMember { .. })
        ));
    }

    #[test]
    fn duplicate_member_lists_are_allowed() {
        let m = DiscreteMeasure::from_masses(Mode::Indivisible, &[1.0]).unwrap();
        let sys = SetSystem::from_lists(m, &[("S1", &["a0"]), ("S2", &["a0"])]).unwrap();
        assert_eq!(sys.len(), 2);
        assert!(sys.find_crossing_pair().is_none());
    }
}

//! Finite discrete measures and the integrals taken against them.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::is_nonneg_finite;

/// Whether atom mass may be split between several sets.
///
/// `Divisible` stands in for a measure without point masses; `Indivisible`
/// treats every atom as a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Divisible,
    Indivisible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub id: String,
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl Atom {
    pub fn new(id: impl Into<String>, mass: f64) -> Self {
        Atom {
            id: id.into(),
            mass,
            coords: None,
        }
    }

    pub fn with_coords(mut self, coords: Vec<f64>) -> Self {
        self.coords = Some(coords);
        self
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    mode: Mode,
    atoms: Vec<Atom>,
}

/// A measure on a finite ordered atom universe.
///
/// Atom order is fixed at construction and drives every deterministic
/// iteration in the crate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MeasureDoc", into = "MeasureDoc")]
pub struct DiscreteMeasure {
    mode: Mode,
    atoms: Vec<Atom>,
    index: HashMap<String, usize>,
}

impl TryFrom<MeasureDoc> for DiscreteMeasure {
    type Error = Error;

    fn try_from(doc: MeasureDoc) -> Result<Self> {
        DiscreteMeasure::new(doc.mode, doc.atoms)
    }
}

impl From<DiscreteMeasure> for MeasureDoc {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureDoc {
            mode: m.mode,
            atoms: m.atoms,
        }
    }
}

impl PartialEq for DiscreteMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode && self.atoms == other.atoms
    }
}

impl DiscreteMeasure {
    pub fn new(mode: Mode, atoms: Vec<Atom>) -> Result<Self> {
        let mut index = HashMap::with_capacity(atoms.len());
        for (i, atom) in atoms.iter().enumerate() {
            if !is_nonneg_finite(atom.mass) {
                return Err(Error::InvalidMass {
                    id: atom.id.clone(),
                    mass: atom.mass,
                });
            }
            if index.insert(atom.id.clone(), i).is_some() {
                return Err(Error::DuplicateAtom(atom.id.clone()));
            }
        }
        Ok(DiscreteMeasure { mode, atoms, index })
    }

    /// Atoms named `a0, a1, ...` with the given masses.
    pub fn from_masses(mode: Mode, masses: &[f64]) -> Result<Self> {
        let atoms = masses
            .iter()
            .enumerate()
            .map(|(i, &m)| Atom::new(format!("a{i}"), m))
            .collect();
        DiscreteMeasure::new(mode, atoms)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self, atom: usize) -> f64 {
        self.atoms[atom].mass
    }

    pub fn atom_id(&self, atom: usize) -> &str {
        &self.atoms[atom].id
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownAtom(id.to_string()))
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// μ of a set of atoms given by id.
    pub fn mass_of<'a, I>(&self, ids: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut total = 0.0;
        for id in ids {
            total += self.atoms[self.position(id)?].mass;
        }
        Ok(total)
    }

    /// μ of a set of atoms given by position.
    pub fn mass_of_indices(&self, atoms: &[usize]) -> f64 {
        atoms.iter().map(|&i| self.atoms[i].mass).sum()
    }

    /// Σ f(atom)·mass(atom).
    pub fn direct_integral(&self, f: &StepFunction) -> Result<f64> {
        let mut total = 0.0;
        for (id, &v) in &f.values {
            total += v * self.atoms[self.position(id)?].mass;
        }
        Ok(total)
    }

    /// ∫ f dμ evaluated as ∫₀^∞ μ(f > t) dt.
    ///
    /// For a step function the outer integral is a finite sum over the
    /// distinct values `0 = t_0 < t_1 < ... < t_m`:
    /// `Σ_j (t_j - t_{j-1}) · μ(f > t_{j-1})`.
    pub fn layer_cake_integral(&self, f: &StepFunction) -> Result<f64> {
        let mut levels: Vec<(f64, f64)> = Vec::with_capacity(f.values.len());
        for (id, &v) in &f.values {
            let mass = self.atoms[self.position(id)?].mass;
            if v > 0.0 {
                levels.push((v, mass));
            }
        }
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));

        // tail[k] = μ(f >= levels[k].0) restricted to the positive part.
        let mut tail = vec![0.0; levels.len() + 1];
        for k in (0..levels.len()).rev() {
            tail[k] = tail[k + 1] + levels[k].1;
        }

        let mut total = 0.0;
        let mut prev = 0.0;
        let mut k = 0;
        while k < levels.len() {
            let t = levels[k].0;
            // μ(f > prev) is the mass of every atom at level >= t.
            total += (t - prev) * tail[k];
            prev = t;
            while k < levels.len() && levels[k].0 == t {
                k += 1;
            }
        }
        Ok(total)
    }
}

/// A nonnegative function on the atoms, keyed by atom id; absent ids read as 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<String, f64>", into = "IndexMap<String, f64>")]
pub struct StepFunction {
    values: IndexMap<String, f64>,
}

impl TryFrom<IndexMap<String, f64>> for StepFunction {
    type Error = Error;

    fn try_from(values: IndexMap<String, f64>) -> Result<Self> {
        for (id, &v) in &values {
            if !is_nonneg_finite(v) {
                return Err(Error::InvalidValue {
                    id: id.clone(),
                    value: v,
                });
            }
        }
        Ok(StepFunction { values })
    }
}

impl From<StepFunction> for IndexMap<String, f64> {
    fn from(f: StepFunction) -> Self {
        f.values
    }
}

impl StepFunction {
    pub fn new<I, K>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        StepFunction::try_from(
            values
                .into_iter()
                .map(|(k, v)| (k.into(), v))
                .collect::<IndexMap<_, _>>(),
        )
    }

    pub fn zero() -> Self {
        StepFunction::default()
    }

    pub fn get(&self, id: &str) -> f64 {
        self.values.get(id).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid4() -> DiscreteMeasure {
        DiscreteMeasure::from_masses(Mode::Divisible, &[0.25; 4]).unwrap()
    }

    #[test]
    fn total_mass_examples() {
        let empty = DiscreteMeasure::new(Mode::Divisible, vec![]).unwrap();
        assert_eq!(empty.total_mass(), 0.0);
        assert_eq!(grid4().total_mass(), 1.0);
        let two = DiscreteMeasure::from_masses(Mode::Indivisible, &[1.5, 2.5]).unwrap();
        assert_eq!(two.total_mass(), 4.0);
    }

    #[test]
    fn mass_of_examples() {
        let m = grid4();
        assert_eq!(m.mass_of([]).unwrap(), 0.0);
        assert_eq!(m.mass_of(["a0", "a1", "a2", "a3"]).unwrap(), 1.0);
        assert_eq!(m.mass_of(["a1", "a3"]).unwrap(), 0.5);
        match m.mass_of(["a1", "zz"]) {
            Err(Error::UnknownAtom(id)) => assert_eq!(id, "zz"),
            other => panic!("expected unknown atom, got {other:?}"),
        }
    }

    #[test]
    fn direct_integral_examples() {
        let m = grid4();
        assert_eq!(m.direct_integral(&StepFunction::zero()).unwrap(), 0.0);
        let one = StepFunction::new(m.atoms().iter().map(|a| (a.id.clone(), 1.0))).unwrap();
        assert_eq!(m.direct_integral(&one).unwrap(), m.total_mass());
        let f = StepFunction::new([("a0", 2.0)]).unwrap();
        assert_eq!(m.direct_integral(&f).unwrap(), 0.5);
        let bad = StepFunction::new([("nope", 1.0)]).unwrap();
        assert!(matches!(
            m.direct_integral(&bad),
            Err(Error::UnknownAtom(_))
        ));
    }

    #[test]
    fn layer_cake_examples() {
        let m = grid4();
        assert_eq!(m.layer_cake_integral(&StepFunction::zero()).unwrap(), 0.0);

        let halves = DiscreteMeasure::from_masses(Mode::Divisible, &[0.5, 0.5]).unwrap();
        let f = StepFunction::new([("a0", 1.0), ("a1", 1.0)]).unwrap();
        assert_eq!(halves.layer_cake_integral(&f).unwrap(), 1.0);

        let quarters = DiscreteMeasure::from_masses(Mode::Divisible, &[0.25, 0.25]).unwrap();
        let f = StepFunction::new([("a0", 2.0), ("a1", 1.0)]).unwrap();
        let direct = quarters.direct_integral(&f).unwrap();
        assert_eq!(direct, 0.75);
        assert_eq!(quarters.layer_cake_integral(&f).unwrap(), direct);
    }

    #[test]
    fn rejects_bad_atoms() {
        let dup = vec![Atom::new("x", 1.0), Atom::new("x", 2.0)];
        assert!(matches!(
            DiscreteMeasure::new(Mode::Divisible, dup),
            Err(Error::DuplicateAtom(_))
        ));
        let neg = vec![Atom::new("x", -1.0)];
        assert!(matches!(
            DiscreteMeasure::new(Mode::Divisible, neg),
            Err(Error::InvalidMass { .. })
        ));
        assert!(StepFunction::new([("x", -0.5)]).is_err());
    }

    #[test]
    fn json_shape() {
        let m = DiscreteMeasure::new(
            Mode::Indivisible,
            vec![Atom::new("p", 1.0).with_coords(vec![0.0, 0.5])],
        )
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"mode":"indivisible","atoms":[{"id":"p","mass":1.0,"coords":[0.0,0.5]}]}"#
        );
        let back: DiscreteMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<DiscreteMeasure>(
            r#"{"mode":"divisible","atoms":[],"extra":1}"#
        )
        .is_err());
    }
}

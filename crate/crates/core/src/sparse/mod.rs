//! Sparse witnesses: pairwise disjoint `E_S ⊆ S` with `λ_S ≤ C·μ(E_S)`.
//!
//! On a divisible measure a witness is a fractional assignment of atom mass,
//! and its existence is a flow feasibility question:
//!
//! ```text
//! source --λ_S/C--> set S --unbounded--> atom a --mass(a)--> sink   (a ∈ S)
//! ```
//!
//! The flow saturates the source arcs exactly when every subcollection
//! satisfies `Σλ ≤ C·μ(⋃)`; otherwise the sets on the source side of the
//! minimal min cut form a violating subcollection. Saturation at the
//! Carleson constant itself is what makes the two constants coincide.

mod integral;
mod verify;

pub use integral::{
    sparse_witness_integral, IntegralOutcome, INTEGRAL_ATOM_BUDGET, INTEGRAL_SET_BUDGET,
};
pub use verify::{
    sparse_implies_carleson_check, verify_witness, ChainCheck, ChainFailure, SetRow, WitnessReport,
    WitnessViolation,
};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::carleson::{
    carleson_ratio, ratio_search_start, CertificateKind, CoefficientFamily, CutCertificate,
};
use crate::error::{Error, Result};
use crate::flow::{self, Capacity, FlowNetwork, FlowResult};
use crate::measure::Mode;
use crate::numeric::TIE_EPS;
use crate::set_system::{SetSystem, Subcollection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessMode {
    Fractional,
    Integral,
}

/// Per set, the fraction of each atom's mass assigned to `E_S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseWitness {
    pub mode: WitnessMode,
    #[serde(rename = "C")]
    pub c: f64,
    pub assignment: IndexMap<String, IndexMap<String, f64>>,
}

impl SparseWitness {
    pub fn empty(mode: WitnessMode, c: f64) -> Self {
        SparseWitness {
            mode,
            c,
            assignment: IndexMap::new(),
        }
    }

    pub fn fraction(&self, set: &str, atom: &str) -> f64 {
        self.assignment
            .get(set)
            .and_then(|m| m.get(atom))
            .copied()
            .unwrap_or(0.0)
    }
}

/// The witness flow network for one constant.
#[derive(Debug, Clone)]
pub struct SparseNetwork {
    pub network: FlowNetwork,
    /// `(node, set position)` for each set with `λ_S > 0`.
    pub set_nodes: Vec<(usize, usize)>,
    /// `(arc, set position, atom position)` for each set-to-atom arc.
    pub member_arcs: Vec<(usize, usize, usize)>,
}

impl SparseNetwork {
    /// Node 0 is the source, node 1 the sink, then one node per positive set
    /// (set order), then one node per atom (atom order). Sets with `λ_S = 0`
    /// need no mass and are left out.
    pub fn build(system: &SetSystem, lambda: &CoefficientFamily, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidConstant(c));
        }
        if lambda.len() != system.len() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                got: lambda.len(),
            });
        }
        let positive: Vec<usize> = (0..system.len()).filter(|&s| lambda.get(s) > 0.0).collect();
        let atom_base = 2 + positive.len();
        let measure = system.measure();
        let mut network = FlowNetwork::new(atom_base + measure.len(), 0, 1)?;

        let mut set_nodes = Vec::with_capacity(positive.len());
        for (k, &s) in positive.iter().enumerate() {
            network.add_arc(0, 2 + k, Capacity::Finite(lambda.get(s) / c))?;
            set_nodes.push((2 + k, s));
        }
        let mut member_arcs = Vec::new();
        for (k, &s) in positive.iter().enumerate() {
            for &a in system.set(s).members() {
                let arc = network.add_arc(2 + k, atom_base + a, Capacity::Unbounded)?;
                member_arcs.push((arc, s, a));
            }
        }
        for a in 0..measure.len() {
            network.add_arc(atom_base + a, 1, Capacity::Finite(measure.mass(a)))?;
        }
        Ok(SparseNetwork {
            network,
            set_nodes,
            member_arcs,
        })
    }

    /// Sets whose nodes are reachable from the source in the final residual graph.
    pub fn source_side_sets(&self, result: &FlowResult) -> Subcollection {
        Subcollection::from_indices(
            self.set_nodes
                .iter()
                .filter(|(node, _)| result.source_side[*node])
                .map(|&(_, s)| s)
                .collect(),
        )
    }

    fn witness(&self, system: &SetSystem, result: &FlowResult, c: f64) -> SparseWitness {
        let measure = system.measure();
        let mut assignment: IndexMap<String, IndexMap<String, f64>> = IndexMap::new();
        for &(arc, s, a) in &self.member_arcs {
            let mass = measure.mass(a);
            let flow = result.flows[arc];
            if mass == 0.0 || flow <= 0.0 {
                continue;
            }
            assignment
                .entry(system.set(s).id.clone())
                .or_default()
                .insert(measure.atom_id(a).to_string(), (flow / mass).min(1.0));
        }
        SparseWitness {
            mode: WitnessMode::Fractional,
            c,
            assignment,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FractionalOutcome {
    Feasible(SparseWitness),
    Infeasible(CutCertificate),
}

/// Solves the witness flow at constant `c` on a divisible measure.
///
/// Infeasibility is decided by the cut: the source-side sets must have a
/// ratio strictly above `c`, and that subcollection is returned as a
/// violation certificate.
pub fn sparse_witness_fractional(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    c: f64,
) -> Result<FractionalOutcome> {
    sparse_witness_fractional_traced(system, lambda, c).map(|(outcome, _)| outcome)
}

/// [`sparse_witness_fractional`] that also hands back the solved network.
pub fn sparse_witness_fractional_traced(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    c: f64,
) -> Result<(FractionalOutcome, (SparseNetwork, FlowResult))> {
    if system.measure().mode() != Mode::Divisible {
        return Err(Error::IndivisibleMeasure);
    }
    let net = SparseNetwork::build(system, lambda, c)?;
    let result = flow::max_flow(&net.network)?;
    let cut = net.source_side_sets(&result);
    if !cut.is_empty() {
        let ratio = carleson_ratio(system, lambda, &cut)?;
        if ratio > c * (1.0 + TIE_EPS) {
            let cert = CutCertificate {
                subcollection: cut,
                ratio,
                kind: CertificateKind::Violation,
            };
            return Ok((FractionalOutcome::Infeasible(cert), (net, result)));
        }
    }
    if !result.saturates_source(&net.network) {
        return Err(Error::Numerical(format!(
            "flow {} short of demand {} without a violating cut",
            result.value,
            net.network.source_capacity()
        )));
    }
    let witness = net.witness(system, &result, c);
    Ok((FractionalOutcome::Feasible(witness), (net, result)))
}

/// The least `C` admitting a fractional witness, with that witness.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalSparse {
    pub constant: f64,
    /// `None` when the constant is infinite.
    pub witness: Option<SparseWitness>,
    /// Extremal certificate at the constant, or the violation that makes it infinite.
    pub certificate: CutCertificate,
    pub iterations: usize,
}

/// Raises `C` along the violation certificates of
/// [`sparse_witness_fractional`] until a witness exists.
pub fn minimal_sparse_witness(
    system: &SetSystem,
    lambda: &CoefficientFamily,
) -> Result<MinimalSparse> {
    if system.measure().mode() != Mode::Divisible {
        return Err(Error::IndivisibleMeasure);
    }
    let mut cert = match ratio_search_start(system, lambda)? {
        Ok(cert) => cert,
        Err(done) => {
            let witness =
                (done.constant == 0.0).then(|| SparseWitness::empty(WitnessMode::Fractional, 0.0));
            return Ok(MinimalSparse {
                constant: done.constant,
                witness,
                certificate: done.certificate,
                iterations: 0,
            });
        }
    };
    let limit = system.len() + 1;
    for iterations in 1..=limit {
        let c = cert.ratio;
        match sparse_witness_fractional(system, lambda, c)? {
            FractionalOutcome::Feasible(witness) => {
                return Ok(MinimalSparse {
                    constant: c,
                    witness: Some(witness),
                    certificate: CutCertificate {
                        kind: CertificateKind::Extremal,
                        ..cert
                    },
                    iterations,
                });
            }
            FractionalOutcome::Infeasible(next) => {
                if next.ratio <= c {
                    return Err(Error::Numerical(format!(
                        "violation ratio {} does not exceed {c}",
                        next.ratio
                    )));
                }
                cert = next;
            }
        }
    }
    Err(Error::NoConvergence(limit))
}

/// Infimum of the constants at which a fractional witness exists.
pub fn minimal_sparse_constant(system: &SetSystem, lambda: &CoefficientFamily) -> Result<f64> {
    minimal_sparse_witness(system, lambda).map(|m| m.constant)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::carleson::carleson_constant;
    use crate::dyadic::gen_dyadic_cubes;
    use crate::measure::DiscreteMeasure;

    pub(crate) fn dirac(mode: Mode) -> (SetSystem, CoefficientFamily) {
        let m = DiscreteMeasure::from_masses(mode, &[1.0]).unwrap();
        let sys = SetSystem::from_lists(m, &[("S1", &["a0"]), ("S2", &["a0"])]).unwrap();
        let lambda = CoefficientFamily::unit(&sys);
        (sys, lambda)
    }

    #[test]
    fn disjoint_sets_saturate() {
        let m = DiscreteMeasure::from_masses(Mode::Divisible, &[0.3, 0.7]).unwrap();
        let sys = SetSystem::from_lists(m, &[("A", &["a0"]), ("B", &["a1"])]).unwrap();
        let lam = CoefficientFamily::by_mass(&sys);
        match sparse_witness_fractional(&sys, &lam, 1.0).unwrap() {
            FractionalOutcome::Feasible(w) => {
                assert_eq!(w.fraction("A", "a0"), 1.0);
                assert_eq!(w.fraction("B", "a1"), 1.0);
                assert_eq!(w.fraction("A", "a1"), 0.0);
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn dyadic_tree_at_three() {
        let sys = gen_dyadic_cubes(1, 2, None).unwrap();
        let lam = CoefficientFamily::by_mass(&sys);
        let w = match sparse_witness_fractional(&sys, &lam, 3.0).unwrap() {
            FractionalOutcome::Feasible(w) => w,
            other => panic!("expected witness, got {other:?}"),
        };
        let report = verify_witness(&sys, &lam, 3.0, &w);
        assert!(report.feasible, "{report:?}");
        // every atom is fully used: total demand equals total mass
        let used: f64 = report.rows.iter().map(|r| r.achieved_mass).sum();
        assert!((used - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_below_constant_is_cut() {
        let (sys, lam) = dirac(Mode::Divisible);
        match sparse_witness_fractional(&sys, &lam, 1.5).unwrap() {
            FractionalOutcome::Infeasible(cert) => {
                assert_eq!(cert.subcollection.ids(&sys), vec!["S1", "S2"]);
                assert_eq!(cert.ratio, 2.0);
                assert_eq!(cert.kind, CertificateKind::Violation);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn dirac_splits_in_half() {
        let (sys, lam) = dirac(Mode::Divisible);
        let m = minimal_sparse_witness(&sys, &lam).unwrap();
        assert_eq!(m.constant, 2.0);
        let w = m.witness.unwrap();
        assert_eq!(w.fraction("S1", "a0"), 0.5);
        assert_eq!(w.fraction("S2", "a0"), 0.5);
    }

    #[test]
    fn minimal_constant_examples() {
        let sys = gen_dyadic_cubes(1, 2, None).unwrap();
        let lam = CoefficientFamily::by_mass(&sys);
        let c = minimal_sparse_constant(&sys, &lam).unwrap();
        assert!((c - 3.0).abs() < 1e-12);
        assert_eq!(
            minimal_sparse_constant(&sys, &CoefficientFamily::zero(&sys)).unwrap(),
            0.0
        );
        assert_eq!(c, carleson_constant(&sys, &lam).unwrap().0);
    }

    #[test]
    fn rejects_indivisible_and_bad_constants() {
        let (sys, lam) = dirac(Mode::Indivisible);
        assert!(matches!(
            sparse_witness_fractional(&sys, &lam, 2.0),
            Err(Error::IndivisibleMeasure)
        ));
        assert!(minimal_sparse_constant(&sys, &lam).is_err());
        let (sys, lam) = dirac(Mode::Divisible);
        for c in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                sparse_witness_fractional(&sys, &lam, c),
                Err(Error::InvalidConstant(_))
            ));
        }
    }

    #[test]
    fn zero_mass_positive_set_is_infeasible() {
        let m = DiscreteMeasure::from_masses(Mode::Divisible, &[1.0, 0.0]).unwrap();
        let sys = SetSystem::from_lists(m, &[("A", &["a0"]), ("Z", &["a1"])]).unwrap();
        let lam = CoefficientFamily::new(&sys, vec![0.5, 0.5]).unwrap();
        match sparse_witness_fractional(&sys, &lam, 100.0).unwrap() {
            FractionalOutcome::Infeasible(cert) => {
                assert!(cert.ratio.is_infinite());
                assert_eq!(cert.subcollection.ids(&sys), vec!["Z"]);
            }
            other => panic!("expected violation, got {other:?}"),
        }
        let m = minimal_sparse_witness(&sys, &lam).unwrap();
        assert!(m.constant.is_infinite());
        assert!(m.witness.is_none());
    }

    #[test]
    fn witness_json_shape() {
        let (sys, lam) = dirac(Mode::Divisible);
        let w = minimal_sparse_witness(&sys, &lam).unwrap().witness.unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(
            s,
            r#"{"mode":"fractional","C":2.0,"assignment":{"S1":{"a0":0.5},"S2":{"a0":0.5}}}"#
        );
        assert_eq!(serde_json::from_str::<SparseWitness>(&s).unwrap(), w);
    }
}

//! The Carleson condition and its constant.
//!
//! A coefficient family `λ` is Carleson with constant `C` when every
//! subcollection `𝒮′` satisfies `Σ_{S∈𝒮′} λ_S ≤ C·μ(⋃𝒮′)`. The least such
//! `C` is the supremum of the subcollection ratios, computed here three ways:
//!
//! * [`carleson_constant_exact`] enumerates every nonempty subcollection;
//! * [`carleson_constant_via_unions`] enumerates unions `Ω` and counts every
//!   set inside `Ω`;
//! * [`carleson_constant`] runs a ratio search over min cuts and scales to
//!   thousands of sets.

mod dual;
mod dyadic;

pub use dual::{
    change_of_variable, dual_estimate_check, dual_pairing, dual_ratio, upper_envelope, DualCheck,
};
pub use dyadic::{
    dyadic_reduction_check, ensure_dyadic, f_infty_1_norm, per_cube_carleson_sup, reweight_by_mass,
    DyadicReductionReport,
};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow;
use crate::numeric::{is_nonneg_finite, TIE_EPS};
use crate::set_system::{SetSystem, Subcollection};
use crate::sparse::SparseNetwork;

/// Default cap on the number of sets for enumeration-based methods.
pub const DEFAULT_BUDGET: usize = 20;

macro_rules! dense_family {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            values: Vec<f64>,
        }

        impl $name {
            /// One value per set, in system order.
            pub fn new(system: &SetSystem, values: Vec<f64>) -> Result<Self> {
                if values.len() != system.len() {
                    return Err(Error::LengthMismatch {
                        expected: system.len(),
                        got: values.len(),
                    });
                }
                for (i, &v) in values.iter().enumerate() {
                    if !is_nonneg_finite(v) {
                        return Err(Error::InvalidCoefficient {
                            id: system.set(i).id.clone(),
                            value: v,
                        });
                    }
                }
                Ok($name { values })
            }

            /// Values keyed by set id; ids not listed read as 0.
            pub fn from_map<'a, I>(system: &SetSystem, entries: I) -> Result<Self>
            where
                I: IntoIterator<Item = (&'a str, f64)>,
            {
                let mut values = vec![0.0; system.len()];
                for (id, v) in entries {
                    values[system.position(id)?] = v;
                }
                $name::new(system, values)
            }

            pub fn zero(system: &SetSystem) -> Self {
                $name {
                    values: vec![0.0; system.len()],
                }
            }

            /// 1 on `sub`, 0 elsewhere.
            pub fn indicator(system: &SetSystem, sub: &Subcollection) -> Self {
                let mut values = vec![0.0; system.len()];
                for &s in sub.indices() {
                    values[s] = 1.0;
                }
                $name { values }
            }

            pub fn get(&self, set: usize) -> f64 {
                self.values.get(set).copied().unwrap_or(0.0)
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn scaled(&self, s: f64) -> Self {
                $name {
                    values: self.values.iter().map(|v| v * s).collect(),
                }
            }

            pub fn is_zero(&self) -> bool {
                self.values.iter().all(|&v| v == 0.0)
            }
        }
    };
}

dense_family! {
    /// Nonnegative coefficients `λ_S`, one per set.
    CoefficientFamily
}

dense_family! {
    /// Nonnegative test coefficients `a_S` for the dual estimate.
    TestFamily
}

impl CoefficientFamily {
    /// `λ_S = μ(S)`.
    pub fn by_mass(system: &SetSystem) -> Self {
        CoefficientFamily {
            values: (0..system.len()).map(|i| system.set_mass(i)).collect(),
        }
    }

    /// `λ_S = 1`.
    pub fn unit(system: &SetSystem) -> Self {
        CoefficientFamily {
            values: vec![1.0; system.len()],
        }
    }

    /// Copy without the set at position `set`, for use with a system that
    /// dropped the same set.
    pub fn without(&self, set: usize) -> Self {
        let mut values = self.values.clone();
        values.remove(set);
        CoefficientFamily { values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    /// The subcollection attains the constant.
    Extremal,
    /// The subcollection breaks the condition at a candidate constant.
    Violation,
}

/// A subcollection together with its ratio `Σλ / μ(⋃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutCertificate {
    pub subcollection: Subcollection,
    pub ratio: f64,
    pub kind: CertificateKind,
}

impl CutCertificate {
    pub fn to_doc(&self, system: &SetSystem, constant: f64) -> CertificateDoc {
        CertificateDoc {
            constant,
            subcollection: self
                .subcollection
                .ids(system)
                .into_iter()
                .map(String::from)
                .collect(),
            ratio: self.ratio,
            kind: self.kind,
        }
    }

    fn with_kind(mut self, kind: CertificateKind) -> Self {
        self.kind = kind;
        self
    }
}

/// JSON form of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    #[serde(with = "crate::numeric::extended")]
    pub constant: f64,
    pub subcollection: Vec<String>,
    #[serde(with = "crate::numeric::extended")]
    pub ratio: f64,
    pub kind: CertificateKind,
}

fn ratio_of(numerator: f64, mass: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else if mass == 0.0 {
        f64::INFINITY
    } else {
        numerator / mass
    }
}

/// `Σ_{S∈sub} λ_S / μ(⋃ sub)`; `+inf` on a zero-mass union with positive
/// numerator, 0 when the numerator vanishes.
pub fn carleson_ratio(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    sub: &Subcollection,
) -> Result<f64> {
    if sub.is_empty() {
        return Err(Error::EmptySubcollection);
    }
    let mass = system.union_mass(sub)?;
    let numerator: f64 = sub.indices().iter().map(|&s| lambda.get(s)).sum();
    Ok(ratio_of(numerator, mass))
}

fn certificate(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    sub: Subcollection,
    kind: CertificateKind,
) -> Result<CutCertificate> {
    let ratio = carleson_ratio(system, lambda, &sub)?;
    Ok(CutCertificate {
        subcollection: sub,
        ratio,
        kind,
    })
}

fn check_budget(system: &SetSystem, budget: usize) -> Result<()> {
    if system.is_empty() {
        return Err(Error::EmptySystem);
    }
    if system.len() > budget {
        return Err(Error::BudgetExceeded {
            what: "set count",
            count: system.len(),
            budget,
        });
    }
    Ok(())
}

/// Depth-first walk over every nonempty subcollection, in a fixed order.
///
/// The callback sees the chosen set positions, the per-atom cover counts and
/// the union mass (accumulated along the path).
pub(crate) fn for_each_subcollection(
    system: &SetSystem,
    mut visit: impl FnMut(&[usize], &[u32], f64),
) {
    type Visit<'a> = dyn FnMut(&[usize], &[u32], f64) + 'a;

    fn rec(
        system: &SetSystem,
        i: usize,
        chosen: &mut Vec<usize>,
        cover: &mut Vec<u32>,
        mass: f64,
        visit: &mut Visit<'_>,
    ) {
        if i == system.len() {
            if !chosen.is_empty() {
                visit(chosen, cover, mass);
            }
            return;
        }
        rec(system, i + 1, chosen, cover, mass, visit);

        let members = system.set(i).members();
        let mut grown = mass;
        for &a in members {
            if cover[a] == 0 {
                grown += system.measure().mass(a);
            }
            cover[a] += 1;
        }
        chosen.push(i);
        rec(system, i + 1, chosen, cover, grown, visit);
        chosen.pop();
        for &a in members {
            cover[a] -= 1;
        }
    }
    let mut cover = vec![0u32; system.measure().len()];
    rec(system, 0, &mut Vec::new(), &mut cover, 0.0, &mut visit);
}

/// Lexicographic rank of each set id.
fn id_ranks(system: &SetSystem) -> Vec<usize> {
    let mut order: Vec<usize> = (0..system.len()).collect();
    order.sort_by(|&a, &b| system.set(a).id.cmp(&system.set(b).id));
    let mut rank = vec![0; system.len()];
    for (r, &s) in order.iter().enumerate() {
        rank[s] = r;
    }
    rank
}

fn rank_key(chosen: &[usize], ranks: &[usize]) -> Vec<usize> {
    let mut key: Vec<usize> = chosen.iter().map(|&s| ranks[s]).collect();
    key.sort_unstable();
    key
}

/// Compares ratios, treating values within [`TIE_EPS`] as tied.
fn cmp_ratio(a: f64, b: f64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    if a.is_infinite() || b.is_infinite() {
        return a.total_cmp(&b);
    }
    if (a - b).abs() <= TIE_EPS * (1.0 + a.abs().max(b.abs())) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Maximizes the subcollection ratio over all `2^n - 1` nonempty
/// subcollections. Ties go to the lexicographically smallest sorted id list.
pub fn carleson_constant_exact(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    budget: usize,
) -> Result<(f64, CutCertificate)> {
    check_budget(system, budget)?;
    let ranks = id_ranks(system);
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for_each_subcollection(system, |chosen, _, mass| {
        let numerator: f64 = chosen.iter().map(|&s| lambda.get(s)).sum();
        let ratio = ratio_of(numerator, mass);
        let replace = match &best {
            None => true,
            Some((r, _, key)) => match cmp_ratio(ratio, *r) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => rank_key(chosen, &ranks) < *key,
            },
        };
        if replace {
            best = Some((ratio, chosen.to_vec(), rank_key(chosen, &ranks)));
        }
    });
    let (_, chosen, _) = best.ok_or(Error::EmptySystem)?;
    let cert = certificate(
        system,
        lambda,
        Subcollection::from_indices(chosen),
        CertificateKind::Extremal,
    )?;
    Ok((cert.ratio, cert))
}

/// Maximizes `Σ_{S⊆Ω} λ_S / μ(Ω)` over the unions `Ω` of nonempty
/// subcollections.
pub fn carleson_constant_via_unions(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    budget: usize,
) -> Result<f64> {
    check_budget(system, budget)?;
    let mut best = 0.0f64;
    for_each_subcollection(system, |_, cover, _| {
        let omega: Vec<usize> = cover
            .iter()
            .enumerate()
            .filter_map(|(a, &c)| (c > 0).then_some(a))
            .collect();
        let inside = system.maximal_subcollection_inside(&omega);
        let numerator: f64 = inside.indices().iter().map(|&s| lambda.get(s)).sum();
        let ratio = ratio_of(numerator, system.measure().mass_of_indices(&omega));
        if ratio > best {
            best = ratio;
        }
    });
    Ok(best)
}

/// Result of the min-cut ratio search.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSearch {
    pub constant: f64,
    pub certificate: CutCertificate,
    /// Number of max-flow solves.
    pub iterations: usize,
}

/// Starting point shared by the flow-based searches: handles the degenerate
/// cases and returns the best singleton otherwise.
pub(crate) fn ratio_search_start(
    system: &SetSystem,
    lambda: &CoefficientFamily,
) -> Result<std::result::Result<CutCertificate, RatioSearch>> {
    if system.is_empty() {
        return Err(Error::EmptySystem);
    }
    if lambda.len() != system.len() {
        return Err(Error::LengthMismatch {
            expected: system.len(),
            got: lambda.len(),
        });
    }
    let ranks = id_ranks(system);
    let mut best: Option<(f64, usize)> = None;
    for s in 0..system.len() {
        let ratio = ratio_of(lambda.get(s), system.set_mass(s));
        let better = match best {
            None => true,
            Some((r, b)) => match cmp_ratio(ratio, r) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => ranks[s] < ranks[b],
            },
        };
        if better {
            best = Some((ratio, s));
        }
    }
    let (ratio, s) = best.ok_or(Error::EmptySystem)?;
    let cert = certificate(
        system,
        lambda,
        Subcollection::singleton(s),
        CertificateKind::Extremal,
    )?;
    if ratio == 0.0 || ratio.is_infinite() {
        let kind = if ratio.is_infinite() {
            CertificateKind::Violation
        } else {
            CertificateKind::Extremal
        };
        return Ok(Err(RatioSearch {
            constant: ratio,
            certificate: cert.with_kind(kind),
            iterations: 0,
        }));
    }
    Ok(Ok(cert))
}

/// [`carleson_constant`] with the iteration count.
///
/// Starting from the best singleton ratio `C`, each step solves the witness
/// flow network at `C`. The sets left on the source side of the minimal min
/// cut maximize `Σλ - C·μ(⋃)`; if their ratio exceeds `C` it becomes the
/// new `C`. These cut sets shrink strictly from one step to the next, which
/// bounds the number of solves by `n + 1`.
pub fn carleson_constant_search(
    system: &SetSystem,
    lambda: &CoefficientFamily,
) -> Result<RatioSearch> {
    let mut cert = match ratio_search_start(system, lambda)? {
        Ok(cert) => cert,
        Err(done) => return Ok(done),
    };
    let limit = system.len() + 1;
    let mut iterations = 0;
    loop {
        if iterations == limit {
            return Err(Error::NoConvergence(iterations));
        }
        iterations += 1;
        let c = cert.ratio;
        let net = SparseNetwork::build(system, lambda, c)?;
        let result = flow::max_flow(&net.network)?;
        let cut = net.source_side_sets(&result);
        if cut.is_empty() {
            break;
        }
        let ratio = carleson_ratio(system, lambda, &cut)?;
        if cmp_ratio(ratio, c) != Ordering::Greater {
            break;
        }
        cert = CutCertificate {
            subcollection: cut,
            ratio,
            kind: CertificateKind::Extremal,
        };
    }
    Ok(RatioSearch {
        constant: cert.ratio,
        certificate: cert,
        iterations,
    })
}

/// The Carleson constant via min-cut ratio search.
///
/// A positive coefficient on a zero-mass set yields `+inf` with a violation
/// certificate naming that set.
pub fn carleson_constant(
    system: &SetSystem,
    lambda: &CoefficientFamily,
) -> Result<(f64, CutCertificate)> {
    let search = carleson_constant_search(system, lambda)?;
    Ok((search.constant, search.certificate))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CarlesonCheck {
    Pass,
    Violation(CutCertificate),
}

/// Passes iff the Carleson constant is at most `c + 1e-9`.
pub fn check_carleson(
    system: &SetSystem,
    lambda: &CoefficientFamily,
    c: f64,
) -> Result<CarlesonCheck> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidConstant(c));
    }
    if lambda.is_zero() {
        return Ok(CarlesonCheck::Pass);
    }
    let (constant, cert) = carleson_constant(system, lambda)?;
    if constant <= c + crate::numeric::TOLERANCE {
        Ok(CarlesonCheck::Pass)
    } else {
        Ok(CarlesonCheck::Violation(
            cert.with_kind(CertificateKind::Violation),
        ))
    }
}

//! GIT data `(W, G = (C*)^k, theta)` and the lattice/cone combinatorics built on it:
//! semistable supports, stabilizers, sectors, effective degrees and per-degree
//! support profiles.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rank, smith_normal_form, solve_unique};
use crate::rational::{dot_int, fmt_q, frac, is_integral, lcm_u64, denominator_u64, q, qi, Q};

/// A character of `(C*)^k`, as exponents on the standard characters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character(pub Vec<i64>);

impl Character {
    pub fn zero(k: usize) -> Self {
        Character(vec![0; k])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    fn as_q(&self) -> Vec<Q> {
        self.0.iter().map(|&m| qi(m)).collect()
    }
}

impl std::ops::Add for &Character {
    type Output = Character;
    fn add(self, rhs: &Character) -> Character {
        Character(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// A degree `beta`, stored as its values on the standard line bundles `L_{pi_j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Degree(pub Vec<Q>);

impl Degree {
    pub fn zero(k: usize) -> Self {
        Degree(vec![Q::zero(); k])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Degree(v.iter().map(|&x| qi(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// `beta(L_chi)`.
    pub fn pair(&self, chi: &Character) -> Q {
        dot_int(&chi.0, &self.0)
    }

    pub fn scaled(&self, c: &Q) -> Degree {
        Degree(self.0.iter().map(|x| x * c).collect())
    }
}

impl std::ops::Add for &Degree {
    type Output = Degree;
    fn add(self, rhs: &Degree) -> Degree {
        Degree(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl std::ops::Sub for &Degree {
    type Output = Degree;
    fn sub(self, rhs: &Degree) -> Degree {
        Degree(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(fmt_q).join(","))
    }
}

/// A torsion element of `(C*)^k`, stored as fractional exponents in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorId(Vec<Q>);

impl SectorId {
    pub fn identity(k: usize) -> Self {
        SectorId(vec![Q::zero(); k])
    }

    /// Reduces every entry mod 1.
    pub fn from_exponents(v: &[Q]) -> Self {
        SectorId(v.iter().map(frac).collect())
    }

    pub fn entries(&self) -> &[Q] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn inverse(&self) -> Self {
        SectorId(self.0.iter().map(|x| frac(&-x)).collect())
    }

    /// Group law, componentwise addition mod 1.
    pub fn compose(&self, other: &SectorId) -> Self {
        SectorId(self.0.iter().zip(&other.0).map(|(a, b)| frac(&(a + b))).collect())
    }

    pub fn order(&self) -> u64 {
        self.0.iter().map(denominator_u64).fold(1, lcm_u64)
    }

    /// Value of the character `chi` at this element is `exp(2 pi i * chi_value)`.
    pub fn character_value(&self, chi: &Character) -> Q {
        frac(&dot_int(&chi.0, &self.0))
    }
}

impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().map(fmt_q).join(","))
    }
}

/// How `beta(L_tau)` sits relative to the integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TauClass {
    NonnegIntegral,
    NegativeIntegral,
    NegativeFractional,
    NonintegralNonneg,
}

impl TauClass {
    pub fn of(value: &Q) -> Self {
        match (is_integral(value), value.is_negative()) {
            (true, false) => TauClass::NonnegIntegral,
            (true, true) => TauClass::NegativeIntegral,
            (false, true) => TauClass::NegativeFractional,
            (false, false) => TauClass::NonintegralNonneg,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TauClass::NonnegIntegral => "nonneg-integral",
            TauClass::NegativeIntegral => "negative-integral",
            TauClass::NegativeFractional => "negative-fractional",
            TauClass::NonintegralNonneg => "nonintegral-nonneg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            TauClass::NonnegIntegral,
            TauClass::NegativeIntegral,
            TauClass::NegativeFractional,
            TauClass::NonintegralNonneg,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportProfile {
    /// Indices (0-based) with `beta(L_rho_i)` in `Z_{>=0}`.
    pub nonneg_integral: BTreeSet<usize>,
    /// Indices (0-based) with `beta(L_rho_i)` in `Z_{<=0}`.
    pub nonpos_integral: BTreeSet<usize>,
    pub zss_nonempty: bool,
    pub tau_classification: Vec<TauClass>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportInfo {
    /// 0-based character indices.
    pub indices: Vec<usize>,
    pub stabilizer_rank: usize,
    /// Invariant factors of the stabilizer, `Z/d_1 x ... x Z/d_r`.
    pub invariant_factors: Vec<u64>,
    pub stabilizer: Vec<SectorId>,
}

impl SupportInfo {
    pub fn stabilizer_order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub supports: Vec<SupportInfo>,
    /// lcm of the stabilizer orders.
    pub exponent: u64,
}

/// Raw GIT data. Only shape is checked here; see [`GitPresentation::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GitPresentation {
    pub name: String,
    pub rank: usize,
    pub rho: Vec<Character>,
    pub theta: Character,
    pub tau: Vec<Character>,
}

fn fmt_support(s: &[usize]) -> String {
    format!("{{{}}}", s.iter().map(|i| i + 1).join(","))
}

impl GitPresentation {
    pub fn new(
        name: impl Into<String>,
        rank: usize,
        rho: Vec<Character>,
        theta: Character,
        tau: Vec<Character>,
    ) -> Result<Self> {
        let check = |what: String, c: &Character| {
            if c.rank() == rank {
                Ok(())
            } else {
                Err(Error::LengthMismatch {
                    what,
                    expected: rank,
                    found: c.rank(),
                })
            }
        };
        for (i, r) in rho.iter().enumerate() {
            check(format!("rho_{}", i + 1), r)?;
        }
        check("theta".into(), &theta)?;
        for (b, t) in tau.iter().enumerate() {
            check(format!("tau_{}", b + 1), t)?;
        }
        Ok(GitPresentation {
            name: name.into(),
            rank,
            rho,
            theta,
            tau,
        })
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    /// Inclusion-minimal index sets `S` with `theta` in the rational cone of
    /// `{rho_i : i in S}`. Such a set is exactly a linearly independent set on
    /// which `theta` has strictly positive (unique) coordinates.
    pub fn semistable_supports(&self) -> Result<Vec<Vec<usize>>> {
        if self.theta.is_zero() {
            return Err(Error::EmptySemistableLocus);
        }
        let theta = self.theta.as_q();
        let cols: Vec<Vec<Q>> = self.rho.iter().map(Character::as_q).collect();
        let mut out = Vec::new();
        for size in 1..=self.rank.min(self.n()) {
            for subset in (0..self.n()).combinations(size) {
                let sub: Vec<Vec<Q>> = subset.iter().map(|&i| cols[i].clone()).collect();
                if let Some(lambda) = solve_unique(&sub, &theta) {
                    if lambda.iter().all(Signed::is_positive) {
                        out.push(subset);
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptySemistableLocus);
        }
        Ok(out)
    }

    /// Torsion elements fixing the coordinate subspace with support `support`:
    /// all `g` with `rho_i(g) = 1` for `i` in the support.
    pub fn stabilizer(&self, support: &[usize]) -> Result<SupportInfo> {
        let m: Vec<Vec<i64>> = support.iter().map(|&i| self.rho[i].0.clone()).collect();
        let mq: Vec<Vec<Q>> = support.iter().map(|&i| self.rho[i].as_q()).collect();
        let r = rank(&mq);
        if r < self.rank {
            return Err(Error::InfiniteStabilizer {
                support: fmt_support(support),
            });
        }
        // U M V = D  =>  M y in Z^k  iff  y = V w with w_i in (1/d_i) Z.
        let snf = smith_normal_form(&m);
        let d: Vec<i64> = snf.diag.iter().take(self.rank).copied().collect();
        let mut elements = BTreeSet::new();
        let ranges = d.iter().map(|&di| 0..di);
        for ms in ranges.multi_cartesian_product() {
            let w: Vec<Q> = ms.iter().zip(&d).map(|(&mi, &di)| q(mi, di)).collect();
            let y: Vec<Q> = (0..self.rank)
                .map(|row| (0..self.rank).map(|c| qi(snf.v[row][c]) * &w[c]).sum())
                .collect();
            elements.insert(SectorId::from_exponents(&y));
        }
        if self.rank == 0 {
            elements.insert(SectorId::identity(0));
        }
        Ok(SupportInfo {
            indices: support.to_vec(),
            stabilizer_rank: r,
            invariant_factors: d.iter().map(|&x| x as u64).filter(|&x| x != 1).collect(),
            stabilizer: elements.into_iter().collect(),
        })
    }

    /// Combinatorial DM and smoothness check: every minimal semistable support
    /// must have a finite stabilizer.
    pub fn validate(&self) -> Result<ValidationReport> {
        if self.n() < self.rank {
            return Err(Error::RankDeficient {
                rank: self.n(),
                expected: self.rank,
            });
        }
        let cols: Vec<Vec<Q>> = self.rho.iter().map(Character::as_q).collect();
        let r = rank(&cols);
        if r < self.rank {
            return Err(Error::RankDeficient {
                rank: r,
                expected: self.rank,
            });
        }
        let supports = self
            .semistable_supports()?
            .iter()
            .map(|s| self.stabilizer(s))
            .collect::<Result<Vec<_>>>()?;
        let exponent = supports
            .iter()
            .map(SupportInfo::stabilizer_order)
            .fold(1, lcm_u64);
        Ok(ValidationReport { supports, exponent })
    }
}

/// A presentation that passed [`GitPresentation::validate`]; carries the report.
#[derive(Clone, Debug)]
pub struct Presentation {
    data: GitPresentation,
    report: ValidationReport,
}

impl Presentation {
    pub fn new(data: GitPresentation) -> Result<Self> {
        let report = data.validate()?;
        Ok(Presentation { data, report })
    }

    pub fn data(&self) -> &GitPresentation {
        &self.data
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn rank(&self) -> usize {
        self.data.rank
    }

    pub fn rho(&self) -> &[Character] {
        &self.data.rho
    }

    pub fn tau(&self) -> &[Character] {
        &self.data.tau
    }

    pub fn theta(&self) -> &Character {
        &self.data.theta
    }

    pub fn supports(&self) -> impl Iterator<Item = &[usize]> {
        self.report.supports.iter().map(|s| s.indices.as_slice())
    }

    pub fn theta_pairing(&self, beta: &Degree) -> Q {
        beta.pair(&self.data.theta)
    }

    /// All torsion elements fixing some semistable point, identity first.
    pub fn enumerate_sectors(&self) -> Vec<SectorId> {
        let set: BTreeSet<SectorId> = self
            .report
            .supports
            .iter()
            .flat_map(|s| s.stabilizer.iter().cloned())
            .chain(std::iter::once(SectorId::identity(self.rank())))
            .collect();
        set.into_iter().collect()
    }

    pub fn support_profile(&self, beta: &Degree) -> SupportProfile {
        let mut nonneg_integral = BTreeSet::new();
        let mut nonpos_integral = BTreeSet::new();
        for (i, r) in self.rho().iter().enumerate() {
            let v = beta.pair(r);
            if is_integral(&v) {
                if !v.is_negative() {
                    nonneg_integral.insert(i);
                }
                if !v.is_positive() {
                    nonpos_integral.insert(i);
                }
            }
        }
        let zss_nonempty = self
            .supports()
            .any(|s| s.iter().all(|i| nonneg_integral.contains(i)));
        let tau_classification = self.tau().iter().map(|t| TauClass::of(&beta.pair(t))).collect();
        SupportProfile {
            nonneg_integral,
            nonpos_integral,
            zss_nonempty,
            tau_classification,
        }
    }

    pub fn is_effective(&self, beta: &Degree) -> bool {
        beta.is_zero()
            || (self.theta_pairing(beta).is_positive() && self.support_profile(beta).zss_nonempty)
    }

    /// All non-negative integer combinations of `generators` with theta-pairing at
    /// most `theta_bound` whose fixed locus `Z^ss_beta` is nonempty, sorted by
    /// theta-pairing then coordinates.
    pub fn enumerate_effective(&self, generators: &[Degree], theta_bound: &Q) -> Result<Vec<Degree>> {
        if theta_bound.is_negative() {
            return Err(Error::NegativeBound(fmt_q(theta_bound)));
        }
        let k = self.rank();
        let mut gens = Vec::new();
        for g in generators {
            if g.rank() != k {
                return Err(Error::LengthMismatch {
                    what: "degree generator".into(),
                    expected: k,
                    found: g.rank(),
                });
            }
            if g.is_zero() {
                continue;
            }
            let t = self.theta_pairing(g);
            if !t.is_positive() {
                return Err(Error::GeneratorNotPositive {
                    generator: g.to_string(),
                    pairing: fmt_q(&t),
                });
            }
            gens.push(g.clone());
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([Degree::zero(k)]);
        seen.insert(Degree::zero(k));
        while let Some(beta) = queue.pop_front() {
            for g in &gens {
                let next = &beta + g;
                if &self.theta_pairing(&next) <= theta_bound && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        let mut out: Vec<(Q, Degree)> = seen
            .into_iter()
            .filter(|b| b.is_zero() || self.support_profile(b).zss_nonempty)
            .map(|b| (self.theta_pairing(&b), b))
            .collect();
        out.sort();
        Ok(out.into_iter().map(|(_, b)| b).collect())
    }
}

pub fn degree_pairing(beta: &Degree, chi: &Character) -> Q {
    beta.pair(chi)
}

/// `g_beta`, the fractional parts of the coordinates of `beta`.
pub fn sector_from_degree(beta: &Degree) -> SectorId {
    SectorId::from_exponents(&beta.0)
}

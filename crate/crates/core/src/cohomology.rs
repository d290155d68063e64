//! Finite models of the Chen-Ruan cohomology: one presented quotient ring per
//! sector, with normal forms, the orbifold pairing and dual bases.
//!
//! Generators `H_1..H_k` stand for `c_1(L_{pi_j})` restricted to a sector.
//! Every ring is given as data: linear substitutions (e.g. `H_2 -> 0`), a
//! monomial basis, vanishing monomials, optional rewrite rules and the
//! integration functional on the basis. Orbifold `1/r` weights are folded
//! into the integrals.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::inverse;
use crate::presentation::{Character, SectorId};
use crate::rational::{qi, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(k: usize) -> Self {
        Monomial(vec![0; k])
    }

    pub fn var(k: usize, j: usize) -> Self {
        let mut e = vec![0; k];
        e[j] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`, assuming `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn uses(&self, j: usize) -> bool {
        self.0[j] > 0
    }
}

/// Renders with generator names, e.g. `p^2 h`; the empty monomial is `1`.
pub fn fmt_monomial(m: &Monomial, names: &[String]) -> String {
    let parts: Vec<String> = m
        .0
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(j, &e)| {
            let name = names.get(j).cloned().unwrap_or_else(|| format!("H{}", j + 1));
            if e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_monomial(self, &[]))
    }
}

/// Polynomial with rational coefficients in `nvars` commuting variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Poly::term(nvars, Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, j: usize) -> Self {
        Poly::term(nvars, Monomial::var(nvars, j), Q::one())
    }

    pub fn term(nvars: usize, m: Monomial, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(m, c);
        p
    }

    /// `sum_j coeffs[j] * H_j`.
    pub fn linear(coeffs: &[Q]) -> Self {
        let n = coeffs.len();
        let mut p = Poly::zero(n);
        for (j, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(n, j), c.clone());
        }
        p
    }

    /// `c_1(L_chi) = sum_j m_j H_j`.
    pub fn from_character(chi: &Character) -> Self {
        Poly::linear(&chi.0.iter().map(|&m| qi(m)).collect::<Vec<_>>())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(self.nvars, Q::one()), |acc, _| acc.mul(self))
    }

    /// Substitutes variable `j` by `images[j]`; all images share one variable count.
    pub fn compose(&self, images: &[Poly]) -> Poly {
        let target = images.first().map_or(0, Poly::nvars);
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (j, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&images[j].pow(e));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Evaluates at `H_j -> H_j + shift_j * z` and groups by powers of `z`.
    pub fn shift_by_z(&self, shifts: &[Q]) -> BTreeMap<u32, Poly> {
        let n = self.nvars;
        let images: Vec<Poly> = (0..n)
            .map(|j| {
                let mut p = Poly::var(n + 1, j);
                p.add_term(Monomial::var(n + 1, n), shifts[j].clone());
                p
            })
            .collect();
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.compose(&images).terms {
            let zpow = m.0[n];
            let h = Monomial(m.0[..n].to_vec());
            out.entry(zpow).or_insert_with(|| Poly::zero(n)).add_term(h, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }
}

const MAX_REDUCTION_DEPTH: usize = 64;

/// A presented cohomology ring of one sector.
#[derive(Clone, Debug)]
pub struct RingSpec {
    sector: SectorId,
    k: usize,
    substitutions: BTreeMap<usize, Poly>,
    basis: Vec<Monomial>,
    vanishing: Vec<Monomial>,
    reductions: Vec<(Monomial, Poly)>,
    integral: Vec<Q>,
    basis_index: BTreeMap<Monomial, usize>,
}

impl RingSpec {
    /// Builds a ring and checks it: distinct basis, consistent substitutions,
    /// basis monomials not themselves reducible, and confluence of the
    /// reduction on every monomial up to one past the top basis degree.
    pub fn new(
        sector: SectorId,
        substitutions: BTreeMap<usize, Poly>,
        basis: Vec<Monomial>,
        vanishing: Vec<Monomial>,
        reductions: Vec<(Monomial, Poly)>,
        integral: Vec<Q>,
    ) -> Result<Self> {
        let k = sector.entries().len();
        let invalid = |reason: String| Error::InvalidRing {
            sector: sector.to_string(),
            reason,
        };
        for (j, p) in &substitutions {
            if *j >= k {
                return Err(invalid(format!("substitution for unknown generator H{}", j + 1)));
            }
            if p.nvars() != k {
                return Err(invalid(format!("substitution for H{} has wrong arity", j + 1)));
            }
            if p.terms().any(|(m, _)| m.degree() != 1) {
                return Err(invalid(format!("substitution for H{} is not linear", j + 1)));
            }
            if p.terms().any(|(m, _)| substitutions.keys().any(|&s| m.uses(s))) {
                return Err(invalid(format!(
                    "substitution for H{} mentions a substituted generator",
                    j + 1
                )));
            }
        }
        let all_monomials = basis
            .iter()
            .chain(&vanishing)
            .chain(reductions.iter().map(|(l, _)| l));
        for m in all_monomials {
            if m.0.len() != k {
                return Err(invalid(format!("monomial {m} has wrong arity")));
            }
            if substitutions.keys().any(|&s| m.uses(s)) {
                return Err(invalid(format!("monomial {m} uses a substituted generator")));
            }
        }
        if integral.len() != basis.len() {
            return Err(invalid(format!(
                "{} integrals for {} basis monomials",
                integral.len(),
                basis.len()
            )));
        }
        let mut basis_index = BTreeMap::new();
        for (i, m) in basis.iter().enumerate() {
            if basis_index.insert(m.clone(), i).is_some() {
                return Err(invalid(format!("basis monomial {m} repeated")));
            }
            if let Some(v) = vanishing.iter().find(|v| v.divides(m)) {
                return Err(invalid(format!("basis monomial {m} is divisible by vanishing {v}")));
            }
            if let Some((l, _)) = reductions.iter().find(|(l, _)| l.divides(m)) {
                return Err(invalid(format!("basis monomial {m} is divisible by rewrite rule {l}")));
            }
        }
        let ring = RingSpec {
            sector,
            k,
            substitutions,
            basis,
            vanishing,
            reductions,
            integral,
            basis_index,
        };
        ring.check_confluence()?;
        Ok(ring)
    }

    /// `Q[H_1..H_k]` modulo all monomials of degree `degree + 1`, with every
    /// generator free. Used for formal models.
    pub fn truncated_polynomial(sector: SectorId, degree: u32, integral: impl Fn(&Monomial) -> Q) -> Result<Self> {
        let k = sector.entries().len();
        let basis: Vec<Monomial> = monomials_up_to(k, degree);
        let vanishing: Vec<Monomial> = monomials_of_degree(k, degree + 1);
        let ints = basis.iter().map(integral).collect();
        RingSpec::new(sector, BTreeMap::new(), basis, vanishing, vec![], ints)
    }

    pub fn sector(&self) -> &SectorId {
        &self.sector
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn integrals(&self) -> &[Q] {
        &self.integral
    }

    pub fn free_generators(&self) -> Vec<usize> {
        (0..self.k).filter(|j| !self.substitutions.contains_key(j)).collect()
    }

    pub fn top_degree(&self) -> u32 {
        self.basis.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    fn substitute(&self, poly: &Poly) -> Poly {
        if self.substitutions.is_empty() {
            return poly.clone();
        }
        let images: Vec<Poly> = (0..self.k)
            .map(|j| {
                self.substitutions
                    .get(&j)
                    .cloned()
                    .unwrap_or_else(|| Poly::var(self.k, j))
            })
            .collect();
        poly.compose(&images)
    }

    fn reduce_monomial(&self, m: &Monomial, depth: usize) -> Result<BTreeMap<Monomial, Q>> {
        let mut out = BTreeMap::new();
        if self.vanishing.iter().any(|v| v.divides(m)) {
            return Ok(out);
        }
        if self.basis_index.contains_key(m) {
            out.insert(m.clone(), Q::one());
            return Ok(out);
        }
        let unreducible = || Error::UnreducibleMonomial {
            sector: self.sector.to_string(),
            monomial: m.to_string(),
        };
        if depth >= MAX_REDUCTION_DEPTH {
            return Err(unreducible());
        }
        let Some((lhs, rhs)) = self.reductions.iter().find(|(l, _)| l.divides(m)) else {
            return Err(unreducible());
        };
        let rest = m.div(lhs);
        for (bm, c) in self.substitute(rhs).terms() {
            for (r, c2) in self.reduce_monomial(&bm.mul(&rest), depth + 1)? {
                add_into(&mut out, r, c * c2);
            }
        }
        Ok(out)
    }

    fn reduce_substituted(&self, poly: &Poly) -> Result<BTreeMap<Monomial, Q>> {
        let mut out = BTreeMap::new();
        for (m, c) in poly.terms() {
            for (r, c2) in self.reduce_monomial(m, 0)? {
                add_into(&mut out, r, c * c2);
            }
        }
        Ok(out)
    }

    pub fn normal_form(&self, poly: &Poly) -> Result<SectorClass> {
        if poly.nvars() != self.k {
            return Err(Error::LengthMismatch {
                what: "polynomial arity".into(),
                expected: self.k,
                found: poly.nvars(),
            });
        }
        let coeffs = self.reduce_substituted(&self.substitute(poly))?;
        Ok(SectorClass {
            sector: self.sector.clone(),
            coeffs,
        })
    }

    fn check_confluence(&self) -> Result<()> {
        let free = self.free_generators();
        let top = self.top_degree() + 1;
        for m in monomials_up_to(self.k, top) {
            if self.substitutions.keys().any(|&j| m.uses(j)) {
                continue;
            }
            let fail = |detail: String| Error::NonConfluentRingSpec {
                sector: self.sector.to_string(),
                monomial: m.to_string(),
                detail,
            };
            let direct = self.reduce_monomial(&m, 0).map_err(|e| fail(e.to_string()))?;
            for &j in &free {
                if !m.uses(j) {
                    continue;
                }
                let h = Monomial::var(self.k, j);
                let lower = self
                    .reduce_monomial(&m.div(&h), 0)
                    .map_err(|e| fail(e.to_string()))?;
                let mut via = BTreeMap::new();
                for (bm, c) in lower {
                    for (r, c2) in self
                        .reduce_monomial(&bm.mul(&h), 0)
                        .map_err(|e| fail(e.to_string()))?
                    {
                        add_into(&mut via, r, &c * c2);
                    }
                }
                if via != direct {
                    return Err(fail(format!("reduction through H{} disagrees", j + 1)));
                }
            }
        }
        Ok(())
    }

    /// Coefficient of the unit monomial, zero when `1` is not a basis element.
    pub fn constant_term(&self, a: &SectorClass) -> Q {
        a.coefficient(&Monomial::one(self.k))
    }

    pub fn multiply(&self, a: &SectorClass, poly: &Poly) -> Result<SectorClass> {
        self.normal_form(&a.to_poly(self.k).mul(poly))
    }

    pub fn mul(&self, a: &SectorClass, b: &SectorClass) -> Result<SectorClass> {
        self.normal_form(&a.to_poly(self.k).mul(&b.to_poly(self.k)))
    }

    pub fn integrate(&self, a: &SectorClass) -> Q {
        a.coeffs
            .iter()
            .map(|(m, c)| c * &self.integral[self.basis_index[m]])
            .sum()
    }

    pub fn restrict_character(&self, chi: &Character) -> Result<SectorClass> {
        self.normal_form(&Poly::from_character(chi))
    }
}

fn add_into(map: &mut BTreeMap<Monomial, Q>, m: Monomial, c: Q) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(m.clone()).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        map.remove(&m);
    }
}

pub fn monomials_of_degree(k: usize, d: u32) -> Vec<Monomial> {
    if k == 0 {
        return if d == 0 { vec![Monomial(vec![])] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in monomials_of_degree(k - 1, d - first) {
            rest.0.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All monomials of total degree `<= d`, by degree.
pub fn monomials_up_to(k: usize, d: u32) -> Vec<Monomial> {
    (0..=d).flat_map(|e| monomials_of_degree(k, e)).collect()
}

/// A class in one sector: rational combination of that ring's basis monomials.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SectorClass {
    sector: SectorId,
    coeffs: BTreeMap<Monomial, Q>,
}

impl SectorClass {
    pub fn zero(sector: SectorId) -> Self {
        SectorClass {
            sector,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn sector(&self) -> &SectorId {
        &self.sector
    }

    pub fn coeffs(&self) -> &BTreeMap<Monomial, Q> {
        &self.coeffs
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.coeffs.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_poly(&self, k: usize) -> Poly {
        let mut p = Poly::zero(k);
        for (m, c) in &self.coeffs {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn add(&self, other: &SectorClass) -> SectorClass {
        debug_assert_eq!(self.sector, other.sector);
        let mut coeffs = self.coeffs.clone();
        for (m, c) in &other.coeffs {
            add_into(&mut coeffs, m.clone(), c.clone());
        }
        SectorClass {
            sector: self.sector.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, c: &Q) -> SectorClass {
        if c.is_zero() {
            return SectorClass::zero(self.sector.clone());
        }
        SectorClass {
            sector: self.sector.clone(),
            coeffs: self.coeffs.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }
}

/// Sector-indexed class; zero parts are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct CRClass {
    parts: BTreeMap<SectorId, SectorClass>,
}

impl CRClass {
    pub fn zero() -> Self {
        CRClass::default()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> impl Iterator<Item = &SectorClass> {
        self.parts.values()
    }

    pub fn part(&self, sector: &SectorId) -> Option<&SectorClass> {
        self.parts.get(sector)
    }

    pub fn add(&self, other: &CRClass) -> CRClass {
        let mut out = self.clone();
        for part in other.parts.values() {
            out.add_part(part);
        }
        out
    }

    pub fn sub(&self, other: &CRClass) -> CRClass {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn add_part(&mut self, part: &SectorClass) {
        let sum = match self.parts.get(&part.sector) {
            Some(existing) => existing.add(part),
            None => part.clone(),
        };
        if sum.is_zero() {
            self.parts.remove(&part.sector);
        } else {
            self.parts.insert(part.sector.clone(), sum);
        }
    }

    pub fn scale(&self, c: &Q) -> CRClass {
        let mut out = CRClass::zero();
        for p in self.parts.values() {
            out.add_part(&p.scale(c));
        }
        out
    }

    /// The class `c * m` in `sector`, with `m` assumed to be a basis monomial.
    pub fn monomial(sector: SectorId, m: Monomial, c: Q) -> CRClass {
        let mut coeffs = BTreeMap::new();
        add_into(&mut coeffs, m, c);
        CRClass::from(SectorClass { sector, coeffs })
    }
}

impl From<SectorClass> for CRClass {
    fn from(part: SectorClass) -> Self {
        let mut out = CRClass::zero();
        out.add_part(&part);
        out
    }
}

/// Orbifold pairing data: the inertia involution and per-sector weights.
#[derive(Clone, Debug)]
pub struct PairingSpec {
    pub involution: BTreeMap<SectorId, SectorId>,
    pub orbifold_weights: BTreeMap<SectorId, Q>,
}

/// All configured sector rings of a target, plus its pairing.
#[derive(Clone, Debug)]
pub struct Cohomology {
    k: usize,
    rings: BTreeMap<SectorId, RingSpec>,
    pairing: PairingSpec,
}

impl Cohomology {
    /// The identity sector is mandatory, and every sector's inverse must be
    /// configured too. Weights default to 1.
    pub fn new(k: usize, rings: Vec<RingSpec>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for r in rings {
            if r.rank() != k {
                return Err(Error::LengthMismatch {
                    what: format!("sector {}", r.sector()),
                    expected: k,
                    found: r.rank(),
                });
            }
            let s = r.sector().clone();
            if map.insert(s.clone(), r).is_some() {
                return Err(Error::InvalidRing {
                    sector: s.to_string(),
                    reason: "configured twice".into(),
                });
            }
        }
        let identity = SectorId::identity(k);
        if !map.contains_key(&identity) {
            return Err(Error::MissingSectorRing(identity.to_string()));
        }
        let mut involution = BTreeMap::new();
        for s in map.keys() {
            let inv = s.inverse();
            if !map.contains_key(&inv) {
                return Err(Error::MissingSectorRing(inv.to_string()));
            }
            involution.insert(s.clone(), inv);
        }
        let orbifold_weights = map.keys().map(|s| (s.clone(), Q::one())).collect();
        Ok(Cohomology {
            k,
            rings: map,
            pairing: PairingSpec {
                involution,
                orbifold_weights,
            },
        })
    }

    pub fn with_weights(mut self, weights: BTreeMap<SectorId, Q>) -> Self {
        for (s, w) in weights {
            self.pairing.orbifold_weights.insert(s, w);
        }
        self
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn pairing(&self) -> &PairingSpec {
        &self.pairing
    }

    pub fn rings(&self) -> impl Iterator<Item = &RingSpec> {
        self.rings.values()
    }

    pub fn ring(&self, sector: &SectorId) -> Result<&RingSpec> {
        self.rings
            .get(sector)
            .ok_or_else(|| Error::MissingSectorRing(sector.to_string()))
    }

    pub fn identity(&self) -> SectorId {
        SectorId::identity(self.k)
    }

    pub fn unit(&self) -> CRClass {
        self.fundamental(&self.identity()).expect("identity ring is always configured")
    }

    /// The fundamental class `1_g` of a sector.
    pub fn fundamental(&self, sector: &SectorId) -> Result<CRClass> {
        self.class(sector, &Poly::constant(self.k, Q::one()))
    }

    pub fn class(&self, sector: &SectorId, poly: &Poly) -> Result<CRClass> {
        Ok(self.ring(sector)?.normal_form(poly)?.into())
    }

    pub fn restrict_character(&self, sector: &SectorId, chi: &Character) -> Result<SectorClass> {
        self.ring(sector)?.restrict_character(chi)
    }

    pub fn integrate(&self, a: &SectorClass) -> Result<Q> {
        Ok(self.ring(&a.sector)?.integrate(a))
    }

    /// Product in which at most one factor is twisted; the untwisted factor is
    /// restricted to the other's sector.
    pub fn mul(&self, a: &CRClass, b: &CRClass) -> Result<CRClass> {
        let mut out = CRClass::zero();
        for pa in a.parts() {
            for pb in b.parts() {
                let target = match (pa.sector.is_identity(), pb.sector.is_identity()) {
                    (true, _) => &pb.sector,
                    (false, true) => &pa.sector,
                    (false, false) => {
                        return Err(Error::TwistedProductUnsupported {
                            a: pa.sector.to_string(),
                            b: pb.sector.to_string(),
                        })
                    }
                };
                let ring = self.ring(target)?;
                out.add_part(&ring.normal_form(&pa.to_poly(self.k).mul(&pb.to_poly(self.k)))?);
            }
        }
        Ok(out)
    }

    /// `<a, b>_orb`: pairs the part of `a` at `g` with the part of `b` at `g^{-1}`.
    pub fn orb_pairing(&self, a: &CRClass, b: &CRClass) -> Result<Q> {
        let mut total = Q::zero();
        for pa in a.parts() {
            let partner = &self.pairing.involution[&pa.sector];
            let Some(pb) = b.part(partner) else {
                continue;
            };
            let ring = self.ring(&pa.sector)?;
            let prod = ring.normal_form(&pa.to_poly(self.k).mul(&pb.to_poly(self.k)))?;
            total += &self.pairing.orbifold_weights[&pa.sector] * ring.integrate(&prod);
        }
        Ok(total)
    }

    pub fn pairing_matrix(&self, basis: &[CRClass]) -> Result<Vec<Vec<Q>>> {
        basis
            .iter()
            .map(|a| basis.iter().map(|b| self.orb_pairing(a, b)).collect())
            .collect()
    }

    /// `{phi^beta}` with `<phi_alpha, phi^beta> = delta`.
    pub fn dual_basis(&self, basis: &[CRClass]) -> Result<Vec<CRClass>> {
        let m = self.pairing_matrix(basis)?;
        let inv = inverse(&m).ok_or(Error::SingularPairingMatrix)?;
        Ok((0..basis.len())
            .map(|b| {
                basis
                    .iter()
                    .enumerate()
                    .fold(CRClass::zero(), |acc, (g, phi)| acc.add(&phi.scale(&inv[g][b])))
            })
            .collect())
    }
}

/// Renders a polynomial with generator names, `(c) m` per term.
pub fn fmt_poly(p: &Poly, names: &[String]) -> String {
    let terms: Vec<String> = p
        .terms()
        .map(|(m, x)| {
            let mono = fmt_monomial(m, names);
            if x.is_one() {
                mono
            } else {
                format!("({x}) {mono}")
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Renders a class with generator names; twisted parts carry a `[sector ..]` tag.
pub fn fmt_class(c: &CRClass, names: &[String]) -> String {
    let terms: Vec<String> = c
        .parts()
        .flat_map(|p| {
            p.coeffs().iter().map(move |(m, x)| {
                let mono = fmt_monomial(m, names);
                let body = if p.sector().is_identity() {
                    mono
                } else {
                    format!("[sector {}] {}", p.sector(), mono)
                };
                if x.is_one() {
                    body
                } else {
                    format!("({x}) {body}")
                }
            })
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.iter().join(" + ")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::q;

    pub(crate) fn twisted() -> SectorId {
        SectorId::from_exponents(&[q(1, 2), qi(0)])
    }

    /// Cubic surface in P(1,1,1,2): `H_1 = p`, `H_2 -> 0`.
    pub(crate) fn cubic_cohomology() -> Cohomology {
        let untwisted = RingSpec::new(
            SectorId::identity(2),
            BTreeMap::from([(1, Poly::zero(2))]),
            vec![Monomial(vec![0, 0]), Monomial(vec![1, 0]), Monomial(vec![2, 0])],
            vec![Monomial(vec![3, 0])],
            vec![],
            vec![qi(0), qi(0), q(3, 2)],
        )
        .unwrap();
        let tw = RingSpec::new(
            twisted(),
            BTreeMap::from([(0, Poly::zero(2)), (1, Poly::zero(2))]),
            vec![Monomial(vec![0, 0])],
            vec![],
            vec![],
            vec![q(1, 2)],
        )
        .unwrap();
        Cohomology::new(2, vec![untwisted, tw]).unwrap()
    }

    fn p(e: u32) -> Poly {
        Poly::term(2, Monomial(vec![e, 0]), Q::one())
    }

    #[test]
    fn normal_forms() {
        let coh = cubic_cohomology();
        let r = coh.ring(&coh.identity()).unwrap();
        assert!(r.normal_form(&p(3)).unwrap().is_zero());
        let one = r.normal_form(&p(0)).unwrap();
        assert_eq!(one.coefficient(&Monomial::one(2)), qi(1));
        let t = coh.ring(&twisted()).unwrap();
        let poly = p(1).scale(&qi(3)).add(&Poly::constant(2, qi(7)));
        let nf = t.normal_form(&poly).unwrap();
        assert_eq!(nf.coeffs().len(), 1);
        assert_eq!(nf.coefficient(&Monomial::one(2)), qi(7));
        // idempotent
        assert_eq!(t.normal_form(&nf.to_poly(2)).unwrap(), nf);
    }

    #[test]
    fn character_restriction() {
        let coh = cubic_cohomology();
        let r = coh.ring(&coh.identity()).unwrap();
        let d4 = r.restrict_character(&Character(vec![2, 1])).unwrap();
        assert_eq!(d4, r.normal_form(&p(1).scale(&qi(2))).unwrap());
        assert!(r.restrict_character(&Character(vec![0, 1])).unwrap().is_zero());
        assert!(r.restrict_character(&Character(vec![0, 0])).unwrap().is_zero());
    }

    #[test]
    fn integrals_and_pairing() {
        let coh = cubic_cohomology();
        let id = coh.identity();
        let r = coh.ring(&id).unwrap();
        assert_eq!(r.integrate(&r.normal_form(&p(2)).unwrap()), q(3, 2));
        assert_eq!(r.integrate(&SectorClass::zero(id.clone())), qi(0));
        let t = coh.ring(&twisted()).unwrap();
        assert_eq!(t.integrate(&t.normal_form(&p(0)).unwrap()), q(1, 2));

        let one = coh.unit();
        let pc = coh.class(&id, &p(1)).unwrap();
        let p2 = coh.class(&id, &p(2)).unwrap();
        let tw = coh.fundamental(&twisted()).unwrap();
        assert_eq!(coh.orb_pairing(&pc, &pc).unwrap(), q(3, 2));
        assert_eq!(coh.orb_pairing(&one, &p2).unwrap(), q(3, 2));
        assert_eq!(coh.orb_pairing(&one, &pc).unwrap(), qi(0));
        assert_eq!(coh.orb_pairing(&tw, &pc).unwrap(), qi(0));
        assert_eq!(coh.orb_pairing(&tw, &tw).unwrap(), q(1, 2));
    }

    #[test]
    fn cubic_dual_basis() {
        let coh = cubic_cohomology();
        let id = coh.identity();
        let basis = vec![
            coh.unit(),
            coh.class(&id, &p(1)).unwrap(),
            coh.class(&id, &p(2)).unwrap(),
            coh.fundamental(&twisted()).unwrap(),
        ];
        let duals = coh.dual_basis(&basis).unwrap();
        let expect = [
            basis[2].scale(&q(2, 3)),
            basis[1].scale(&q(2, 3)),
            basis[0].scale(&q(2, 3)),
            basis[3].scale(&qi(2)),
        ];
        assert_eq!(duals, expect);
        assert_eq!(coh.dual_basis(&duals).unwrap(), basis);
    }

    #[test]
    fn singular_pairing() {
        let coh = cubic_cohomology();
        let pc = coh.class(&coh.identity(), &p(2)).unwrap();
        assert_eq!(coh.dual_basis(&[pc]), Err(Error::SingularPairingMatrix));
        assert_eq!(coh.dual_basis(&[coh.unit()]), Err(Error::SingularPairingMatrix));
    }

    #[test]
    fn one_point_dual() {
        let ring = RingSpec::new(
            SectorId::identity(1),
            BTreeMap::new(),
            vec![Monomial(vec![0])],
            vec![Monomial(vec![1])],
            vec![],
            vec![qi(1)],
        )
        .unwrap();
        let coh = Cohomology::new(1, vec![ring]).unwrap();
        assert_eq!(coh.dual_basis(&[coh.unit()]).unwrap(), vec![coh.unit()]);
    }

    #[test]
    fn twisted_products_are_refused() {
        let coh = cubic_cohomology();
        let tw = coh.fundamental(&twisted()).unwrap();
        assert!(matches!(
            coh.mul(&tw, &tw),
            Err(Error::TwistedProductUnsupported { .. })
        ));
        let pc = coh.class(&coh.identity(), &p(1)).unwrap();
        assert!(coh.mul(&pc, &tw).unwrap().is_zero());
        assert_eq!(coh.mul(&coh.unit(), &tw).unwrap(), tw);
    }

    #[test]
    fn inconsistent_rings_are_rejected() {
        // p^4 in the basis while p^3 vanishes.
        let bad = RingSpec::new(
            SectorId::identity(1),
            BTreeMap::new(),
            vec![Monomial(vec![0]), Monomial(vec![4])],
            vec![Monomial(vec![3])],
            vec![],
            vec![qi(0), qi(1)],
        );
        assert!(matches!(bad, Err(Error::InvalidRing { .. })));
        // p^2 neither in the basis nor reducible.
        let gap = RingSpec::new(
            SectorId::identity(1),
            BTreeMap::new(),
            vec![Monomial(vec![0]), Monomial(vec![1])],
            vec![Monomial(vec![3])],
            vec![],
            vec![qi(0), qi(1)],
        );
        assert!(matches!(gap, Err(Error::NonConfluentRingSpec { .. })));
    }

    #[test]
    fn rewrite_rules_reduce_and_are_checked() {
        // Q[a,b]/(a^2 - b, b^2): basis 1, a, b, ab.
        let k = 2;
        let m = |a: u32, b: u32| Monomial(vec![a, b]);
        let ring = RingSpec::new(
            SectorId::identity(k),
            BTreeMap::new(),
            vec![m(0, 0), m(1, 0), m(0, 1), m(1, 1)],
            vec![m(0, 2)],
            vec![(m(2, 0), Poly::term(k, m(0, 1), qi(1)))],
            vec![qi(0), qi(0), qi(0), qi(1)],
        )
        .unwrap();
        let a3 = ring.normal_form(&Poly::term(k, m(3, 0), qi(1))).unwrap();
        assert_eq!(a3.coefficient(&m(1, 1)), qi(1));
        assert!(ring.normal_form(&Poly::term(k, m(4, 0), qi(1))).unwrap().is_zero());

        // a^2 -> b together with b -> basis but b^2 = a: a^4 = b^2 must vanish and
        // also equal a, which cannot both hold.
        let clash = RingSpec::new(
            SectorId::identity(k),
            BTreeMap::new(),
            vec![m(0, 0), m(1, 0), m(0, 1), m(1, 1)],
            vec![m(3, 0)],
            vec![(m(2, 0), Poly::term(k, m(0, 1), qi(1))), (m(0, 2), Poly::term(k, m(1, 0), qi(1)))],
            vec![qi(0), qi(0), qi(0), qi(1)],
        );
        assert!(clash.is_err());
    }

    #[test]
    fn shift_by_z_groups_powers() {
        // (H_1 + H_2)^2 at H -> H + (1/2, 1) z
        let u = Poly::linear(&[qi(1), qi(1)]).pow(2);
        let parts = u.shift_by_z(&[q(1, 2), qi(1)]);
        assert_eq!(parts[&2], Poly::constant(2, q(9, 4)));
        assert_eq!(parts[&1], Poly::linear(&[qi(3), qi(3)]));
        assert_eq!(parts[&0], u);
    }

    #[test]
    fn class_formatting() {
        let coh = cubic_cohomology();
        let names = vec!["p".to_string(), "h".to_string()];
        let c = coh
            .class(&coh.identity(), &p(2).scale(&q(1, 3)))
            .unwrap()
            .add(&coh.fundamental(&twisted()).unwrap().scale(&q(-3, 2)));
        assert_eq!(fmt_class(&c, &names), "(1/3) p^2 + (-3/2) [sector 1/2,0] 1");
        assert_eq!(fmt_class(&CRClass::zero(), &names), "0");
    }
}

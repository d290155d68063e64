//! Truncated formal series in Novikov degrees and `t`-variables whose
//! coefficients are finite Laurent polynomials in `z` with class values.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::cohomology::{Cohomology, CRClass, Poly, RingSpec, SectorClass};
use crate::error::{Error, Result};
use crate::linalg::{rank, solve_unique};
use crate::presentation::{Character, Degree, SectorId};
use crate::rational::{factorial, fmt_q, qi, Q};

/// Laurent polynomial in `z` local to one sector ring.
pub(crate) type Local = BTreeMap<i64, SectorClass>;

pub(crate) fn local_add(a: &mut Local, e: i64, c: &SectorClass) {
    if c.is_zero() {
        return;
    }
    let sum = match a.get(&e) {
        Some(x) => x.add(c),
        None => c.clone(),
    };
    if sum.is_zero() {
        a.remove(&e);
    } else {
        a.insert(e, sum);
    }
}

pub(crate) fn local_mul(ring: &RingSpec, a: &Local, b: &Local) -> Result<Local> {
    let mut out = Local::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let prod = ring.mul(ca, cb)?;
            local_add(&mut out, ea + eb, &prod);
        }
    }
    Ok(out)
}

pub(crate) fn local_one(ring: &RingSpec) -> Result<Local> {
    let mut out = Local::new();
    let one = ring.normal_form(&Poly::constant(ring.rank(), Q::one()))?;
    local_add(&mut out, 0, &one);
    Ok(out)
}

/// `D + c z` in the ring of `D`.
pub(crate) fn linear_factor(ring: &RingSpec, d: &SectorClass, c: &Q) -> Result<Local> {
    let mut out = Local::new();
    local_add(&mut out, 0, d);
    let one = ring.normal_form(&Poly::constant(ring.rank(), c.clone()))?;
    local_add(&mut out, 1, &one);
    Ok(out)
}

pub(crate) fn local_invert_linear(ring: &RingSpec, d: &SectorClass, c: &Q) -> Result<Local> {
    if c.is_zero() {
        return Err(Error::ZeroZCoefficient);
    }
    if !ring.constant_term(d).is_zero() {
        return Err(Error::NotNilpotent(d.sector().to_string()));
    }
    // 1/(D + cz) = sum_m (-1)^m D^m / c^{m+1} z^{-m-1}
    let mut out = Local::new();
    let mut power = ring.normal_form(&Poly::constant(ring.rank(), Q::one()))?;
    let mut m: i64 = 0;
    let limit = ring.basis().len() as i64 + 1;
    while !power.is_zero() {
        if m > limit {
            return Err(Error::NotNilpotent(d.sector().to_string()));
        }
        let sign = if m % 2 == 0 { Q::one() } else { -Q::one() };
        let coeff = sign / num_traits::pow(c.clone(), (m + 1) as usize);
        local_add(&mut out, -m - 1, &power.scale(&coeff));
        power = ring.mul(&power, d)?;
        m += 1;
    }
    Ok(out)
}

/// Finite Laurent polynomial in `z` with Chen-Ruan class coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ZLaurent {
    terms: BTreeMap<i64, CRClass>,
}

impl ZLaurent {
    pub fn zero() -> Self {
        ZLaurent::default()
    }

    pub fn monomial(exp: i64, c: CRClass) -> Self {
        let mut out = ZLaurent::zero();
        out.add_term(exp, &c);
        out
    }

    pub fn constant(c: CRClass) -> Self {
        ZLaurent::monomial(0, c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &CRClass)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: i64) -> CRClass {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn add_term(&mut self, exp: i64, c: &CRClass) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&exp) {
            Some(x) => x.add(c),
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, sum);
        }
    }

    pub fn add(&self, other: &ZLaurent) -> ZLaurent {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, other: &ZLaurent) -> ZLaurent {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> ZLaurent {
        let mut out = ZLaurent::zero();
        for (e, x) in &self.terms {
            out.add_term(*e, &x.scale(c));
        }
        out
    }

    /// Multiplies by `z^n`.
    pub fn shift(&self, n: i64) -> ZLaurent {
        ZLaurent {
            terms: self.terms.iter().map(|(e, c)| (e + n, c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &ZLaurent, coh: &Cohomology) -> Result<ZLaurent> {
        let mut out = ZLaurent::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea + eb, &coh.mul(ca, cb)?);
            }
        }
        Ok(out)
    }

    /// Terms with `z`-exponent `>= 0`.
    pub fn truncate_plus(&self) -> ZLaurent {
        self.filter(|e| e >= 0)
    }

    /// Terms with `z`-exponent `< 0`.
    pub fn truncate_minus(&self) -> ZLaurent {
        self.filter(|e| e < 0)
    }

    fn filter(&self, keep: impl Fn(i64) -> bool) -> ZLaurent {
        ZLaurent {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(**e))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub(crate) fn by_sector(&self) -> BTreeMap<SectorId, Local> {
        let mut out: BTreeMap<SectorId, Local> = BTreeMap::new();
        for (e, c) in &self.terms {
            for part in c.parts() {
                local_add(out.entry(part.sector().clone()).or_default(), *e, part);
            }
        }
        out
    }

    pub(crate) fn from_local(local: &Local) -> ZLaurent {
        let mut out = ZLaurent::zero();
        for (e, c) in local {
            out.add_term(*e, &CRClass::from(c.clone()));
        }
        out
    }
}

/// `1/(D + c z)` expanded as a geometric series; finite because `D` is
/// nilpotent in its ring.
pub fn invert_linear_factor(ring: &RingSpec, d: &SectorClass, c: &Q) -> Result<ZLaurent> {
    Ok(ZLaurent::from_local(&local_invert_linear(ring, d, c)?))
}

/// Key of a series coefficient: a Novikov degree and a `t` multi-index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesIndex {
    pub degree: Degree,
    pub t: Vec<u32>,
}

impl SeriesIndex {
    pub fn new(degree: Degree, t: Vec<u32>) -> Self {
        SeriesIndex { degree, t }
    }

    pub fn zero(k: usize, nvars: usize) -> Self {
        SeriesIndex {
            degree: Degree::zero(k),
            t: vec![0; nvars],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.degree.is_zero() && self.t.iter().all(|&e| e == 0)
    }

    pub fn t_degree(&self) -> u32 {
        self.t.iter().sum()
    }

    pub fn add(&self, other: &SeriesIndex) -> SeriesIndex {
        SeriesIndex {
            degree: &self.degree + &other.degree,
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        }
    }
}

impl fmt::Display for SeriesIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "beta={}", self.degree)?;
        if !self.t.is_empty() {
            write!(f, " t=({})", self.t.iter().join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    /// Largest kept `beta(L_theta)`.
    pub theta_bound: Q,
    /// Largest kept total `t`-degree.
    pub t_bound: u32,
    pub z_floor: Option<i64>,
    pub z_ceil: Option<i64>,
}

impl TruncationSpec {
    pub fn new(theta_bound: Q, t_bound: u32) -> Self {
        TruncationSpec {
            theta_bound,
            t_bound,
            z_floor: None,
            z_ceil: None,
        }
    }

    pub fn intersect(&self, other: &TruncationSpec) -> TruncationSpec {
        let pick = |a: Option<i64>, b: Option<i64>, f: fn(i64, i64) -> i64| match (a, b) {
            (Some(x), Some(y)) => Some(f(x, y)),
            (x, y) => x.or(y),
        };
        TruncationSpec {
            theta_bound: self.theta_bound.clone().min(other.theta_bound.clone()),
            t_bound: self.t_bound.min(other.t_bound),
            z_floor: pick(self.z_floor, other.z_floor, i64::max),
            z_ceil: pick(self.z_ceil, other.z_ceil, i64::min),
        }
    }
}

/// `exp((1/z) sum_i t_i u_i(H_j + beta_j z))`: one polynomial per `t`-variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpPrefactorSpec {
    pub entries: Vec<(usize, Poly)>,
}

impl ExpPrefactorSpec {
    pub fn union(&self, other: &ExpPrefactorSpec) -> ExpPrefactorSpec {
        ExpPrefactorSpec {
            entries: self.entries.iter().chain(&other.entries).cloned().collect(),
        }
    }
}

/// Named Novikov coordinates: `q^beta = prod_c v_c^{a_c}` for `beta = sum_c a_c g_c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NovikovChart {
    names: Vec<String>,
    generators: Vec<Degree>,
}

impl NovikovChart {
    pub fn new(names: Vec<String>, generators: Vec<Degree>) -> Result<Self> {
        if names.len() != generators.len() {
            return Err(Error::LengthMismatch {
                what: "Novikov coordinate names".into(),
                expected: generators.len(),
                found: names.len(),
            });
        }
        let rows: Vec<Vec<Q>> = generators.iter().map(|g| g.0.clone()).collect();
        if rank(&rows) != generators.len() {
            return Err(Error::OutsideChart("generators are linearly dependent".into()));
        }
        Ok(NovikovChart { names, generators })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn generators(&self) -> &[Degree] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coordinates(&self, beta: &Degree) -> Result<Vec<Q>> {
        if beta.is_zero() {
            return Ok(vec![Q::zero(); self.len()]);
        }
        let cols: Vec<Vec<Q>> = self.generators.iter().map(|g| g.0.clone()).collect();
        solve_unique(&cols, &beta.0).ok_or_else(|| Error::OutsideChart(beta.to_string()))
    }

    pub fn degree(&self, exps: &[Q]) -> Degree {
        let k = self.generators.first().map_or(0, Degree::rank);
        exps.iter()
            .zip(&self.generators)
            .fold(Degree::zero(k), |acc, (a, g)| &acc + &g.scaled(a))
    }
}

/// A differentiation (or evaluation) direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// The `t`-variable with this index.
    T(usize),
    /// The Novikov coordinate with this index in the chart.
    Novikov(usize),
}

/// Rational-valued series in the same indices (a multiple of the unit class).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScalarSeries {
    pub terms: BTreeMap<SeriesIndex, Q>,
}

impl ScalarSeries {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn insert(&mut self, idx: SeriesIndex, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(idx.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&idx);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    theta: Character,
    nvars: usize,
    trunc: TruncationSpec,
    coeffs: BTreeMap<SeriesIndex, ZLaurent>,
}

impl MultiSeries {
    pub fn zero(theta: Character, nvars: usize, trunc: TruncationSpec) -> Self {
        MultiSeries {
            theta,
            nvars,
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    /// The series `1` (unit class at `z^0`).
    pub fn unit(theta: Character, nvars: usize, trunc: TruncationSpec, coh: &Cohomology) -> Self {
        let k = theta.rank();
        let mut s = MultiSeries::zero(theta, nvars, trunc);
        s.insert(SeriesIndex::zero(k, nvars), &ZLaurent::constant(coh.unit()));
        s
    }

    pub fn theta(&self) -> &Character {
        &self.theta
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.theta.rank()
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&SeriesIndex, &ZLaurent)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, idx: &SeriesIndex) -> ZLaurent {
        self.coeffs.get(idx).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn theta_pairing(&self, idx: &SeriesIndex) -> Q {
        idx.degree.pair(&self.theta)
    }

    pub fn admits(&self, idx: &SeriesIndex) -> bool {
        self.theta_pairing(idx) <= self.trunc.theta_bound && idx.t_degree() <= self.trunc.t_bound
    }

    /// Adds `value` at `idx`, dropping anything outside the truncation.
    pub fn insert(&mut self, idx: SeriesIndex, value: &ZLaurent) {
        if !self.admits(&idx) {
            return;
        }
        let mut clamped = ZLaurent::zero();
        for (e, c) in value.terms() {
            let low = self.trunc.z_floor.is_some_and(|f| *e < f);
            let high = self.trunc.z_ceil.is_some_and(|f| *e > f);
            if !low && !high {
                clamped.add_term(*e, c);
            }
        }
        let sum = match self.coeffs.get(&idx) {
            Some(x) => x.add(&clamped),
            None => clamped,
        };
        if sum.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, sum);
        }
    }

    fn compatible(&self, other: &MultiSeries) -> Result<TruncationSpec> {
        if self.theta != other.theta || self.nvars != other.nvars {
            return Err(Error::LengthMismatch {
                what: "series shape".into(),
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(self.trunc.intersect(&other.trunc))
    }

    fn empty_like(&self, trunc: TruncationSpec) -> MultiSeries {
        MultiSeries::zero(self.theta.clone(), self.nvars, trunc)
    }

    fn map_coeffs(&self, f: impl Fn(&ZLaurent) -> ZLaurent) -> MultiSeries {
        let mut out = self.empty_like(self.trunc.clone());
        for (i, c) in &self.coeffs {
            out.insert(i.clone(), &f(c));
        }
        out
    }

    pub fn add(&self, other: &MultiSeries) -> Result<MultiSeries> {
        let mut out = self.empty_like(self.compatible(other)?);
        for (i, c) in self.coeffs.iter().chain(&other.coeffs) {
            out.insert(i.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiSeries) -> Result<MultiSeries> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> MultiSeries {
        self.map_coeffs(|x| x.scale(c))
    }

    /// Multiplies by `z^n`.
    pub fn mul_z(&self, n: i64) -> MultiSeries {
        self.map_coeffs(|x| x.shift(n))
    }

    /// Cauchy product over `(beta, t)` with sector-aware class products.
    pub fn mul(&self, other: &MultiSeries, coh: &Cohomology) -> Result<MultiSeries> {
        let mut out = self.empty_like(self.compatible(other)?);
        for (ia, ca) in &self.coeffs {
            for (ib, cb) in &other.coeffs {
                let idx = ia.add(ib);
                if out.admits(&idx) {
                    out.insert(idx, &ca.mul(cb, coh)?);
                }
            }
        }
        Ok(out)
    }

    pub fn truncate_plus(&self) -> MultiSeries {
        self.map_coeffs(ZLaurent::truncate_plus)
    }

    pub fn truncate_minus(&self) -> MultiSeries {
        self.map_coeffs(ZLaurent::truncate_minus)
    }

    /// The class multiplying `z^c` at every index.
    pub fn z_coefficient(&self, c: i64) -> BTreeMap<SeriesIndex, CRClass> {
        self.coeffs
            .iter()
            .map(|(i, x)| (i.clone(), x.coefficient(c)))
            .filter(|(_, x)| !x.is_zero())
            .collect()
    }

    fn exponent_along(&self, idx: &SeriesIndex, dir: &Direction, chart: &NovikovChart) -> Result<Q> {
        match dir {
            Direction::T(i) => idx
                .t
                .get(*i)
                .map(|&e| qi(i64::from(e)))
                .ok_or_else(|| Error::UnknownDirection(format!("t{}", i + 1))),
            Direction::Novikov(c) => {
                if *c >= chart.len() {
                    return Err(Error::UnknownDirection(format!("novikov #{c}")));
                }
                Ok(chart.coordinates(&idx.degree)?[*c].clone())
            }
        }
    }

    /// Formal partial derivative. The truncation bound drops by the degree of
    /// the direction, so the result only claims what it fully knows.
    pub fn differentiate(&self, dir: &Direction, chart: &NovikovChart) -> Result<MultiSeries> {
        let mut trunc = self.trunc.clone();
        match dir {
            Direction::T(i) => {
                if *i >= self.nvars {
                    return Err(Error::UnknownDirection(format!("t{}", i + 1)));
                }
                trunc.t_bound = trunc.t_bound.checked_sub(1).ok_or_else(|| {
                    Error::FrameResidualTooLow(format!("t{} derivative beyond the t truncation", i + 1))
                })?;
            }
            Direction::Novikov(c) => {
                let g = chart
                    .generators()
                    .get(*c)
                    .ok_or_else(|| Error::UnknownDirection(format!("novikov #{c}")))?;
                trunc.theta_bound = &trunc.theta_bound - g.pair(&self.theta);
                if trunc.theta_bound.is_negative() {
                    return Err(Error::FrameResidualTooLow(format!(
                        "{} derivative beyond the degree truncation",
                        chart.names()[*c]
                    )));
                }
            }
        }
        let mut out = self.empty_like(trunc);
        for (idx, c) in &self.coeffs {
            let a = self.exponent_along(idx, dir, chart)?;
            if a.is_zero() {
                continue;
            }
            let lowered = match dir {
                Direction::T(i) => {
                    let mut t = idx.t.clone();
                    t[*i] -= 1;
                    SeriesIndex::new(idx.degree.clone(), t)
                }
                Direction::Novikov(n) => {
                    SeriesIndex::new(&idx.degree - &chart.generators()[*n], idx.t.clone())
                }
            };
            out.insert(lowered, &c.scale(&a));
        }
        Ok(out)
    }

    /// Sets the given directions to zero.
    pub fn set_zero(&self, dirs: &[Direction], chart: &NovikovChart) -> Result<MultiSeries> {
        let mut out = self.empty_like(self.trunc.clone());
        'next: for (idx, c) in &self.coeffs {
            for d in dirs {
                if !self.exponent_along(idx, d, chart)?.is_zero() {
                    continue 'next;
                }
            }
            out.insert(idx.clone(), c);
        }
        Ok(out)
    }

    /// Multiplies each coefficient at degree `beta` by
    /// `exp((1/z) sum_i t_i u_i(H_j + beta_j z))`, evaluated in that
    /// coefficient's sector ring.
    pub fn apply_exp_prefactor(&self, spec: &ExpPrefactorSpec, coh: &Cohomology) -> Result<MultiSeries> {
        if spec.entries.is_empty() {
            return Ok(self.clone());
        }
        let k = self.rank();
        let mut per_var: BTreeMap<usize, Poly> = BTreeMap::new();
        for (i, u) in &spec.entries {
            if *i >= self.nvars {
                return Err(Error::UnknownDirection(format!("t{}", i + 1)));
            }
            if u.nvars() != k {
                return Err(Error::LengthMismatch {
                    what: format!("prefactor polynomial for t{}", i + 1),
                    expected: k,
                    found: u.nvars(),
                });
            }
            let acc = per_var.entry(*i).or_insert_with(|| Poly::zero(k));
            *acc = acc.add(u);
        }
        let vars: Vec<usize> = per_var.keys().copied().collect();
        let mut out = self.empty_like(self.trunc.clone());
        for (idx, coeff) in &self.coeffs {
            let budget = self.trunc.t_bound.saturating_sub(idx.t_degree());
            for (sector, local) in coeff.by_sector() {
                let ring = coh.ring(&sector)?;
                // w_i = u_i(H + beta z) / z in this ring
                let mut w: Vec<Local> = Vec::new();
                for v in &vars {
                    let mut wi = Local::new();
                    for (zpow, p) in per_var[v].shift_by_z(&idx.degree.0) {
                        local_add(&mut wi, i64::from(zpow) - 1, &ring.normal_form(&p)?);
                    }
                    w.push(wi);
                }
                // powers w_i^n / n!
                let mut powers: Vec<Vec<Local>> = Vec::new();
                for wi in &w {
                    let mut list = vec![local_one(ring)?];
                    for n in 1..=budget {
                        let next = local_mul(ring, &list[n as usize - 1], wi)?;
                        list.push(next);
                    }
                    for (n, term) in list.iter_mut().enumerate() {
                        let inv = factorial(n as u64).recip();
                        *term = term.iter().map(|(e, c)| (*e, c.scale(&inv))).collect();
                    }
                    powers.push(list);
                }
                for ns in (0..vars.len()).map(|_| 0..=budget).multi_cartesian_product() {
                    if ns.iter().sum::<u32>() > budget {
                        continue;
                    }
                    let mut term = local.clone();
                    for (slot, &n) in ns.iter().enumerate() {
                        if n > 0 {
                            term = local_mul(ring, &term, &powers[slot][n as usize])?;
                        }
                    }
                    let mut t = idx.t.clone();
                    for (slot, &n) in ns.iter().enumerate() {
                        t[vars[slot]] += n;
                    }
                    out.insert(SeriesIndex::new(idx.degree.clone(), t), &ZLaurent::from_local(&term));
                }
            }
        }
        Ok(out)
    }

    /// `S * exp(sign * c / z)` for a scalar series `c` without constant term.
    pub fn exp_divisor_flow(&self, c: &ScalarSeries, sign: &Q, coh: &Cohomology) -> Result<MultiSeries> {
        if c.is_zero() {
            return Ok(self.clone());
        }
        for idx in c.terms.keys() {
            let th = self.theta_pairing(idx);
            if th.is_negative() || (th.is_zero() && idx.t_degree() == 0) {
                return Err(Error::NontruncatingArgument(format!(
                    "term at {idx} has theta-pairing {}",
                    fmt_q(&th)
                )));
            }
            if idx.t.len() != self.nvars {
                return Err(Error::LengthMismatch {
                    what: "flow index".into(),
                    expected: self.nvars,
                    found: idx.t.len(),
                });
            }
        }
        let unit = coh.unit();
        let mut arg = self.empty_like(self.trunc.clone());
        for (idx, x) in &c.terms {
            arg.insert(idx.clone(), &ZLaurent::monomial(-1, unit.scale(&(x * sign))));
        }
        let mut total = MultiSeries::unit(self.theta.clone(), self.nvars, self.trunc.clone(), coh);
        let mut term = total.clone();
        let mut m = 1i64;
        loop {
            term = term.mul(&arg, coh)?.scale(&qi(m).recip());
            if term.is_zero() {
                break;
            }
            total = total.add(&term)?;
            m += 1;
        }
        self.mul(&total, coh)
    }
}

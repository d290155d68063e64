//! Mirror map, J-frame normalization, and small quantum products read off
//! from second derivatives of the normalized I-function.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::cohomology::{CRClass, Cohomology, Monomial};
use crate::error::{Error, Result};
use crate::rational::Q;
use crate::series::{Direction, MultiSeries, NovikovChart, ScalarSeries, SeriesIndex, ZLaurent};

/// `mu = [z I - z 1]_+`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MirrorMap {
    pub mu: MultiSeries,
}

impl MirrorMap {
    /// `mu_{beta,p}`.
    pub fn piece(&self, idx: &SeriesIndex) -> ZLaurent {
        self.mu.coefficient(idx)
    }

    /// The multiple of the unit class in the `z^0` part of `mu`.
    pub fn unit_flow(&self, coh: &Cohomology) -> ScalarSeries {
        let id = coh.identity();
        let one = Monomial::one(coh.rank());
        let mut out = ScalarSeries::default();
        for (idx, c) in self.mu.z_coefficient(0) {
            if let Some(part) = c.part(&id) {
                out.insert(idx, part.coefficient(&one));
            }
        }
        out
    }
}

fn check_unital(i: &MultiSeries, coh: &Cohomology) -> Result<SeriesIndex> {
    let zero = SeriesIndex::zero(i.rank(), i.nvars());
    if i.coefficient(&zero) != ZLaurent::constant(coh.unit()) {
        return Err(Error::NotUnital);
    }
    Ok(zero)
}

pub fn mirror_map(i: &MultiSeries, coh: &Cohomology) -> Result<MirrorMap> {
    let zero = check_unital(i, coh)?;
    let mut zi = i.mul_z(1);
    zi.insert(zero, &ZLaurent::monomial(1, coh.unit().scale(&-Q::one())));
    Ok(MirrorMap { mu: zi.truncate_plus() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlusPartReport {
    pub checked: usize,
    pub violations: Vec<SeriesIndex>,
}

impl PlusPartReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `[z I_{beta,p}]_+ = delta_{(beta,p),0} z + mu_{beta,p}` at every
/// index present in either series.
pub fn plus_part_check(i: &MultiSeries, mu: &MirrorMap, coh: &Cohomology) -> PlusPartReport {
    let zero = SeriesIndex::zero(i.rank(), i.nvars());
    let mut indices: Vec<SeriesIndex> = i.coefficients().map(|(k, _)| k.clone()).collect();
    indices.extend(mu.mu.coefficients().map(|(k, _)| k.clone()));
    indices.sort();
    indices.dedup();
    let mut violations = Vec::new();
    for idx in &indices {
        let lhs = i.coefficient(idx).shift(1).truncate_plus();
        let mut rhs = mu.piece(idx);
        if *idx == zero {
            rhs = rhs.add(&ZLaurent::monomial(1, coh.unit()));
        }
        if lhs != rhs {
            violations.push(idx.clone());
        }
    }
    PlusPartReport {
        checked: indices.len(),
        violations,
    }
}

/// `S = z exp(-flow/z) I`, its `z^0` coordinates `tau`, and the parameter
/// degree from which `tau` stops being linear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JFrame {
    pub tau: BTreeMap<SeriesIndex, CRClass>,
    pub normalized: MultiSeries,
    /// Smallest parameter degree of a term of `tau` that is not a bare
    /// parameter; `None` if there is none within the truncation.
    pub residual_order: Option<Q>,
    pub flow: ScalarSeries,
    pub params: Vec<Direction>,
}

/// Total exponent of `idx` along the parameter directions.
pub fn parameter_degree(idx: &SeriesIndex, params: &[Direction], chart: &NovikovChart) -> Result<Q> {
    let mut total = Q::zero();
    let coords = chart.coordinates(&idx.degree)?;
    for p in params {
        total += match p {
            Direction::T(i) => Q::from_integer((*idx.t.get(*i).unwrap_or(&0)).into()),
            Direction::Novikov(c) => coords
                .get(*c)
                .cloned()
                .ok_or_else(|| Error::UnknownDirection(format!("novikov #{c}")))?,
        };
    }
    Ok(total)
}

fn is_bare_parameter(idx: &SeriesIndex, params: &[Direction], chart: &NovikovChart) -> Result<bool> {
    let coords = chart.coordinates(&idx.degree)?;
    let mut hits = 0;
    for (c, a) in coords.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        if !a.is_one() || !params.contains(&Direction::Novikov(c)) {
            return Ok(false);
        }
        hits += 1;
    }
    for (i, e) in idx.t.iter().enumerate() {
        if *e == 0 {
            continue;
        }
        if *e != 1 || !params.contains(&Direction::T(i)) {
            return Ok(false);
        }
        hits += 1;
    }
    Ok(hits == 1)
}

pub fn normalize_frame(
    i: &MultiSeries,
    flow: &ScalarSeries,
    params: &[Direction],
    chart: &NovikovChart,
    coh: &Cohomology,
) -> Result<JFrame> {
    let zero = check_unital(i, coh)?;
    let s = i.mul_z(1).exp_divisor_flow(flow, &-Q::one(), coh)?;
    for (idx, c) in s.coefficients() {
        for (e, x) in c.terms() {
            if *e < 1 {
                continue;
            }
            let allowed = *idx == zero && *e == 1 && *x == coh.unit();
            if !allowed {
                return Err(Error::PositivePowersRemain(format!("{idx}, z^{e}")));
            }
        }
    }
    let tau = s.z_coefficient(0);
    let mut residual_order: Option<Q> = None;
    for idx in tau.keys() {
        if is_bare_parameter(idx, params, chart)? {
            continue;
        }
        let d = parameter_degree(idx, params, chart)?;
        if residual_order.as_ref().is_none_or(|r| d < *r) {
            residual_order = Some(d);
        }
    }
    Ok(JFrame {
        tau,
        normalized: s,
        residual_order,
        flow: flow.clone(),
        params: params.to_vec(),
    })
}

/// A derivative direction of the frame: the string direction `1` or a series
/// direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameDirection {
    Unit,
    Series(Direction),
}

/// A class-valued power series in the remaining (Novikov) variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassSeries {
    pub terms: BTreeMap<SeriesIndex, CRClass>,
}

impl ClassSeries {
    pub fn constant(idx: SeriesIndex, c: CRClass) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(idx, c);
        }
        ClassSeries { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `<self, c>` term by term.
    pub fn pair_with(&self, c: &CRClass, coh: &Cohomology) -> Result<BTreeMap<SeriesIndex, Q>> {
        let mut out = BTreeMap::new();
        for (idx, x) in &self.terms {
            let v = coh.orb_pairing(x, c)?;
            if !v.is_zero() {
                out.insert(idx.clone(), v);
            }
        }
        Ok(out)
    }
}

fn frame_derivative(s: &MultiSeries, dir: &FrameDirection, chart: &NovikovChart) -> Result<MultiSeries> {
    match dir {
        // string equation: d/dt_0 S = S / z
        FrameDirection::Unit => Ok(s.mul_z(-1)),
        FrameDirection::Series(d) => s.differentiate(d, chart),
    }
}

fn evaluate(s: &MultiSeries, eval: &[Direction], chart: &NovikovChart, power: i64) -> Result<ClassSeries> {
    let at = s.set_zero(eval, chart)?;
    Ok(ClassSeries {
        terms: at.z_coefficient(power),
    })
}

fn check_eval(frame: &JFrame, eval: &[Direction], dirs: &[&FrameDirection]) -> Result<()> {
    for d in dirs {
        if let FrameDirection::Series(d) = d {
            if !eval.contains(d) {
                return Err(Error::FrameNotFlat(format!("direction {d:?} is not evaluated")));
            }
            if !frame.params.contains(d) {
                return Err(Error::UnknownDirection(format!("{d:?} is not a parameter")));
            }
        }
    }
    Ok(())
}

/// `tau` as a series (all at `z^0`).
fn tau_series(frame: &JFrame) -> MultiSeries {
    let s = &frame.normalized;
    let mut out = MultiSeries::zero(s.theta().clone(), s.nvars(), s.trunc().clone());
    for (idx, c) in &frame.tau {
        out.insert(idx.clone(), &ZLaurent::constant(c.clone()));
    }
    out
}

/// The class `d tau / d dir` at the evaluation point; it must be constant.
pub fn direction_class(
    frame: &JFrame,
    dir: &FrameDirection,
    eval: &[Direction],
    chart: &NovikovChart,
    coh: &Cohomology,
) -> Result<CRClass> {
    let d = match dir {
        FrameDirection::Unit => return Ok(coh.unit()),
        FrameDirection::Series(d) => d,
    };
    check_eval(frame, eval, &[dir])?;
    let at = evaluate(&tau_series(frame).differentiate(d, chart)?, eval, chart, 0)?;
    let zero = SeriesIndex::zero(frame.normalized.rank(), frame.normalized.nvars());
    let mut out = CRClass::zero();
    for (idx, c) in at.terms {
        if idx != zero {
            return Err(Error::FrameNotFlat(format!("d tau along {d:?} depends on {idx}")));
        }
        out = c;
    }
    Ok(out)
}

/// `phi_a o phi_b`: the `z^0` part of `z d_a d_b S` at the evaluation point,
/// after checking that `tau` is flat there to second order.
pub fn quantum_product(
    frame: &JFrame,
    a: &FrameDirection,
    b: &FrameDirection,
    eval: &[Direction],
    chart: &NovikovChart,
    coh: &Cohomology,
) -> Result<ClassSeries> {
    check_eval(frame, eval, &[a, b])?;
    let tau = tau_series(frame);
    if !evaluate(&tau, eval, chart, 0)?.is_zero() {
        return Err(Error::FrameNotFlat("tau does not vanish at the evaluation point".into()));
    }
    direction_class(frame, a, eval, chart, coh)?;
    direction_class(frame, b, eval, chart, coh)?;
    if let (FrameDirection::Series(da), FrameDirection::Series(db)) = (a, b) {
        let second = tau.differentiate(da, chart)?.differentiate(db, chart)?;
        let at = evaluate(&second, eval, chart, 0)?;
        if let Some((idx, _)) = at.terms.iter().next() {
            return Err(Error::FrameNotFlat(format!(
                "second derivative of tau along {da:?}, {db:?} is nonzero at {idx}"
            )));
        }
    }
    let d = frame_derivative(&frame.normalized, a, chart)?;
    let d = frame_derivative(&d, b, chart)?;
    evaluate(&d, eval, chart, -1)
}

/// A row/column label of a product table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub label: String,
    pub class: CRClass,
    pub direction: Option<FrameDirection>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Computed,
    /// `1 o phi = phi` for a class without a series direction.
    UnitAxiom,
    NotParameterized,
    NotFlat(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableCell {
    pub status: CellStatus,
    pub value: Option<ClassSeries>,
}

pub fn product_table(
    frame: &JFrame,
    basis: &[BasisElement],
    eval: &[Direction],
    chart: &NovikovChart,
    coh: &Cohomology,
) -> Result<Vec<Vec<TableCell>>> {
    let zero = SeriesIndex::zero(frame.normalized.rank(), frame.normalized.nvars());
    let mut realized = Vec::new();
    for e in basis {
        let ok = match &e.direction {
            None => None,
            Some(d) => match direction_class(frame, d, eval, chart, coh) {
                Ok(c) if c == e.class => Some(Ok(d.clone())),
                Ok(c) => Some(Err(format!("direction realizes a different class ({c:?})"))),
                Err(Error::FrameNotFlat(m)) | Err(Error::FrameResidualTooLow(m)) => Some(Err(m)),
                Err(err) => return Err(err),
            },
        };
        realized.push(ok);
    }
    let mut rows = Vec::new();
    for (i, ei) in basis.iter().enumerate() {
        let mut row = Vec::new();
        for (j, ej) in basis.iter().enumerate() {
            let cell = match (&realized[i], &realized[j]) {
                (Some(Err(m)), _) | (_, Some(Err(m))) => TableCell {
                    status: CellStatus::NotFlat(m.clone()),
                    value: None,
                },
                (Some(Ok(da)), Some(Ok(db))) => match quantum_product(frame, da, db, eval, chart, coh) {
                    Ok(v) => TableCell {
                        status: CellStatus::Computed,
                        value: Some(v),
                    },
                    Err(Error::FrameNotFlat(m)) | Err(Error::FrameResidualTooLow(m)) => TableCell {
                        status: CellStatus::NotFlat(m),
                        value: None,
                    },
                    Err(err) => return Err(err),
                },
                (Some(Ok(FrameDirection::Unit)), None) => TableCell {
                    status: CellStatus::UnitAxiom,
                    value: Some(ClassSeries::constant(zero.clone(), ej.class.clone())),
                },
                (None, Some(Ok(FrameDirection::Unit))) => TableCell {
                    status: CellStatus::UnitAxiom,
                    value: Some(ClassSeries::constant(zero.clone(), ei.class.clone())),
                },
                _ => TableCell {
                    status: CellStatus::NotParameterized,
                    value: None,
                },
            };
            row.push(cell);
        }
        rows.push(row);
    }
    Ok(rows)
}

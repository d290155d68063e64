//! Text, CSV and JSON emission. Output order never depends on hashing.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use toric_ifn::cohomology::{fmt_class, fmt_monomial};
use toric_ifn::mirror::{CellStatus, ClassSeries, TableCell};
use toric_ifn::rational::{fmt_q, parse_q};
use toric_ifn::{
    CRClass, Character, Degree, Monomial, MultiSeries, NovikovChart, SectorId, SeriesIndex, TruncationSpec, ZLaurent,
    Q,
};

use crate::commands::{Outcome, Report};
use crate::config::Config;

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Names for indices: Novikov coordinates then `t`-variables.
pub struct Namer<'a> {
    pub chart: &'a NovikovChart,
    pub t_names: &'a [String],
    pub theta: &'a Character,
}

impl Namer<'_> {
    fn coords(&self, d: &Degree) -> Vec<Q> {
        self.chart
            .coordinates(d)
            .unwrap_or_else(|_| d.0.clone())
    }

    /// `q^2 x t1`, or `1`.
    pub fn monomial(&self, idx: &SeriesIndex) -> String {
        let mut parts = Vec::new();
        for (name, e) in self.chart.names().iter().zip(self.coords(&idx.degree)) {
            if e.is_zero() {
                continue;
            }
            if e.is_one() {
                parts.push(name.clone());
            } else if e.is_integer() && e > Q::zero() {
                parts.push(format!("{name}^{e}"));
            } else {
                parts.push(format!("{name}^({})", fmt_q(&e)));
            }
        }
        for (name, e) in self.t_names.iter().zip(&idx.t) {
            match e {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }

    /// `2 q + x`, or `0`.
    pub fn additive(&self, d: &Degree) -> String {
        let parts: Vec<String> = self
            .chart
            .names()
            .iter()
            .zip(self.coords(d))
            .filter(|(_, e)| !e.is_zero())
            .map(|(n, e)| if e.is_one() { n.clone() } else { format!("{} {n}", fmt_q(&e)) })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Sort key: theta-pairing, then chart coordinates, then `t`.
    pub fn order<'s>(&self, idx: impl Iterator<Item = &'s SeriesIndex>) -> Vec<&'s SeriesIndex> {
        idx.sorted_by_cached_key(|i| (i.degree.pair(self.theta), self.coords(&i.degree), i.t.clone()))
            .collect()
    }
}

fn class_text(c: &CRClass, names: &[String]) -> String {
    let s = fmt_class(c, names);
    if s.contains(" + ") {
        format!("({s})")
    } else {
        s
    }
}

pub fn fmt_laurent(l: &ZLaurent, names: &[String]) -> String {
    let terms: Vec<String> = l
        .terms()
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .map(|(e, c)| {
            let body = class_text(c, names);
            match *e {
                0 => body,
                1 => format!("z * {body}"),
                -1 => format!("1/z * {body}"),
                e if e > 0 => format!("z^{e} * {body}"),
                e => format!("1/z^{} * {body}", -e),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// `(1/3) p^2 + (-3/2) q [sector 1/2,0] 1`.
pub fn fmt_class_series(s: &ClassSeries, namer: &Namer, names: &[String]) -> String {
    let mut terms = Vec::new();
    for idx in namer.order(s.terms.keys()) {
        let nov = namer.monomial(idx);
        for part in s.terms[idx].parts() {
            for (m, c) in part.coeffs() {
                let mut words = Vec::new();
                if !c.is_one() {
                    words.push(format!("({})", fmt_q(c)));
                }
                if nov != "1" {
                    words.push(nov.clone());
                }
                if !part.sector().is_identity() {
                    words.push(format!("[sector {}]", part.sector()));
                }
                let mono = fmt_monomial(m, names);
                if mono != "1" || words.is_empty() || !part.sector().is_identity() || (nov == "1") {
                    words.push(mono);
                }
                terms.push(words.join(" "));
            }
        }
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn fmt_scalar_series(s: &BTreeMap<SeriesIndex, Q>, namer: &Namer) -> String {
    let terms: Vec<String> = namer
        .order(s.keys())
        .into_iter()
        .map(|idx| {
            let nov = namer.monomial(idx);
            let c = &s[idx];
            match (c.is_one(), nov == "1") {
                (true, false) => nov,
                (_, true) => fmt_q(c),
                (false, false) => format!("({}) {nov}", fmt_q(c)),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

pub fn cell_text(cell: &TableCell, namer: &Namer, names: &[String]) -> String {
    match (&cell.status, &cell.value) {
        (CellStatus::NotParameterized, _) => "n/a (direction not parameterized)".into(),
        (CellStatus::NotFlat(m), _) => format!("n/a (frame not flat: {m})"),
        (_, Some(v)) => fmt_class_series(v, namer, names),
        (_, None) => "n/a".into(),
    }
}

fn status_name(s: &CellStatus) -> &'static str {
    match s {
        CellStatus::Computed => "computed",
        CellStatus::UnitAxiom => "unit-axiom",
        CellStatus::NotParameterized => "not-parameterized",
        CellStatus::NotFlat(_) => "not-flat",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).join(",")
}

// ---- JSON codecs ----

fn q_json(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

fn q_from(v: &Value) -> Result<Q, String> {
    match v {
        Value::String(s) => parse_q(s).ok_or_else(|| format!("bad rational '{s}'")),
        Value::Number(n) => n
            .as_i64()
            .map(|n| Q::from_integer(n.into()))
            .ok_or_else(|| format!("bad rational {n}")),
        other => Err(format!("expected a rational, got {other}")),
    }
}

pub fn class_to_json(c: &CRClass) -> Value {
    let parts: Vec<Value> = c
        .parts()
        .map(|p| {
            let terms: Vec<Value> = p
                .coeffs()
                .iter()
                .map(|(m, x)| json!({"monomial": m.0, "coefficient": q_json(x)}))
                .collect();
            json!({"sector": p.sector().to_string(), "terms": terms})
        })
        .collect();
    json!({ "parts": parts })
}

fn array<'v>(v: &'v Value, key: &str) -> Result<&'v Vec<Value>, String> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| format!("missing array '{key}'"))
}

pub fn class_from_json(v: &Value) -> Result<CRClass, String> {
    let mut out = CRClass::zero();
    for part in array(v, "parts")? {
        let sector_text = part.get("sector").and_then(Value::as_str).ok_or("missing 'sector'")?;
        let entries: Vec<Q> = sector_text
            .split(',')
            .map(|s| parse_q(s).ok_or_else(|| format!("bad sector '{sector_text}'")))
            .collect::<Result<_, _>>()?;
        let sector = SectorId::from_exponents(&entries);
        for t in array(part, "terms")? {
            let exps: Vec<u32> = serde_json::from_value(t.get("monomial").cloned().ok_or("missing 'monomial'")?)
                .map_err(|e| e.to_string())?;
            let c = q_from(t.get("coefficient").ok_or("missing 'coefficient'")?)?;
            out = out.add(&CRClass::monomial(sector.clone(), Monomial(exps), c));
        }
    }
    Ok(out)
}

fn index_json(idx: &SeriesIndex) -> Value {
    json!({
        "degree": idx.degree.0.iter().map(q_json).collect::<Vec<_>>(),
        "t": idx.t,
    })
}

fn index_from(v: &Value) -> Result<SeriesIndex, String> {
    let degree = Degree(array(v, "degree")?.iter().map(q_from).collect::<Result<_, _>>()?);
    let t: Vec<u32> = serde_json::from_value(v.get("t").cloned().ok_or("missing 't'")?).map_err(|e| e.to_string())?;
    Ok(SeriesIndex::new(degree, t))
}

pub fn laurent_to_json(l: &ZLaurent) -> Value {
    Value::Array(
        l.terms()
            .map(|(e, c)| json!({"z": e, "class": class_to_json(c)}))
            .collect(),
    )
}

pub fn series_to_json(s: &MultiSeries) -> Value {
    let coefficients: Vec<Value> = s
        .coefficients()
        .map(|(idx, l)| {
            let mut v = index_json(idx);
            v["laurent"] = laurent_to_json(l);
            v
        })
        .collect();
    let tr = s.trunc();
    json!({
        "theta": s.theta().0,
        "nvars": s.nvars(),
        "truncation": {
            "theta_bound": q_json(&tr.theta_bound),
            "t_bound": tr.t_bound,
            "z_floor": tr.z_floor,
            "z_ceil": tr.z_ceil,
        },
        "coefficients": coefficients,
    })
}

pub fn series_from_json(v: &Value) -> Result<MultiSeries, String> {
    let theta: Vec<i64> = serde_json::from_value(v.get("theta").cloned().ok_or("missing 'theta'")?)
        .map_err(|e| e.to_string())?;
    let nvars = v.get("nvars").and_then(Value::as_u64).ok_or("missing 'nvars'")? as usize;
    let tr = v.get("truncation").ok_or("missing 'truncation'")?;
    let mut trunc = TruncationSpec::new(
        q_from(tr.get("theta_bound").ok_or("missing 'theta_bound'")?)?,
        tr.get("t_bound").and_then(Value::as_u64).ok_or("missing 't_bound'")? as u32,
    );
    trunc.z_floor = tr.get("z_floor").and_then(Value::as_i64);
    trunc.z_ceil = tr.get("z_ceil").and_then(Value::as_i64);
    let mut s = MultiSeries::zero(Character(theta), nvars, trunc);
    for c in array(v, "coefficients")? {
        let idx = index_from(c)?;
        let mut l = ZLaurent::zero();
        for term in array(c, "laurent")? {
            let e = term.get("z").and_then(Value::as_i64).ok_or("missing 'z'")?;
            l.add_term(e, &class_from_json(term.get("class").ok_or("missing 'class'")?)?);
        }
        s.insert(idx, &l);
    }
    Ok(s)
}

pub fn class_series_to_json(s: &ClassSeries) -> Value {
    Value::Array(
        s.terms
            .iter()
            .map(|(idx, c)| {
                let mut v = index_json(idx);
                v["class"] = class_to_json(c);
                v
            })
            .collect(),
    )
}

pub fn class_series_from_json(v: &Value) -> Result<ClassSeries, String> {
    let mut out = ClassSeries::default();
    for t in v.as_array().ok_or("expected an array")? {
        out.terms
            .insert(index_from(t)?, class_from_json(t.get("class").ok_or("missing 'class'")?)?);
    }
    Ok(out)
}

// ---- emit ----

pub fn emit(outcome: &Outcome, config: &Config, format: Format) -> String {
    let namer = Namer {
        chart: &outcome.session.chart,
        t_names: &outcome.session.t_names,
        theta: config.model.presentation.theta(),
    };
    let names = &config.generator_names;
    match format {
        Format::Text => emit_text(outcome, &namer, names),
        Format::Csv => emit_csv(outcome, &namer, names),
        Format::Json => {
            let v = json!({
                "schema_version": OUTPUT_SCHEMA_VERSION,
                "command": outcome.command.name(),
                "config": config.name,
                "warnings": outcome.notes,
                "result": result_json(&outcome.report, &namer, names),
            });
            let mut s = serde_json::to_string_pretty(&v).expect("json values always serialize");
            s.push('\n');
            s
        }
    }
}

fn emit_text(outcome: &Outcome, namer: &Namer, names: &[String]) -> String {
    let mut out: Vec<String> = Vec::new();
    match &outcome.report {
        Report::Validate {
            name,
            rank,
            characters,
            hypersurfaces,
            supports,
            exponent,
            sectors,
            table,
        } => {
            out.push(format!(
                "presentation {name}: rank {rank}, {characters} characters, {hypersurfaces} hypersurface characters"
            ));
            for s in supports {
                let idx = s.indices.iter().map(|i| (i + 1).to_string()).join(",");
                let group = if s.invariant_factors.is_empty() {
                    "trivial".to_string()
                } else {
                    s.invariant_factors.iter().map(|d| format!("Z/{d}")).join(" x ")
                };
                out.push(format!("support {{{idx}}}: stabilizer {group}"));
            }
            out.push(format!("exponent: {exponent}"));
            for (s, n) in sectors {
                out.push(format!("sector {s}: ring of dimension {n}"));
            }
            for t in table {
                out.push(format!("twisted class for {}: {} (provenance: {})", t.key, t.class, t.provenance));
            }
            out.push("ok".into());
        }
        Report::Sectors(list) => {
            for (s, o) in list {
                out.push(format!("{s}\torder {o}"));
            }
        }
        Report::Effective(list) => {
            for d in list {
                out.push(namer.additive(d));
            }
        }
        Report::Series(s) => {
            for idx in namer.order(s.coefficients().map(|(i, _)| i)) {
                out.push(format!("{}: {}", namer.monomial(idx), fmt_laurent(&s.coefficient(idx), names)));
            }
        }
        Report::MirrorMap { mu, flow, auto_flow } => {
            for idx in namer.order(mu.coefficients().map(|(i, _)| i)) {
                out.push(format!("{}: {}", namer.monomial(idx), fmt_laurent(&mu.coefficient(idx), names)));
            }
            let how = if *auto_flow { "auto" } else { "configured" };
            out.push(format!("flow ({how}): {}", fmt_scalar_series(&flow.terms, namer)));
        }
        Report::Product { a, b, value, pairing } => {
            out.push(fmt_class_series(value, namer, names));
            if let Some((c, p)) = pairing {
                out.push(format!("pairing of {a} o {b} with {c}: {}", fmt_scalar_series(p, namer)));
            }
        }
        Report::Table { labels, cells } => {
            for i in 0..labels.len() {
                for j in i..labels.len() {
                    out.push(format!("{} o {} = {}", labels[i], labels[j], cell_text(&cells[i][j], namer, names)));
                }
            }
        }
        Report::Check(r) => {
            for v in &r.violations {
                out.push(format!("violation at {}", namer.monomial(v)));
            }
            out.push(format!("checked {} indices, {} violations", r.checked, r.violations.len()));
        }
    }
    let mut s = out.join("\n");
    s.push('\n');
    s
}

fn emit_csv(outcome: &Outcome, namer: &Namer, names: &[String]) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let class_rows = |rows: &mut Vec<Vec<String>>, lead: Vec<String>, c: &CRClass| {
        for p in c.parts() {
            for (m, x) in p.coeffs() {
                let mut r = lead.clone();
                r.extend([p.sector().to_string(), fmt_monomial(m, names), fmt_q(x)]);
                rows.push(r);
            }
        }
    };
    match &outcome.report {
        Report::Validate { supports, exponent, sectors, table, .. } => {
            rows.push(vec!["kind".into(), "item".into(), "value".into()]);
            for s in supports {
                let idx = s.indices.iter().map(|i| (i + 1).to_string()).join(" ");
                rows.push(vec!["support".into(), idx, s.stabilizer_order().to_string()]);
            }
            rows.push(vec!["exponent".into(), String::new(), exponent.to_string()]);
            for (s, n) in sectors {
                rows.push(vec!["sector".into(), s.to_string(), n.to_string()]);
            }
            for t in table {
                rows.push(vec!["twisted-class".into(), t.key.clone(), format!("{} ({})", t.class, t.provenance)]);
            }
        }
        Report::Sectors(list) => {
            rows.push(vec!["sector".into(), "order".into()]);
            for (s, o) in list {
                rows.push(vec![s.to_string(), o.to_string()]);
            }
        }
        Report::Effective(list) => {
            let mut header = vec!["theta".to_string()];
            header.extend(namer.chart.names().iter().cloned());
            rows.push(header);
            for d in list {
                let mut r = vec![fmt_q(&d.pair(namer.theta))];
                r.extend(namer.coords(d).iter().map(fmt_q));
                rows.push(r);
            }
        }
        Report::Series(s) | Report::MirrorMap { mu: s, .. } => {
            rows.push(["index", "z", "sector", "monomial", "coefficient"].map(String::from).to_vec());
            for idx in namer.order(s.coefficients().map(|(i, _)| i)) {
                for (e, c) in s.coefficient(idx).terms().collect::<Vec<_>>().into_iter().rev() {
                    class_rows(&mut rows, vec![namer.monomial(idx), e.to_string()], c);
                }
            }
        }
        Report::Product { value, .. } => {
            rows.push(["index", "sector", "monomial", "coefficient"].map(String::from).to_vec());
            for idx in namer.order(value.terms.keys()) {
                class_rows(&mut rows, vec![namer.monomial(idx)], &value.terms[idx]);
            }
        }
        Report::Table { labels, cells } => {
            let mut header = vec![String::new()];
            header.extend(labels.iter().cloned());
            rows.push(header);
            for (i, l) in labels.iter().enumerate() {
                let mut r = vec![l.clone()];
                r.extend(cells[i].iter().map(|c| cell_text(c, namer, names)));
                rows.push(r);
            }
        }
        Report::Check(r) => {
            rows.push(vec!["index".into(), "status".into()]);
            for v in &r.violations {
                rows.push(vec![namer.monomial(v), "violation".into()]);
            }
            rows.push(vec!["checked".into(), r.checked.to_string()]);
        }
    }
    let mut s = rows.iter().map(|r| csv_row(r)).join("\n");
    s.push('\n');
    s
}

fn result_json(report: &Report, namer: &Namer, names: &[String]) -> Value {
    match report {
        Report::Validate {
            name,
            rank,
            characters,
            hypersurfaces,
            supports,
            exponent,
            sectors,
            table,
        } => json!({
            "name": name,
            "rank": rank,
            "characters": characters,
            "hypersurface_characters": hypersurfaces,
            "supports": supports.iter().map(|s| json!({
                "indices": s.indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "invariant_factors": s.invariant_factors,
                "order": s.stabilizer_order(),
            })).collect::<Vec<_>>(),
            "exponent": exponent,
            "sectors": sectors.iter().map(|(s, n)| json!({"sector": s.to_string(), "dimension": n})).collect::<Vec<_>>(),
            "twisted_class_table": table.iter().map(|t| json!({
                "key": t.key, "class": t.class, "provenance": t.provenance,
            })).collect::<Vec<_>>(),
        }),
        Report::Sectors(list) => Value::Array(
            list.iter()
                .map(|(s, o)| json!({"sector": s.to_string(), "order": o}))
                .collect(),
        ),
        Report::Effective(list) => Value::Array(
            list.iter()
                .map(|d| {
                    json!({
                        "degree": d.0.iter().map(q_json).collect::<Vec<_>>(),
                        "coordinates": namer.coords(d).iter().map(q_json).collect::<Vec<_>>(),
                        "theta": q_json(&d.pair(namer.theta)),
                        "text": namer.additive(d),
                    })
                })
                .collect(),
        ),
        Report::Series(s) => series_to_json(s),
        Report::MirrorMap { mu, flow, auto_flow } => json!({
            "mu": series_to_json(mu),
            "flow": {
                "auto": auto_flow,
                "terms": flow.terms.iter().map(|(i, c)| {
                    let mut v = index_json(i);
                    v["coefficient"] = q_json(c);
                    v
                }).collect::<Vec<_>>(),
            },
        }),
        Report::Product { a, b, value, pairing } => {
            let mut v = json!({
                "a": a,
                "b": b,
                "text": fmt_class_series(value, namer, names),
                "value": class_series_to_json(value),
            });
            if let Some((c, p)) = pairing {
                v["pairing"] = json!({
                    "with": c,
                    "terms": p.iter().map(|(i, x)| {
                        let mut t = index_json(i);
                        t["coefficient"] = q_json(x);
                        t
                    }).collect::<Vec<_>>(),
                });
            }
            v
        }
        Report::Table { labels, cells } => json!({
            "labels": labels,
            "cells": cells.iter().map(|row| row.iter().map(|c| {
                let mut v = json!({
                    "status": status_name(&c.status),
                    "text": cell_text(c, namer, names),
                });
                if let Some(x) = &c.value {
                    v["value"] = class_series_to_json(x);
                }
                v
            }).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
        Report::Check(r) => json!({
            "checked": r.checked,
            "passed": r.passed(),
            "violations": r.violations.iter().map(index_json).collect::<Vec<_>>(),
        }),
    }
}

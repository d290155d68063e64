//! JSON configuration: schema, loading and validation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use toric_ifn::ifunction::{Model, TableEntry, TableKey, TwistedClassProvider};
use toric_ifn::rational::parse_q;
use toric_ifn::{
    CRClass, Character, Cohomology, Degree, GitPresentation, Poly, Presentation, RingSpec, SectorId, TauClass, Q,
};

use crate::expr::{parse_class, parse_monomial, parse_poly};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A rational written either as a JSON integer or as a string `"a/b"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn value(&self, what: &str) -> Result<Q, String> {
        match self {
            Num::Int(n) => Ok(Q::from_integer((*n).into())),
            Num::Text(s) => parse_q(s).ok_or_else(|| format!("{what}: '{s}' is not a rational")),
        }
    }
}

fn values(v: &[Num], what: &str) -> Result<Vec<Q>, String> {
    v.iter().map(|n| n.value(what)).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    name: String,
    presentation: RawPresentation,
    generator_names: Vec<String>,
    novikov: RawNovikov,
    #[serde(default)]
    t_variables: Vec<String>,
    sectors: Vec<RawSector>,
    #[serde(default)]
    twisted_class_table: Vec<RawTableEntry>,
    truncation: RawTruncation,
    #[serde(default)]
    prefactor: Vec<RawPrefactor>,
    #[serde(default)]
    divisor_directions: Vec<RawDivisor>,
    #[serde(default)]
    flow: RawFlow,
    #[serde(default)]
    product_basis: Vec<RawBasis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPresentation {
    rank: usize,
    rho: Vec<Vec<i64>>,
    theta: Vec<i64>,
    #[serde(default)]
    tau: Vec<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNovikov {
    names: Vec<String>,
    generators: Vec<Vec<Num>>,
    #[serde(default)]
    parameters: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSector {
    sector: Vec<Num>,
    #[serde(default)]
    substitutions: BTreeMap<String, String>,
    basis: Vec<String>,
    #[serde(default)]
    vanishing: Vec<String>,
    #[serde(default)]
    reductions: Vec<RawReduction>,
    integrals: Vec<Num>,
    #[serde(default)]
    weight: Option<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReduction {
    lhs: String,
    rhs: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTableEntry {
    #[serde(default)]
    degree: Option<Vec<Num>>,
    #[serde(default)]
    stratum: Option<Vec<String>>,
    class: String,
    provenance: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruncation {
    theta_bound: Num,
    #[serde(default)]
    t_bound: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrefactor {
    variable: String,
    u: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDivisor {
    name: String,
    u: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawFlow {
    Mode(String),
    Explicit { terms: Vec<RawFlowTerm> },
}

impl Default for RawFlow {
    fn default() -> Self {
        RawFlow::Mode("auto".into())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlowTerm {
    #[serde(default)]
    novikov: BTreeMap<String, Num>,
    #[serde(default)]
    t: BTreeMap<String, u32>,
    coefficient: Num,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    label: String,
    class: String,
    #[serde(default)]
    direction: Option<String>,
}

/// One explicit flow term: Novikov exponents, named `t` exponents, coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowTerm {
    pub novikov: Vec<Q>,
    pub t: BTreeMap<String, u32>,
    pub coefficient: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowSpec {
    /// The unit-sector `z^0` part of the mirror map.
    Auto,
    Explicit(Vec<FlowTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSpec {
    pub label: String,
    pub class: CRClass,
    /// `"1"`, a Novikov parameter, a `t`-variable, or a divisor direction name.
    pub direction: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub name: String,
    pub source: String,
    pub model: Model,
    pub generator_names: Vec<String>,
    pub novikov_names: Vec<String>,
    pub degree_generators: Vec<Degree>,
    /// Indices into the Novikov coordinates that are deformation parameters.
    pub novikov_parameters: Vec<usize>,
    pub t_variables: Vec<String>,
    pub theta_bound: Q,
    pub t_bound: u32,
    pub prefactor: Vec<(usize, Poly)>,
    pub divisor_directions: Vec<(String, Poly)>,
    pub flow: FlowSpec,
    pub basis: Vec<BasisSpec>,
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        origin: source.clone(),
        message: e.to_string(),
    })?;
    parse_config(&text, &source)
}

pub fn parse_config(text: &str, source: &str) -> Result<Config, CliError> {
    let err = |message: String| CliError::Config {
        origin: source.to_string(),
        message,
    };
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    build(raw, source).map_err(err)
}

fn character(v: &[i64]) -> Character {
    Character(v.to_vec())
}

fn build(raw: RawConfig, source: &str) -> Result<Config, String> {
    if raw.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            raw.schema_version
        ));
    }
    let k = raw.presentation.rank;
    let git = GitPresentation::new(
        &raw.name,
        k,
        raw.presentation.rho.iter().map(|r| character(r)).collect(),
        character(&raw.presentation.theta),
        raw.presentation.tau.iter().map(|r| character(r)).collect(),
    )
    .map_err(|e| format!("presentation: {e}"))?;
    let presentation = Presentation::new(git).map_err(|e| format!("presentation: {e}"))?;

    let names = raw.generator_names.clone();
    if names.len() != k {
        return Err(format!("generator_names: {} names for rank {k}", names.len()));
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(format!("generator_names: '{n}' repeated"));
        }
    }

    let mut rings = Vec::new();
    let mut weights = BTreeMap::new();
    for (si, s) in raw.sectors.iter().enumerate() {
        let ctx = |m: String| format!("sectors[{si}]: {m}");
        let entries = values(&s.sector, "sector").map_err(ctx)?;
        if entries.len() != k {
            return Err(ctx(format!("{} entries, expected {k}", entries.len())));
        }
        let sector = SectorId::from_exponents(&entries);
        if sector.entries() != entries.as_slice() {
            return Err(ctx("entries must lie in [0, 1)".into()));
        }
        let mut subs = BTreeMap::new();
        for (name, rhs) in &s.substitutions {
            let j = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| ctx(format!("substitution for unknown generator '{name}'")))?;
            subs.insert(j, parse_poly(rhs, &names).map_err(ctx)?);
        }
        let monos = |list: &[String]| -> Result<Vec<_>, String> {
            list.iter().map(|m| parse_monomial(m, &names).map_err(ctx)).collect()
        };
        let basis = monos(&s.basis)?;
        let vanishing = monos(&s.vanishing)?;
        let mut reductions = Vec::new();
        for r in &s.reductions {
            reductions.push((
                parse_monomial(&r.lhs, &names).map_err(ctx)?,
                parse_poly(&r.rhs, &names).map_err(ctx)?,
            ));
        }
        let integrals = values(&s.integrals, "integrals").map_err(ctx)?;
        let ring = RingSpec::new(sector.clone(), subs, basis, vanishing, reductions, integrals).map_err(|e| ctx(e.to_string()))?;
        if let Some(w) = &s.weight {
            weights.insert(sector, w.value("weight").map_err(ctx)?);
        }
        rings.push(ring);
    }
    let cohomology = Cohomology::new(k, rings)
        .map_err(|e| format!("sectors: {e}"))?
        .with_weights(weights);
    for s in presentation.enumerate_sectors() {
        cohomology
            .ring(&s)
            .map_err(|_| format!("sectors: sector {s} of the presentation has no ring"))?;
    }

    let mut entries = Vec::new();
    for (ti, t) in raw.twisted_class_table.iter().enumerate() {
        let ctx = |m: String| format!("twisted_class_table[{ti}]: {m}");
        if t.provenance.trim().is_empty() {
            return Err(ctx("provenance note is empty".into()));
        }
        let class = parse_poly(&t.class, &names).map_err(ctx)?;
        let key = match (&t.degree, &t.stratum) {
            (Some(d), None) => {
                let beta = Degree(values(d, "degree").map_err(ctx)?);
                if beta.rank() != k {
                    return Err(ctx(format!("degree has {} entries, expected {k}", beta.rank())));
                }
                let target = SectorId::from_exponents(&beta.0).inverse();
                let ring = cohomology.ring(&target).map_err(|e| ctx(e.to_string()))?;
                ring.normal_form(&class).map_err(|e| ctx(e.to_string()))?;
                TableKey::Degree(beta)
            }
            (None, Some(s)) => {
                if s.len() != presentation.tau().len() {
                    return Err(ctx(format!(
                        "stratum lists {} classes for {} hypersurface characters",
                        s.len(),
                        presentation.tau().len()
                    )));
                }
                let classes = s
                    .iter()
                    .map(|c| TauClass::parse(c).ok_or_else(|| ctx(format!("unknown stratum '{c}'"))))
                    .collect::<Result<Vec<_>, _>>()?;
                TableKey::Stratum(classes)
            }
            _ => return Err(ctx("exactly one of 'degree' and 'stratum' is required".into())),
        };
        entries.push(TableEntry {
            key,
            class,
            provenance: t.provenance.clone(),
        });
    }
    let model = Model::new(presentation, cohomology, TwistedClassProvider::new(entries)).map_err(|e| e.to_string())?;

    let nov = &raw.novikov;
    if nov.names.len() != nov.generators.len() {
        return Err(format!(
            "novikov: {} names for {} generators",
            nov.names.len(),
            nov.generators.len()
        ));
    }
    let mut degree_generators = Vec::new();
    for (g, n) in nov.generators.iter().zip(&nov.names) {
        let d = Degree(values(g, "novikov generator").map_err(|e| format!("novikov: {e}"))?);
        if d.rank() != k {
            return Err(format!("novikov: generator '{n}' has {} entries, expected {k}", d.rank()));
        }
        degree_generators.push(d);
    }
    toric_ifn::NovikovChart::new(nov.names.clone(), degree_generators.clone()).map_err(|e| format!("novikov: {e}"))?;
    model
        .presentation
        .enumerate_effective(&degree_generators, &Q::from_integer(0.into()))
        .map_err(|e| format!("novikov: {e}"))?;
    let mut novikov_parameters = Vec::new();
    for p in &nov.parameters {
        let i = nov
            .names
            .iter()
            .position(|n| n == p)
            .ok_or_else(|| format!("novikov: parameter '{p}' is not a coordinate"))?;
        novikov_parameters.push(i);
    }

    let mut all_names: Vec<&String> = names.iter().chain(&nov.names).chain(&raw.t_variables).collect();
    all_names.extend(raw.divisor_directions.iter().map(|d| &d.name));
    for (i, n) in all_names.iter().enumerate() {
        if all_names[..i].contains(n) || n.as_str() == "1" {
            return Err(format!("name '{n}' is used twice"));
        }
    }

    let mut prefactor = Vec::new();
    for (pi, p) in raw.prefactor.iter().enumerate() {
        let ctx = |m: String| format!("prefactor[{pi}]: {m}");
        let i = raw
            .t_variables
            .iter()
            .position(|n| *n == p.variable)
            .ok_or_else(|| ctx(format!("unknown t-variable '{}'", p.variable)))?;
        prefactor.push((i, parse_poly(&p.u, &names).map_err(ctx)?));
    }
    let mut divisor_directions = Vec::new();
    for (di, d) in raw.divisor_directions.iter().enumerate() {
        let u = parse_poly(&d.u, &names).map_err(|e| format!("divisor_directions[{di}]: {e}"))?;
        divisor_directions.push((d.name.clone(), u));
    }

    let flow = match &raw.flow {
        RawFlow::Mode(m) if m == "auto" => FlowSpec::Auto,
        RawFlow::Mode(m) => return Err(format!("flow: unknown mode '{m}'")),
        RawFlow::Explicit { terms } => {
            let mut out = Vec::new();
            for (fi, t) in terms.iter().enumerate() {
                let ctx = |m: String| format!("flow.terms[{fi}]: {m}");
                let mut exps = vec![Q::from_integer(0.into()); nov.names.len()];
                for (n, e) in &t.novikov {
                    let i = nov
                        .names
                        .iter()
                        .position(|x| x == n)
                        .ok_or_else(|| ctx(format!("unknown coordinate '{n}'")))?;
                    exps[i] = e.value("exponent").map_err(ctx)?;
                }
                for n in t.t.keys() {
                    if !raw.t_variables.contains(n) && !raw.divisor_directions.iter().any(|d| d.name == *n) {
                        return Err(ctx(format!("unknown t-variable '{n}'")));
                    }
                }
                out.push(FlowTerm {
                    novikov: exps,
                    t: t.t.clone(),
                    coefficient: t.coefficient.value("coefficient").map_err(ctx)?,
                });
            }
            FlowSpec::Explicit(out)
        }
    };

    let mut basis = Vec::new();
    for (bi, b) in raw.product_basis.iter().enumerate() {
        let ctx = |m: String| format!("product_basis[{bi}]: {m}");
        let class = class_from_text(&model.cohomology, &b.class, &names).map_err(ctx)?;
        if let Some(d) = &b.direction {
            let known = d == "1"
                || nov.parameters.contains(d)
                || raw.t_variables.contains(d)
                || raw.divisor_directions.iter().any(|x| x.name == *d);
            if !known {
                return Err(ctx(format!("direction '{d}' is not a parameter")));
            }
        }
        basis.push(BasisSpec {
            label: b.label.clone(),
            class,
            direction: b.direction.clone(),
        });
    }

    Ok(Config {
        name: raw.name,
        source: source.to_string(),
        model,
        generator_names: names,
        novikov_names: nov.names.clone(),
        degree_generators,
        novikov_parameters,
        t_variables: raw.t_variables,
        theta_bound: raw.truncation.theta_bound.value("theta_bound").map_err(|e| format!("truncation: {e}"))?,
        t_bound: raw.truncation.t_bound,
        prefactor,
        divisor_directions,
        flow,
        basis,
    })
}

/// Normal-forms a (possibly sector-tagged) class expression.
pub fn class_from_text(coh: &Cohomology, text: &str, names: &[String]) -> Result<CRClass, String> {
    let mut out = CRClass::zero();
    for (sector, poly) in parse_class(text, names)? {
        let s = sector.unwrap_or_else(|| coh.identity());
        out = out.add(&coh.class(&s, &poly).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

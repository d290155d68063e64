//! Command dispatch.

use std::collections::BTreeMap;

use num_traits::Zero;
use toric_ifn::mirror::{
    mirror_map, normalize_frame, plus_part_check, product_table, quantum_product, BasisElement, ClassSeries,
    FrameDirection, JFrame, MirrorMap, PlusPartReport, TableCell,
};
use toric_ifn::presentation::SupportInfo;
use toric_ifn::{
    CRClass, Degree, Direction, ExpPrefactorSpec, MultiSeries, NovikovChart, ScalarSeries, SectorId, SeriesIndex,
    TruncationSpec, Q,
};

use crate::config::{class_from_text, Config, FlowSpec};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Sectors,
    Effective,
    Ifun,
    MirrorMap,
    Qproduct,
    Table,
    CoewcCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Sectors => "sectors",
            Command::Effective => "effective",
            Command::Ifun => "ifun",
            Command::MirrorMap => "mirror-map",
            Command::Qproduct => "qproduct",
            Command::Table => "table",
            Command::CoewcCheck => "coewc-check",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Overrides the configured degree bound.
    pub order: Option<Q>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub at: Vec<(String, Q)>,
    pub bound: Option<Q>,
    pub pair: Option<String>,
    pub experimental_divisor: bool,
}

/// Everything a computation needs beyond the model.
#[derive(Clone, Debug)]
pub struct Session {
    pub chart: NovikovChart,
    pub t_names: Vec<String>,
    pub trunc: TruncationSpec,
    pub prefactor: ExpPrefactorSpec,
    pub params: Vec<Direction>,
    pub warnings: Vec<String>,
}

impl Session {
    pub fn new(config: &Config, opts: &Options) -> Result<Session, CliError> {
        let chart = NovikovChart::new(config.novikov_names.clone(), config.degree_generators.clone())
            .map_err(|e| CliError::compute("setup", e))?;
        let mut t_names = config.t_variables.clone();
        let mut entries = config.prefactor.clone();
        let mut t_bound = config.t_bound;
        let mut warnings = Vec::new();
        if opts.experimental_divisor {
            if config.divisor_directions.is_empty() {
                return Err(CliError::Argument(
                    "--experimental-divisor needs divisor_directions in the config".into(),
                ));
            }
            for (name, u) in &config.divisor_directions {
                entries.push((t_names.len(), u.clone()));
                t_names.push(name.clone());
            }
            t_bound = t_bound.max(2);
            let names: Vec<&str> = config.divisor_directions.iter().map(|(n, _)| n.as_str()).collect();
            warnings.push(format!(
                "experimental divisor directions enabled ({}): products along them rely on the divisor equation and are not established in general",
                names.join(", ")
            ));
        }
        let theta_bound = opts.order.clone().unwrap_or_else(|| config.theta_bound.clone());
        if theta_bound < Q::zero() {
            return Err(CliError::Argument("--order must be non-negative".into()));
        }
        let mut params: Vec<Direction> = config.novikov_parameters.iter().map(|&i| Direction::Novikov(i)).collect();
        params.extend((0..t_names.len()).map(Direction::T));
        Ok(Session {
            chart,
            t_names,
            trunc: TruncationSpec::new(theta_bound, t_bound),
            prefactor: ExpPrefactorSpec { entries },
            params,
            warnings,
        })
    }

    pub fn nvars(&self) -> usize {
        self.t_names.len()
    }

    pub fn direction(&self, name: &str) -> Option<FrameDirection> {
        if name == "1" {
            return Some(FrameDirection::Unit);
        }
        if let Some(i) = self.t_names.iter().position(|n| n == name) {
            return Some(FrameDirection::Series(Direction::T(i)));
        }
        let c = self.chart.index(name)?;
        let d = Direction::Novikov(c);
        self.params.contains(&d).then_some(FrameDirection::Series(d))
    }

    pub fn big_i(&self, config: &Config) -> toric_ifn::Result<MultiSeries> {
        config
            .model
            .big_i(&config.degree_generators, &self.trunc, self.nvars(), &self.prefactor)
    }

    pub fn flow(&self, config: &Config, mu: &MirrorMap) -> Result<(ScalarSeries, bool), CliError> {
        match &config.flow {
            FlowSpec::Auto => Ok((mu.unit_flow(&config.model.cohomology), true)),
            FlowSpec::Explicit(terms) => {
                let mut out = ScalarSeries::default();
                for t in terms {
                    let mut exps = vec![0u32; self.nvars()];
                    for (name, e) in &t.t {
                        match self.t_names.iter().position(|n| n == name) {
                            Some(i) => exps[i] = *e,
                            // a divisor direction that is switched off
                            None => continue,
                        }
                    }
                    let idx = SeriesIndex::new(self.chart.degree(&t.novikov), exps);
                    out.insert(idx, t.coefficient.clone());
                }
                Ok((out, false))
            }
        }
    }

    pub fn frame(&self, config: &Config) -> Result<(JFrame, bool), CliError> {
        let coh = &config.model.cohomology;
        let i = self.big_i(config).map_err(|e| CliError::compute("ifun", e))?;
        let mu = mirror_map(&i, coh).map_err(|e| CliError::compute("mirror-map", e))?;
        let (flow, auto) = self.flow(config, &mu)?;
        let frame =
            normalize_frame(&i, &flow, &self.params, &self.chart, coh).map_err(|e| CliError::compute("frame", e))?;
        Ok((frame, auto))
    }

    /// Parameters to set to zero: everything listed in `--at` (values must
    /// be 0) plus every parameter not mentioned.
    pub fn eval_point(&self, at: &[(String, Q)]) -> Result<Vec<Direction>, CliError> {
        for (name, v) in at {
            match self.direction(name) {
                Some(FrameDirection::Series(_)) => {}
                _ => return Err(CliError::Argument(format!("--at {name}: not a parameter"))),
            }
            if !v.is_zero() {
                return Err(CliError::Argument(format!(
                    "--at {name}: only evaluation at 0 is supported"
                )));
            }
        }
        Ok(self.params.clone())
    }
}

#[derive(Clone, Debug)]
pub struct TableLine {
    pub key: String,
    pub class: String,
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub enum Report {
    Validate {
        name: String,
        rank: usize,
        characters: usize,
        hypersurfaces: usize,
        supports: Vec<SupportInfo>,
        exponent: u64,
        sectors: Vec<(SectorId, usize)>,
        table: Vec<TableLine>,
    },
    Sectors(Vec<(SectorId, u64)>),
    Effective(Vec<Degree>),
    Series(MultiSeries),
    MirrorMap {
        mu: MultiSeries,
        flow: ScalarSeries,
        auto_flow: bool,
    },
    Product {
        a: String,
        b: String,
        value: ClassSeries,
        pairing: Option<(String, BTreeMap<SeriesIndex, Q>)>,
    },
    Table {
        labels: Vec<String>,
        cells: Vec<Vec<TableCell>>,
    },
    Check(PlusPartReport),
}

/// Result of a run: the report plus notes that go in front of it.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: Command,
    pub report: Report,
    pub session: Session,
    pub notes: Vec<String>,
}

pub fn run(command: Command, config: &Config, opts: &Options) -> Result<Outcome, CliError> {
    let session = Session::new(config, opts)?;
    let coh = &config.model.cohomology;
    let pres = &config.model.presentation;
    let fail = |e| CliError::compute(command.name(), e);
    let mut notes = session.warnings.clone();
    let report = match command {
        Command::Validate => {
            let names = &config.generator_names;
            let table = config
                .model
                .provider
                .entries()
                .iter()
                .map(|e| TableLine {
                    key: e.key.to_string(),
                    class: toric_ifn::cohomology::fmt_poly(&e.class, names),
                    provenance: e.provenance.clone(),
                })
                .collect();
            Report::Validate {
                name: config.name.clone(),
                rank: pres.rank(),
                characters: pres.rho().len(),
                hypersurfaces: pres.tau().len(),
                supports: pres.report().supports.clone(),
                exponent: pres.report().exponent,
                sectors: coh.rings().map(|r| (r.sector().clone(), r.basis().len())).collect(),
                table,
            }
        }
        Command::Sectors => Report::Sectors(pres.enumerate_sectors().into_iter().map(|s| {
            let o = s.order();
            (s, o)
        }).collect()),
        Command::Effective => {
            let bound = opts.bound.clone().unwrap_or_else(|| session.trunc.theta_bound.clone());
            if bound < Q::zero() {
                return Err(CliError::Argument("--bound must be non-negative".into()));
            }
            Report::Effective(pres.enumerate_effective(&config.degree_generators, &bound).map_err(fail)?)
        }
        Command::Ifun => Report::Series(session.big_i(config).map_err(fail)?),
        Command::MirrorMap => {
            let i = session.big_i(config).map_err(fail)?;
            let mu = mirror_map(&i, coh).map_err(fail)?;
            let (flow, auto_flow) = session.flow(config, &mu)?;
            Report::MirrorMap {
                mu: mu.mu,
                flow,
                auto_flow,
            }
        }
        Command::CoewcCheck => {
            let i = session.big_i(config).map_err(fail)?;
            let mu = mirror_map(&i, coh).map_err(fail)?;
            Report::Check(plus_part_check(&i, &mu, coh))
        }
        Command::Qproduct => {
            let (a, b) = match (&opts.a, &opts.b) {
                (Some(a), Some(b)) => (a.clone(), b.clone()),
                _ => return Err(CliError::Argument("qproduct needs --a and --b".into())),
            };
            let da = session
                .direction(&a)
                .ok_or_else(|| CliError::Argument(format!("--a {a}: not a direction")))?;
            let db = session
                .direction(&b)
                .ok_or_else(|| CliError::Argument(format!("--b {b}: not a direction")))?;
            let eval = session.eval_point(&opts.at)?;
            let pair_class = match &opts.pair {
                Some(text) => Some((
                    text.clone(),
                    pair_target(config, text).map_err(|m| CliError::Argument(format!("--pair: {m}")))?,
                )),
                None => None,
            };
            let (frame, auto) = session.frame(config)?;
            if auto {
                notes.push("flow: auto-detected from the mirror map".into());
            }
            let value = quantum_product(&frame, &da, &db, &eval, &session.chart, coh).map_err(fail)?;
            let pairing = match pair_class {
                Some((text, c)) => Some((text, value.pair_with(&c, coh).map_err(fail)?)),
                None => None,
            };
            Report::Product { a, b, value, pairing }
        }
        Command::Table => {
            if config.basis.is_empty() {
                return Err(CliError::Argument("the config has no product_basis".into()));
            }
            let eval = session.eval_point(&opts.at)?;
            let (frame, auto) = session.frame(config)?;
            if auto {
                notes.push("flow: auto-detected from the mirror map".into());
            }
            let basis: Vec<BasisElement> = config
                .basis
                .iter()
                .map(|b| BasisElement {
                    label: b.label.clone(),
                    class: b.class.clone(),
                    direction: b.direction.as_deref().and_then(|d| session.direction(d)),
                })
                .collect();
            let cells = product_table(&frame, &basis, &eval, &session.chart, coh).map_err(fail)?;
            Report::Table {
                labels: basis.into_iter().map(|b| b.label).collect(),
                cells,
            }
        }
    };
    Ok(Outcome {
        command,
        report,
        session,
        notes,
    })
}

/// A basis label or a class expression.
fn pair_target(config: &Config, text: &str) -> Result<CRClass, String> {
    if let Some(b) = config.basis.iter().find(|b| b.label == text) {
        return Ok(b.class.clone());
    }
    class_from_text(&config.model.cohomology, text, &config.generator_names)
}

//! Coefficient-by-coefficient assembly of the big I-function of a complete
//! intersection `Y` in a toric stack `X`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::cohomology::{CRClass, Cohomology, Poly, RingSpec, SectorClass};
use crate::error::{Error, Result};
use crate::presentation::{sector_from_degree, Character, Degree, Presentation, SectorId, TauClass};
use crate::rational::{fmt_q, qi, Q};
use crate::series::{
    linear_factor, local_invert_linear, local_mul, local_one, ExpPrefactorSpec, Local, MultiSeries,
    SeriesIndex, TruncationSpec, ZLaurent,
};

/// Which degrees a user-supplied twisted class applies to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableKey {
    Degree(Degree),
    /// Every degree whose `tau` classification equals this list.
    Stratum(Vec<TauClass>),
}

impl fmt::Display for TableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableKey::Degree(d) => write!(f, "degree {d}"),
            TableKey::Stratum(s) => {
                let names: Vec<&str> = s.iter().map(|c| c.name()).collect();
                write!(f, "stratum [{}]", names.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub key: TableKey,
    /// Polynomial in the `H_j`, normal-formed in the ring of `g_beta^{-1}`.
    pub class: Poly,
    pub provenance: String,
}

/// Supplies `[Y^ss_beta / (G/<g_beta^{-1}>)]` for degrees where the default
/// product formula does not apply. Exact-degree entries win over stratum rules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwistedClassProvider {
    entries: Vec<TableEntry>,
}

/// Where a twisted class came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSource {
    Default,
    Table(String),
}

impl TwistedClassProvider {
    pub fn new(entries: Vec<TableEntry>) -> Self {
        TwistedClassProvider { entries }
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn lookup(&self, beta: &Degree, taus: &[TauClass]) -> Option<&TableEntry> {
        self.entries
            .iter()
            .find(|e| matches!(&e.key, TableKey::Degree(d) if d == beta))
            .or_else(|| {
                self.entries
                    .iter()
                    .find(|e| matches!(&e.key, TableKey::Stratum(s) if s.as_slice() == taus))
            })
    }
}

/// Integers `i` in `lo < i < 0` (`strict`) or `lo <= i < 0`.
fn negative_range(b: &Q, strict: bool) -> std::ops::Range<i64> {
    let start = if strict {
        b.floor().to_integer() + 1
    } else {
        b.ceil().to_integer()
    };
    let start: i64 = start.try_into().expect("pairing fits in i64");
    start..0
}

/// Integers `0 <= i < b`.
fn positive_range(b: &Q) -> std::ops::Range<i64> {
    let end: i64 = b.ceil().to_integer().try_into().expect("pairing fits in i64");
    0..end
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Range {
    /// `b < i < 0`, as in the general mirror formula.
    Strict,
    /// `b <= i < 0`, as in the hypersurface and semi-positive specializations.
    Inclusive,
}

/// Multiplies `acc` by `prod_i (D + (b - i) z)^{sign}` over the range fixed by `b`.
fn apply_factors(ring: &RingSpec, acc: &Local, d: &SectorClass, b: &Q, negative: Range, numerator_if_negative: bool) -> Result<Local> {
    let mut out = acc.clone();
    if b.is_zero() {
        return Ok(out);
    }
    let (range, numerator) = if b.is_negative() {
        (negative_range(b, negative == Range::Strict), numerator_if_negative)
    } else {
        (positive_range(b), !numerator_if_negative)
    };
    for i in range {
        let c = b - qi(i);
        let factor = if numerator {
            linear_factor(ring, d, &c)?
        } else {
            // c != 0: i = b is excluded from every inverted range
            local_invert_linear(ring, d, &c)?
        };
        out = local_mul(ring, &out, &factor)?;
    }
    Ok(out)
}

/// The target: presentation, cohomology of `Y`, and twisted classes.
#[derive(Clone, Debug)]
pub struct Model {
    pub presentation: Presentation,
    pub cohomology: Cohomology,
    pub provider: TwistedClassProvider,
}

impl Model {
    pub fn new(presentation: Presentation, cohomology: Cohomology, provider: TwistedClassProvider) -> Result<Self> {
        if presentation.rank() != cohomology.rank() {
            return Err(Error::LengthMismatch {
                what: "cohomology generators".into(),
                expected: presentation.rank(),
                found: cohomology.rank(),
            });
        }
        Ok(Model {
            presentation,
            cohomology,
            provider,
        })
    }

    /// Sector `g_beta^{-1}` carrying the coefficient of `q^beta`.
    pub fn target_sector(&self, beta: &Degree) -> SectorId {
        sector_from_degree(beta).inverse()
    }

    fn target_ring(&self, beta: &Degree) -> Result<&RingSpec> {
        self.cohomology.ring(&self.target_sector(beta))
    }

    fn check_rank(&self, beta: &Degree) -> Result<()> {
        if beta.rank() != self.presentation.rank() {
            return Err(Error::LengthMismatch {
                what: "degree".into(),
                expected: self.presentation.rank(),
                found: beta.rank(),
            });
        }
        Ok(())
    }

    fn ambient_local(&self, beta: &Degree, acc: &Local, range: Range) -> Result<Local> {
        let ring = self.target_ring(beta)?;
        let mut out = acc.clone();
        for rho in self.presentation.rho() {
            let d = ring.restrict_character(rho)?;
            out = apply_factors(ring, &out, &d, &beta.pair(rho), range, true)?;
        }
        Ok(out)
    }

    fn ci_local(&self, beta: &Degree, acc: &Local, taus: &[Character]) -> Result<Local> {
        let ring = self.target_ring(beta)?;
        let mut out = acc.clone();
        for tau in taus {
            let d = ring.restrict_character(tau)?;
            out = apply_factors(ring, &out, &d, &beta.pair(tau), Range::Strict, false)?;
        }
        Ok(out)
    }

    /// `prod_{rho: b<0} prod_{b<i<0} (D + (b-i)z) / prod_{rho: b>0} prod_{0<=i<b} (D + (b-i)z)`
    /// with `b = beta(L_rho)`, in the ring of `g_beta^{-1}`.
    pub fn ambient_factor(&self, beta: &Degree) -> Result<ZLaurent> {
        self.check_rank(beta)?;
        let one = local_one(self.target_ring(beta)?)?;
        Ok(ZLaurent::from_local(&self.ambient_local(beta, &one, Range::Strict)?))
    }

    /// The complete-intersection factor: `tau` factors go upstairs for positive
    /// pairings and downstairs for negative ones.
    pub fn ci_factor(&self, beta: &Degree) -> Result<ZLaurent> {
        self.check_rank(beta)?;
        let one = local_one(self.target_ring(beta)?)?;
        Ok(ZLaurent::from_local(&self.ci_local(beta, &one, self.presentation.tau())?))
    }

    /// The class `[Y^ss_beta / (G/<g_beta^{-1}>)]` and where it came from.
    pub fn twisted_class_with_source(&self, beta: &Degree) -> Result<(SectorClass, ClassSource)> {
        self.check_rank(beta)?;
        let ring = self.target_ring(beta)?;
        let profile = self.presentation.support_profile(beta);
        let taus = &profile.tau_classification;
        let default_applies = !taus.contains(&TauClass::NegativeIntegral);
        if let Some(entry) = self.provider.lookup(beta, taus) {
            let exact = matches!(entry.key, TableKey::Degree(_));
            if exact || !default_applies {
                return Ok((ring.normal_form(&entry.class)?, ClassSource::Table(entry.provenance.clone())));
            }
        }
        if !default_applies {
            let names: Vec<&str> = taus.iter().map(|c| c.name()).collect();
            return Err(Error::MissingTwistedClass {
                degree: beta.to_string(),
                stratum: names.join(","),
            });
        }
        let k = self.presentation.rank();
        let mut poly = Poly::constant(k, Q::one());
        for rho in self.presentation.rho() {
            let b = beta.pair(rho);
            if b.is_integer() && b.is_negative() {
                poly = poly.mul(&Poly::from_character(rho));
            }
        }
        Ok((ring.normal_form(&poly)?, ClassSource::Default))
    }

    pub fn twisted_class(&self, beta: &Degree) -> Result<CRClass> {
        Ok(self.twisted_class_with_source(beta)?.0.into())
    }

    fn check_effective(&self, beta: &Degree) -> Result<()> {
        self.check_rank(beta)?;
        if !self.presentation.is_effective(beta) {
            return Err(Error::NotEffective(beta.to_string()));
        }
        Ok(())
    }

    /// `I_beta(z)`: ambient factor times CI factor times twisted class.
    pub fn i_coefficient(&self, beta: &Degree) -> Result<ZLaurent> {
        self.check_effective(beta)?;
        let (class, _) = self.twisted_class_with_source(beta)?;
        let acc = Local::from([(0, class)]);
        let ring = self.target_ring(beta)?;
        let acc = self.ambient_local(beta, &acc, Range::Strict)?;
        let acc = self.ci_local(beta, &acc, self.presentation.tau())?;
        debug_assert!(acc.values().all(|c| c.sector() == ring.sector()));
        Ok(ZLaurent::from_local(&acc))
    }

    /// Single-hypersurface form, routed by the stratum of `beta(L)`.
    pub fn hypersurface_coefficient(&self, beta: &Degree) -> Result<ZLaurent> {
        self.check_effective(beta)?;
        let taus = self.presentation.tau();
        if taus.len() != 1 {
            return Err(Error::NotAHypersurface(taus.len()));
        }
        let ring = self.target_ring(beta)?;
        let b = beta.pair(&taus[0]);
        let acc = match TauClass::of(&b) {
            TauClass::NegativeIntegral => {
                let (class, _) = self.twisted_class_with_source(beta)?;
                self.ambient_local(beta, &Local::from([(0, class)]), Range::Strict)?
            }
            _ => self.ambient_local(beta, &local_one(ring)?, Range::Inclusive)?,
        };
        Ok(ZLaurent::from_local(&self.ci_local(beta, &acc, taus)?))
    }

    /// Semi-positive form: every `beta(L_tau_b) >= 0`.
    pub fn semipositive_coefficient(&self, beta: &Degree) -> Result<ZLaurent> {
        self.check_effective(beta)?;
        for (b, tau) in self.presentation.tau().iter().enumerate() {
            let pairing = beta.pair(tau);
            if pairing.is_negative() {
                return Err(Error::SemipositivityViolated {
                    degree: beta.to_string(),
                    tau: b,
                    pairing: fmt_q(&pairing),
                });
            }
        }
        let ring = self.target_ring(beta)?;
        let acc = self.ambient_local(beta, &local_one(ring)?, Range::Inclusive)?;
        Ok(ZLaurent::from_local(&self.ci_local(beta, &acc, self.presentation.tau())?))
    }

    fn assemble(
        &self,
        generators: &[Degree],
        trunc: &TruncationSpec,
        nvars: usize,
        prefactor: &ExpPrefactorSpec,
        coefficient: impl Fn(&Degree) -> Result<ZLaurent>,
    ) -> Result<MultiSeries> {
        let theta = self.presentation.theta().clone();
        let mut s = MultiSeries::zero(theta, nvars, trunc.clone());
        for beta in self.presentation.enumerate_effective(generators, &trunc.theta_bound)? {
            let c = coefficient(&beta)?;
            s.insert(SeriesIndex::new(beta, vec![0; nvars]), &c);
        }
        s.apply_exp_prefactor(prefactor, &self.cohomology)
    }

    /// `I(q, t, z)` over all effective degrees within the truncation.
    pub fn big_i(
        &self,
        generators: &[Degree],
        trunc: &TruncationSpec,
        nvars: usize,
        prefactor: &ExpPrefactorSpec,
    ) -> Result<MultiSeries> {
        self.assemble(generators, trunc, nvars, prefactor, |b| self.i_coefficient(b))
    }

    pub fn hypersurface_i(
        &self,
        generators: &[Degree],
        trunc: &TruncationSpec,
        nvars: usize,
        prefactor: &ExpPrefactorSpec,
    ) -> Result<MultiSeries> {
        self.assemble(generators, trunc, nvars, prefactor, |b| self.hypersurface_coefficient(b))
    }

    pub fn semipositive_i(
        &self,
        generators: &[Degree],
        trunc: &TruncationSpec,
        nvars: usize,
        prefactor: &ExpPrefactorSpec,
    ) -> Result<MultiSeries> {
        self.assemble(generators, trunc, nvars, prefactor, |b| self.semipositive_coefficient(b))
    }
}

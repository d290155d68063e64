//! Parser for class expressions such as `(1/3) p^2 + (-3/2) [sector 1/2,0] 1`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use toric_ifn::cohomology::Poly;
use toric_ifn::rational::parse_q;
use toric_ifn::{Monomial, SectorId, Q};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Sector(String),
    Plus,
    Minus,
    Star,
    Caret,
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                let end = chars[i..].iter().position(|&c| c == ')').ok_or("unbalanced '('")? + i;
                let inner: String = chars[i + 1..end].iter().collect();
                let q = parse_q(inner.trim()).ok_or_else(|| format!("expected a rational in parentheses, got '({inner})'"))?;
                out.push(Tok::Num(q));
                i = end + 1;
            }
            '[' => {
                let end = chars[i..].iter().position(|&c| c == ']').ok_or("unbalanced '['")? + i;
                let inner: String = chars[i + 1..end].iter().collect();
                let body = inner
                    .trim()
                    .strip_prefix("sector")
                    .ok_or_else(|| format!("expected '[sector ...]', got '[{inner}]'"))?;
                out.push(Tok::Sector(body.trim().to_string()));
                i = end + 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Num(parse_q(&text).ok_or_else(|| format!("bad number '{text}'"))?));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character '{other}'")),
        }
    }
    Ok(out)
}

/// Parses `a,b,...` into a sector id.
pub fn parse_sector(s: &str, k: usize) -> Result<SectorId, String> {
    let parts: Vec<Q> = s
        .split(',')
        .map(|p| parse_q(p.trim()).ok_or_else(|| format!("bad sector entry '{p}'")))
        .collect::<Result<_, _>>()?;
    if parts.len() != k {
        return Err(format!("sector '{s}' has {} entries, expected {k}", parts.len()));
    }
    Ok(SectorId::from_exponents(&parts))
}

/// One sector tag (or none) per term.
pub type ParsedClass = BTreeMap<Option<SectorId>, Poly>;

/// Parses a sum of terms in the generator names; each term may carry a
/// `[sector ..]` tag.
pub fn parse_class(s: &str, names: &[String]) -> Result<ParsedClass, String> {
    let k = names.len();
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut out: ParsedClass = BTreeMap::new();
    let mut i = 0;
    let mut first = true;
    while i < toks.len() {
        let mut sign = Q::one();
        match toks[i] {
            Tok::Plus if !first => i += 1,
            Tok::Minus => {
                sign = -sign;
                i += 1;
            }
            _ if first => {}
            _ => return Err(format!("expected '+' or '-' in '{s}'")),
        }
        first = false;
        let mut coeff = sign;
        let mut mono = vec![0u32; k];
        let mut sector = None;
        let mut factors = 0;
        while i < toks.len() && !matches!(toks[i], Tok::Plus | Tok::Minus) {
            match &toks[i] {
                Tok::Num(q) => {
                    coeff *= q;
                    i += 1;
                }
                Tok::Ident(name) => {
                    let j = names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| format!("unknown generator '{name}'"))?;
                    i += 1;
                    let mut e = 1u32;
                    if i < toks.len() && toks[i] == Tok::Caret {
                        match toks.get(i + 1) {
                            Some(Tok::Num(q)) if q.is_integer() && *q >= Q::zero() => {
                                e = q.to_integer().try_into().map_err(|_| "exponent too large")?;
                                i += 2;
                            }
                            _ => return Err(format!("bad exponent after '{name}'")),
                        }
                    }
                    mono[j] += e;
                }
                Tok::Sector(body) => {
                    if sector.is_some() {
                        return Err("two sector tags in one term".into());
                    }
                    sector = Some(parse_sector(body, k)?);
                    i += 1;
                }
                Tok::Star => {
                    i += 1;
                    continue;
                }
                Tok::Caret => return Err("dangling '^'".into()),
                Tok::Plus | Tok::Minus => unreachable!(),
            }
            factors += 1;
        }
        if factors == 0 {
            return Err(format!("empty term in '{s}'"));
        }
        let entry = out.entry(sector).or_insert_with(|| Poly::zero(k));
        *entry = entry.add(&Poly::term(k, Monomial(mono), coeff));
    }
    Ok(out)
}

/// A polynomial without sector tags.
pub fn parse_poly(s: &str, names: &[String]) -> Result<Poly, String> {
    let parsed = parse_class(s, names)?;
    let mut out = Poly::zero(names.len());
    for (sector, p) in parsed {
        if sector.is_some() {
            return Err(format!("'{s}' must not carry a sector tag"));
        }
        out = out.add(&p);
    }
    Ok(out)
}

/// A single monomial with coefficient one, e.g. `p^2`.
pub fn parse_monomial(s: &str, names: &[String]) -> Result<Monomial, String> {
    let p = parse_poly(s, names)?;
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((m, c)), None) if c.is_one() => Ok(m.clone()),
        _ => Err(format!("'{s}' is not a monomial")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use toric_ifn::rational::{q, qi};

    fn names() -> Vec<String> {
        vec!["p".into(), "H2".into()]
    }

    #[test]
    fn polynomials() {
        let p = parse_poly("(1/3) p^2 - 2 p H2 + 5", &names()).unwrap();
        assert_eq!(p.coefficient(&Monomial(vec![2, 0])), q(1, 3));
        assert_eq!(p.coefficient(&Monomial(vec![1, 1])), qi(-2));
        assert_eq!(p.coefficient(&Monomial(vec![0, 0])), qi(5));
        assert_eq!(parse_poly("-p*p", &names()).unwrap(), Poly::term(2, Monomial(vec![2, 0]), qi(-1)));
        assert_eq!(parse_monomial("1", &names()).unwrap(), Monomial(vec![0, 0]));
        assert!(parse_monomial("2 p", &names()).is_err());
        assert!(parse_poly("y", &names()).is_err());
        assert!(parse_poly("p +", &names()).is_err());
        assert!(parse_poly("", &names()).is_err());
    }

    #[test]
    fn sector_tags() {
        let c = parse_class("(1/3) p^2 + (-3/2) [sector 1/2,0] 1", &names()).unwrap();
        let tw = SectorId::from_exponents(&[q(1, 2), qi(0)]);
        assert_eq!(c[&None], Poly::term(2, Monomial(vec![2, 0]), q(1, 3)));
        assert_eq!(c[&Some(tw)], Poly::constant(2, q(-3, 2)));
        assert!(parse_class("[sector 1/2] 1", &names()).is_err());
        assert!(parse_class("[sector 1/2,0] [sector 1/2,0] 1", &names()).is_err());
    }
}

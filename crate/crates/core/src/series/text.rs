use std::collections::BTreeMap;

use super::PerfLaurent;
use crate::error::{Error, Result};
use crate::padic::Prime;
use crate::rational::{parse_q, Q};

pub(super) fn serialize(f: &PerfLaurent) -> String {
    let mut parts: Vec<String> = f.terms().map(|(e, c)| format!("{c}*X^({e})")).collect();
    parts.push(format!("O(X^({}))", f.cap()));
    parts.join(" + ")
}

fn pretty_exp(e: &Q) -> String {
    if e.denom() == &1 && *e.numer() >= 0 {
        match e.numer() {
            0 => String::new(),
            1 => "X".into(),
            n => format!("X^{n}"),
        }
    } else {
        format!("X^({e})")
    }
}

pub(super) fn pretty(f: &PerfLaurent) -> String {
    let mut parts: Vec<String> = f
        .terms()
        .map(|(e, c)| {
            let x = pretty_exp(e);
            match (x.is_empty(), *c) {
                (true, c) => c.to_string(),
                (false, 1) => x,
                (false, c) => format!("{c}*{x}"),
            }
        })
        .collect();
    let cap = f.cap();
    let capx = if cap.denom() == &1 && *cap.numer() >= 0 { format!("X^{cap}") } else { format!("X^({cap})") };
    parts.push(format!("O({capx})"));
    parts.join(" + ")
}

/// Splits at top-level `+` signs, returning byte offsets with each piece.
fn split_plus(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

fn paren_exp(pos: usize, s: &str) -> Result<Q> {
    let inner = s
        .strip_prefix("X^(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::parse(pos, format!("expected `X^(e)`, got `{s}`")))?;
    parse_q(inner).map_err(|_| Error::parse(pos, format!("bad exponent `{inner}`")))
}

pub(super) fn parse(p: Prime, s: &str) -> Result<PerfLaurent> {
    let mut terms = BTreeMap::new();
    let mut cap = None;
    for (pos, piece) in split_plus(s) {
        let t = piece.trim();
        if let Some(rest) = t.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
            cap = Some(paren_exp(pos, rest.trim())?);
            continue;
        }
        let (c, x) = t
            .split_once('*')
            .ok_or_else(|| Error::parse(pos, format!("expected `c*X^(e)`, got `{t}`")))?;
        let c: u32 = c.trim().parse().map_err(|_| Error::parse(pos, format!("bad coefficient `{c}`")))?;
        if c == 0 || c as u64 >= p.get() {
            return Err(Error::parse(pos, format!("coefficient {c} is not a nonzero residue mod {p}")));
        }
        let e = paren_exp(pos, x.trim())?;
        if crate::rational::is_power_of(p.get(), *e.denom() as u64).is_none() {
            return Err(Error::parse(pos, format!("exponent {e} is not in Z[1/{p}]")));
        }
        if terms.insert(e, c).is_some() {
            return Err(Error::parse(pos, format!("repeated exponent {e}")));
        }
    }
    let cap = cap.ok_or_else(|| Error::parse(s.len(), "missing `O(X^(B))` marker"))?;
    if let Some(e) = terms.keys().next_back() {
        if *e >= cap {
            return Err(Error::parse(0, format!("exponent {e} at or above cap {cap}")));
        }
    }
    Ok(PerfLaurent::from_map(p, terms, cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn round_trip() {
        let p = Prime::new(3).unwrap();
        let f = PerfLaurent::from_terms(p, [(q(-1, 3), 2), (qi(0), 1), (q(5, 9), 1)], q(7, 3));
        let s = f.to_text();
        assert_eq!(s, "2*X^(-1/3) + 1*X^(0) + 1*X^(5/9) + O(X^(7/3))");
        assert_eq!(PerfLaurent::from_text(p, &s).unwrap(), f);
        let z = PerfLaurent::zero(p, qi(4));
        assert_eq!(PerfLaurent::from_text(p, &z.to_text()).unwrap(), z);
    }

    #[test]
    fn pretty_form() {
        let p = Prime::new(2).unwrap();
        let f = PerfLaurent::from_terms(p, [(qi(2), 1), (qi(3), 1), (q(1, 2), 1)], qi(8));
        assert_eq!(f.to_string(), "X^(1/2) + X^2 + X^3 + O(X^8)");
    }

    #[test]
    fn rejects_garbage() {
        let p = Prime::new(2).unwrap();
        assert!(PerfLaurent::from_text(p, "1*X^(1/3) + O(X^(2))").is_err());
        assert!(PerfLaurent::from_text(p, "1*X^(1)").is_err());
        assert!(PerfLaurent::from_text(p, "1*X^(3) + O(X^(2))").is_err());
    }
}

//! Parsing of l-weight specifications.
//!
//! Two grammars are accepted:
//!   * fundamental products: `w1@2*w2@3` (1-based node, evaluation point);
//!   * per-node polynomials: `1:(1-2u)(1+2u),2:(1-4u^2)` with integer
//!     coefficients (reduced into the field) or bracketed coefficient
//!     tuples like `[0,1]` for extension-field elements.

use hyperloop_core::coeffring::{Field, FqElt, FqField};
use hyperloop_core::lweights::{fundamental_tw, lweight_from_coeffs, LWeight, LwError};
use hyperloop_core::rootfold::FoldingDatum;

pub fn parse_pi(s: &str, fd: &FoldingDatum, field: &FqField) -> Result<LWeight, LwError> {
    let s = s.trim();
    if s == "1" {
        return Ok(LWeight::one(fd.folded.rank()));
    }
    if s.contains(':') {
        parse_poly_form(s, fd, field)
    } else {
        parse_fundamental_form(s, fd, field)
    }
}

fn bad(msg: &str) -> LwError {
    LwError::NotHighestLWeight(format!("cannot parse l-weight: {msg}"))
}

fn parse_fundamental_form(
    s: &str,
    fd: &FoldingDatum,
    field: &FqField,
) -> Result<LWeight, LwError> {
    let mut pi = LWeight::one(fd.folded.rank());
    for tok in s.split('*') {
        let tok = tok.trim();
        let rest = tok.strip_prefix('w').ok_or_else(|| bad("expected wI@A"))?;
        let (node, point) = rest.split_once('@').ok_or_else(|| bad("expected wI@A"))?;
        let i: usize = node.parse().map_err(|_| bad("bad node"))?;
        if i == 0 || i > fd.folded.rank() {
            return Err(bad("node out of range"));
        }
        let a: i64 = point.parse().map_err(|_| bad("bad evaluation point"))?;
        let af = field.from_i64(a);
        pi = pi.mul(&fundamental_tw(fd, field, i - 1, &af)?, field);
    }
    Ok(pi)
}

fn parse_poly_form(s: &str, fd: &FoldingDatum, field: &FqField) -> Result<LWeight, LwError> {
    let mut coeffs: Vec<Vec<FqElt>> = vec![vec![field.one()]; fd.folded.rank()];
    for entry in split_top_level(s, ',') {
        let entry = entry.trim();
        let (node, poly) = entry.split_once(':').ok_or_else(|| bad("expected I:(poly)"))?;
        let i: usize = node.trim().parse().map_err(|_| bad("bad node"))?;
        if i == 0 || i > fd.folded.rank() {
            return Err(bad("node out of range"));
        }
        coeffs[i - 1] = parse_poly_product(poly.trim(), field)?;
    }
    lweight_from_coeffs(&coeffs, field)
}

/// Split on a separator, ignoring separators inside parentheses or brackets.
fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    out.push(cur);
    out
}

/// A product of parenthesized factors with optional `^k`, or a bare sum.
fn parse_poly_product(s: &str, field: &FqField) -> Result<Vec<FqElt>, LwError> {
    let s = s.trim();
    if !s.starts_with('(') {
        return parse_poly_sum(s, field);
    }
    let mut acc = vec![field.one()];
    let mut rest = s;
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return Err(bad("expected `(`"));
        }
        let close = matching_paren(rest).ok_or_else(|| bad("unbalanced parentheses"))?;
        let inner = &rest[1..close];
        rest = rest[close + 1..].trim_start();
        let mut power = 1usize;
        if let Some(r) = rest.strip_prefix('^') {
            let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            power = r[..end].parse().map_err(|_| bad("bad exponent"))?;
            rest = r[end..].trim_start();
        }
        let factor = parse_poly_sum(inner, field)?;
        for _ in 0..power {
            acc = poly_mul(field, &acc, &factor);
        }
    }
    Ok(acc)
}

fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn poly_mul(field: &FqField, a: &[FqElt], b: &[FqElt]) -> Vec<FqElt> {
    let mut out = vec![field.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let add = field.mul(x, y);
            out[i + j] = field.add(&out[i + j], &add);
        }
    }
    out
}

/// Sum of terms `[+-] coeff [u[^e]]` where coeff is an integer or a
/// bracketed tuple of base-field digits.
fn parse_poly_sum(s: &str, field: &FqField) -> Result<Vec<FqElt>, LwError> {
    let mut coeffs: Vec<FqElt> = Vec::new();
    let mut put = |e: usize, c: FqElt, field: &FqField| {
        if coeffs.len() <= e {
            coeffs.resize(e + 1, field.zero());
        }
        coeffs[e] = field.add(&coeffs[e], &c);
    };
    let mut rest = s.trim();
    let mut sign = 1i64;
    let mut first = true;
    while !rest.is_empty() {
        rest = rest.trim_start();
        if rest.starts_with('+') {
            sign = 1;
            rest = &rest[1..];
        } else if rest.starts_with('-') {
            sign = -1;
            rest = &rest[1..];
        } else if !first {
            return Err(bad("expected + or - between terms"));
        }
        first = false;
        rest = rest.trim_start();
        // coefficient
        let mut coeff = field.one();
        let mut had_coeff = false;
        if rest.starts_with('[') {
            let close = rest.find(']').ok_or_else(|| bad("unbalanced bracket"))?;
            let digits: Vec<u64> = rest[1..close]
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad("bad tuple digit")))
                .collect::<Result<_, _>>()?;
            coeff = field.from_coeffs(&digits);
            rest = &rest[close + 1..];
            had_coeff = true;
        } else {
            let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            if end > 0 {
                let n: i64 = rest[..end].parse().map_err(|_| bad("bad coefficient"))?;
                coeff = field.from_i64(n);
                rest = &rest[end..];
                had_coeff = true;
            }
        }
        if sign < 0 {
            coeff = field.neg(&coeff);
        }
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix('*') {
            rest = r.trim_start();
        }
        // power of u
        if rest.starts_with('u') {
            rest = &rest[1..];
            let mut e = 1usize;
            if let Some(r) = rest.strip_prefix('^') {
                let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
                e = r[..end].parse().map_err(|_| bad("bad power"))?;
                rest = &r[end..];
            }
            put(e, coeff, field);
        } else {
            if !had_coeff {
                return Err(bad("empty term"));
            }
            put(0, coeff, field);
        }
    }
    if coeffs.is_empty() {
        return Err(bad("empty polynomial"));
    }
    Ok(coeffs)
}

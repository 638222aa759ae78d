//! Text forms: rationals as `p/q` (decimals such as `0.5` are read exactly),
//! polynomials as sparse sums like `3/2*x^2 - x + 1`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::mpoly::{Axis, MPoly3};
use super::rat::Rat;
use super::upoly::UPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid number `{0}`")]
    Number(String),
    #[error("unknown variable `{0}`")]
    Variable(String),
    #[error("malformed polynomial `{0}`")]
    Syntax(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Exact rational from `"-2"`, `"1/2"`, `"0.75"` or `"1.5e-3"`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseError> {
    let s = s.trim();
    let err = || ParseError::Number(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rat(n)?;
        let d = parse_rat(d)?;
        if d.is_zero() {
            return Err(ParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(n / d);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rat::from_integer(digits.parse::<BigInt>().map_err(|_| err())?);
    let shift = exp - frac_part.len() as i32;
    let ten = Rat::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if neg { -value } else { value })
}

type Term = (Rat, Vec<(String, u32)>);

fn parse_terms(src: &str) -> Result<Vec<Term>, ParseError> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(ParseError::Syntax(src.to_string()));
    }
    // split on top-level signs, keeping the sign with its term
    let mut pieces = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for i in 1..bytes.len() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^' && bytes[i - 1] != b'*' {
            pieces.push(&s[start..i]);
            start = i;
        }
    }
    pieces.push(&s[start..]);

    pieces
        .into_iter()
        .map(|piece| {
            let (neg, body) = match piece.as_bytes()[0] {
                b'-' => (true, &piece[1..]),
                b'+' => (false, &piece[1..]),
                _ => (false, piece),
            };
            if body.is_empty() {
                return Err(ParseError::Syntax(src.to_string()));
            }
            let mut coeff = Rat::one();
            let mut vars = Vec::new();
            for factor in body.split('*') {
                if factor.is_empty() {
                    return Err(ParseError::Syntax(src.to_string()));
                }
                if factor.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
                    coeff *= parse_rat(factor)?;
                } else {
                    let (name, exp) = match factor.split_once('^') {
                        Some((n, e)) => (n, e.parse::<u32>().map_err(|_| ParseError::Syntax(src.to_string()))?),
                        None => (factor, 1),
                    };
                    vars.push((name.to_string(), exp));
                }
            }
            Ok((if neg { -coeff } else { coeff }, vars))
        })
        .collect()
}

/// Univariate polynomial in the variable `var`.
pub fn parse_upoly(s: &str, var: &str) -> Result<UPoly, ParseError> {
    let mut out = UPoly::zero();
    for (c, vars) in parse_terms(s)? {
        let mut k = 0usize;
        for (name, e) in vars {
            if name != var {
                return Err(ParseError::Variable(name));
            }
            k += e as usize;
        }
        out = &out + &UPoly::monomial(c, k);
    }
    Ok(out)
}

/// Polynomial whose variable names map onto axes, e.g. `[("a", Axis::X), ("b", Axis::Y)]`.
pub fn parse_mpoly(s: &str, vars: &[(&str, Axis)]) -> Result<MPoly3, ParseError> {
    let mut out = MPoly3::zero();
    for (c, factors) in parse_terms(s)? {
        let mut exps = [0u32; 3];
        for (name, e) in factors {
            let axis = vars.iter().find(|(n, _)| *n == name).map(|(_, a)| *a).ok_or(ParseError::Variable(name))?;
            exps[axis as usize] += e;
        }
        out = &out + &MPoly3::monomial(c, exps);
    }
    Ok(out)
}

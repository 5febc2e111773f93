//! Text format for piecewise maps.
//!
//! A map file is line oriented:
//!
//! ```text
//! # the Collatz map
//! p = 2
//! divisible = x          # numerator; the division by p is implicit
//! otherwise = 3*x + 1
//! ```
//!
//! Polynomials use the grammar
//!
//! ```text
//! poly := term (("+" | "-") term)*
//! term := int | int "*"? atom | atom
//! atom := "x" ("^" uint)?
//! ```
//!
//! with an optional leading `-`, arbitrary-precision integer literals and
//! insignificant whitespace.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::mapdef::{MapError, PiecewiseMap};

/// Exponents above this are rejected; coefficients are stored densely.
pub const MAX_DEGREE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at offset {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown variable `{name}` at offset {offset} (only `x` is allowed)")]
    UnknownVariable { offset: usize, name: String },
    #[error("exponent at offset {offset} is not a non-negative integer")]
    NonIntegerExponent { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapFileError {
    #[error("line {line}: `{key}`: {source}")]
    Poly {
        line: usize,
        key: &'static str,
        #[source]
        source: PolyError,
    },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: &'static str },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`")]
    MalformedLine { line: usize },
    #[error("line {line}: modulus `{text}` is not an integer")]
    BadModulus { line: usize, text: String },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Dense integer polynomial in `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn add_term(&mut self, coeff: BigInt, degree: usize) {
        if self.coeffs.len() <= degree {
            self.coeffs.resize(degree + 1, BigInt::zero());
        }
        self.coeffs[degree] += coeff;
    }
}

impl fmt::Display for Polynomial {
    /// Canonical form: descending degree, `*` between coefficient and `x`,
    /// unit coefficients elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mag = c.abs();
            match deg {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    f.write_str("x")?;
                    if deg > 1 {
                        write!(f, "^{deg}")?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::SyntaxError { offset: self.pos, message: message.into() })
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        // ASCII digits only
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn poly(&mut self) -> Result<Polynomial, PolyError> {
        let mut out = Polynomial { coeffs: vec![BigInt::zero()] };
        self.skip_ws();
        let mut negate = false;
        if self.peek() == Some(b'-') {
            negate = true;
            self.pos += 1;
        }
        loop {
            let (mut coeff, degree) = self.term()?;
            if negate {
                coeff = -coeff;
            }
            out.add_term(coeff, degree);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => negate = false,
                Some(b'-') => negate = true,
                Some(_) => return self.syntax("expected `+`, `-` or end of expression"),
            }
            self.pos += 1;
        }
        Ok(Polynomial::new(out.coeffs))
    }

    fn term(&mut self) -> Result<(BigInt, usize), PolyError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let coeff: BigInt = self.digits().parse().expect("digit run parses");
                self.skip_ws();
                match self.peek() {
                    Some(b'*') => {
                        self.pos += 1;
                        self.skip_ws();
                        if !self.peek().is_some_and(is_ident_start) {
                            return self.syntax("expected `x` after `*`");
                        }
                        Ok((coeff, self.atom()?))
                    }
                    Some(c) if is_ident_start(c) => Ok((coeff, self.atom()?)),
                    _ => Ok((coeff, 0)),
                }
            }
            Some(c) if is_ident_start(c) => Ok((BigInt::one(), self.atom()?)),
            Some(_) => self.syntax("expected an integer or `x`"),
            None => self.syntax("unexpected end of expression"),
        }
    }

    fn atom(&mut self) -> Result<usize, PolyError> {
        let offset = self.pos;
        let name = self.ident();
        if name != "x" {
            return Err(PolyError::UnknownVariable { offset, name: name.to_string() });
        }
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        self.skip_ws();
        let exp_offset = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let text = self.digits();
                if matches!(self.peek(), Some(b'.') | Some(b'/')) {
                    return Err(PolyError::NonIntegerExponent { offset: exp_offset });
                }
                match text.parse::<BigInt>().ok().and_then(|e| e.to_usize()) {
                    Some(e) if e <= MAX_DEGREE => Ok(e),
                    _ => Err(PolyError::SyntaxError {
                        offset: exp_offset,
                        message: format!("exponent exceeds {MAX_DEGREE}"),
                    }),
                }
            }
            Some(b'-') | Some(b'.') | Some(b'(') => Err(PolyError::NonIntegerExponent { offset: exp_offset }),
            Some(c) if is_ident_start(c) => Err(PolyError::NonIntegerExponent { offset: exp_offset }),
            _ => self.syntax("expected exponent after `^`"),
        }
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

pub fn parse_poly(text: &str) -> Result<Polynomial, PolyError> {
    Parser { src: text.as_bytes(), pos: 0 }.poly()
}

const KEYS: [&str; 3] = ["p", "divisible", "otherwise"];

pub fn parse_mapfile(text: &str) -> Result<PiecewiseMap, MapFileError> {
    let mut values: [Option<(usize, &str)>; 3] = [None, None, None];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(MapFileError::MalformedLine { line });
        };
        let key = key.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| MapFileError::UnknownKey { line, key: key.to_string() })?;
        if values[slot].is_some() {
            return Err(MapFileError::DuplicateKey { line, key: KEYS[slot] });
        }
        values[slot] = Some((line, value.trim()));
    }

    let [p, div, other] = values;
    let (p_line, p_text) = p.ok_or(MapFileError::MissingKey("p"))?;
    let (div_line, div_text) = div.ok_or(MapFileError::MissingKey("divisible"))?;
    let (other_line, other_text) = other.ok_or(MapFileError::MissingKey("otherwise"))?;

    let p: BigInt = p_text.parse().map_err(|_| MapFileError::BadModulus { line: p_line, text: p_text.to_string() })?;
    if p < BigInt::from(2) {
        return Err(MapError::ModulusTooSmall(p.to_string()).into());
    }
    let p = p.to_u64().ok_or_else(|| MapError::ModulusTooLarge(p.to_string()))?;

    let a = parse_poly(div_text).map_err(|source| MapFileError::Poly { line: div_line, key: "divisible", source })?;
    let b =
        parse_poly(other_text).map_err(|source| MapFileError::Poly { line: other_line, key: "otherwise", source })?;
    Ok(PiecewiseMap::new(p, a.into_coeffs(), b.into_coeffs())?)
}

pub fn print_map(map: &PiecewiseMap) -> String {
    format!(
        "p = {}\ndivisible = {}\notherwise = {}\n",
        map.p(),
        Polynomial::new(map.a().to_vec()),
        Polynomial::new(map.b().to_vec()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coeffs(v: &[i64]) -> Vec<BigInt> {
        v.iter().copied().map(BigInt::from).collect()
    }

    #[test]
    fn parse_poly_examples() {
        assert_eq!(parse_poly("3*x + 1").unwrap().coeffs(), coeffs(&[1, 3]));
        assert_eq!(parse_poly("x^2 - 2x + 5").unwrap().coeffs(), coeffs(&[5, -2, 1]));
        assert_eq!(parse_poly("x + x").unwrap().coeffs(), coeffs(&[0, 2]));
        assert_eq!(
            parse_poly("3x*"),
            Err(PolyError::SyntaxError { offset: 2, message: "expected `+`, `-` or end of expression".into() })
        );
    }

    #[test]
    fn parse_poly_edge_cases() {
        assert_eq!(parse_poly("-x").unwrap().coeffs(), coeffs(&[0, -1]));
        assert_eq!(parse_poly("-3*x^2 + 1").unwrap().coeffs(), coeffs(&[1, 0, -3]));
        assert_eq!(parse_poly("x - x").unwrap().coeffs(), coeffs(&[0]));
        assert_eq!(parse_poly("  7  ").unwrap().coeffs(), coeffs(&[7]));
        assert_eq!(parse_poly("x^0").unwrap().coeffs(), coeffs(&[1]));
        assert_eq!(
            parse_poly("123456789012345678901234567890 x").unwrap().coeffs()[1],
            "123456789012345678901234567890".parse::<BigInt>().unwrap()
        );
        assert!(matches!(parse_poly(""), Err(PolyError::SyntaxError { offset: 0, .. })));
        assert!(matches!(parse_poly("+x"), Err(PolyError::SyntaxError { offset: 0, .. })));
        assert!(matches!(parse_poly("x +"), Err(PolyError::SyntaxError { offset: 3, .. })));
        assert!(matches!(parse_poly("x^"), Err(PolyError::SyntaxError { offset: 2, .. })));
        assert!(matches!(parse_poly("x^99999"), Err(PolyError::SyntaxError { offset: 2, .. })));
    }

    #[test]
    fn parse_poly_error_classes() {
        assert_eq!(parse_poly("3*y + 1"), Err(PolyError::UnknownVariable { offset: 2, name: "y".into() }));
        assert_eq!(parse_poly("2xy"), Err(PolyError::UnknownVariable { offset: 1, name: "xy".into() }));
        assert_eq!(parse_poly("x^1.5"), Err(PolyError::NonIntegerExponent { offset: 2 }));
        assert_eq!(parse_poly("x^-1"), Err(PolyError::NonIntegerExponent { offset: 2 }));
        assert_eq!(parse_poly("x^y"), Err(PolyError::NonIntegerExponent { offset: 2 }));
    }

    #[test]
    fn mapfile_examples() {
        let m = parse_mapfile("p = 2\ndivisible = x\notherwise = 3*x + 1").unwrap();
        assert!(m.is_collatz());
        let m = parse_mapfile("p = 3\ndivisible = 3 + x\notherwise = 2*x").unwrap();
        assert_eq!(m.a(), coeffs(&[3, 1]));
        assert_eq!(parse_mapfile("p = 2\ndivisible = x"), Err(MapFileError::MissingKey("otherwise")));
    }

    #[test]
    fn mapfile_errors() {
        assert_eq!(
            parse_mapfile("p = 2\np = 3\ndivisible = x\notherwise = 1"),
            Err(MapFileError::DuplicateKey { line: 2, key: "p" })
        );
        assert!(matches!(parse_mapfile("p = 2\nq = 3"), Err(MapFileError::UnknownKey { line: 2, .. })));
        assert!(matches!(
            parse_mapfile("p = 2\ndivisible = x + 1\notherwise = 1"),
            Err(MapFileError::Map(MapError::NonIntegralBranch { .. }))
        ));
        assert!(matches!(
            parse_mapfile("p = 1\ndivisible = x\notherwise = 1"),
            Err(MapFileError::Map(MapError::ModulusTooSmall(_)))
        ));
        assert!(matches!(
            parse_mapfile("p = two\ndivisible = x\notherwise = 1"),
            Err(MapFileError::BadModulus { line: 1, .. })
        ));
        assert!(matches!(
            parse_mapfile("p = 2\ndivisible = x\notherwise = 3x*"),
            Err(MapFileError::Poly { line: 3, key: "otherwise", source: PolyError::SyntaxError { offset: 2, .. } })
        ));
    }

    #[test]
    fn mapfile_comments_and_blank_lines() {
        let text = "# collatz\n\n  p = 2   # modulus\ndivisible = x\r\notherwise = 1 + 3x\n";
        assert!(parse_mapfile(text).unwrap().is_collatz());
    }

    #[test]
    fn print_examples() {
        assert_eq!(print_map(&PiecewiseMap::collatz()), "p = 2\ndivisible = x\notherwise = 3*x + 1\n");
        let m = PiecewiseMap::from_i64(2, &[0, 0, 2], &[1]).unwrap();
        assert_eq!(print_map(&m), "p = 2\ndivisible = 2*x^2\notherwise = 1\n");
        let m = PiecewiseMap::from_i64(2, &[0], &[1]).unwrap();
        assert!(print_map(&m).contains("divisible = 0\n"));
        let m = PiecewiseMap::from_i64(5, &[-5, -1, 0, 4], &[0, -7]).unwrap();
        assert_eq!(print_map(&m), "p = 5\ndivisible = 4*x^3 - x - 5\notherwise = -7*x\n");
    }

    proptest! {
        #[test]
        fn whitespace_and_order_independent(
            terms in prop::collection::vec((-20i64..=20, 0usize..5), 1..6),
            perm_seed in any::<u64>(),
        ) {
            let render = |ts: &[(i64, usize)], spaced: bool| {
                let mut s = String::new();
                for (i, (c, d)) in ts.iter().enumerate() {
                    let sep = if spaced { " " } else { "" };
                    if i == 0 {
                        if *c < 0 { s.push('-'); }
                    } else {
                        s.push_str(&format!("{sep}{}{sep}", if *c < 0 { '-' } else { '+' }));
                    }
                    s.push_str(&format!("{}{sep}*{sep}x^{}", c.abs(), d));
                }
                s
            };
            let mut shuffled = terms.clone();
            let n = shuffled.len();
            shuffled.rotate_left((perm_seed as usize) % n);
            let a = parse_poly(&render(&terms, true)).unwrap();
            let b = parse_poly(&render(&shuffled, false)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

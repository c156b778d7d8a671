//! Text syntax for polynomials in the generators.
//!
//! Grammar (whitespace-insensitive, juxtaposition multiplies):
//!
//! ```text
//! expr    :=  term (('+' | '-') term)*
//! term    :=  factor (('*' | '/')? factor)*      -- '/' divides by a scalar
//! factor  :=  atom ('^' uint)?  |  '-' factor
//! atom    :=  number | '(' num ',' num ')' | 'q' | 'I'
//!           | 'c' uint | 'a' uint | '(' expr ')'
//! ```
//!
//! `c1`/`a1` denote `a†(e_1)`/`a(e_1)`; `I` the unit; `(re,im)` a complex
//! literal; `q` the deformation parameter (symbolic in exact mode, its
//! numeric value in float mode).  Division requires a scalar (empty-word)
//! divisor, which also covers rational literals like `3/2`.
//!
//! `parse` and the polynomial `Display` round-trip: `parse(print(p)) = p`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::wick::{Gen, WickPolynomial, Word};

/// Parse `text` over mode dimension `d` (inferred from the highest generator
/// index when `None`).
pub fn parse<S: Scalar>(text: &str, d: Option<usize>, ring: S::Ring) -> Result<WickPolynomial<S>> {
    let tokens = lex(text)?;
    let d = match d {
        Some(d) => d,
        None => tokens
            .iter()
            .filter_map(|t| match t.kind {
                TokKind::Creator(m) | TokKind::Annihilator(m) => Some(m + 1),
                _ => None,
            })
            .max()
            .unwrap_or(1),
    };
    let mut p = Parser {
        tokens,
        pos: 0,
        d,
        ring,
    };
    let poly = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(poly)
}

#[derive(Clone, Debug, PartialEq)]
enum TokKind {
    Number(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    LParen,
    RParen,
    Q,
    Unit,
    Creator(usize),
    Annihilator(usize),
}

#[derive(Clone, Debug)]
struct Tok {
    kind: TokKind,
    at: usize,
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let at = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'+' => {
                out.push(Tok {
                    kind: TokKind::Plus,
                    at,
                });
                i += 1;
            }
            b'-' => {
                out.push(Tok {
                    kind: TokKind::Minus,
                    at,
                });
                i += 1;
            }
            b'*' => {
                out.push(Tok {
                    kind: TokKind::Star,
                    at,
                });
                i += 1;
            }
            b'/' => {
                out.push(Tok {
                    kind: TokKind::Slash,
                    at,
                });
                i += 1;
            }
            b'^' => {
                out.push(Tok {
                    kind: TokKind::Caret,
                    at,
                });
                i += 1;
            }
            b',' => {
                out.push(Tok {
                    kind: TokKind::Comma,
                    at,
                });
                i += 1;
            }
            b'(' => {
                out.push(Tok {
                    kind: TokKind::LParen,
                    at,
                });
                i += 1;
            }
            b')' => {
                out.push(Tok {
                    kind: TokKind::RParen,
                    at,
                });
                i += 1;
            }
            b'q' => {
                out.push(Tok {
                    kind: TokKind::Q,
                    at,
                });
                i += 1;
            }
            b'I' => {
                out.push(Tok {
                    kind: TokKind::Unit,
                    at,
                });
                i += 1;
            }
            b'c' | b'a' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return Err(Error::Parse {
                        position: at,
                        message: format!(
                            "generator '{}' needs a mode index (e.g. {}1)",
                            b as char, b as char
                        ),
                    });
                }
                let idx: usize = text[start..j].parse().map_err(|_| Error::Parse {
                    position: at,
                    message: "mode index too large".into(),
                })?;
                if idx == 0 {
                    return Err(Error::Parse {
                        position: at,
                        message: "mode indices are 1-based".into(),
                    });
                }
                let kind = if b == b'c' {
                    TokKind::Creator(idx - 1)
                } else {
                    TokKind::Annihilator(idx - 1)
                };
                out.push(Tok { kind, at });
                i = j;
            }
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                // exponent part
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                out.push(Tok {
                    kind: TokKind::Number(text[i..j].to_string()),
                    at,
                });
                i = j;
            }
            _ => {
                return Err(Error::Parse {
                    position: at,
                    message: format!("unexpected character '{}'", b as char),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<S: Scalar> {
    tokens: Vec<Tok>,
    pos: usize,
    d: usize,
    ring: S::Ring,
}

impl<S: Scalar> Parser<S> {
    fn peek(&self) -> Option<&TokKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> Error {
        let position = self
            .tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|t| t.at)
            .unwrap_or(0);
        Error::Parse {
            position,
            message: message.to_string(),
        }
    }

    fn expr(&mut self) -> Result<WickPolynomial<S>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(TokKind::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Some(TokKind::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<WickPolynomial<S>> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(TokKind::Star) => {
                    self.bump();
                    acc = acc.mul(&self.factor()?)?;
                }
                Some(TokKind::Slash) => {
                    self.bump();
                    let divisor = self.factor()?;
                    acc = acc.scale(&scalar_of(&divisor)?.inv()?);
                }
                // juxtaposition
                Some(
                    TokKind::Number(_)
                    | TokKind::LParen
                    | TokKind::Q
                    | TokKind::Unit
                    | TokKind::Creator(_)
                    | TokKind::Annihilator(_),
                ) => {
                    acc = acc.mul(&self.factor()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<WickPolynomial<S>> {
        if matches!(self.peek(), Some(TokKind::Minus)) {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let mut base = self.atom()?;
        if matches!(self.peek(), Some(TokKind::Caret)) {
            self.bump();
            let exp_tok = self.bump().ok_or_else(|| self.error("expected exponent"))?;
            let TokKind::Number(ref s) = exp_tok.kind else {
                return Err(Error::Parse {
                    position: exp_tok.at,
                    message: "expected a nonnegative integer exponent".into(),
                });
            };
            let k: usize = s.parse().map_err(|_| Error::Parse {
                position: exp_tok.at,
                message: "expected a nonnegative integer exponent".into(),
            })?;
            base = base.pow(k)?;
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<WickPolynomial<S>> {
        let tok = self
            .bump()
            .ok_or_else(|| self.error("unexpected end of input"))?;
        match tok.kind {
            TokKind::Number(ref s) => {
                let c = S::from_decimal(s).ok_or(Error::Parse {
                    position: tok.at,
                    message: format!("invalid number literal '{s}'"),
                })?;
                Ok(self.scalar_poly(c))
            }
            TokKind::Q => Ok(self.scalar_poly(S::q(&self.ring))),
            TokKind::Unit => Ok(WickPolynomial::unit(self.d, self.ring.clone())),
            TokKind::Creator(m) => self.generator(Gen::creator(m), tok.at),
            TokKind::Annihilator(m) => self.generator(Gen::annihilator(m), tok.at),
            TokKind::LParen => {
                // complex literal "(re,im)" or parenthesized expression
                if let Some(c) = self.try_complex_literal()? {
                    return Ok(self.scalar_poly(c));
                }
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok {
                        kind: TokKind::RParen,
                        ..
                    }) => Ok(inner),
                    _ => Err(self.error("expected ')'")),
                }
            }
            _ => Err(Error::Parse {
                position: tok.at,
                message: "expected a number, generator, 'q', 'I' or '('".into(),
            }),
        }
    }

    /// After an opening paren: attempt `signed-number ',' signed-number ')'`.
    fn try_complex_literal(&mut self) -> Result<Option<S>> {
        let start = self.pos;
        let re = self.signed_number();
        if let Some(re) = re {
            if matches!(self.peek(), Some(TokKind::Comma)) {
                self.bump();
                let im = self
                    .signed_number()
                    .ok_or_else(|| self.error("expected imaginary part"))?;
                if !matches!(self.peek(), Some(TokKind::RParen)) {
                    return Err(self.error("expected ')' after complex literal"));
                }
                self.bump();
                return Ok(Some(re.add(&S::i().mul(&im))));
            }
        }
        self.pos = start;
        Ok(None)
    }

    fn signed_number(&mut self) -> Option<S> {
        let start = self.pos;
        let negative = if matches!(self.peek(), Some(TokKind::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        if let Some(TokKind::Number(s)) = self.peek().cloned() {
            self.bump();
            let mut value = S::from_decimal(&s)?;
            // allow a rational literal "p/r" inside complex parts
            if matches!(self.peek(), Some(TokKind::Slash)) {
                let save = self.pos;
                self.bump();
                if let Some(TokKind::Number(den)) = self.peek().cloned() {
                    self.bump();
                    if let Some(d) = S::from_decimal(&den) {
                        if let Ok(inv) = d.inv() {
                            value = value.mul(&inv);
                        } else {
                            self.pos = save;
                        }
                    } else {
                        self.pos = save;
                    }
                } else {
                    self.pos = save;
                }
            }
            Some(if negative { value.neg() } else { value })
        } else {
            self.pos = start;
            None
        }
    }

    fn scalar_poly(&self, c: S) -> WickPolynomial<S> {
        WickPolynomial::unit(self.d, self.ring.clone()).scale(&c)
    }

    fn generator(&self, g: Gen, at: usize) -> Result<WickPolynomial<S>> {
        if g.mode >= self.d {
            return Err(Error::Parse {
                position: at,
                message: format!("mode {} exceeds dimension d = {}", g.mode + 1, self.d),
            });
        }
        WickPolynomial::from_terms(self.d, self.ring.clone(), [(Word::single(g), S::one())])
    }
}

/// Extract the scalar coefficient of a scalar (empty-word) polynomial.
fn scalar_of<S: Scalar>(p: &WickPolynomial<S>) -> Result<S> {
    if p.degree() > 0 {
        return Err(Error::Unsupported(
            "division by a non-scalar polynomial".into(),
        ));
    }
    Ok(p.coeff(&Word::empty()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::QRat;
    use crate::scalar::{ExactRing, FloatRing};
    use num_complex::Complex64;

    fn pe(text: &str) -> WickPolynomial<QRat> {
        parse::<QRat>(text, None, ExactRing).unwrap()
    }

    #[test]
    fn parses_relation_example() {
        let p = pe("a1 c1");
        let n = p.normalize();
        assert_eq!(n.to_string(), "(1-q)*I + q*c1 a1");
        // round trip
        let back = pe(&n.to_string());
        assert_eq!(back, n);
    }

    #[test]
    fn parses_iterated_example() {
        let n = pe("a1 c1 c1").normalize();
        assert_eq!(n.to_string(), "(1-q^2)*c1 + q^2*c1 c1 a1");
        assert_eq!(pe(&n.to_string()), n);
    }

    #[test]
    fn rational_and_complex_literals() {
        let p = pe("3/2*I");
        assert_eq!(p.coeff(&Word::empty()), QRat::from_ratio(3, 2));
        let p = pe("(2,-1)*c1");
        let c = p.coeff(&Word::creators(&[0]));
        assert_eq!(c, QRat::from_gauss(crate::exact::gauss_from_i64(2, -1)));
        let p = pe("(1/2,1/3)*I");
        let want =
            QRat::from_ratio(1, 2).add(&QRat::from_ratio(1, 3).mul(&crate::scalar::Scalar::i()));
        assert_eq!(p.coeff(&Word::empty()), want);
    }

    #[test]
    fn precedence_and_powers() {
        assert_eq!(pe("q^2 c1"), pe("q*q*c1"));
        assert_eq!(pe("c1^3"), pe("c1 c1 c1"));
        assert_eq!(pe("-q*c1 + c1*q"), WickPolynomial::zero(1, ExactRing));
        // division by a scalar subexpression
        assert_eq!(pe("(1-q^2)/(1-q)*I"), pe("(1+q)*I"));
    }

    #[test]
    fn division_by_polynomial_rejected() {
        assert!(parse::<QRat>("I/(c1)", None, ExactRing).is_err());
    }

    #[test]
    fn error_positions() {
        let err = parse::<QRat>("c1 + $", None, ExactRing).unwrap_err();
        match err {
            Error::Parse { position, .. } => assert_eq!(position, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse::<QRat>("c", None, ExactRing).is_err());
        assert!(parse::<QRat>("c0", None, ExactRing).is_err());
        assert!(parse::<QRat>("c3", Some(2), ExactRing).is_err());
    }

    #[test]
    fn float_mode_q_is_numeric() {
        let ring = FloatRing::new(0.25);
        let p = parse::<Complex64>("q*I", None, ring).unwrap();
        assert_eq!(p.coeff(&Word::empty()), Complex64::new(0.25, 0.0));
        let n = parse::<Complex64>("a1 c1", None, ring).unwrap().normalize();
        assert_eq!(n.coeff(&Word::empty()), Complex64::new(0.75, 0.0));
    }

    #[test]
    fn display_parse_round_trip_random() {
        for seed in 0..20u64 {
            let p = crate::wick::testutil::random_poly(2, 4, 6, seed);
            let shown = p.to_string();
            let back = parse::<QRat>(&shown, Some(2), ExactRing)
                .unwrap_or_else(|e| panic!("reparse failed on '{shown}': {e}"));
            assert_eq!(back, p, "round trip of '{shown}'");
        }
    }
}

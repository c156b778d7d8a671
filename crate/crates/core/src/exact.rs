//! Exact coefficient arithmetic: Gaussian rationals and rational functions of
//! a real indeterminate `q`.
//!
//! The exact scalar ring used by the symbolic engine is the field
//! `Q(i)(q)` of rational functions in `q` with Gaussian-rational
//! coefficients.  Elements are kept in canonical form: numerator and
//! denominator coprime, denominator monic.  Since `q` is a *real*
//! indeterminate, complex conjugation acts on the coefficients only.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::error::{Error, Result};

/// A Gaussian rational: an element of `Q(i)`.
pub type GaussRat = Complex<BigRational>;

/// Convenience constructor from integer real/imaginary parts.
pub fn gauss_from_i64(re: i64, im: i64) -> GaussRat {
    Complex::new(
        BigRational::from_integer(BigInt::from(re)),
        BigRational::from_integer(BigInt::from(im)),
    )
}

/// Constructor from a rational real part `num/den`.
pub fn gauss_from_ratio(num: i64, den: i64) -> GaussRat {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

fn gauss_to_c64(z: &GaussRat) -> num_complex::Complex64 {
    num_complex::Complex64::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Render a Gaussian rational in the polynomial-text syntax: plain rational
/// when real, `(re,im)` otherwise.
pub fn gauss_str(z: &GaussRat) -> String {
    if z.im.is_zero() {
        rational_str(&z.re)
    } else {
        format!("({},{})", rational_str(&z.re), rational_str(&z.im))
    }
}

/// Dense polynomial in `q` over the Gaussian rationals.
///
/// Invariant: no trailing zero coefficients; the zero polynomial has an empty
/// coefficient vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QPoly {
    coeffs: Vec<GaussRat>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::constant(gauss_from_i64(1, 0))
    }

    /// The monomial `q`.
    pub fn q() -> Self {
        QPoly::from_coeffs(vec![GaussRat::zero(), gauss_from_i64(1, 0)])
    }

    pub fn constant(c: GaussRat) -> Self {
        QPoly::from_coeffs(vec![c])
    }

    pub fn from_coeffs(coeffs: Vec<GaussRat>) -> Self {
        let mut p = QPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> GaussRat {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    fn leading(&self) -> Option<&GaussRat> {
        self.coeffs.last()
    }

    pub fn add(&self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        QPoly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn sub(&self, rhs: &QPoly) -> QPoly {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![GaussRat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        QPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &GaussRat) -> QPoly {
        QPoly::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Euclidean division: `self = quot * div + rem` with `deg rem < deg div`.
    pub fn divrem(&self, div: &QPoly) -> (QPoly, QPoly) {
        assert!(!div.is_zero(), "polynomial division by zero");
        let dd = div.degree().unwrap();
        let lead_inv = GaussRat::one() / div.leading().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = vec![GaussRat::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let factor = rem.leading().unwrap().clone() * lead_inv.clone();
            let shift = dr - dd;
            quot[shift] = factor.clone();
            // rem -= factor * q^shift * div
            let mut coeffs = rem.coeffs;
            for (j, b) in div.coeffs.iter().enumerate() {
                coeffs[shift + j] = coeffs[shift + j].clone() - factor.clone() * b.clone();
            }
            rem = QPoly::from_coeffs(coeffs);
        }
        (QPoly::from_coeffs(quot), rem)
    }

    /// Monic gcd by the Euclidean algorithm.  Remainders are re-normalized
    /// to monic at every step, which keeps coefficient heights tame at the
    /// degrees this crate reduces eagerly (see [`QRat`]).
    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let (mut a, mut b) = (a.clone().into_monic(), b.clone().into_monic());
        while !b.is_zero() {
            let r = a.divrem(&b).1.into_monic();
            a = b;
            b = r;
        }
        a
    }

    fn into_monic(self) -> QPoly {
        match self.leading() {
            None => self,
            Some(l) => {
                let inv = GaussRat::one() / l.clone();
                self.scale(&inv)
            }
        }
    }

    /// Coefficient reversal: returns `q^deg * self(1/q)` (trailing zeros of
    /// the reversed list are trimmed).
    pub fn reversed(&self) -> QPoly {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        QPoly::from_coeffs(coeffs)
    }

    /// Multiply by `q^k`.
    pub fn shift_up(&self, k: usize) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![GaussRat::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        QPoly { coeffs }
    }

    pub fn conj(&self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn eval_c64(&self, q: f64) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * q + gauss_to_c64(c);
        }
        acc
    }

    pub fn eval_rat(&self, x: &GaussRat) -> GaussRat {
        let mut acc = GaussRat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }
}

/// A rational function of `q` over the Gaussian rationals.
///
/// The denominator is always monic and nonzero, constant denominators are
/// folded into the numerator, and numerator/denominator are fully reduced
/// whenever their degrees stay below [`QRat::REDUCE_DEGREE`].  Larger
/// elements (deep intertwiner-series coefficients) are kept unreduced —
/// Euclidean gcd at degree in the hundreds suffers catastrophic coefficient
/// growth — and equality is decided by cross-multiplication, which is
/// representation-independent.
#[derive(Clone, Debug)]
pub struct QRat {
    num: QPoly,
    den: QPoly,
}

impl PartialEq for QRat {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl QRat {
    /// Degree up to which gcd reduction runs eagerly.
    pub const REDUCE_DEGREE: usize = 32;

    fn canonical(num: QPoly, den: QPoly) -> QRat {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return QRat {
                num: QPoly::zero(),
                den: QPoly::one(),
            };
        }
        if den.degree() == Some(0) {
            let inv = GaussRat::one() / den.leading().unwrap().clone();
            return QRat {
                num: num.scale(&inv),
                den: QPoly::one(),
            };
        }
        let small = num.degree().unwrap_or(0).min(den.degree().unwrap()) <= Self::REDUCE_DEGREE;
        let (num, den) = if small {
            let g = QPoly::gcd(&num, &den);
            (num.divrem(&g).0, den.divrem(&g).0)
        } else {
            (num, den)
        };
        if den.degree() == Some(0) {
            let inv = GaussRat::one() / den.leading().unwrap().clone();
            return QRat {
                num: num.scale(&inv),
                den: QPoly::one(),
            };
        }
        let lead_inv = GaussRat::one() / den.leading().unwrap().clone();
        QRat {
            num: num.scale(&lead_inv),
            den: den.scale(&lead_inv),
        }
    }

    pub fn new(num: QPoly, den: QPoly) -> Result<QRat> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QRat::canonical(num, den))
    }

    pub fn zero() -> QRat {
        QRat {
            num: QPoly::zero(),
            den: QPoly::one(),
        }
    }

    pub fn one() -> QRat {
        QRat {
            num: QPoly::one(),
            den: QPoly::one(),
        }
    }

    /// The indeterminate `q`.
    pub fn q() -> QRat {
        QRat {
            num: QPoly::q(),
            den: QPoly::one(),
        }
    }

    pub fn from_int(n: i64) -> QRat {
        QRat::from_gauss(gauss_from_i64(n, 0))
    }

    pub fn from_ratio(num: i64, den: i64) -> QRat {
        QRat::from_gauss(gauss_from_ratio(num, den))
    }

    pub fn from_gauss(c: GaussRat) -> QRat {
        QRat {
            num: QPoly::constant(c),
            den: QPoly::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &QPoly {
        &self.num
    }

    pub fn denominator(&self) -> &QPoly {
        &self.den
    }

    /// True when the denominator is the constant 1.
    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn add(&self, rhs: &QRat) -> QRat {
        QRat::canonical(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn sub(&self, rhs: &QRat) -> QRat {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> QRat {
        QRat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, rhs: &QRat) -> QRat {
        QRat::canonical(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn inv(&self) -> Result<QRat> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QRat::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, rhs: &QRat) -> Result<QRat> {
        Ok(self.mul(&rhs.inv()?))
    }

    pub fn conj(&self) -> QRat {
        // q is a real indeterminate; conjugation acts on coefficients.  The
        // denominator is re-normalized since conjugation may break monicity
        // only through a non-real leading coefficient.
        QRat::canonical(self.num.conj(), self.den.conj())
    }

    pub fn pow(&self, k: u32) -> QRat {
        let mut acc = QRat::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute `q -> 1/q`, returning the result as a rational function of
    /// `q` again.
    pub fn subst_q_inv(&self) -> Result<QRat> {
        // num(1/q)/den(1/q) = rev(num) q^{deg den} / (rev(den) q^{deg num}).
        if self.is_zero() {
            return Ok(QRat::zero());
        }
        let dn = self.num.degree().unwrap();
        let dd = self.den.degree().unwrap();
        let rn = self.num.reversed();
        let rd = self.den.reversed();
        let (num, den) = if dd >= dn {
            (rn.shift_up(dd - dn), rd)
        } else {
            (rn, rd.shift_up(dn - dd))
        };
        QRat::new(num, den)
    }

    /// Evaluate at a numeric `q` in double precision.
    pub fn eval_c64(&self, q: f64) -> Result<num_complex::Complex64> {
        let den = self.den.eval_c64(q);
        if den.norm() < 1e-300 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.num.eval_c64(q) / den)
    }

    /// Evaluate exactly at a Gaussian-rational point.
    pub fn eval_rat(&self, x: &GaussRat) -> Result<GaussRat> {
        let den = self.den.eval_rat(x);
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.num.eval_rat(x) / den)
    }
}

fn poly_str(p: &QPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (mag, sign_neg) = if c.im.is_zero() && c.re.is_negative() {
            (-c.clone(), true)
        } else {
            (c.clone(), false)
        };
        let body = if k == 0 {
            gauss_str(&mag)
        } else if mag.is_one() {
            power_str(k)
        } else {
            format!("{}*{}", gauss_str(&mag), power_str(k))
        };
        if out.is_empty() {
            if sign_neg {
                out.push('-');
            }
        } else if sign_neg {
            out.push('-');
        } else {
            out.push('+');
        }
        out.push_str(&body);
    }
    out
}

fn power_str(k: usize) -> String {
    if k == 1 {
        "q".to_string()
    } else {
        format!("q^{k}")
    }
}

/// True when the string renders a single monomial with a plain positive
/// rational coefficient, i.e. it can stand as a multiplication factor without
/// parentheses.
fn is_simple_factor(p: &QPoly) -> bool {
    let nonzero: Vec<_> = p.coeffs().iter().filter(|c| !c.is_zero()).collect();
    nonzero.len() == 1 && nonzero[0].im.is_zero() && nonzero[0].re.is_positive()
}

impl QRat {
    /// Render as a multiplication-ready factor in the polynomial text syntax:
    /// parenthesized unless it is a single positive rational monomial.
    pub fn factor_str(&self) -> String {
        if self.is_polynomial() {
            let s = poly_str(&self.num);
            if is_simple_factor(&self.num) {
                s
            } else {
                format!("({s})")
            }
        } else {
            format!("({})/({})", poly_str(&self.num), poly_str(&self.den))
        }
    }
}

impl fmt::Display for QRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", poly_str(&self.num))
        } else {
            write!(f, "({})/({})", poly_str(&self.num), poly_str(&self.den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QRat {
        QRat::q()
    }

    #[test]
    fn field_arithmetic_is_exact() {
        // (1 - q^2) / (1 - q) reduces to 1 + q
        let one = QRat::one();
        let num = one.sub(&q().mul(&q()));
        let den = one.sub(&q());
        let r = num.div(&den).unwrap();
        assert_eq!(r, one.add(&q()));
        // and (1+q) * (1-q) + q^2 = 1
        let back = r.mul(&den).add(&q().mul(&q()));
        assert_eq!(back, QRat::one());
    }

    #[test]
    fn canonical_form_is_unique() {
        // 2q/2 and q compare equal after reduction
        let two = QRat::from_int(2);
        let a = two.mul(&q()).div(&two).unwrap();
        assert_eq!(a, q());
        // denominator is kept monic: (1)/(2-2q) has den q-1 after scaling
        let r = QRat::one().div(&two.sub(&two.mul(&q()))).unwrap();
        assert!(r.denominator().leading_is_one());
    }

    #[test]
    fn conjugation_acts_on_coefficients() {
        let i = QRat::from_gauss(gauss_from_i64(0, 1));
        let r = i.mul(&q()).add(&QRat::from_int(3));
        let c = r.conj();
        assert_eq!(c, i.neg().mul(&q()).add(&QRat::from_int(3)));
        assert_eq!(c.conj(), r);
    }

    #[test]
    fn q_inverse_substitution() {
        // q -> 1/q on (1-q) gives (q-1)/q  (up to canonical form)
        let r = QRat::one().sub(&q());
        let s = r.subst_q_inv().unwrap();
        let expected = q().sub(&QRat::one()).neg().neg().div(&q()).unwrap();
        assert_eq!(s, expected);
        // involution
        assert_eq!(s.subst_q_inv().unwrap(), r);
    }

    #[test]
    fn evaluation_matches_exact_value() {
        // r = (1-q^3)/(1-q) = 1+q+q^2 at q = 1/2 is 7/4
        let q3 = q().pow(3);
        let r = QRat::one().sub(&q3).div(&QRat::one().sub(&q())).unwrap();
        let v = r.eval_rat(&gauss_from_ratio(1, 2)).unwrap();
        assert_eq!(v, gauss_from_ratio(7, 4));
        let f = r.eval_c64(0.5).unwrap();
        assert!((f.re - 1.75).abs() < 1e-15 && f.im == 0.0);
    }

    #[test]
    fn display_readable() {
        let r = QRat::one().sub(&q());
        assert_eq!(r.to_string(), "1-q");
        assert_eq!(r.factor_str(), "(1-q)");
        assert_eq!(q().pow(2).factor_str(), "q^2");
    }

    impl QPoly {
        fn leading_is_one(&self) -> bool {
            self.leading().is_some_and(|c| c.is_one())
        }
    }
}

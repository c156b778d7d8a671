//! The pluggable coefficient ring behind the symbolic engine, and the
//! deformation parameter.
//!
//! Two rings implement [`Scalar`]:
//!
//! - [`exact::QRat`](crate::exact::QRat) over [`ExactRing`]: rational
//!   functions of a symbolic `q` with Gaussian-rational coefficients.
//!   Arithmetic is exact; this is the oracle ring.
//! - [`Complex64`] over [`FloatRing`]: complex doubles with `q` fixed to a
//!   number.  Comparisons use the ring's pruning tolerance, never equality.

use num_complex::Complex64;
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::exact::QRat;

/// Default absolute tolerance below which float coefficients are pruned.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-12;

/// The deformation parameter: either the symbolic indeterminate `q` (exact
/// mode) or a numeric value in `[-1, 1]`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum QParam {
    Symbolic,
    Numeric(f64),
}

impl QParam {
    /// A numeric parameter; rejects values outside `[-1, 1]` and non-finite
    /// input.
    pub fn numeric(q: f64) -> Result<QParam> {
        if !q.is_finite() || !(-1.0..=1.0).contains(&q) {
            return Err(Error::ParamOutOfRange(format!("q = {q} is not in [-1, 1]")));
        }
        Ok(QParam::Numeric(q))
    }

    pub fn symbolic() -> QParam {
        QParam::Symbolic
    }

    /// The numeric value, rejecting symbolic mode.
    pub fn numeric_value(&self) -> Result<f64> {
        match self {
            QParam::Numeric(q) => Ok(*q),
            QParam::Symbolic => Err(Error::Unsupported(
                "operation requires a numeric q, got symbolic".into(),
            )),
        }
    }

    /// The numeric value, additionally rejecting the endpoints `q = ±1`.
    pub fn numeric_open(&self) -> Result<f64> {
        let q = self.numeric_value()?;
        if q.abs() >= 1.0 {
            return Err(Error::ParamOutOfRange(format!(
                "|q| < 1 required, got q = {q}"
            )));
        }
        Ok(q)
    }
}

/// Ring tag for exact mode: `q` symbolic, coefficients in `Q(i)(q)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ExactRing;

/// Ring tag for float mode: coefficients are complex doubles and `q` is a
/// fixed number.  Two float polynomials are compatible only when their tags
/// agree.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct FloatRing {
    pub q: f64,
    pub prune_tol: f64,
}

impl FloatRing {
    pub fn new(q: f64) -> FloatRing {
        FloatRing {
            q,
            prune_tol: DEFAULT_PRUNE_TOL,
        }
    }

    pub fn with_tol(q: f64, prune_tol: f64) -> FloatRing {
        FloatRing { q, prune_tol }
    }
}

/// Coefficient arithmetic as the symbolic engine needs it.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    /// Runtime data shared by all coefficients of a polynomial (carries the
    /// numeric `q` in float mode).
    type Ring: Clone + PartialEq + Debug + Send + Sync;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn from_i64(n: i64) -> Self;
    /// The deformation parameter as a ring element.
    fn q(ring: &Self::Ring) -> Self;
    /// Zero test at the ring's working tolerance (exact test in exact mode).
    fn is_zero(&self, ring: &Self::Ring) -> bool;
    /// Evaluate as a complex double; `q_eval` substitutes for a symbolic `q`
    /// and is ignored in float mode.
    fn to_c64(&self, q_eval: f64) -> Result<Complex64>;
    /// Parse a decimal literal ("3", "0.5", "1e-3") into the ring.
    fn from_decimal(text: &str) -> Option<Self>;
    /// Render as a multiplication-ready factor of the polynomial text syntax.
    fn factor_str(&self) -> String;
}

impl Scalar for QRat {
    type Ring = ExactRing;

    fn zero() -> Self {
        QRat::zero()
    }
    fn one() -> Self {
        QRat::one()
    }
    fn i() -> Self {
        QRat::from_gauss(crate::exact::gauss_from_i64(0, 1))
    }
    fn add(&self, rhs: &Self) -> Self {
        QRat::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        QRat::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        QRat::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        QRat::neg(self)
    }
    fn conj(&self) -> Self {
        QRat::conj(self)
    }
    fn inv(&self) -> Result<Self> {
        QRat::inv(self)
    }
    fn from_i64(n: i64) -> Self {
        QRat::from_int(n)
    }
    fn q(_ring: &ExactRing) -> Self {
        QRat::q()
    }
    fn is_zero(&self, _ring: &ExactRing) -> bool {
        QRat::is_zero(self)
    }
    fn to_c64(&self, q_eval: f64) -> Result<Complex64> {
        self.eval_c64(q_eval)
    }
    fn from_decimal(text: &str) -> Option<Self> {
        parse_decimal_exact(text)
    }
    fn factor_str(&self) -> String {
        QRat::factor_str(self)
    }
}

impl Scalar for Complex64 {
    type Ring = FloatRing;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn inv(&self) -> Result<Self> {
        if self.norm() == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Complex64::new(1.0, 0.0) / self)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn q(ring: &FloatRing) -> Self {
        Complex64::new(ring.q, 0.0)
    }
    fn is_zero(&self, ring: &FloatRing) -> bool {
        self.norm() <= ring.prune_tol
    }
    fn to_c64(&self, _q_eval: f64) -> Result<Complex64> {
        Ok(*self)
    }
    fn from_decimal(text: &str) -> Option<Self> {
        text.parse::<f64>().ok().map(|x| Complex64::new(x, 0.0))
    }
    fn factor_str(&self) -> String {
        if self.im == 0.0 {
            format!("{}", self.re)
        } else {
            format!("({},{})", self.re, self.im)
        }
    }
}

/// Exact decimal parsing: "12", "0.25", "2.5e-3" become Gaussian rationals.
fn parse_decimal_exact(text: &str) -> Option<QRat> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::pow::Pow;

    let (mantissa, exp10) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: String = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = digits.parse().ok()?;
    let scale = frac_part.len() as i32 - exp10;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::new(numer, ten.pow(scale as u32))
    } else {
        BigRational::from_integer(numer * ten.pow((-scale) as u32))
    };
    Some(QRat::from_gauss(num_complex::Complex::new(
        value,
        BigRational::new(BigInt::from(0), BigInt::from(1)),
    )))
}

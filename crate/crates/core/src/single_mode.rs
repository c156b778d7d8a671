//! Analytics for a single generator satisfying `a a† = (1-q) I + q a† a`.
//!
//! Provides the weighted-shift matrix realization, the operator-norm
//! branches, the `beta±(q)` and `epsilon(s)` infinite products with certified
//! truncation tails, the intertwiner series `V_{alpha,beta}` and the
//! q-exponential, and the Radon–Nikodym transport between non-peripheral
//! coherent states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::scalar::{FloatRing, Scalar};

/// Truncated matrix of the single-mode annihilator in the number basis
/// `|0>, ..., |N>`: `a |n> = (1 - q^n)^{1/2} |n-1>`.
#[derive(Clone, Debug)]
pub struct ShiftMatrix {
    q: f64,
    n_max: usize,
    matrix: DMatrix<f64>,
}

impl ShiftMatrix {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// The annihilator matrix `a`.
    pub fn annihilator(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The creator matrix `a† = a^T`:
    /// `a† |n> = (1 - q^{n+1})^{1/2} |n+1>`, truncated at degree `N`.
    pub fn creator(&self) -> DMatrix<f64> {
        self.matrix.transpose()
    }

    /// The shift weight `(1 - q^n)^{1/2}` for `n = 1..=N`.
    pub fn weight(&self, n: usize) -> f64 {
        (1.0 - self.q.powi(n as i32)).sqrt()
    }
}

/// Build the truncated weighted shift; requires numeric `|q| < 1` and
/// `N >= 1`.
///
/// The relation `a a† = (1-q) I + q a† a` holds exactly on
/// `span{|0>, .., |N-1>}`; only the top degree is corrupted by truncation.
pub fn shift_matrix(q: f64, n_max: usize) -> Result<ShiftMatrix> {
    check_open_q(q)?;
    if n_max < 1 {
        return Err(Error::ParamOutOfRange(
            "shift truncation N >= 1 required".into(),
        ));
    }
    let dim = n_max + 1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for n in 1..=n_max {
        m[(n - 1, n)] = (1.0 - q.powi(n as i32)).sqrt();
    }
    Ok(ShiftMatrix {
        q,
        n_max,
        matrix: m,
    })
}

/// Numeric operator norm of the truncated shift together with the
/// infinite-dimensional closed form: `1` for `q >= 0` (approached as
/// `N -> infinity`, the non-unitary Fock branch), `sqrt(1-q)` for `q < 0`
/// (attained at the first weight).
pub fn shift_norm(q: f64, n_max: usize) -> Result<(f64, f64)> {
    let shift = shift_matrix(q, n_max)?;
    // the shift is bidiagonal, so its singular values are the weights
    let numeric = shift
        .matrix
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    let closed = if q >= 0.0 { 1.0 } else { (1.0 - q).sqrt() };
    Ok((numeric, closed))
}

/// Value of a truncated infinite product with a certified tail estimate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ProductValue {
    pub value: f64,
    /// Factors with index `> truncation_index` were dropped.
    pub truncation_index: usize,
    /// Certified bound on the relative error `|value/true - 1|`.
    pub error_bound: f64,
}

fn check_open_q(q: f64) -> Result<()> {
    if !q.is_finite() || q.abs() >= 1.0 {
        return Err(Error::ParamOutOfRange(format!(
            "|q| < 1 required, got q = {q}"
        )));
    }
    Ok(())
}

/// `prod_{k>=1} (1 - sign_k q^k)` over a set of exponents, with tail control:
/// stops once the geometric majorant of the remaining log-factors drops
/// below `tol`.
fn certified_product(q: f64, tol: f64, exponents: impl Iterator<Item = u32>) -> ProductValue {
    let mut value = 1.0;
    let mut last = 0usize;
    let aq = q.abs();
    if aq == 0.0 {
        return ProductValue {
            value: 1.0,
            truncation_index: 0,
            error_bound: 0.0,
        };
    }
    for k in exponents {
        value *= 1.0 - q.powi(k as i32);
        last = k as usize;
        // |log prod_{j>k}(1 - q^j)| <= sum_{j>k} |q|^j / (1-|q|^j)
        //                           <= |q|^{k+1} / ((1-|q|)(1-|q|^{k+1}))
        let t = aq.powi(k as i32 + 1);
        let tail = t / ((1.0 - aq) * (1.0 - t));
        if tail <= tol {
            return ProductValue {
                value,
                truncation_index: last,
                error_bound: tail.exp_m1().max(tail),
            };
        }
    }
    ProductValue {
        value,
        truncation_index: last,
        error_bound: f64::INFINITY,
    }
}

/// The two-sided uniform bounds `beta-(q) I <= a^n (a†)^n... <= beta+(q) I`
/// as certified products:
///
/// - `q >= 0`: `beta+ = 1`, `beta- = prod_{k>=1}(1 - q^k)`;
/// - `q <= 0`: `beta+ = prod over odd exponents (1 - q^k)`,
///   `beta- = prod over even exponents (1 - q^k)`.
///
/// These are the supremum/infimum of `prod_{k in M}(1 - q^k)` over subsets
/// `M`; for `q < 0` the factors with odd `k` exceed 1 and the even ones lie
/// below 1, so the extremal subsets are the odd and even exponents (note the
/// odd product starts at `k = 1`: the factor `1 - q` belongs to the
/// supremum).
pub fn beta_bounds(q: f64, tol: f64) -> Result<(ProductValue, ProductValue)> {
    check_open_q(q)?;
    if tol <= 0.0 {
        return Err(Error::ParamOutOfRange("tol > 0 required".into()));
    }
    let max_k = 8 * 1024;
    let (minus, plus) = if q >= 0.0 {
        let minus = certified_product(q, tol, 1..max_k);
        let plus = ProductValue {
            value: 1.0,
            truncation_index: 0,
            error_bound: 0.0,
        };
        (minus, plus)
    } else {
        let minus = certified_product(q, tol, (1..max_k / 2).map(|k| 2 * k));
        let plus = certified_product(q, tol, (1..max_k / 2).map(|k| 2 * k - 1));
        (minus, plus)
    };
    if !minus.error_bound.is_finite() || !plus.error_bound.is_finite() {
        return Err(Error::Numerical("beta product did not converge".into()));
    }
    Ok((minus, plus))
}

/// Per-power data from [`verify_power_bounds`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct PowerBoundRow {
    pub n: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    /// `|a^n|^{1/n}` on the truncated space.
    pub norm_root: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PowerBoundReport {
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub rows: Vec<PowerBoundRow>,
    /// Max violation of `beta- <= eig <= beta+` over retained degrees.
    pub worst_violation: f64,
    /// Max violation of `beta-^{1/2n} <= |a^n|^{1/n} <= beta+^{1/2n}`.
    pub worst_norm_violation: f64,
}

/// Check the uniform power bounds on the truncated shift: for `n = 1..n_max`
/// the eigenvalues of `a^n (a†)^n` restricted to degrees `<= N - n_max` must
/// lie in `[beta-, beta+]`, and `|a^n|^{1/n}` must be consistent with
/// spectral radius 1.
pub fn verify_power_bounds(
    q: f64,
    n_trunc: usize,
    n_max: usize,
    tol: f64,
) -> Result<PowerBoundReport> {
    if n_trunc <= n_max {
        return Err(Error::ParamOutOfRange(format!(
            "truncation N = {n_trunc} must exceed n_max = {n_max}"
        )));
    }
    let shift = shift_matrix(q, n_trunc)?;
    let (bm, bp) = beta_bounds(q, tol)?;
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    let mut worst_norm = 0.0_f64;
    // a^n (a†)^n is diagonal on the number basis with entries
    // lambda_{k+1} ... lambda_{k+n}, lambda_j = 1 - q^j.
    for n in 1..=n_max {
        let mut min_eig = f64::INFINITY;
        let mut max_eig = f64::NEG_INFINITY;
        for k in 0..=(n_trunc - n_max) {
            let mut prod = 1.0;
            for j in (k + 1)..=(k + n) {
                prod *= 1.0 - q.powi(j as i32);
            }
            min_eig = min_eig.min(prod);
            max_eig = max_eig.max(prod);
        }
        worst = worst.max(bm.value - min_eig).max(max_eig - bp.value);
        let mut a_pow = DMatrix::<f64>::identity(n_trunc + 1, n_trunc + 1);
        for _ in 0..n {
            a_pow = shift.annihilator() * a_pow;
        }
        let norm = a_pow
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        let norm_root = norm.powf(1.0 / n as f64);
        let lo = bm.value.powf(1.0 / (2.0 * n as f64));
        let hi = bp.value.powf(1.0 / (2.0 * n as f64));
        worst_norm = worst_norm.max(lo - norm_root).max(norm_root - hi);
        rows.push(PowerBoundRow {
            n,
            min_eig,
            max_eig,
            norm_root,
        });
    }
    Ok(PowerBoundReport {
        beta_minus: bm.value,
        beta_plus: bp.value,
        rows,
        worst_violation: worst,
        worst_norm_violation: worst_norm,
    })
}

/// `epsilon(s) = prod_{k>=1} (1-s^k)/(1+s^k) = sum_{k=-inf}^{inf} (-1)^k s^{k^2}`.
///
/// Both forms are evaluated to certified tails `<= tol` and must agree within
/// `10 tol`; the theta-series value is returned (its terms decay
/// super-geometrically, so it dominates in accuracy near `s -> 1`).
pub fn epsilon(s: f64, tol: f64) -> Result<ProductValue> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::ParamOutOfRange(format!(
            "0 <= s < 1 required, got {s}"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::ParamOutOfRange("tol > 0 required".into()));
    }
    if s == 0.0 {
        return Ok(ProductValue {
            value: 1.0,
            truncation_index: 0,
            error_bound: 0.0,
        });
    }

    // theta series: 1 + 2 sum_{k>=1} (-1)^k s^{k^2}
    let mut theta = 1.0;
    let mut k = 1u32;
    let theta_tail;
    loop {
        let term = s.powi((k * k) as i32);
        theta += 2.0 * if k % 2 == 1 { -term } else { term };
        // |tail| <= 2 s^{(k+1)^2} / (1 - s^{2k+3})
        let next = s.powi(((k + 1) * (k + 1)) as i32);
        let tail = 2.0 * next / (1.0 - s.powi((2 * k + 3) as i32));
        if tail <= tol * theta.abs().max(1e-300) || tail < f64::MIN_POSITIVE {
            theta_tail = k as usize;
            break;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::Numerical("theta series did not converge".into()));
        }
    }

    // product form with tail bound via 2 artanh(s^k) <= 2 s^k / (1 - s^{2k})
    let mut prod = 1.0;
    let mut j = 1u32;
    loop {
        let t = s.powi(j as i32);
        prod *= (1.0 - t) / (1.0 + t);
        let nxt = s.powi(j as i32 + 1);
        let tail = 2.0 * nxt / ((1.0 - s) * (1.0 - nxt * nxt));
        if tail <= tol {
            break;
        }
        j += 1;
        if j > 10_000_000 {
            return Err(Error::Numerical("epsilon product did not converge".into()));
        }
    }

    let agreement = (prod - theta).abs();
    if agreement > 10.0 * tol * theta.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "epsilon product/theta-series disagreement {agreement:e} beyond 10*tol"
        )));
    }
    Ok(ProductValue {
        value: theta,
        truncation_index: theta_tail,
        error_bound: tol,
    })
}

/// The unique root `q*` of `q^2 = epsilon(q)` on `(0, 1)`, by bisection on
/// the bracket `[0.3, 0.6]` to width `tol`.  `epsilon - q^2` is positive at
/// the left end and negative at the right end; the bracket is re-checked on
/// every step.
pub fn epsilon_threshold(tol: f64) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::ParamOutOfRange("tol > 0 required".into()));
    }
    let eval_tol = (tol * 1e-3).clamp(1e-16, 1e-14);
    let f = |x: f64| -> Result<f64> { Ok(epsilon(x, eval_tol)?.value - x * x) };
    let (mut lo, mut hi) = (0.3_f64, 0.6_f64);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo <= 0.0 || fhi >= 0.0 {
        return Err(Error::Numerical(
            "threshold bracket [0.3, 0.6] lost its sign change".into(),
        ));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Truncated coefficient sequence of the intertwiner series
/// `V_{alpha,beta}(z) = sum c_k z^k` with
/// `c_0 = 1`, `c_{k+1} = (alpha - q^k beta) / (1 - q^{k+1}) c_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<S: Scalar> {
    pub coeffs: Vec<S>,
    pub alpha: S,
    pub beta: S,
    ring: S::Ring,
}

impl<S: Scalar> PowerSeries<S> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn ring(&self) -> &S::Ring {
        &self.ring
    }

    /// Truncated Horner evaluation.
    pub fn eval(&self, z: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z).add(c);
        }
        acc
    }

    /// Coefficients of `V(qz)(1 - beta z) - (1 - alpha z)V(z)` through order
    /// `K`; all must vanish.
    pub fn functional_equation_residual(&self) -> Vec<S> {
        let q = S::q(&self.ring);
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut qk = S::one();
        for k in 0..self.coeffs.len() {
            // coefficient of z^k:  q^k c_k - beta q^{k-1} c_{k-1}
            //                     - c_k + alpha c_{k-1}
            let mut r = qk.mul(&self.coeffs[k]).sub(&self.coeffs[k]);
            if k > 0 {
                let qk1 = (0..k - 1).fold(S::one(), |acc, _| acc.mul(&q));
                r = r
                    .sub(&self.beta.mul(&qk1).mul(&self.coeffs[k - 1]))
                    .add(&self.alpha.mul(&self.coeffs[k - 1]));
            }
            out.push(r);
            qk = qk.mul(&q);
        }
        out
    }
}

/// Build `V_{alpha,beta}` to order `K`.  Requires `1 - q^{k+1} != 0` for
/// `k < K` (only violable at `|q| = 1`).  The full series has radius of
/// convergence `1/|alpha|`; evaluation beyond it is the caller's concern
/// except where noted ([`q_exponential`] enforces its radius).
pub fn v_series<S: Scalar>(
    alpha: S,
    beta: S,
    ring: S::Ring,
    order: usize,
) -> Result<PowerSeries<S>> {
    let q = S::q(&ring);
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(S::one());
    let mut qk = S::one();
    let mut qk1 = q.clone();
    for _k in 0..order {
        let denom = S::one().sub(&qk1);
        if denom.is_zero(&ring) {
            return Err(Error::DivisionByZero);
        }
        let next = alpha
            .sub(&qk.mul(&beta))
            .mul(&denom.inv()?)
            .mul(coeffs.last().unwrap());
        coeffs.push(next);
        qk = qk.mul(&q);
        qk1 = qk1.mul(&q);
    }
    Ok(PowerSeries {
        coeffs,
        alpha,
        beta,
        ring,
    })
}

/// Cauchy-convolve `V_{alpha,beta} * V_{beta,gamma}` and compare with
/// `V_{alpha,gamma}` through the order; returns the per-coefficient
/// differences.
pub fn v_chain_residual<S: Scalar>(
    alpha: S,
    beta: S,
    gamma: S,
    ring: S::Ring,
    order: usize,
) -> Result<Vec<S>> {
    let ab = v_series(alpha.clone(), beta.clone(), ring.clone(), order)?;
    let bg = v_series(beta, gamma.clone(), ring.clone(), order)?;
    let ag = v_series(alpha, gamma, ring, order)?;
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut conv = S::zero();
        for j in 0..=k {
            conv = conv.add(&ab.coeffs[j].mul(&bg.coeffs[k - j]));
        }
        out.push(conv.sub(&ag.coeffs[k]));
    }
    Ok(out)
}

/// Exact-mode chain check: `V_{alpha,beta} V_{beta,gamma} = V_{alpha,gamma}`
/// coefficient-wise through `order`, for constant Gaussian-rational
/// parameters.
///
/// Each coefficient is `c_k = n_k / prod_{j<=k}(1 - q^j)` with polynomial
/// numerator, so the convolution defect at order `k` is a polynomial of
/// degree at most `k(k-1)/2` over the same denominator.  The check therefore
/// expands every coefficient as a truncated integer power series in `q` to
/// `order(order-1)/2 + 1` terms (after clearing the parameter denominators,
/// which rescales `c_k` by a common `t^k` and preserves the identity) and
/// compares the convolution exactly.  This avoids rational-function gcd
/// arithmetic, whose cost explodes at these degrees.
pub fn v_chain_check_exact(
    alpha: crate::exact::QRat,
    beta: crate::exact::QRat,
    gamma: crate::exact::QRat,
    order: usize,
) -> Result<bool> {
    use num_bigint::BigInt;
    use num_complex::Complex;
    use num_traits::{One, Zero};

    type ZG = Complex<BigInt>;

    let constant = |r: &crate::exact::QRat| -> Result<crate::exact::GaussRat> {
        if !r.is_polynomial() || r.numerator().degree().unwrap_or(0) > 0 {
            return Err(Error::Unsupported(
                "chain parameters must be constants".into(),
            ));
        }
        Ok(r.numerator().coeff(0))
    };
    let (a, b, g) = (constant(&alpha)?, constant(&beta)?, constant(&gamma)?);

    // clear denominators: (alpha, beta, gamma) -> t (alpha, beta, gamma)
    let mut scale = BigInt::one();
    for part in [&a.re, &a.im, &b.re, &b.im, &g.re, &g.im] {
        let den = part.denom();
        scale = num_integer::lcm(scale, den.clone());
    }
    let to_int = |x: &crate::exact::GaussRat| -> ZG {
        let re = (x.re.numer() * &scale) / x.re.denom();
        let im = (x.im.numer() * &scale) / x.im.denom();
        Complex::new(re, im)
    };
    let (a, b, g) = (to_int(&a), to_int(&b), to_int(&g));

    let precision = order * order.saturating_sub(1) / 2 + 1;
    let zero = || vec![ZG::zero(); precision];

    // coefficients of V as truncated q-series; the recursion multiplies by
    // (alpha - q^j beta) and divides by (1 - q^{j+1}), both of which keep
    // Gaussian-integer coefficients
    let build = |alpha: &ZG, beta: &ZG| -> Vec<Vec<ZG>> {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut cur = zero();
        cur[0] = ZG::one();
        coeffs.push(cur.clone());
        for j in 0..order {
            let mut next = zero();
            for t in 0..precision {
                let mut v = alpha * &cur[t];
                if t >= j {
                    v -= beta * &cur[t - j];
                }
                next[t] = v;
            }
            // divide by (1 - q^{j+1}): multiply by the geometric series
            for t in (j + 1)..precision {
                let add = next[t - j - 1].clone();
                next[t] += add;
            }
            coeffs.push(next.clone());
            cur = next;
        }
        coeffs
    };

    let u = build(&a, &b);
    let v = build(&b, &g);
    let w = build(&a, &g);

    for k in 0..=order {
        let mut acc = zero();
        for j in 0..=k {
            let (x, y) = (&u[j], &v[k - j]);
            for s in 0..precision {
                if x[s].is_zero() {
                    continue;
                }
                for t in 0..precision - s {
                    if !y[t].is_zero() {
                        acc[s + t] += &x[s] * &y[t];
                    }
                }
            }
        }
        if acc != w[k] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Float-mode chain check within `tol` per coefficient, relative to the
/// magnitude of the convolution summands (near `|q| -> 1` the coefficients
/// grow like `1/(q;q)_k`, so an absolute comparison would only measure
/// rounding noise).
pub fn v_chain_check_float(
    alpha: f64,
    beta: f64,
    gamma: f64,
    q: f64,
    order: usize,
    tol: f64,
) -> Result<bool> {
    let ring = FloatRing::new(q);
    let ab = v_series(
        Complex64::new(alpha, 0.0),
        Complex64::new(beta, 0.0),
        ring,
        order,
    )?;
    let bg = v_series(
        Complex64::new(beta, 0.0),
        Complex64::new(gamma, 0.0),
        ring,
        order,
    )?;
    let ag = v_series(
        Complex64::new(alpha, 0.0),
        Complex64::new(gamma, 0.0),
        ring,
        order,
    )?;
    for k in 0..=order {
        let mut conv = Complex64::new(0.0, 0.0);
        let mut scale = 1.0_f64;
        for j in 0..=k {
            conv += ab.coeffs[j] * bg.coeffs[k - j];
            scale = scale.max(ab.coeffs[j].norm() * bg.coeffs[k - j].norm());
        }
        if (conv - ag.coeffs[k]).norm() > tol * scale.max(ag.coeffs[k].norm()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The q-exponential `Exp_q`, the solution of the q-difference equation
/// `(Exp_q(z) - Exp_q(qz)) / (z - qz) = Exp_q(z)`, evaluated through the
/// `V_{1,0}` connection: `Exp_q(z) = V_{1,0}((1-q) z)` term by term.
///
/// The series radius is `1/(1-q)`; `z` at or beyond it is rejected.  The
/// q-difference identity is re-checked at the evaluation point and its
/// residual returned alongside the value.
pub fn q_exponential(z: Complex64, q: f64, order: usize) -> Result<(Complex64, f64)> {
    check_open_q(q)?;
    if (z.norm() * (1.0 - q)).abs() >= 1.0 {
        return Err(Error::ParamOutOfRange(format!(
            "|z| = {} at/beyond the series radius {}",
            z.norm(),
            1.0 / (1.0 - q)
        )));
    }
    let ring = FloatRing::new(q);
    let series = v_series(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        ring,
        order,
    )?;
    let at = |w: Complex64| series.eval(&(w * (1.0 - q)));
    let value = at(z);
    let residual = if z.norm() == 0.0 {
        0.0
    } else {
        let dq = (value - at(z * q)) / (z - z * q);
        (dq - value).norm()
    };
    Ok((value, residual))
}

/// Radon–Nikodym transport operator connecting two non-peripheral coherent
/// states: `v = c V_{1,0}(a†(phi)) V_{0,1}(a†(psi))` with the scalar `c`
/// fixed so transported expectations are state values
/// (`omega_phi(X) = <v Omega_psi', X v Omega_psi'>` for the normalized
/// truncated coherent vector `Omega_psi'`).
///
/// `V_{0,1}` is the exact series inverse of `V_{1,0}` (their chain product is
/// `V_{0,0} = 1`), and `a†(psi)` is nilpotent on the truncated space, so the
/// inverse needs no matrix solve.
#[derive(Clone, Debug)]
pub struct RadonNikodym {
    pub phi: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    /// Normalization `|Omega_psi| / |Omega_phi|` of the truncated vectors.
    pub scale: f64,
}

/// Build the transport data on a truncated Fock space.  Both vectors must
/// lie strictly inside the unit ball (the series diverge for peripheral
/// states, which admit no such intertwiner) and the truncation must satisfy
/// `|phi|^N, |psi|^N < tol`.
pub fn radon_nikodym(
    space: &FockSpace,
    phi: &[Complex64],
    psi: &[Complex64],
    tol: f64,
) -> Result<RadonNikodym> {
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let (np, ns) = (norm(phi), norm(psi));
    if np >= 1.0 || ns >= 1.0 {
        return Err(Error::ParamOutOfRange(format!(
            "radon_nikodym requires |phi|, |psi| < 1 (got {np}, {ns}): \
             peripheral states admit no invertible intertwiner"
        )));
    }
    let n = space.n_max() as i32;
    if np.powi(n) >= tol || ns.powi(n) >= tol {
        return Err(Error::ParamOutOfRange(format!(
            "truncation N = {n} too small for tolerance {tol}"
        )));
    }
    let omega_phi = space.coherent_vector_unnormalized(phi)?;
    let omega_psi = space.coherent_vector_unnormalized(psi)?;
    let scale = space.norm(&omega_psi)? / space.norm(&omega_phi)?;
    Ok(RadonNikodym {
        phi: phi.to_vec(),
        psi: psi.to_vec(),
        scale,
    })
}

impl RadonNikodym {
    /// Apply `v` to a vector in word coordinates.
    pub fn apply(&self, space: &FockSpace, x: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let y = space.apply_v_series(0.0, 1.0, &self.psi, x)?;
        let mut z = space.apply_v_series(1.0, 0.0, &self.phi, &y)?;
        z *= Complex64::new(self.scale, 0.0);
        Ok(z)
    }

    /// Dense matrix of `v` (small truncations only).
    pub fn to_dense(&self, space: &FockSpace) -> Result<DMatrix<Complex64>> {
        let m = space.dim();
        let mut out = DMatrix::<Complex64>::zeros(m, m);
        for j in 0..m {
            let mut e = DVector::<Complex64>::zeros(m);
            e[j] = Complex64::new(1.0, 0.0);
            out.set_column(j, &self.apply(space, &e)?);
        }
        Ok(out)
    }

    /// Transported expectation `omega_psi(v* X v)` evaluated on the truncated
    /// space against the normalized coherent vector of `psi`.
    pub fn transported_expectation(
        &self,
        space: &FockSpace,
        x: &crate::wick::WickPolynomial<Complex64>,
    ) -> Result<Complex64> {
        let omega_psi = space.coherent_vector_unnormalized(&self.psi)?;
        let w = self.apply(space, &omega_psi)?;
        let xw = space.apply_polynomial(x, &w)?;
        let denom = space.inner(&omega_psi, &omega_psi)?.re;
        Ok(space.inner(&w, &xw)? / denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::QRat;
    use crate::scalar::ExactRing;

    #[test]
    fn shift_weights_match_formula() {
        // q = 0: unilateral shift, all weights 1
        let s = shift_matrix(0.0, 4).unwrap();
        for n in 1..=4 {
            assert_eq!(s.creator()[(n, n - 1)], 1.0);
        }
        // q = 0.5, N = 3: weights sqrt(0.5), sqrt(0.75), sqrt(0.875)
        let s = shift_matrix(0.5, 3).unwrap();
        let expected = [0.5_f64.sqrt(), 0.75_f64.sqrt(), 0.875_f64.sqrt()];
        for (n, w) in expected.iter().enumerate() {
            assert!((s.creator()[(n + 1, n)] - w).abs() < 1e-15);
        }
        assert!(shift_matrix(1.0, 3).is_err());
        assert!(shift_matrix(0.5, 0).is_err());
    }

    #[test]
    fn shift_relation_residual_below_boundary() {
        for q in [0.5, -0.5] {
            let s = shift_matrix(q, 40).unwrap();
            let a = s.annihilator();
            let adag = s.creator();
            let dim = 41;
            let r = a * &adag - DMatrix::<f64>::identity(dim, dim) * (1.0 - q) - (&adag * a) * q;
            // exact on degrees < N
            let sub = r.view((0, 0), (dim, dim - 1));
            let worst = sub.iter().cloned().map(f64::abs).fold(0.0, f64::max);
            assert!(worst < 1e-14, "q = {q}: residual {worst}");
        }
    }

    #[test]
    fn norm_branches() {
        let (numeric, closed) = shift_norm(-0.5, 10).unwrap();
        assert!((closed - 1.5_f64.sqrt()).abs() < 1e-15);
        assert!((numeric - closed).abs() < 1e-12);
        let (numeric, closed) = shift_norm(0.0, 5).unwrap();
        assert_eq!(closed, 1.0);
        assert!((numeric - 1.0).abs() < 1e-14);
        let (numeric, _) = shift_norm(0.5, 60).unwrap();
        assert!((numeric - (1.0 - 0.5_f64.powi(60)).sqrt()).abs() < 1e-12);
        assert!((numeric - 1.0).abs() < 1e-8);
        // numeric never exceeds the closed form (limit branch documented)
        for (q, n) in [(0.3, 20), (0.9, 50), (-0.7, 15)] {
            let (numeric, closed) = shift_norm(q, n).unwrap();
            assert!(numeric <= closed + 1e-12, "q = {q}");
        }
    }

    #[test]
    fn beta_values() {
        // q >= 0: beta+ = 1 exactly; q = 0: beta- = 1 (empty product)
        let (bm, bp) = beta_bounds(0.0, 1e-14).unwrap();
        assert_eq!(bp.value, 1.0);
        assert_eq!(bm.value, 1.0);
        let (bm, bp) = beta_bounds(0.5, 1e-14).unwrap();
        assert_eq!(bp.value, 1.0);
        // Euler function at 1/2 (partial-product oracle)
        let mut oracle = 1.0;
        for k in 1..60 {
            oracle *= 1.0 - 0.5_f64.powi(k);
        }
        assert!((bm.value - oracle).abs() < 1e-13);
        assert!((bm.value - 0.288788095086602).abs() < 1e-12);
        // q < 0: the supremum includes the k = 1 factor (1 - q)
        let (_, bp) = beta_bounds(-0.5, 1e-14).unwrap();
        let mut odd = 1.0;
        for k in 1..60 {
            if k % 2 == 1 {
                odd *= 1.0 - (-0.5_f64).powi(k);
            }
        }
        assert!((bp.value - odd).abs() < 1e-13);
        assert!(bp.value > 1.5, "beta+ must dominate the n=1 eigenvalue 1-q");
    }

    #[test]
    fn power_bounds_hold() {
        // q = 0: a^n (a†)^n = I on the retained block
        let r = verify_power_bounds(0.0, 10, 3, 1e-12).unwrap();
        assert!(r.worst_violation <= 1e-12);
        for row in &r.rows {
            assert!((row.min_eig - 1.0).abs() < 1e-15);
        }
        // q = 0.5: eigenvalues of a (a†) on low degrees are 1-q^{k+1}
        let r = verify_power_bounds(0.5, 12, 1, 1e-12).unwrap();
        assert!((r.rows[0].max_eig - (1.0 - 0.5_f64.powi(12))).abs() < 1e-12);
        assert!((r.rows[0].min_eig - 0.5).abs() < 1e-15);
        // q = -0.9, n = 5
        let r = verify_power_bounds(-0.9, 30, 5, 1e-12).unwrap();
        assert!(
            r.worst_violation <= 1e-10,
            "violation {}",
            r.worst_violation
        );
        assert!(r.worst_norm_violation <= 1e-10);
        assert!(verify_power_bounds(0.5, 3, 3, 1e-12).is_err());
    }

    #[test]
    fn no_shift_adjoint_eigenvectors() {
        // a† xi = lambda xi forces xi = 0: for lambda != 0 the leading
        // principal N x N block of (a† - lambda) is triangular with
        // determinant (-lambda)^N; for lambda = 0 rows 1..N give a diagonal
        // weight system.  Either way the truncated kernel is trivial.
        let s = shift_matrix(0.6, 12).unwrap();
        let adag = s.creator();
        for lambda in [1.0, -1.0, 0.5, 0.9] {
            let dim = 12;
            let block = DMatrix::from_fn(dim, dim, |i, j| {
                adag[(i, j)] - if i == j { lambda } else { 0.0 }
            });
            let min_sv = block
                .singular_values()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_sv > 1e-6, "lambda = {lambda}: kernel appeared");
        }
        // lambda = 0: rows 1..=N, cols 0..N of a† form diag(weights)
        for n in 1..=12 {
            assert!(s.weight(n) > 0.0);
        }
    }

    #[test]
    fn epsilon_forms_agree() {
        for s in [0.1, 0.5, 0.9] {
            let e = epsilon(s, 1e-14).unwrap();
            assert!(e.value > 0.0);
        }
        assert_eq!(epsilon(0.0, 1e-14).unwrap().value, 1.0);
        assert!(epsilon(1.0, 1e-14).is_err());
        assert!(epsilon(-0.1, 1e-14).is_err());
        // reference value at 1/2 (independent partial products)
        let mut prod = 1.0;
        for k in 1..200 {
            let t = 0.5_f64.powi(k);
            prod *= (1.0 - t) / (1.0 + t);
        }
        let e = epsilon(0.5, 1e-14).unwrap();
        assert!((e.value - prod).abs() < 1e-13);
        // monotone decreasing on a grid
        let mut prev = f64::INFINITY;
        for i in 0..=19 {
            let s = 0.05 * i as f64;
            let e = epsilon(s, 1e-13).unwrap().value;
            assert!(e < prev, "epsilon not decreasing at s = {s}");
            prev = e;
        }
    }

    #[test]
    fn threshold_near_044() {
        let t = epsilon_threshold(1e-10).unwrap();
        assert!((0.43..=0.45).contains(&t), "threshold {t}");
        // inside the region: q = 0.3 has q^2 < epsilon(q)
        let e = epsilon(0.3, 1e-13).unwrap().value;
        assert!(0.09 < e);
    }

    #[test]
    fn v_series_closed_forms() {
        // alpha = 1, beta = 0: c_k = 1 / prod_{j<=k}(1-q^j)
        let s = v_series(QRat::one(), QRat::zero(), ExactRing, 6).unwrap();
        let mut denom = QRat::one();
        for (k, c) in s.coeffs.iter().enumerate() {
            if k > 0 {
                denom = denom.mul(&QRat::one().sub(&QRat::q().pow(k as u32)));
            }
            assert_eq!(c, &denom.inv().unwrap(), "k = {k}");
        }
        // alpha = beta: the k = 0 step kills c_1, so V is the constant 1
        // (consistent with the chain relation: V_ab V_ba = V_aa = 1)
        let s = v_series(QRat::from_ratio(2, 3), QRat::from_ratio(2, 3), ExactRing, 5).unwrap();
        assert_eq!(s.coeffs[0], QRat::one());
        for c in &s.coeffs[1..] {
            assert!(c.is_zero());
        }
        // functional equation residual vanishes identically
        let s = v_series(
            QRat::from_ratio(1, 2),
            QRat::from_ratio(-1, 3),
            ExactRing,
            10,
        )
        .unwrap();
        for r in s.functional_equation_residual() {
            assert!(r.is_zero());
        }
    }

    #[test]
    fn v_series_q_zero_closed_form() {
        // q = 0: V(z) = (1 - beta z)/(1 - alpha z), i.e.
        // c_0 = 1, c_k = (alpha - beta) alpha^{k-1}
        let ring = FloatRing::new(0.0);
        let (alpha, beta) = (0.7, -0.4);
        let s = v_series(
            Complex64::new(alpha, 0.0),
            Complex64::new(beta, 0.0),
            ring,
            8,
        )
        .unwrap();
        for (k, c) in s.coeffs.iter().enumerate() {
            let want = if k == 0 {
                1.0
            } else {
                (alpha - beta) * alpha.powi(k as i32 - 1)
            };
            assert!((c.re - want).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn v_chain_exact_matches_naive_convolution() {
        // the series-expansion fast path agrees with the direct QRat
        // convolution where the latter is cheap
        for (a, b, g) in [
            (
                QRat::from_ratio(1, 2),
                QRat::from_ratio(-2, 3),
                QRat::from_ratio(1, 5),
            ),
            (QRat::from_int(1), QRat::from_int(0), QRat::from_ratio(3, 4)),
        ] {
            let naive = v_chain_residual(a.clone(), b.clone(), g.clone(), ExactRing, 6)
                .unwrap()
                .iter()
                .all(|c| c.is_zero());
            let fast = v_chain_check_exact(a, b, g, 6).unwrap();
            assert_eq!(naive, fast);
            assert!(fast);
        }
        // a deliberately broken "chain" (wrong middle parameter) is caught
        let broken = {
            use crate::scalar::ExactRing;
            let ab =
                v_series(QRat::from_ratio(1, 2), QRat::from_ratio(1, 3), ExactRing, 6).unwrap();
            let bg =
                v_series(QRat::from_ratio(1, 4), QRat::from_ratio(1, 5), ExactRing, 6).unwrap();
            let ag =
                v_series(QRat::from_ratio(1, 2), QRat::from_ratio(1, 5), ExactRing, 6).unwrap();
            let mut identical = true;
            for k in 0..=6 {
                let mut conv = QRat::zero();
                for j in 0..=k {
                    conv = conv.add(&ab.coeffs[j].mul(&bg.coeffs[k - j]));
                }
                identical &= conv == ag.coeffs[k];
            }
            identical
        };
        assert!(!broken);
    }

    #[test]
    fn v_chain_exact_and_float() {
        assert!(v_chain_check_exact(
            QRat::from_ratio(1, 2),
            QRat::from_ratio(-2, 3),
            QRat::from_ratio(1, 5),
            20
        )
        .unwrap());
        // degenerate chain with gamma = beta
        assert!(v_chain_check_exact(
            QRat::from_ratio(1, 2),
            QRat::from_ratio(1, 3),
            QRat::from_ratio(1, 3),
            15
        )
        .unwrap());
        // alpha = beta = gamma = 0: all series are 1
        let s = v_series(QRat::zero(), QRat::zero(), ExactRing, 5).unwrap();
        assert_eq!(s.coeffs[0], QRat::one());
        assert!(s.coeffs[1..].iter().all(|c| c.is_zero()));
        // float property sweep
        let mut state = 0x12345u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2001) as f64 / 1000.0 - 1.0
        };
        for q in [0.7, -0.7] {
            for _ in 0..10 {
                let (a, b, g) = (next(), next(), next());
                assert!(
                    v_chain_check_float(a, b, g, q, 30, 1e-12).unwrap(),
                    "chain failed at q = {q}, ({a}, {b}, {g})"
                );
            }
        }
    }

    #[test]
    fn radon_nikodym_identity_and_vacuum_cases() {
        use crate::fock::{FockBudget, FockSpace};
        let budget = FockBudget::default();
        let space = FockSpace::new(2, 0.5, 8, &budget).unwrap();
        let phi = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.25)];
        // phi = psi: v is the identity up to float noise
        let v = radon_nikodym(&space, &phi, &phi, 1e-2).unwrap();
        let dense = v.to_dense(&space).unwrap();
        let eye = nalgebra::DMatrix::<Complex64>::identity(space.dim(), space.dim());
        let dev = (&dense - &eye).map(|z| z.norm()).max();
        assert!(dev < 1e-12, "v != I at phi = psi: {dev}");
        // psi = 0: v maps the vacuum to the coherent vector (up to scale)
        let zero = [Complex64::new(0.0, 0.0); 2];
        let v = radon_nikodym(&space, &phi, &zero, 1e-2).unwrap();
        let image = v.apply(&space, &space.vacuum()).unwrap();
        let coherent = space.coherent_vector_unnormalized(&phi).unwrap();
        // proportionality: image x coherent component ratios agree
        let ratio = image[0] / coherent[0];
        let dev = (0..space.dim())
            .map(|k| (image[k] - coherent[k] * ratio).norm())
            .fold(0.0_f64, f64::max);
        assert!(
            dev < 1e-12,
            "v Omega_0 not proportional to Omega_phi: {dev}"
        );
        // peripheral vectors rejected
        let unit = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        assert!(radon_nikodym(&space, &unit, &zero, 1e-2).is_err());
        // truncation too small for the tolerance rejected
        assert!(radon_nikodym(&space, &phi, &zero, 1e-30).is_err());
    }

    #[test]
    fn q_exponential_identity() {
        let (v, r) = q_exponential(Complex64::new(0.0, 0.0), 0.5, 30).unwrap();
        assert_eq!(v.re, 1.0);
        assert_eq!(r, 0.0);
        let (_, r) = q_exponential(Complex64::new(0.3, 0.0), 0.5, 60).unwrap();
        assert!(r < 1e-10, "D_q residual {r}");
        // q -> 0 degenerates consistently with V at q = 0:
        // Exp_0(z) = V_{1,0}(z) = 1/(1-z)
        let (v, _) = q_exponential(Complex64::new(0.25, 0.0), 0.0, 60).unwrap();
        assert!((v.re - 1.0 / 0.75).abs() < 1e-12);
        assert!(q_exponential(Complex64::new(2.0, 0.0), 0.5, 10).is_err());
    }
}

//! The boundary points `q = ±1`.
//!
//! At `q = +1` the relations commute and the algebra is abelian: a
//! polynomial evaluates at a point `phi` of the unit ball by substituting
//! `a†(e_i) -> <phi,e_i>`, `a(e_i) -> <e_i,phi>`, order-independently.
//!
//! At `q = -1` the relations read `a(f)a†(g) + a†(g)a(f) = 2<f,g> I`, and
//! every irreducible representation fixes a complex symmetric bilinear form
//! `theta(f,g) = (a†(f)a†(g) + a†(g)a†(f))/2`.  Writing
//! `s(f) = (a†(f) + a(f))/2` yields hermitian generators with
//! `s(f)s(g) + s(g)s(f) = 2 Theta(f,g) I`, where
//! `Theta(f,g) = Re{<f,g> + theta(f,g)}/2` is a real quadratic form on the
//! realification of the mode space.  Diagonalizing `Theta`, dropping its
//! null directions and rescaling produces anticommuting hermitian
//! involutions `s_1 .. s_r` (`r = rank Theta`), realized here by the
//! standard tensor ladder of Pauli words on `2^{ceil(r/2)}` dimensions.
//! The original generators return via `a†(f) = s(f) - i s(if)`.
//!
//! For odd `r` the ladder representation splits into two irreducibles of
//! dimension `2^{(r-1)/2}`, labeled by the central element
//! `s_hat = s_1 .. s_r` (eigenvalues ±1 or ±i according to `r mod 4`) and
//! exchanged by the parity map `a†(f) -> -a†(f)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::wick::{ModeVector, OpKind, WickPolynomial};

type C64 = Complex64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Cutoff below which a `Theta` eigenvalue counts as a null direction.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Most negative `Theta` eigenvalue still treated as admissible (borderline
/// float noise at the PSD boundary, where peripheral states live).
pub const ADMISSIBLE_TOL: f64 = 1e-12;

/// Evaluate a polynomial at `q = 1` as a function on the unit ball: every
/// `a†(e_i)` becomes `<phi,e_i>` and `a(e_i)` becomes `<e_i,phi>`,
/// order-independently (the algebra is abelian).  The polynomial must carry
/// the float ring at `q = 1`.
pub fn q1_coherent_eval(p: &WickPolynomial<C64>, phi: &ModeVector<C64>) -> Result<C64> {
    if p.ring().q != 1.0 {
        return Err(Error::RingMismatch(format!(
            "q = 1 evaluation on a polynomial with ring q = {}",
            p.ring().q
        )));
    }
    if phi.d() != p.d() {
        return Err(Error::DimensionMismatch("phi vs polynomial d".into()));
    }
    let norm = phi.norm();
    if norm > 1.0 + 1e-12 {
        return Err(Error::ParamOutOfRange(format!(
            "|phi| = {norm} lies outside the unit ball, the spectrum at q = 1"
        )));
    }
    let mut acc = c(0.0);
    for (w, coeff) in p.terms() {
        let mut factor = c(1.0);
        for g in w.0.iter() {
            let comp = phi.component(g.mode);
            factor *= match g.kind {
                OpKind::Creator => comp.conj(),
                OpKind::Annihilator => *comp,
            };
        }
        acc += coeff * factor;
    }
    Ok(acc)
}

/// A complex symmetric bilinear form on the mode space, stored on the basis
/// (`theta[i][j] = theta(e_i, e_j)`) and extended by bilinearity.
#[derive(Clone, Debug)]
pub struct BilinearForm {
    d: usize,
    theta: DMatrix<C64>,
}

impl BilinearForm {
    pub fn new(theta: DMatrix<C64>) -> Result<BilinearForm> {
        if theta.nrows() != theta.ncols() {
            return Err(Error::DimensionMismatch("theta must be square".into()));
        }
        let d = theta.nrows();
        for i in 0..d {
            for j in 0..i {
                if (theta[(i, j)] - theta[(j, i)]).norm() > 1e-12 {
                    return Err(Error::Inadmissible(format!(
                        "theta is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(BilinearForm { d, theta })
    }

    pub fn zero(d: usize) -> BilinearForm {
        BilinearForm {
            d,
            theta: DMatrix::zeros(d, d),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.theta
    }

    /// `theta(f, g)` by bilinear extension.
    pub fn eval(&self, f: &[C64], g: &[C64]) -> C64 {
        let mut acc = c(0.0);
        for (i, fi) in f.iter().enumerate().take(self.d) {
            for (j, gj) in g.iter().enumerate().take(self.d) {
                acc += fi * gj * self.theta[(i, j)];
            }
        }
        acc
    }
}

/// The rank-one form of a coherent representation:
/// `theta(f,g) = <phi,f><phi,g>`.
pub fn coherent_theta(phi: &[C64]) -> BilinearForm {
    let d = phi.len();
    let theta = DMatrix::from_fn(d, d, |i, j| phi[i].conj() * phi[j].conj());
    BilinearForm { d, theta }
}

/// The real quadratic form `Theta` on the realification basis
/// `(e_1 .. e_d, i e_1 .. i e_d)`, with its spectral data.
#[derive(Clone, Debug)]
pub struct RealForm {
    d: usize,
    matrix: DMatrix<f64>,
    /// Eigenvalues sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the corresponding orthonormal eigenvectors.
    pub eigenvectors: DMatrix<f64>,
    pub rank: usize,
    pub admissible: bool,
    /// Minimum eigenvalue lay in `(-ADMISSIBLE_TOL, 0)`: treated as
    /// admissible, flagged.
    pub borderline: bool,
}

/// Assemble `Theta(f,g) = Re{<f,g> + theta(f,g)}/2` on the `2d`-dimensional
/// real basis and diagonalize it.  Admissibility (`|theta(f,g)| <= |f||g|`)
/// is equivalent to `Theta >= 0`.
pub fn theta_to_real_form(theta: &BilinearForm) -> RealForm {
    let d = theta.d;
    let mut m = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for j in 0..d {
        for k in 0..d {
            let t = theta.theta[(j, k)];
            let delta = if j == k { 1.0 } else { 0.0 };
            m[(j, k)] = 0.5 * (delta + t.re);
            m[(j, d + k)] = -0.5 * t.im;
            m[(d + j, k)] = -0.5 * t.im;
            m[(d + j, d + k)] = 0.5 * (delta - t.re);
        }
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..2 * d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        // fix the sign so the construction is deterministic
        let lead = v
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        if let Some(l) = lead {
            if l < 0.0 {
                v = -v;
            }
        }
        eigenvectors.set_column(col, &v);
    }
    let min_eig = eigenvalues.last().cloned().unwrap_or(0.0);
    let admissible = min_eig >= -ADMISSIBLE_TOL;
    let borderline = admissible && min_eig < 0.0;
    let rank = eigenvalues.iter().filter(|&&l| l > RANK_CUTOFF).count();
    RealForm {
        d,
        matrix: m,
        eigenvalues,
        eigenvectors,
        rank,
        admissible,
        borderline,
    }
}

impl RealForm {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Complex directions `g` with `s(g) = 0`, i.e. the kernel of `Theta`
    /// pulled back to the mode space.  Multiplying such a `g` by `-i` gives
    /// a vector of the degenerate set `N(theta) = {f : theta(f,f) = |f|^2}`.
    pub fn null_directions(&self) -> Vec<Vec<C64>> {
        (self.rank..2 * self.d)
            .filter(|&k| self.eigenvalues[k].abs() <= RANK_CUTOFF)
            .map(|k| {
                let v = self.eigenvectors.column(k);
                (0..self.d).map(|j| C64::new(v[j], v[self.d + j])).collect()
            })
            .collect()
    }

    /// Basis of `N(theta)` (real span), as complex mode vectors.
    pub fn n_theta_basis(&self) -> Vec<Vec<C64>> {
        self.null_directions()
            .into_iter()
            .map(|g| g.into_iter().map(|z| z * C64::new(0.0, -1.0)).collect())
            .collect()
    }
}

/// A concrete representation of the `q = -1` relations with a fixed central
/// form `theta`.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    /// Number of anticommuting hermitian generators.
    pub r: usize,
    /// Representation dimension.
    pub dim: usize,
    /// The generators `s_1 .. s_r` (hermitian, unitary, entries in
    /// {0, ±1, ±i}).
    pub s_matrices: Vec<DMatrix<C64>>,
    d: usize,
    /// Kept `Theta` eigenvalues (descending).
    scales: Vec<f64>,
    /// Kept `Theta` eigenvectors (columns, realification coordinates).
    frame: DMatrix<f64>,
    /// Central eigenvalue label when this is one of the odd-`r`
    /// irreducibles.
    pub central_label: Option<C64>,
}

/// Output of [`clifford_rep`]: the ladder representation on
/// `2^{ceil(r/2)}` dimensions, plus, for odd `r`, the two irreducible
/// summands of dimension `2^{(r-1)/2}` labeled by the central element.
#[derive(Clone, Debug)]
pub struct CliffordFamily {
    pub rep: CliffordRep,
    pub odd_pair: Option<(CliffordRep, CliffordRep)>,
}

fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    )
}

fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// The standard anticommuting hermitian family on `qubits` tensor factors:
/// generator `2k-1` is `Z^{k-1} X I..`, generator `2k` is `Z^{k-1} Y I..`.
fn ladder_generators(count: usize, qubits: usize) -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(count);
    for g in 1..=count {
        let k = g.div_ceil(2);
        let mid = if g % 2 == 1 { pauli_x() } else { pauli_y() };
        let mut m = DMatrix::<C64>::identity(1, 1);
        for pos in 1..=qubits {
            let factor = if pos < k {
                pauli_z()
            } else if pos == k {
                mid.clone()
            } else {
                DMatrix::<C64>::identity(2, 2)
            };
            m = kron(&m, &factor);
        }
        out.push(m);
    }
    out
}

/// Build the Clifford realization of an admissible form.
pub fn clifford_rep(theta: &BilinearForm) -> Result<CliffordFamily> {
    let rf = theta_to_real_form(theta);
    if !rf.admissible {
        return Err(Error::Inadmissible(format!(
            "Theta has negative eigenvalue {:e}: |theta(f,g)| <= |f||g| fails",
            rf.min_eigenvalue()
        )));
    }
    let r = rf.rank;
    let qubits = r.div_ceil(2);
    let dim = 1usize << qubits;
    let s_matrices = ladder_generators(r, qubits);
    let scales: Vec<f64> = rf.eigenvalues[..r].to_vec();
    let frame = rf.eigenvectors.columns(0, r).into_owned();
    let rep = CliffordRep {
        r,
        dim,
        s_matrices,
        d: theta.d,
        scales: scales.clone(),
        frame: frame.clone(),
        central_label: None,
    };

    let odd_pair = if r % 2 == 1 {
        let small_qubits = (r - 1) / 2;
        let small_dim = 1usize << small_qubits;
        let base = ladder_generators(r - 1, small_qubits);
        // the odd generator is ±i^{m} s_1 .. s_{r-1}; the sign choices give
        // the two irreducibles
        let mut product = DMatrix::<C64>::identity(small_dim, small_dim);
        for g in &base {
            product = &product * g;
        }
        let phase = C64::new(0.0, 1.0).powu(small_qubits as u32);
        let make = |sign: f64| -> CliffordRep {
            let mut s = base.clone();
            s.push(&product * (phase * c(sign)));
            let mut central = DMatrix::<C64>::identity(small_dim, small_dim);
            for g in &s {
                central = &central * g;
            }
            let label = central[(0, 0)];
            CliffordRep {
                r,
                dim: small_dim,
                s_matrices: s,
                d: theta.d,
                scales: scales.clone(),
                frame: frame.clone(),
                central_label: Some(label),
            }
        };
        Some((make(1.0), make(-1.0)))
    } else {
        None
    };

    Ok(CliffordFamily { rep, odd_pair })
}

impl CliffordRep {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Realification coordinates of a complex mode vector:
    /// `(Re f, Im f)`.
    fn realify(f: &[C64]) -> DVector<f64> {
        let d = f.len();
        DVector::from_fn(2 * d, |k, _| if k < d { f[k].re } else { f[k - d].im })
    }

    /// The hermitian field `s(f) = sum_i <u_i, x> sqrt(Theta_i) s_i` with
    /// `x` the realification of `f`.
    pub fn s_of(&self, f: &[C64]) -> Result<DMatrix<C64>> {
        if f.len() != self.d {
            return Err(Error::DimensionMismatch("vector vs d".into()));
        }
        let x = Self::realify(f);
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for (i, s) in self.s_matrices.iter().enumerate() {
            let coord: f64 = self.frame.column(i).dot(&x);
            out += s * c(coord * self.scales[i].sqrt());
        }
        Ok(out)
    }

    /// Reconstruct `a†(f) = s(f) - i s(if)`.
    pub fn a_dag_of(&self, f: &[C64]) -> Result<DMatrix<C64>> {
        let if_vec: Vec<C64> = f.iter().map(|z| z * C64::new(0.0, 1.0)).collect();
        let s_f = self.s_of(f)?;
        let s_if = self.s_of(&if_vec)?;
        Ok(s_f - s_if * C64::new(0.0, 1.0))
    }

    pub fn a_of(&self, f: &[C64]) -> Result<DMatrix<C64>> {
        Ok(self.a_dag_of(f)?.adjoint())
    }

    /// Max residual of the anticommutator relations
    /// `s_i s_j + s_j s_i = 2 delta_ij I` (exact for the ladder matrices).
    pub fn anticommutator_residual(&self) -> f64 {
        let eye = DMatrix::<C64>::identity(self.dim, self.dim);
        let mut worst = 0.0_f64;
        for i in 0..self.r {
            for j in 0..self.r {
                let mut ac = &self.s_matrices[i] * &self.s_matrices[j]
                    + &self.s_matrices[j] * &self.s_matrices[i];
                if i == j {
                    ac -= &eye * c(2.0);
                }
                worst = worst.max(ac.map(|z| z.norm()).max());
            }
        }
        worst
    }
}

/// The central element of an odd-`r` representation.
#[derive(Clone, Debug)]
pub struct CentralElement {
    pub matrix: DMatrix<C64>,
    /// `+1` when `s_hat^2 = +I` (r = 1 mod 4), `-1` when `s_hat^2 = -I`
    /// (r = 3 mod 4).
    pub square_sign: i8,
    /// The eigenvalue labels occurring in this representation (±1 or ±i).
    pub labels: Vec<C64>,
}

/// `s_hat = s_1 .. s_r` for odd `r`: unitary, central, squares to ±I with
/// the sign set by `r mod 4`.  Refused for even `r` (the product is not
/// central there).
pub fn central_element(rep: &CliffordRep) -> Result<CentralElement> {
    if rep.r.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "the generator product is central only for odd r (got r = {})",
            rep.r
        )));
    }
    let n = rep.dim;
    let mut m = DMatrix::<C64>::identity(n, n);
    for s in &rep.s_matrices {
        m = &m * s;
    }
    let eye = DMatrix::<C64>::identity(n, n);
    // unitarity
    let u_res = (&m * m.adjoint() - &eye).map(|z| z.norm()).max();
    if u_res > 1e-12 {
        return Err(Error::Numerical(format!(
            "central element not unitary: {u_res:e}"
        )));
    }
    // squares to +I or -I
    let sq = &m * &m;
    let plus = (&sq - &eye).map(|z| z.norm()).max();
    let minus = (&sq + &eye).map(|z| z.norm()).max();
    let square_sign = if plus <= 1e-12 {
        1
    } else if minus <= 1e-12 {
        -1
    } else {
        return Err(Error::Numerical(
            "central element squares to neither ±I".into(),
        ));
    };
    let expected = if rep.r % 4 == 1 { 1 } else { -1 };
    if square_sign != expected {
        return Err(Error::Numerical(format!(
            "central square sign {square_sign} contradicts r = {} mod 4",
            rep.r
        )));
    }
    // commutes with every generator
    for (i, s) in rep.s_matrices.iter().enumerate() {
        let comm = (&m * s - s * &m).map(|z| z.norm()).max();
        if comm > 1e-12 {
            return Err(Error::Numerical(format!(
                "central element fails to commute with s_{}: {comm:e}",
                i + 1
            )));
        }
    }
    // eigenvalue labels: s_hat (or i s_hat) is hermitian with eigenvalues ±1
    let herm = if square_sign == 1 {
        m.clone()
    } else {
        &m * C64::new(0.0, 1.0)
    };
    let eig = nalgebra::SymmetricEigen::new(herm);
    let mut labels: Vec<C64> = Vec::new();
    for l in eig.eigenvalues.iter() {
        let sign = if *l >= 0.0 { 1.0 } else { -1.0 };
        let label = if square_sign == 1 {
            c(sign)
        } else {
            // undo the i twist: s_hat eigenvalue = -i * (i s_hat eigenvalue)
            C64::new(0.0, -1.0) * sign
        };
        if !labels.iter().any(|x| (x - label).norm() < 1e-9) {
            labels.push(label);
        }
    }
    labels.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    Ok(CentralElement {
        matrix: m,
        square_sign,
        labels,
    })
}

/// Dimension of the commutant of the generator family, by solving
/// `[M, s_i] = 0` numerically; 1 means irreducible.
pub fn commutant_dimension(rep: &CliffordRep) -> usize {
    let n = rep.dim;
    let eye = DMatrix::<C64>::identity(n, n);
    let mut rows = DMatrix::<C64>::zeros(rep.r * n * n, n * n);
    for (k, s) in rep.s_matrices.iter().enumerate() {
        // vec(M S - S M) = (S^T ⊗ I - I ⊗ S) vec(M)
        let block = kron(&s.transpose(), &eye) - kron(&eye, s);
        rows.view_mut((k * n * n, 0), (n * n, n * n))
            .copy_from(&block);
    }
    let svd = rows.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let nonzero = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count();
    n * n - nonzero
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FloatRing;

    fn ring1() -> FloatRing {
        FloatRing::new(1.0)
    }

    #[test]
    fn q1_eval_kills_commutators() {
        // [a(f), a†(g)] evaluates to 0 for every phi
        let ring = ring1();
        let f = ModeVector::new(vec![c(0.3), C64::new(0.1, -0.2)]);
        let g = ModeVector::new(vec![C64::new(0.0, 0.5), c(1.0)]);
        let af = WickPolynomial::a_of(&f, ring);
        let cg = WickPolynomial::a_dag_of(&g, ring);
        let comm = af.mul(&cg).unwrap().sub(&cg.mul(&af).unwrap()).unwrap();
        for phi in [
            vec![c(0.0), c(0.0)],
            vec![c(0.6), c(0.8)],
            vec![C64::new(0.1, 0.2), c(-0.3)],
        ] {
            let v = q1_coherent_eval(&comm, &ModeVector::new(phi)).unwrap();
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn q1_eval_is_multiplicative_and_bounded() {
        let ring = ring1();
        let phi = ModeVector::new(vec![c(0.6), C64::new(0.0, 0.8)]);
        // sum a†(e_i) a(e_i) evaluates to |phi|^2 <= 1
        let mut total = c(0.0);
        for i in 0..2 {
            let p = WickPolynomial::<C64>::creator(2, ring, i)
                .unwrap()
                .mul(&WickPolynomial::annihilator(2, ring, i).unwrap())
                .unwrap();
            total += q1_coherent_eval(&p, &phi).unwrap();
        }
        assert!((total.re - 1.0).abs() < 1e-14 && total.im.abs() < 1e-15);
        // unit
        let one = WickPolynomial::<C64>::unit(2, ring);
        assert_eq!(q1_coherent_eval(&one, &phi).unwrap(), c(1.0));
        // multiplicativity on random pairs
        for seed in 0..10u64 {
            let p = crate::wick::testutil::random_poly(2, 3, 5, seed)
                .to_float(1.0)
                .unwrap();
            let r = crate::wick::testutil::random_poly(2, 3, 5, seed + 1000)
                .to_float(1.0)
                .unwrap();
            let lhs = q1_coherent_eval(&p.mul(&r).unwrap(), &phi).unwrap();
            let rhs = q1_coherent_eval(&p, &phi).unwrap() * q1_coherent_eval(&r, &phi).unwrap();
            assert!((lhs - rhs).norm() < 1e-12, "seed {seed}");
        }
        // outside the ball: rejected
        let far = ModeVector::new(vec![c(1.1), c(0.0)]);
        assert!(q1_coherent_eval(&one, &far).is_err());
        // agrees with the coherent expectation functional at q = 1
        for seed in 0..5u64 {
            let p = crate::wick::testutil::random_poly(2, 3, 5, seed)
                .to_float(1.0)
                .unwrap();
            let lhs = q1_coherent_eval(&p, &phi).unwrap();
            let rhs = crate::wick::coherent_expectation(&p, &phi).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_theta_gives_half_identity() {
        let rf = theta_to_real_form(&BilinearForm::zero(3));
        assert_eq!(rf.rank, 6);
        assert!(rf.admissible);
        for l in &rf.eigenvalues {
            assert!((l - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn coherent_theta_examples() {
        // phi = 0: theta = 0
        let t = coherent_theta(&[c(0.0), c(0.0)]);
        assert!(t.matrix().iter().all(|z| z.norm() == 0.0));
        // |phi| = 1, d = 1, phi = e_1: eigenvalues {1, 0}, r = 1 (odd)
        let t = coherent_theta(&[c(1.0)]);
        let rf = theta_to_real_form(&t);
        assert_eq!(rf.rank, 1);
        assert!((rf.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!(rf.eigenvalues[1].abs() < 1e-14);
        // N(theta) is the real line through phi
        let nb = rf.n_theta_basis();
        assert_eq!(nb.len(), 1);
        let g = &nb[0];
        assert!((g[0].norm() - 1.0).abs() < 1e-12);
        assert!(g[0].im.abs() < 1e-12, "N(theta) basis should be real phi");
        // |phi| = 1, d = 2: r odd (= 3)
        let rf = theta_to_real_form(&coherent_theta(&[c(0.6), c(0.8)]));
        assert_eq!(rf.rank, 3);
        // |phi| = 0.5, d = 1: full rank 2
        let rf = theta_to_real_form(&coherent_theta(&[c(0.5)]));
        assert_eq!(rf.rank, 2);
        assert!(rf.eigenvalues.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn inadmissible_detected() {
        // theta = 2 * rank-one violates |theta(f,f)| <= |f|^2
        let t = coherent_theta(&[c(1.0)]);
        let scaled = BilinearForm::new(t.matrix() * c(2.0)).unwrap();
        let rf = theta_to_real_form(&scaled);
        assert!(!rf.admissible);
        assert!(clifford_rep(&scaled).is_err());
        // non-symmetric input refused
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = c(0.5);
        assert!(BilinearForm::new(m).is_err());
    }

    #[test]
    fn admissibility_three_way() {
        // admissible <=> Theta PSD <=> |theta(f,f)| <= |f|^2 sampled
        let mut state = 0xACEu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state % 2000) as f64 / 1000.0) - 1.0
        };
        for trial in 0..20 {
            let d = 2;
            let raw = DMatrix::<C64>::from_fn(d, d, |_, _| C64::new(next(), next()));
            let sym = (raw.clone() + raw.transpose()) * c(0.5);
            let form = BilinearForm::new(sym).unwrap();
            let rf = theta_to_real_form(&form);
            // sample |theta(f,f)| <= |f|^2
            let mut sample_ok = true;
            for _ in 0..200 {
                let f: Vec<C64> = (0..d).map(|_| C64::new(next(), next())).collect();
                let norm2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
                if form.eval(&f, &f).norm() > norm2 + 1e-9 {
                    sample_ok = false;
                    break;
                }
            }
            if rf.admissible {
                assert!(sample_ok, "trial {trial}: PSD but bound violated");
            }
            if !sample_ok {
                assert!(!rf.admissible, "trial {trial}: bound violated but PSD");
            }
        }
    }

    #[test]
    fn ladder_representations_r_1_to_6() {
        for r in 1..=6usize {
            // an admissible theta with rank exactly r: zero out 2d - r
            // directions of the d = 3 realification via theta = diag
            // construction is awkward; instead scale a diagonal theta
            let d = 3;
            // theta = diag(t_j) with t_j in [0,1] real gives Theta
            // eigenvalues (1 ± t_j)/2 paired; to pin the rank use t_j = 1
            // for dropped pairs
            // ranks: r directions kept among 2d = 6
            let mut tvals = [0.0; 3];
            for (j, t) in tvals.iter_mut().enumerate() {
                // each t_j = 1 removes one direction (eigenvalue 0)
                if 2 * d - r > j {
                    *t = 1.0;
                }
            }
            let theta = BilinearForm::new(DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    c(tvals[i])
                } else {
                    c(0.0)
                }
            }))
            .unwrap();
            let rf = theta_to_real_form(&theta);
            if rf.rank != r {
                // fall back: rank-r via r unit eigenvalues is not reachable
                // for this diagonal family when r < d; skip to the generic
                // ladder check below
                continue;
            }
            let fam = clifford_rep(&theta).unwrap();
            assert_eq!(fam.rep.r, r);
            assert_eq!(fam.rep.dim, 1usize << r.div_ceil(2));
            assert_eq!(fam.rep.anticommutator_residual(), 0.0, "exact entries");
        }
        // direct ladder checks for every r
        for r in 1..=6usize {
            let qubits = r.div_ceil(2);
            let gens = ladder_generators(r, qubits);
            let dim = 1 << qubits;
            let eye = DMatrix::<C64>::identity(dim, dim);
            for i in 0..r {
                // hermitian unitary
                assert_eq!(gens[i].adjoint(), gens[i]);
                assert_eq!(&gens[i] * &gens[i], eye.clone());
                for j in 0..i {
                    let ac = &gens[i] * &gens[j] + &gens[j] * &gens[i];
                    assert!(ac.iter().all(|z| z.norm() == 0.0), "r={r} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn car_limit_one_mode() {
        // theta = 0, d = 1: r = 2, recovers the one-mode CAR with
        // (a†)^2 = theta-hat = 0
        let fam = clifford_rep(&BilinearForm::zero(1)).unwrap();
        assert_eq!(fam.rep.r, 2);
        assert_eq!(fam.rep.dim, 2);
        let adag = fam.rep.a_dag_of(&[c(1.0)]).unwrap();
        let sq = &adag * &adag;
        assert!(sq.map(|z| z.norm()).max() < 1e-14);
        // CAR: a a† + a† a = 2 I
        let a = fam.rep.a_of(&[c(1.0)]).unwrap();
        let ac = &a * &adag + &adag * &a;
        let eye2 = DMatrix::<C64>::identity(2, 2) * c(2.0);
        assert!((ac - eye2).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn reconstruction_relations_hold() {
        // random admissible theta (coherent, interior): Eq-(21)-type
        // anticommutators and theta-hat = theta * I on random vectors
        let phi = [C64::new(0.3, 0.2), C64::new(-0.4, 0.1)];
        let theta = coherent_theta(&phi);
        let fam = clifford_rep(&theta).unwrap();
        let rep = &fam.rep;
        let eye = DMatrix::<C64>::identity(rep.dim, rep.dim);
        let mut state = 0x77u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state % 2000) as f64 / 1000.0) - 1.0
        };
        for _ in 0..100 {
            let f: Vec<C64> = (0..2).map(|_| C64::new(next(), next())).collect();
            let g: Vec<C64> = (0..2).map(|_| C64::new(next(), next())).collect();
            let af = rep.a_of(&f).unwrap();
            let cg = rep.a_dag_of(&g).unwrap();
            let cf = rep.a_dag_of(&f).unwrap();
            // a(f) a†(g) + a†(g) a(f) = 2 <f,g> I
            let ip: C64 = f.iter().zip(&g).map(|(x, y)| x.conj() * y).sum();
            let ac = &af * &cg + &cg * &af;
            let res = (&ac - &eye * (ip * 2.0)).map(|z| z.norm()).max();
            assert!(res < 1e-12, "CCR residual {res}");
            // a†(f) a†(g) + a†(g) a†(f) = 2 theta(f,g) I
            let tv = theta.eval(&f, &g);
            let ac = &cf * &cg + &cg * &cf;
            let res = (&ac - &eye * (tv * 2.0)).map(|z| z.norm()).max();
            assert!(res < 1e-12, "theta-hat residual {res}");
        }
    }

    #[test]
    fn central_element_classification() {
        // r = 1: s_hat = s_1, squares to +I
        let theta = coherent_theta(&[c(1.0)]);
        let fam = clifford_rep(&theta).unwrap();
        assert_eq!(fam.rep.r, 1);
        let ce = central_element(&fam.rep).unwrap();
        assert_eq!(ce.square_sign, 1);
        assert_eq!(ce.labels.len(), 2, "both labels occur in the ladder rep");
        // r = 3 via a peripheral coherent theta at d = 2
        let theta = coherent_theta(&[c(0.6), c(0.8)]);
        let fam = clifford_rep(&theta).unwrap();
        assert_eq!(fam.rep.r, 3);
        assert_eq!(fam.rep.dim, 4);
        let ce = central_element(&fam.rep).unwrap();
        assert_eq!(ce.square_sign, -1, "r = 3 mod 4 gives s_hat^2 = -I");
        for l in &ce.labels {
            assert!(l.re.abs() < 1e-12 && (l.im.abs() - 1.0).abs() < 1e-12);
        }
        // the two irreducibles have dimension 2^{(r-1)/2} = 2 and opposite
        // labels
        let (plus, minus) = fam.odd_pair.unwrap();
        assert_eq!(plus.dim, 2);
        assert_eq!(minus.dim, 2);
        let lp = central_element(&plus).unwrap();
        let lm = central_element(&minus).unwrap();
        assert_eq!(lp.labels.len(), 1);
        assert_eq!(lm.labels.len(), 1);
        assert!(
            (lp.labels[0] + lm.labels[0]).norm() < 1e-12,
            "opposite labels"
        );
        // parity map (negating all generators) exchanges the labels
        let negated = CliffordRep {
            s_matrices: plus.s_matrices.iter().map(|s| s * c(-1.0)).collect(),
            ..plus.clone()
        };
        let ln = central_element(&negated).unwrap();
        assert!((ln.labels[0] - lm.labels[0]).norm() < 1e-12);
        // even r refused
        let fam = clifford_rep(&BilinearForm::zero(1)).unwrap();
        assert!(central_element(&fam.rep).is_err());
    }

    #[test]
    fn even_rank_is_irreducible() {
        for d in [1usize, 2] {
            let fam = clifford_rep(&BilinearForm::zero(d)).unwrap();
            assert_eq!(fam.rep.r, 2 * d);
            assert_eq!(commutant_dimension(&fam.rep), 1, "d = {d}");
        }
        // odd r ladder rep is reducible: commutant dimension 2
        let fam = clifford_rep(&coherent_theta(&[c(0.6), c(0.8)])).unwrap();
        assert_eq!(commutant_dimension(&fam.rep), 2);
        let (plus, _) = fam.odd_pair.unwrap();
        assert_eq!(commutant_dimension(&plus), 1);
    }

    #[test]
    fn dimension_formula() {
        // dim = 2^{ceil(r/2)} for the ladder representation
        for (phi, expect_r) in [
            (vec![c(1.0)], 1usize),
            (vec![c(0.5)], 2),
            (vec![c(0.6), c(0.8)], 3),
            (vec![c(0.3), c(0.4)], 4),
        ] {
            let fam = clifford_rep(&coherent_theta(&phi)).unwrap();
            assert_eq!(fam.rep.r, expect_r, "phi = {phi:?}");
            assert_eq!(fam.rep.dim, 1usize << expect_r.div_ceil(2));
        }
    }
}

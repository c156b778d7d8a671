//! Exact symbolic algebra over the q-relations.
//!
//! Words are finite sequences of creator/annihilator symbols indexed by modes
//! `0..d` (rendered 1-based as `c1`, `a1` in the text syntax).  A polynomial
//! is a finite linear combination of words with [`Scalar`] coefficients.  The
//! single rewrite rule
//!
//! ```text
//! a_i c_j  ->  (1-q) delta_ij * (pair deleted)  +  q * (pair swapped)
//! ```
//!
//! terminates and is confluent, so every polynomial has a unique normal
//! (Wick-ordered) form with all creators left of all annihilators.  Creators
//! do not commute with each other, so within each block the original order is
//! preserved.
//!
//! The coherent expectation functional maps a normal-ordered word
//! `c_{i1}..c_{in} a_{j1}..a_{jm}` to `prod <phi,e_ik> * prod <e_jl,phi>`;
//! it is evaluated here by a depth-first rewrite with memoization rather than
//! by materializing the full normal form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::QRat;
use crate::scalar::{FloatRing, Scalar};

/// Creator (`a†`) or annihilator (`a`) symbol kind.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum OpKind {
    Creator,
    Annihilator,
}

/// A single generator symbol: `a†(e_mode)` or `a(e_mode)`, 0-based mode.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Gen {
    pub kind: OpKind,
    pub mode: usize,
}

impl Gen {
    pub fn creator(mode: usize) -> Gen {
        Gen {
            kind: OpKind::Creator,
            mode,
        }
    }

    pub fn annihilator(mode: usize) -> Gen {
        Gen {
            kind: OpKind::Annihilator,
            mode,
        }
    }

    fn flipped(self) -> Gen {
        Gen {
            kind: match self.kind {
                OpKind::Creator => OpKind::Annihilator,
                OpKind::Annihilator => OpKind::Creator,
            },
            mode: self.mode,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.kind {
            OpKind::Creator => 'c',
            OpKind::Annihilator => 'a',
        };
        write!(f, "{}{}", letter, self.mode + 1)
    }
}

/// A word in the generator symbols.  The empty word is the unit `I`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word(pub Vec<Gen>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn single(g: Gen) -> Word {
        Word(vec![g])
    }

    /// Creator word from mode indices.
    pub fn creators(modes: &[usize]) -> Word {
        Word(modes.iter().map(|&m| Gen::creator(m)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, rhs: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&rhs.0);
        Word(v)
    }

    /// Reverse the word and flip every symbol kind (the word part of the
    /// adjoint).
    pub fn adjoint(&self) -> Word {
        Word(self.0.iter().rev().map(|g| g.flipped()).collect())
    }

    /// Position of the leftmost adjacent (annihilator, creator) pair.
    pub fn first_inversion(&self) -> Option<usize> {
        self.0
            .windows(2)
            .position(|pair| pair[0].kind == OpKind::Annihilator && pair[1].kind == OpKind::Creator)
    }

    /// All creators left of all annihilators.
    pub fn is_normal(&self) -> bool {
        self.first_inversion().is_none()
    }

    pub fn is_creator_word(&self) -> bool {
        self.0.iter().all(|g| g.kind == OpKind::Creator)
    }

    fn max_mode(&self) -> Option<usize> {
        self.0.iter().map(|g| g.mode).max()
    }

    fn swapped_at(&self, pos: usize) -> Word {
        let mut v = self.0.clone();
        v.swap(pos, pos + 1);
        Word(v)
    }

    fn deleted_pair_at(&self, pos: usize) -> Word {
        let mut v = self.0.clone();
        v.drain(pos..pos + 2);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A vector `f` in the d-dimensional one-particle space, expanded over the
/// fixed orthonormal basis.  Inner products are conjugate-linear in the
/// first slot: `inner(f, g) = sum conj(f_i) g_i`.
#[derive(Clone, PartialEq, Debug)]
pub struct ModeVector<S: Scalar> {
    components: Vec<S>,
}

impl<S: Scalar> ModeVector<S> {
    pub fn new(components: Vec<S>) -> ModeVector<S> {
        ModeVector { components }
    }

    pub fn zero(d: usize) -> ModeVector<S> {
        ModeVector {
            components: vec![S::zero(); d],
        }
    }

    pub fn d(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &S {
        &self.components[i]
    }

    pub fn components(&self) -> &[S] {
        &self.components
    }

    /// `<self, other> = sum conj(self_i) other_i`.
    pub fn inner(&self, other: &ModeVector<S>) -> Result<S> {
        if self.d() != other.d() {
            return Err(Error::DimensionMismatch(format!(
                "mode vectors of dimension {} and {}",
                self.d(),
                other.d()
            )));
        }
        let mut acc = S::zero();
        for (a, b) in self.components.iter().zip(&other.components) {
            acc = acc.add(&a.conj().mul(b));
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> S {
        self.inner(self).expect("same dimension")
    }
}

impl ModeVector<Complex64> {
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// A formal linear combination of words with [`Scalar`] coefficients over a
/// fixed mode dimension `d` and ring tag.
///
/// Zero coefficients are never stored.  The term map is ordered, so iteration
/// and printing are deterministic.
#[derive(Clone, PartialEq, Debug)]
pub struct WickPolynomial<S: Scalar> {
    d: usize,
    ring: S::Ring,
    terms: BTreeMap<Word, S>,
}

impl<S: Scalar> WickPolynomial<S> {
    pub fn zero(d: usize, ring: S::Ring) -> Self {
        WickPolynomial {
            d,
            ring,
            terms: BTreeMap::new(),
        }
    }

    /// The unit polynomial `I`.
    pub fn unit(d: usize, ring: S::Ring) -> Self {
        let mut p = Self::zero(d, ring);
        p.add_term(Word::empty(), S::one());
        p
    }

    pub fn creator(d: usize, ring: S::Ring, mode: usize) -> Result<Self> {
        Self::generator(d, ring, Gen::creator(mode))
    }

    pub fn annihilator(d: usize, ring: S::Ring, mode: usize) -> Result<Self> {
        Self::generator(d, ring, Gen::annihilator(mode))
    }

    fn generator(d: usize, ring: S::Ring, g: Gen) -> Result<Self> {
        if g.mode >= d {
            return Err(Error::ModeOutOfRange { index: g.mode, d });
        }
        let mut p = Self::zero(d, ring);
        p.add_term(Word::single(g), S::one());
        Ok(p)
    }

    /// `a†(f) = sum_i f_i c_i` (linear in `f`).
    pub fn a_dag_of(f: &ModeVector<S>, ring: S::Ring) -> Self {
        let d = f.d();
        let mut p = Self::zero(d, ring);
        for i in 0..d {
            p.add_term(Word::single(Gen::creator(i)), f.component(i).clone());
        }
        p
    }

    /// `a(f) = sum_i conj(f_i) a_i` (antilinear in `f`).
    pub fn a_of(f: &ModeVector<S>, ring: S::Ring) -> Self {
        let d = f.d();
        let mut p = Self::zero(d, ring);
        for i in 0..d {
            p.add_term(Word::single(Gen::annihilator(i)), f.component(i).conj());
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, S)>>(
        d: usize,
        ring: S::Ring,
        terms: I,
    ) -> Result<Self> {
        let mut p = Self::zero(d, ring);
        for (w, c) in terms {
            if let Some(m) = w.max_mode() {
                if m >= d {
                    return Err(Error::ModeOutOfRange { index: m, d });
                }
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ring(&self) -> &S::Ring {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    /// Maximum word length, 0 for scalar polynomials.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Merge a term into the map, purging the entry if it cancels to zero.
    pub fn add_term(&mut self, w: Word, c: S) {
        if c.is_zero(&self.ring) {
            return;
        }
        let ring = self.ring.clone();
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero(&ring) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_compatible(&self, rhs: &Self) -> Result<()> {
        if self.d != rhs.d {
            return Err(Error::DimensionMismatch(format!(
                "polynomials over d = {} and d = {}",
                self.d, rhs.d
            )));
        }
        if self.ring != rhs.ring {
            return Err(Error::RingMismatch(format!(
                "{:?} vs {:?}",
                self.ring, rhs.ring
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let mut out = self.clone();
        for (w, c) in rhs.terms.iter() {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.d, self.ring.clone());
        for (w, c) in self.terms.iter() {
            out.add_term(w.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.d, self.ring.clone());
        for (w, coeff) in self.terms.iter() {
            out.add_term(w.clone(), coeff.mul(c));
        }
        out
    }

    /// Product in the free algebra (word concatenation); no rewriting.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let mut out = Self::zero(self.d, self.ring.clone());
        for (w1, c1) in self.terms.iter() {
            for (w2, c2) in rhs.terms.iter() {
                out.add_term(w1.concat(w2), c1.mul(c2));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Result<Self> {
        let mut acc = Self::unit(self.d, self.ring.clone());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// The adjoint `*`: reverses each word, flips creator/annihilator,
    /// conjugates coefficients.  An involution.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.d, self.ring.clone());
        for (w, c) in self.terms.iter() {
            out.add_term(w.adjoint(), c.conj());
        }
        out
    }

    /// True when every stored word is Wick-ordered.
    pub fn is_normal_form(&self) -> bool {
        self.terms.keys().all(Word::is_normal)
    }

    /// The unique normal form: rewrites every adjacent `a_i c_j` pair to
    /// `(1-q) delta_ij (pair deleted) + q (pair swapped)` until all creators
    /// stand left of all annihilators.
    ///
    /// Each step either shortens a word or lowers its inversion count, so the
    /// leftmost-innermost strategy used here terminates; uniqueness of the
    /// result is the diamond-lemma statement exercised by the tests.
    pub fn normalize(&self) -> Self {
        let q = S::q(&self.ring);
        let one_minus_q = S::one().sub(&q);
        let mut out = Self::zero(self.d, self.ring.clone());
        let mut pending = self.terms.clone();
        while let Some((w, c)) = pending.pop_first() {
            if c.is_zero(&self.ring) {
                continue;
            }
            match w.first_inversion() {
                None => out.add_term(w, c),
                Some(pos) => {
                    let (lo, hi) = (w.0[pos], w.0[pos + 1]);
                    debug_assert_eq!(lo.kind, OpKind::Annihilator);
                    debug_assert_eq!(hi.kind, OpKind::Creator);
                    merge(&mut pending, w.swapped_at(pos), c.mul(&q), &self.ring);
                    if lo.mode == hi.mode {
                        merge(
                            &mut pending,
                            w.deleted_pair_at(pos),
                            c.mul(&one_minus_q),
                            &self.ring,
                        );
                    }
                }
            }
        }
        out
    }

    /// Evaluate every coefficient as a complex double (substituting `q_eval`
    /// for a symbolic `q`), producing a float-mode polynomial.
    pub fn to_float(&self, q_eval: f64) -> Result<WickPolynomial<Complex64>> {
        let mut out = WickPolynomial::<Complex64>::zero(self.d, FloatRing::new(q_eval));
        for (w, c) in self.terms.iter() {
            out.add_term(w.clone(), c.to_c64(q_eval)?);
        }
        Ok(out)
    }
}

fn merge<S: Scalar>(map: &mut BTreeMap<Word, S>, w: Word, c: S, ring: &S::Ring) {
    if c.is_zero(ring) {
        return;
    }
    match map.entry(w) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get().add(&c);
            if sum.is_zero(ring) {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

impl<S: Scalar> fmt::Display for WickPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut rendered: Vec<(usize, String)> = Vec::new();
        for (w, c) in self.terms.iter() {
            let cs = c.factor_str();
            let body = if cs == "1" {
                w.to_string()
            } else if cs == "-1" {
                format!("-{w}")
            } else {
                format!("{cs}*{w}")
            };
            rendered.push((w.len(), body));
        }
        // order terms by (word length, map order) so the unit comes first
        rendered.sort_by_key(|a| a.0);
        let mut out = String::new();
        for (_, body) in rendered {
            if out.is_empty() {
                out.push_str(&body);
            } else if let Some(rest) = body.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&body);
            }
        }
        write!(f, "{out}")
    }
}

/// The relation polynomial `R_ij = a_i c_j - (1-q) delta_ij I - q c_j a_i`,
/// which normalizes to zero.
pub fn relation_polynomial<S: Scalar>(
    d: usize,
    ring: S::Ring,
    i: usize,
    j: usize,
) -> Result<WickPolynomial<S>> {
    if i >= d || j >= d {
        return Err(Error::ModeOutOfRange { index: i.max(j), d });
    }
    let q = S::q(&ring);
    let one_minus_q = S::one().sub(&q);
    let mut p = WickPolynomial::zero(d, ring);
    p.add_term(Word(vec![Gen::annihilator(i), Gen::creator(j)]), S::one());
    if i == j {
        p.add_term(Word::empty(), one_minus_q.neg());
    }
    p.add_term(Word(vec![Gen::creator(j), Gen::annihilator(i)]), q.neg());
    Ok(p)
}

/// Memoized evaluator of `omega_phi` on words; callers computing many
/// related expectations (Gram or compressed-operator matrices) share the
/// cache across calls.
pub struct CoherentEvaluator<S: Scalar> {
    phi: ModeVector<S>,
    ring: S::Ring,
    memo: HashMap<Word, S>,
}

impl<S: Scalar> CoherentEvaluator<S> {
    pub fn new(phi: ModeVector<S>, ring: S::Ring) -> Self {
        CoherentEvaluator {
            phi,
            ring,
            memo: HashMap::new(),
        }
    }

    /// `omega_phi` of a single word.
    pub fn eval_word(&mut self, w: &Word) -> S {
        expect_word(w, &self.phi, &self.ring, &mut self.memo)
    }

    /// `omega_phi` of a polynomial (the polynomial must live over the same
    /// mode dimension).
    pub fn eval(&mut self, p: &WickPolynomial<S>) -> Result<S> {
        if self.phi.d() != p.d() {
            return Err(Error::DimensionMismatch(format!(
                "polynomial over d = {} evaluated at a vector of dimension {}",
                p.d(),
                self.phi.d()
            )));
        }
        let mut acc = S::zero();
        for (w, c) in p.terms() {
            let v = self.eval_word(w);
            acc = acc.add(&c.mul(&v));
        }
        Ok(acc)
    }
}

/// Coherent expectation `omega_phi(p)`.
///
/// The computation is algebraic and valid for any `phi` (callers probing the
/// non-existence of states beyond the unit sphere rely on this); the result
/// is a state value only when `|phi| <= 1`.
pub fn coherent_expectation<S: Scalar>(p: &WickPolynomial<S>, phi: &ModeVector<S>) -> Result<S> {
    let mut eval = CoherentEvaluator::new(phi.clone(), p.ring().clone());
    eval.eval(p)
}

/// Depth-first evaluation of `omega_phi` on a single word:
/// strip leading creators (factor `<phi,e_i>`), strip trailing annihilators
/// (factor `<e_j,phi>`), otherwise rewrite the leftmost `a_i c_j` pair.
fn expect_word<S: Scalar>(
    w: &Word,
    phi: &ModeVector<S>,
    ring: &S::Ring,
    memo: &mut HashMap<Word, S>,
) -> S {
    if w.is_empty() {
        return S::one();
    }
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let first = w.0[0];
    let last = *w.0.last().unwrap();
    let value = if first.kind == OpKind::Creator {
        let rest = Word(w.0[1..].to_vec());
        phi.component(first.mode)
            .conj()
            .mul(&expect_word(&rest, phi, ring, memo))
    } else if last.kind == OpKind::Annihilator {
        let rest = Word(w.0[..w.0.len() - 1].to_vec());
        phi.component(last.mode)
            .clone()
            .mul(&expect_word(&rest, phi, ring, memo))
    } else {
        // starts with an annihilator and ends with a creator, so an adjacent
        // (annihilator, creator) pair exists
        let pos = w.first_inversion().expect("inversion must exist");
        let (lo, hi) = (w.0[pos], w.0[pos + 1]);
        let q = S::q(ring);
        let mut v = q.mul(&expect_word(&w.swapped_at(pos), phi, ring, memo));
        if lo.mode == hi.mode {
            let one_minus_q = S::one().sub(&q);
            v = v.add(&one_minus_q.mul(&expect_word(&w.deleted_pair_at(pos), phi, ring, memo)));
        }
        v
    };
    memo.insert(w.clone(), value.clone());
    value
}

/// Gram matrix of a family of creator words under the coherent state:
/// `G[u][v] = omega_phi(adjoint(u) v)`.  Hermitian by construction.
pub fn coherent_gram<S: Scalar>(
    words: &[Word],
    phi: &ModeVector<S>,
    ring: &S::Ring,
) -> Result<Vec<Vec<S>>> {
    for w in words {
        if !w.is_creator_word() {
            return Err(Error::Unsupported(format!(
                "coherent_gram expects creator words, got {w}"
            )));
        }
    }
    let n = words.len();
    let mut g = vec![vec![S::zero(); n]; n];
    let mut memo: HashMap<Word, S> = HashMap::new();
    for i in 0..n {
        for j in i..n {
            let w = words[i].adjoint().concat(&words[j]);
            let v = expect_word(&w, phi, ring, &mut memo);
            g[i][j] = v.clone();
            g[j][i] = v.conj();
        }
    }
    Ok(g)
}

impl WickPolynomial<QRat> {
    /// The `q -> 1/q` duality: substitutes `q -> q^{-1}` in every coefficient
    /// and exchanges creators and annihilators mode-wise (`a†(f) -> a(fbar)`
    /// with the conjugation fixing the basis).  Applied to the relation
    /// polynomial `R_ij` it yields `-q^{-1} R_ji`, i.e. after renaming the
    /// exchanged generators, the relation at parameter `q^{-1}`.
    pub fn dual_q_map(&self) -> Result<WickPolynomial<QRat>> {
        let mut out = WickPolynomial::zero(self.d, crate::scalar::ExactRing);
        for (w, c) in self.terms.iter() {
            let flipped = Word(w.0.iter().map(|g| g.flipped()).collect());
            out.add_term(flipped, c.subst_q_inv()?);
        }
        Ok(out)
    }
}

impl WickPolynomial<Complex64> {
    /// Float-mode duality; rejected at `q = 0` where `q^{-1}` is undefined.
    /// The returned polynomial carries the ring at `1/q`.
    pub fn dual_q_map(&self) -> Result<WickPolynomial<Complex64>> {
        let q = self.ring.q;
        if q == 0.0 {
            return Err(Error::ParamOutOfRange(
                "dual map at q = 0: q^{-1} undefined".into(),
            ));
        }
        let ring = FloatRing::with_tol(1.0 / q, self.ring.prune_tol);
        let mut out = WickPolynomial::zero(self.d, ring);
        for (w, c) in self.terms.iter() {
            let flipped = Word(w.0.iter().map(|g| g.flipped()).collect());
            out.add_term(flipped, *c);
        }
        Ok(out)
    }
}

/// Deterministic pseudo-random polynomial generation for the test suites.
#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::scalar::ExactRing;

    pub(crate) fn random_poly(
        d: usize,
        max_len: usize,
        terms: usize,
        seed: u64,
    ) -> WickPolynomial<QRat> {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut p = WickPolynomial::zero(d, ExactRing);
        for _ in 0..terms {
            let len = (next() % (max_len as u64 + 1)) as usize;
            let mut word = Vec::with_capacity(len);
            for _ in 0..len {
                let mode = (next() % d as u64) as usize;
                let kind = if next() % 2 == 0 {
                    OpKind::Creator
                } else {
                    OpKind::Annihilator
                };
                word.push(Gen { kind, mode });
            }
            let re = (next() % 7) as i64 - 3;
            let im = (next() % 5) as i64 - 2;
            let den = (next() % 3) as i64 + 1;
            let coeff = QRat::from_gauss(crate::exact::gauss_from_i64(re, im))
                .mul(&QRat::from_ratio(1, den));
            p.add_term(Word(word), coeff);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactRing;
    use crate::wick::testutil::random_poly;

    type P = WickPolynomial<QRat>;

    fn exact(d: usize) -> (usize, ExactRing) {
        (d, ExactRing)
    }

    fn c(d: usize, m: usize) -> P {
        P::creator(d, ExactRing, m).unwrap()
    }

    fn a(d: usize, m: usize) -> P {
        P::annihilator(d, ExactRing, m).unwrap()
    }

    fn q() -> QRat {
        QRat::q()
    }

    #[test]
    fn normalize_basic_relation() {
        // a1 c1 -> (1-q) I + q c1 a1
        let (d, ring) = exact(1);
        let p = a(d, 0).mul(&c(d, 0)).unwrap();
        let n = p.normalize();
        let mut expected = P::zero(d, ring);
        expected.add_term(Word::empty(), QRat::one().sub(&q()));
        expected.add_term(Word(vec![Gen::creator(0), Gen::annihilator(0)]), q());
        assert_eq!(n, expected);
    }

    #[test]
    fn normalize_fixed_point() {
        // a†1 a2 is already normal
        let d = 2;
        let p = c(d, 0).mul(&a(d, 1)).unwrap();
        assert!(p.is_normal_form());
        assert_eq!(p.normalize(), p);
    }

    #[test]
    fn normalize_two_steps() {
        // a1 (c1)^2 -> (1-q^2) c1 + q^2 c1 c1 a1
        let (d, ring) = exact(1);
        let p = a(d, 0).mul(&c(d, 0).pow(2).unwrap()).unwrap();
        let n = p.normalize();
        let q2 = q().pow(2);
        let mut expected = P::zero(d, ring);
        expected.add_term(Word::creators(&[0]), QRat::one().sub(&q2));
        expected.add_term(
            Word(vec![Gen::creator(0), Gen::creator(0), Gen::annihilator(0)]),
            q2,
        );
        assert_eq!(n, expected);
    }

    #[test]
    fn iterated_relation_oracle() {
        // a c^k = q^k c^k a + (1 - q^k) c^{k-1}, checked for k = 1..6
        let (d, ring) = exact(1);
        for k in 1..=6usize {
            let lhs = a(d, 0).mul(&c(d, 0).pow(k).unwrap()).unwrap().normalize();
            let qk = q().pow(k as u32);
            let mut rhs = P::zero(d, ring);
            let mut ck_a: Vec<Gen> = vec![Gen::creator(0); k];
            ck_a.push(Gen::annihilator(0));
            rhs.add_term(Word(ck_a), qk.clone());
            rhs.add_term(Word(vec![Gen::creator(0); k - 1]), QRat::one().sub(&qk));
            assert_eq!(lhs, rhs, "k = {k}");
        }
    }

    #[test]
    fn relation_polynomial_normalizes_to_zero() {
        for d in [1usize, 2] {
            for i in 0..d {
                for j in 0..d {
                    let r = relation_polynomial::<QRat>(d, ExactRing, i, j).unwrap();
                    assert!(r.normalize().is_zero(), "R_{i}{j} at d = {d}");
                }
            }
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let d = 2;
        let p = random_poly(d, 4, 7, 0xDEAD);
        let n1 = p.normalize();
        let n2 = n1.normalize();
        assert_eq!(n1, n2);
    }

    #[test]
    fn confluence_spot_check() {
        // a word with two disjoint redexes: rewriting either first yields the
        // same normal form
        let d = 2usize;
        let w = Word(vec![
            Gen::annihilator(0),
            Gen::creator(0),
            Gen::annihilator(1),
            Gen::creator(1),
        ]);
        let p = P::from_terms(d, ExactRing, [(w.clone(), QRat::one())]).unwrap();

        let rewrite_once = |pos: usize| -> P {
            let q = q();
            let mut out = P::zero(d, ExactRing);
            out.add_term(w.swapped_at(pos), q.clone());
            if w.0[pos].mode == w.0[pos + 1].mode {
                out.add_term(w.deleted_pair_at(pos), QRat::one().sub(&q));
            }
            out
        };
        let left_first = rewrite_once(0).normalize();
        let right_first = rewrite_once(2).normalize();
        assert_eq!(left_first, right_first);
        assert_eq!(left_first, p.normalize());
    }

    #[test]
    fn adjoint_examples_and_involution() {
        let d = 2;
        // (c1 a2)* = c2 a1
        let p = c(d, 0).mul(&a(d, 1)).unwrap();
        assert_eq!(p.adjoint(), c(d, 1).mul(&a(d, 0)).unwrap());
        // ((2+i) a1)* = (2-i) c1
        let two_i = QRat::from_gauss(crate::exact::gauss_from_i64(2, 1));
        let p = a(d, 0).scale(&two_i);
        let expected = c(d, 0).scale(&two_i.conj());
        assert_eq!(p.adjoint(), expected);
        // involution on a random polynomial
        let p = random_poly(d, 4, 9, 0xBEEF);
        assert_eq!(p.adjoint().adjoint(), p);
    }

    #[test]
    fn adjoint_commutes_with_normalize() {
        let p = random_poly(2, 4, 8, 0xC0FFEE);
        assert_eq!(p.adjoint().normalize(), p.normalize().adjoint());
    }

    #[test]
    fn coherent_expectation_hand_expansion() {
        // omega_phi(a(f) a†(g)) = (1-q) <f,g> + q <phi,g> <f,phi>
        let d = 2;
        let f = ModeVector::new(vec![QRat::from_ratio(1, 2), QRat::from_int(1)]);
        let g = ModeVector::new(vec![
            QRat::from_int(2),
            QRat::from_gauss(crate::exact::gauss_from_i64(0, 1)),
        ]);
        let phi = ModeVector::new(vec![QRat::from_ratio(1, 3), QRat::from_ratio(-1, 4)]);
        let p = P::a_of(&f, ExactRing)
            .mul(&P::a_dag_of(&g, ExactRing))
            .unwrap();
        let got = coherent_expectation(&p, &phi).unwrap();
        let expected = QRat::one().sub(&q()).mul(&f.inner(&g).unwrap()).add(
            &q().mul(&phi.inner(&g).unwrap())
                .mul(&f.inner(&phi).unwrap()),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn fock_state_examples() {
        let d = 2;
        let phi = ModeVector::<QRat>::zero(d);
        let f = ModeVector::new(vec![QRat::from_int(1), QRat::from_int(2)]);
        let g = ModeVector::new(vec![QRat::from_ratio(1, 2), QRat::from_int(-1)]);
        // omega_0(a†(f) a(g)) = 0
        let p = P::a_dag_of(&f, ExactRing)
            .mul(&P::a_of(&g, ExactRing))
            .unwrap();
        assert!(coherent_expectation(&p, &phi).unwrap().is_zero());
        // omega_0(a(f) a†(g)) = (1-q) <f,g>
        let p = P::a_of(&f, ExactRing)
            .mul(&P::a_dag_of(&g, ExactRing))
            .unwrap();
        let expected = QRat::one().sub(&q()).mul(&f.inner(&g).unwrap());
        assert_eq!(coherent_expectation(&p, &phi).unwrap(), expected);
        // omega(1) = 1
        let one = P::unit(d, ExactRing);
        assert_eq!(coherent_expectation(&one, &phi).unwrap(), QRat::one());
    }

    #[test]
    fn expectation_agrees_with_normal_form_map() {
        // the depth-first evaluator equals "normalize, then apply the
        // multilinear formula" on random polynomials
        let d = 2;
        let phi = ModeVector::new(vec![QRat::from_ratio(1, 3), QRat::from_ratio(1, 5)]);
        for seed in 0..5u64 {
            let p = random_poly(d, 3, 6, seed);
            let via_eval = coherent_expectation(&p, &phi).unwrap();
            let mut via_normal = QRat::zero();
            for (w, c) in p.normalize().terms() {
                let mut factor = QRat::one();
                for g in &w.0 {
                    let comp = phi.component(g.mode);
                    factor = factor.mul(&match g.kind {
                        OpKind::Creator => comp.conj(),
                        OpKind::Annihilator => comp.clone(),
                    });
                }
                via_normal = via_normal.add(&c.mul(&factor));
            }
            assert_eq!(via_eval, via_normal, "seed {seed}");
        }
    }

    #[test]
    fn state_axioms_adjoint_conjugation() {
        let d = 2;
        let phi = ModeVector::new(vec![
            QRat::from_gauss(crate::exact::gauss_from_i64(0, 1)).mul(&QRat::from_ratio(1, 2)),
            QRat::from_ratio(1, 3),
        ]);
        let p = random_poly(d, 3, 6, 0xAB);
        let lhs = coherent_expectation(&p.adjoint(), &phi).unwrap();
        let rhs = coherent_expectation(&p, &phi).unwrap().conj();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn peripheral_characterization_exact() {
        // |phi| = 1 (Pythagorean), omega((a†(phi)-1)(a(phi)-1)) = 0 exactly
        let d = 2;
        let phi = ModeVector::new(vec![QRat::from_ratio(3, 5), QRat::from_ratio(4, 5)]);
        assert_eq!(phi.norm_sq(), QRat::one());
        let one = P::unit(d, ExactRing);
        let lhs = P::a_dag_of(&phi, ExactRing).sub(&one).unwrap();
        let rhs = P::a_of(&phi, ExactRing).sub(&one).unwrap();
        let p = lhs.mul(&rhs).unwrap();
        assert!(coherent_expectation(&p, &phi).unwrap().is_zero());
    }

    #[test]
    fn gram_fock_diagonal() {
        // d=1, phi=0: G over {I, c1, c1 c1, ...} is diag(prod_{k<=n}(1-q^k))
        let phi = ModeVector::<QRat>::zero(1);
        let words: Vec<Word> = (0..=4).map(|n| Word::creators(&vec![0; n])).collect();
        let g = coherent_gram(&words, &phi, &ExactRing).unwrap();
        let mut expected = QRat::one();
        for (n, row) in g.iter().enumerate() {
            if n > 0 {
                expected = expected.mul(&QRat::one().sub(&q().pow(n as u32)));
            }
            for (m, entry) in row.iter().enumerate() {
                if m == n {
                    assert_eq!(entry, &expected, "diagonal at n = {n}");
                } else {
                    assert!(entry.is_zero(), "off-diagonal ({n},{m})");
                }
            }
        }
    }

    #[test]
    fn gram_peripheral_rank_one() {
        // |phi| = 1, words {I, a†(phi)Omega}: G = [[1,1],[1,1]]
        // realized over the basis words with d = 1, phi = e_1
        let phi = ModeVector::new(vec![QRat::from_int(1)]);
        let words = vec![Word::empty(), Word::creators(&[0])];
        let g = coherent_gram(&words, &phi, &ExactRing).unwrap();
        for row in &g {
            for entry in row {
                assert_eq!(entry, &QRat::one());
            }
        }
    }

    #[test]
    fn dual_map_sends_relation_to_scaled_relation() {
        // D(R_ij) = -q^{-1} R_ji
        let d = 2;
        for i in 0..d {
            for j in 0..d {
                let r_ij = relation_polynomial::<QRat>(d, ExactRing, i, j).unwrap();
                let image = r_ij.dual_q_map().unwrap();
                let r_ji = relation_polynomial::<QRat>(d, ExactRing, j, i).unwrap();
                let scale = q().inv().unwrap().neg();
                assert_eq!(image, r_ji.scale(&scale), "(i,j) = ({i},{j})");
            }
        }
    }

    #[test]
    fn dual_map_simple_images() {
        let d = 1;
        let one = P::unit(d, ExactRing);
        assert_eq!(one.dual_q_map().unwrap(), one);
        assert_eq!(c(d, 0).dual_q_map().unwrap(), a(d, 0));
        // float mode: defined away from q = 0, rejected at q = 0
        let fp = WickPolynomial::<Complex64>::creator(1, FloatRing::new(0.5), 0).unwrap();
        assert!(fp.dual_q_map().is_ok());
        let f0 = WickPolynomial::<Complex64>::creator(1, FloatRing::new(0.0), 0).unwrap();
        assert!(f0.dual_q_map().is_err());
    }

    #[test]
    fn values_transfer_between_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<WickPolynomial<QRat>>();
        assert_send_sync::<WickPolynomial<Complex64>>();
        assert_send_sync::<ModeVector<QRat>>();
        assert_send_sync::<Word>();
    }

    #[test]
    fn ring_and_dimension_mismatches_error() {
        let p1 = P::unit(1, ExactRing);
        let p2 = P::unit(2, ExactRing);
        assert!(p1.add(&p2).is_err());
        let f1 = WickPolynomial::<Complex64>::unit(1, FloatRing::new(0.5));
        let f2 = WickPolynomial::<Complex64>::unit(1, FloatRing::new(0.25));
        assert!(f1.mul(&f2).is_err());
        assert!(P::creator(1, ExactRing, 3).is_err());
        let phi = ModeVector::<QRat>::zero(3);
        assert!(coherent_expectation(&p1, &phi).is_err());
    }
}

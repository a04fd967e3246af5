//! Sparse multivariate polynomials over exact rationals, plus the little
//! rational linear algebra (rank, span, intersection) the structure checkers
//! lean on.
//!
//! Scalars are arbitrary-precision rationals, never floats: every identity
//! downstream becomes a decidable, exactly checkable polynomial identity.
//! Coefficients are kept reduced with positive denominator by construction.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Exact scalar: reduced fraction with positive denominator, zero is `0/1`.
pub type Rational = BigRational;

/// Rational from an integer pair. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(num: i64) -> Rational {
    BigRational::from_integer(BigInt::from(num))
}

/// Exponent vector of a single term. The length always equals the ambient
/// variable count of the polynomial owning it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index {index} out of range 0..{nvars}");
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        Monomial(exps)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Degree counting only the variables in `range`.
    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.0[range].iter().sum()
    }
}

/// Graded lexicographic order: total degree first, then lexicographic.
/// This is the canonical term order used for serialization and witness
/// selection, so it must stay deterministic.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with rational coefficients.
///
/// Invariants: no stored zero coefficients; every monomial has length
/// `nvars`. Terms live in a `BTreeMap` under graded-lex order, which makes
/// iteration (and hence serialization) canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::constant(nvars), c);
        }
        Poly { nvars, terms }
    }

    /// The variable `x_index` as a polynomial.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(nvars, index), Rational::one());
        Poly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, items: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in items {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    /// Largest degree in the variable block `range` over all terms.
    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(range.clone()))
            .max()
            .unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Constant value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_constant() {
                return Some(c.clone());
            }
        }
        None
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        assert_eq!(m.0.len(), self.nvars, "monomial length must equal nvars");
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars, "poly_add: mismatched nvars");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars, "poly_mul: mismatched nvars");
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Formal partial derivative with respect to `x_k`.
    pub fn partial(&self, k: usize) -> Poly {
        assert!(k < self.nvars, "poly_partial: index {k} out of range 0..{}", self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[k];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[k] = e - 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars, "poly_eval: point length must equal nvars");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    v *= x;
                }
            }
            acc += v;
        }
        acc
    }

    /// Reinterpret in a larger variable ring; existing variables keep their
    /// indices, the new trailing variables do not occur.
    pub fn pad(&self, new_nvars: usize) -> Poly {
        assert!(new_nvars >= self.nvars, "pad: cannot shrink variable count");
        Poly {
            nvars: new_nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut exps = m.0.clone();
                    exps.resize(new_nvars, 0);
                    (Monomial(exps), c.clone())
                })
                .collect(),
        }
    }

    /// Substitute zero for every variable with index `>= keep`, keeping the
    /// first `keep` variables. Output lives in the `keep`-variable ring.
    pub fn restrict_prefix(&self, keep: usize) -> Poly {
        assert!(keep <= self.nvars);
        let mut out = Poly::zero(keep);
        for (m, c) in &self.terms {
            if m.0[keep..].iter().any(|&e| e > 0) {
                continue;
            }
            out.add_term(Monomial(m.0[..keep].to_vec()), c.clone());
        }
        out
    }

    /// True if every term has total degree exactly 1.
    pub fn is_homogeneous_linear(&self) -> bool {
        self.terms.keys().all(|m| m.total_degree() == 1)
    }

    /// Coefficient vector of a homogeneous linear polynomial.
    pub fn linear_coeffs(&self) -> Option<Vec<Rational>> {
        if !self.is_homogeneous_linear() {
            return None;
        }
        let mut v = vec![Rational::zero(); self.nvars];
        for (m, c) in &self.terms {
            let k = m.0.iter().position(|&e| e == 1).unwrap();
            v[k] = c.clone();
        }
        Some(v)
    }

    /// Homogeneous linear polynomial from a coefficient vector.
    pub fn from_linear_coeffs(coeffs: &[Rational]) -> Poly {
        let n = coeffs.len();
        Poly::from_terms(
            n,
            coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (Monomial::var(n, k), c.clone())),
        )
    }
}

fn fmt_coeff(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Canonical literal form: terms in descending graded-lex order, rationals
/// as `num/den`, e.g. `3*x0^2*x1 - 1/2*x2 + 1`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| if e == 1 { format!("x{k}") } else { format!("x{k}^{e}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", fmt_coeff(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_coeff(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Dense rational matrix with exact elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, data: rows.iter().flatten().cloned().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn row(&self, r: usize) -> Vec<Rational> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0usize;
        for col in 0..m.cols {
            if lead >= m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            for c in 0..m.cols {
                m.data.swap(pr * m.cols + c, lead * m.cols + c);
            }
            let inv = {
                let p = m.get(lead, col).clone();
                Rational::one() / p
            };
            for c in 0..m.cols {
                let v = m.get(lead, c) * &inv;
                m.set(lead, c, v);
            }
            for r in 0..m.rows {
                if r != lead && !m.get(r, col).is_zero() {
                    let factor = m.get(r, col).clone();
                    for c in 0..m.cols {
                        let v = m.get(r, c) - &factor * m.get(lead, c);
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            lead += 1;
        }
        (m, pivots)
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : M x = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -r.get(prow, free).clone();
            }
            basis.push(v);
        }
        basis
    }
}

/// Reduced-echelon basis of the span of `vectors`. Canonical: the output is
/// the nonzero rows of the RREF.
pub fn subspace_span(vectors: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let dim = vectors[0].len();
    assert!(vectors.iter().all(|v| v.len() == dim), "subspace_span: mixed ambient dimensions");
    let (r, pivots) = RatMatrix::from_rows(vectors).rref();
    (0..pivots.len()).map(|i| r.row(i)).collect()
}

/// Basis of `span(a) ∩ span(b)`, via the kernel of the concatenated system:
/// a combination of the `a`-vectors that also lies in `span(b)`.
pub fn subspace_intersect(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let dim = a[0].len();
    assert!(
        a.iter().chain(b.iter()).all(|v| v.len() == dim),
        "subspace_intersect: mixed ambient dimensions"
    );
    // Columns are a_1..a_p, -b_1..-b_q; kernel elements (s, t) satisfy
    // sum s_i a_i = sum t_j b_j.
    let mut m = RatMatrix::zeros(dim, a.len() + b.len());
    for (j, v) in a.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m.set(i, j, x.clone());
        }
    }
    for (j, v) in b.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m.set(i, a.len() + j, -x.clone());
        }
    }
    let combos: Vec<Vec<Rational>> = m
        .kernel_basis()
        .into_iter()
        .map(|k| {
            let mut v = vec![Rational::zero(); dim];
            for (j, s) in k[..a.len()].iter().enumerate() {
                for (i, x) in a[j].iter().enumerate() {
                    v[i] += s * x;
                }
            }
            v
        })
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    subspace_span(&combos)
}

/// True if `v` lies in the span of `basis`.
pub fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    if v.iter().all(Rational::is_zero) {
        return true;
    }
    let mut rows: Vec<Vec<Rational>> = basis.to_vec();
    let before = subspace_span(&rows).len();
    rows.push(v.to_vec());
    subspace_span(&rows).len() == before
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p_x(nvars: usize, i: usize) -> Poly {
        Poly::var(nvars, i)
    }

    #[test]
    fn add_inverse_and_mixed_vars() {
        let x1 = p_x(2, 0);
        assert!(x1.add(&x1.neg()).is_zero());
        let sum = x1.add(&Poly::one(2)).add(&p_x(2, 1));
        assert_eq!(sum.num_terms(), 3);
        let sq = p_x(1, 0).mul(&p_x(1, 0));
        let three_sq = sq.add(&sq.scale(&rat_int(2)));
        assert_eq!(three_sq.coeff(&Monomial(vec![2])), rat_int(3));
    }

    #[test]
    fn mul_difference_of_squares_and_identity() {
        let x = p_x(1, 0);
        let lhs = x.add(&Poly::one(1)).mul(&x.sub(&Poly::one(1)));
        let expect = x.mul(&x).sub(&Poly::one(1));
        assert_eq!(lhs, expect);
        let p = x.mul(&x).add(&x.scale(&rat(7, 3)));
        assert_eq!(p.mul(&Poly::one(1)), p);
        let xy = p_x(2, 0).mul(&p_x(2, 1));
        assert_eq!(xy.coeff(&Monomial(vec![1, 1])), rat_int(1));
    }

    #[test]
    fn partial_derivatives() {
        // d(x0^2 x1)/dx0 = 2 x0 x1
        let p = p_x(2, 0).mul(&p_x(2, 0)).mul(&p_x(2, 1));
        assert_eq!(p.partial(0), p_x(2, 0).mul(&p_x(2, 1)).scale(&rat_int(2)));
        assert!(Poly::constant(3, rat(5, 2)).partial(2).is_zero());
        let q = p_x(3, 0).mul(&p_x(3, 1)).mul(&p_x(3, 2));
        assert_eq!(q.partial(2), p_x(3, 0).mul(&p_x(3, 1)));
    }

    #[test]
    #[should_panic(expected = "mismatched nvars")]
    fn add_rejects_mismatched_nvars() {
        let _ = p_x(2, 0).add(&p_x(3, 0));
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn partial_rejects_bad_index() {
        let _ = p_x(2, 0).partial(2);
    }

    #[test]
    fn eval_examples() {
        let p = p_x(1, 0).mul(&p_x(1, 0)).sub(&Poly::one(1));
        assert_eq!(p.eval(&[rat_int(3)]), rat_int(8));
        assert_eq!(Poly::zero(2).eval(&[rat_int(4), rat_int(5)]), rat_int(0));
        let xy = p_x(2, 0).mul(&p_x(2, 1));
        assert_eq!(xy.eval(&[rat(1, 2), rat(2, 3)]), rat(1, 3));
    }

    #[test]
    fn display_literal_form() {
        let p = p_x(3, 0)
            .mul(&p_x(3, 0))
            .scale(&rat_int(3))
            .sub(&p_x(3, 2).scale(&rat(1, 2)))
            .add(&Poly::one(3));
        assert_eq!(p.to_string(), "3*x0^2 - 1/2*x2 + 1");
        assert_eq!(Poly::zero(1).to_string(), "0");
        assert_eq!(p_x(2, 1).neg().to_string(), "-x1");
    }

    #[test]
    fn rank_examples() {
        let m = RatMatrix::from_rows(&[
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(2), rat_int(4)],
        ]);
        assert_eq!(m.rank(), 1);
        let mut id = RatMatrix::zeros(3, 3);
        for i in 0..3 {
            id.set(i, i, rat_int(1));
        }
        assert_eq!(id.rank(), 3);
        assert_eq!(RatMatrix::zeros(4, 2).rank(), 0);
    }

    fn e(dim: usize, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); dim];
        v[i] = rat_int(1);
        v
    }

    #[test]
    fn span_and_intersect_examples() {
        let mut e1p2 = e(3, 0);
        e1p2[1] = rat_int(1);
        assert_eq!(subspace_span(&[e(3, 0), e1p2]).len(), 2);

        let a = vec![e(3, 0), e(3, 1)];
        let b = vec![e(3, 1), e(3, 2)];
        let meet = subspace_intersect(&a, &b);
        assert_eq!(meet, vec![e(3, 1)]);

        let v = vec![e(4, 0), e(4, 2)];
        assert_eq!(subspace_intersect(&v, &v), subspace_span(&v));
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_poly(nvars: usize) -> impl Strategy<Value = Poly> {
        proptest::collection::vec((proptest::collection::vec(0u32..3, nvars), arb_rat()), 0..6)
            .prop_map(move |terms| {
                Poly::from_terms(nvars, terms.into_iter().map(|(e, c)| (Monomial(e), c)))
            })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(3), b in arb_poly(3), c in arb_poly(3)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn partials_commute(p in arb_poly(3), j in 0usize..3, k in 0usize..3) {
            prop_assert_eq!(p.partial(j).partial(k), p.partial(k).partial(j));
        }

        #[test]
        fn rank_equals_transpose_rank(rows in proptest::collection::vec(
            proptest::collection::vec(arb_rat(), 4), 1..5))
        {
            let m = RatMatrix::from_rows(&rows);
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn span_dimension_formula(
            a in proptest::collection::vec(proptest::collection::vec(arb_rat(), 4), 1..4),
            b in proptest::collection::vec(proptest::collection::vec(arb_rat(), 4), 1..4))
        {
            let sa = subspace_span(&a);
            let sb = subspace_span(&b);
            let mut all = sa.clone();
            all.extend(sb.clone());
            let sum = subspace_span(&all);
            let meet = subspace_intersect(&sa, &sb);
            prop_assert_eq!(sa.len() + sb.len(), sum.len() + meet.len());
        }
    }
}

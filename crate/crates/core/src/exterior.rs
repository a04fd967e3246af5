//! Graded exterior calculus over polynomial coefficients on a flat space:
//! multivector fields, differential forms, wedge, contraction, exterior
//! derivative, Lie derivative, the Schouten-Nijenhuis bracket, the complete
//! tangent lift, and supports of constant multivectors.
//!
//! All tensors are fully antisymmetrized and stored on strictly increasing
//! index tuples; canonicalization multiplies coefficients by the permutation
//! sign. Direction indices are 0-based.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::ratpoly::{subspace_span, Poly, Rational};

/// Strictly increasing list of direction indices; length = tensor degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// Builds from an already strictly increasing list. Panics otherwise.
    pub fn new(indices: Vec<usize>) -> Self {
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "multi-index must be strictly increasing: {indices:?}"
        );
        MultiIndex(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with the entry at `pos` removed.
    fn without(&self, pos: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v.remove(pos);
        MultiIndex(v)
    }
}

/// Sorts an index list, returning the permutation sign, or `None` when an
/// index repeats (the term dies).
pub fn sort_with_sign(mut indices: Vec<usize>) -> Option<(MultiIndex, i8)> {
    let mut sign = 1i8;
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && indices[j - 1] == indices[j] {
            return None;
        }
    }
    Some((MultiIndex(indices), sign))
}

mod sealed {
    pub trait Sealed {}
}

/// Marker distinguishing contravariant tensors from covariant ones.
pub trait Variance: sealed::Sealed + Clone + std::fmt::Debug + PartialEq + Eq + 'static {
    const BASIS_SYMBOL: &'static str;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contra;
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cov;

impl sealed::Sealed for Contra {}
impl sealed::Sealed for Cov {}
impl Variance for Contra {
    const BASIS_SYMBOL: &'static str = "d";
}
impl Variance for Cov {
    const BASIS_SYMBOL: &'static str = "dx";
}

/// Antisymmetric tensor field of fixed degree with `Poly` coefficients.
///
/// Degree 0 is a single polynomial attached to the empty index. No zero
/// coefficients are stored, so derived equality is structural equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltTensor<V: Variance> {
    m: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, Poly>,
    _variance: PhantomData<V>,
}

/// Degree-p antisymmetric contravariant tensor field.
pub type MultiVectorField = AltTensor<Contra>;
/// Degree-k differential form.
pub type DiffForm = AltTensor<Cov>;

impl<V: Variance> AltTensor<V> {
    pub fn zero(m: usize, degree: usize) -> Self {
        AltTensor { m, degree, terms: BTreeMap::new(), _variance: PhantomData }
    }

    /// Degree-0 tensor wrapping a function.
    pub fn scalar(m: usize, p: Poly) -> Self {
        assert_eq!(p.nvars(), m, "scalar coefficient must live on m variables");
        let mut t = Self::zero(m, 0);
        t.add_term(MultiIndex::empty(), p);
        t
    }

    /// Single basis term with coefficient one.
    pub fn basis(m: usize, indices: Vec<usize>) -> Self {
        Self::term(m, indices, Poly::one(m))
    }

    /// `coeff * e_{i_1} ^ ... ^ e_{i_p}` with an arbitrary index order;
    /// canonicalization applies the permutation sign.
    pub fn term(m: usize, indices: Vec<usize>, coeff: Poly) -> Self {
        assert!(indices.iter().all(|&i| i < m), "direction index out of range 0..{m}");
        assert_eq!(coeff.nvars(), m, "coefficient must live on m variables");
        let degree = indices.len();
        let mut t = Self::zero(m, degree);
        if let Some((mi, sign)) = sort_with_sign(indices) {
            t.add_term(mi, if sign < 0 { coeff.neg() } else { coeff });
        }
        t
    }

    pub fn from_terms(
        m: usize,
        degree: usize,
        items: impl IntoIterator<Item = (Vec<usize>, Poly)>,
    ) -> Self {
        let mut t = Self::zero(m, degree);
        for (indices, coeff) in items {
            assert_eq!(indices.len(), degree, "term degree mismatch");
            assert!(indices.iter().all(|&i| i < m), "direction index out of range 0..{m}");
            assert_eq!(coeff.nvars(), m, "coefficient must live on m variables");
            if let Some((mi, sign)) = sort_with_sign(indices) {
                t.add_term(mi, if sign < 0 { coeff.neg() } else { coeff });
            }
        }
        t
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Poly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, indices: &[usize]) -> Poly {
        self.terms
            .get(&MultiIndex(indices.to_vec()))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.m))
    }

    /// The wrapped polynomial of a degree-0 tensor.
    pub fn as_scalar(&self) -> Option<Poly> {
        if self.degree != 0 {
            return None;
        }
        Some(self.coeff(&[]))
    }

    fn add_term(&mut self, mi: MultiIndex, coeff: Poly) {
        debug_assert_eq!(mi.len(), self.degree);
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mi) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn add_signed(&mut self, indices: Vec<usize>, coeff: Poly) {
        if let Some((mi, sign)) = sort_with_sign(indices) {
            self.add_term(mi, if sign < 0 { coeff.neg() } else { coeff });
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "dimension mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch in tensor sum");
        let mut out = self.clone();
        for (mi, c) in &other.terms {
            out.add_term(mi.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        AltTensor {
            m: self.m,
            degree: self.degree,
            terms: self.terms.iter().map(|(mi, c)| (mi.clone(), c.neg())).collect(),
            _variance: PhantomData,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.m, self.degree);
        }
        AltTensor {
            m: self.m,
            degree: self.degree,
            terms: self.terms.iter().map(|(mi, k)| (mi.clone(), k.scale(c))).collect(),
            _variance: PhantomData,
        }
    }

    pub fn scale_poly(&self, p: &Poly) -> Self {
        assert_eq!(p.nvars(), self.m);
        let mut out = Self::zero(self.m, self.degree);
        for (mi, c) in &self.terms {
            out.add_term(mi.clone(), c.mul(p));
        }
        out
    }

    /// Exterior product. Degree adds; repeated directions cancel.
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "dimension mismatch");
        let mut out = Self::zero(self.m, self.degree + other.degree);
        for (ia, ca) in &self.terms {
            for (ib, cb) in &other.terms {
                let mut indices = ia.0.clone();
                indices.extend_from_slice(&ib.0);
                out.add_signed(indices, ca.mul(cb));
            }
        }
        out
    }

    /// Reinterpret on a larger ambient space (same indices, padded
    /// coefficients).
    pub fn pad(&self, new_m: usize) -> Self {
        assert!(new_m >= self.m);
        AltTensor {
            m: new_m,
            degree: self.degree,
            terms: self.terms.iter().map(|(mi, c)| (mi.clone(), c.pad(new_m))).collect(),
            _variance: PhantomData,
        }
    }

    /// Contraction against a single degree-1 object of the opposite kind,
    /// given by its component polynomials: insertion in the first slot,
    /// `i_w(e_{i_1}^...^e_{i_p}) = sum_k (-1)^{k-1} w_{i_k} e_{...without k}`.
    fn contract_components(&self, components: &[Poly]) -> Self {
        assert_eq!(components.len(), self.m);
        assert!(self.degree >= 1, "cannot contract a degree-0 tensor");
        let mut out = Self::zero(self.m, self.degree - 1);
        for (mi, c) in &self.terms {
            for (pos, &dir) in mi.indices().iter().enumerate() {
                let w = &components[dir];
                if w.is_zero() {
                    continue;
                }
                let piece = c.mul(w);
                out.add_term(mi.without(pos), if pos % 2 == 1 { piece.neg() } else { piece });
            }
        }
        out
    }

    fn components_deg1(&self) -> Vec<Poly> {
        assert_eq!(self.degree, 1, "expected a degree-1 tensor");
        let mut comps = vec![Poly::zero(self.m); self.m];
        for (mi, c) in &self.terms {
            comps[mi.indices()[0]] = c.clone();
        }
        comps
    }
}

impl<V: Variance> fmt::Display for AltTensor<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(mi, c)| {
                let basis = mi
                    .indices()
                    .iter()
                    .map(|i| format!("{}{}", V::BASIS_SYMBOL, i))
                    .join("^");
                if mi.is_empty() {
                    format!("({c})")
                } else if c.as_constant().map_or(false, |k| k.is_one()) {
                    basis
                } else {
                    format!("({c}) {basis}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl MultiVectorField {
    /// The coordinate vector field along direction `i`.
    pub fn coordinate(m: usize, i: usize) -> Self {
        Self::basis(m, vec![i])
    }

    /// Coefficient-wise exact evaluation at a point.
    pub fn evaluate(&self, point: &[Rational]) -> ConstMultiVector {
        assert_eq!(point.len(), self.m, "point length must equal ambient dimension");
        let mut out = ConstMultiVector::zero(self.m, self.degree);
        for (mi, c) in &self.terms {
            out.add_term(mi.clone(), c.eval(point));
        }
        out
    }

    /// True if every coefficient is a constant polynomial.
    pub fn is_constant(&self) -> bool {
        self.terms.values().all(|c| c.as_constant().is_some())
    }
}

impl DiffForm {
    /// The coordinate differential `dx_i`.
    pub fn coordinate(m: usize, i: usize) -> Self {
        Self::basis(m, vec![i])
    }

    /// The differential of a function, as a 1-form.
    pub fn differential(p: &Poly) -> DiffForm {
        let m = p.nvars();
        let mut out = DiffForm::zero(m, 1);
        for k in 0..m {
            let d = p.partial(k);
            if !d.is_zero() {
                out.add_term(MultiIndex(vec![k]), d);
            }
        }
        out
    }

    /// Pullback along the inclusion of the first `keep` coordinates:
    /// drops terms touching later directions and zeroes later variables
    /// inside coefficients.
    pub fn restrict_prefix(&self, keep: usize) -> DiffForm {
        assert!(keep <= self.m);
        let mut out = DiffForm::zero(keep, self.degree);
        for (mi, c) in &self.terms {
            if mi.indices().iter().any(|&i| i >= keep) {
                continue;
            }
            out.add_term(mi.clone(), c.restrict_prefix(keep));
        }
        out
    }

    /// Coefficient-wise evaluation; the result is a constant form reported
    /// as index/value pairs.
    pub fn evaluate(&self, point: &[Rational]) -> Vec<(MultiIndex, Rational)> {
        assert_eq!(point.len(), self.m);
        self.terms
            .iter()
            .filter_map(|(mi, c)| {
                let v = c.eval(point);
                if v.is_zero() {
                    None
                } else {
                    Some((mi.clone(), v))
                }
            })
            .collect()
    }
}

/// Insertion of a 1-form into the first slot of a multivector field.
pub fn contract_once(omega: &DiffForm, a: &MultiVectorField) -> MultiVectorField {
    assert_eq!(omega.ambient_dim(), a.ambient_dim(), "dimension mismatch");
    assert_eq!(omega.degree(), 1, "contract_once expects a 1-form");
    assert!(a.degree() >= 1, "contract_once: degree-0 input");
    a.contract_components(&omega.components_deg1())
}

/// Insertion of a vector field into the first slot of a form. Degree-0
/// forms contract to zero.
pub fn contract_form(x: &MultiVectorField, omega: &DiffForm) -> DiffForm {
    assert_eq!(x.ambient_dim(), omega.ambient_dim(), "dimension mismatch");
    assert_eq!(x.degree(), 1, "contract_form expects a vector field");
    if omega.degree() == 0 {
        return DiffForm::zero(omega.ambient_dim(), 0);
    }
    omega.contract_components(&x.components_deg1())
}

/// Iterated contraction `i_{df_k} ... i_{df_1} A` (first function applied
/// first).
pub fn contract_functions(a: &MultiVectorField, fs: &[Poly]) -> MultiVectorField {
    assert!(fs.len() <= a.degree(), "contract_functions: more functions than tensor degree");
    let mut cur = a.clone();
    for f in fs {
        assert_eq!(f.nvars(), a.ambient_dim(), "dimension mismatch");
        cur = contract_once(&DiffForm::differential(f), &cur);
    }
    cur
}

/// Contraction by a constant basis covector tuple `dx_{j_1}^...^dx_{j_k}`,
/// applied as iterated single contractions.
pub fn contract_basis_covectors(a: &MultiVectorField, tuple: &[usize]) -> MultiVectorField {
    let mut cur = a.clone();
    for &j in tuple {
        cur = contract_once(&DiffForm::coordinate(a.ambient_dim(), j), &cur);
    }
    cur
}

/// Full pairing `<A, mu_1 ^ ... ^ mu_n>` of a degree-n multivector with n
/// one-forms, computed as iterated first-slot contractions (mu_1 first).
pub fn pairing(a: &MultiVectorField, mus: &[DiffForm]) -> Poly {
    assert_eq!(mus.len(), a.degree(), "pairing: degree mismatch");
    let mut cur = a.clone();
    for mu in mus {
        cur = contract_once(mu, &cur);
    }
    cur.as_scalar().expect("full contraction yields degree 0")
}

/// Pairing of a degree-n multivector with n-1 one-forms, leaving one slot
/// open; the `skip`-th form (0-based) is omitted.
pub fn pairing_skip(a: &MultiVectorField, mus: &[DiffForm], skip: usize) -> MultiVectorField {
    assert_eq!(mus.len(), a.degree(), "pairing_skip: degree mismatch");
    let mut cur = a.clone();
    for (k, mu) in mus.iter().enumerate() {
        if k == skip {
            continue;
        }
        cur = contract_once(mu, &cur);
    }
    cur
}

/// Exterior derivative; raises degree by one, `d . d = 0`.
pub fn exterior_derivative(omega: &DiffForm) -> DiffForm {
    let m = omega.ambient_dim();
    let mut out = DiffForm::zero(m, omega.degree() + 1);
    for (mi, c) in omega.terms() {
        for k in 0..m {
            let d = c.partial(k);
            if d.is_zero() {
                continue;
            }
            let mut indices = vec![k];
            indices.extend_from_slice(mi.indices());
            out.add_signed(indices, d);
        }
    }
    out
}

/// Schouten-Nijenhuis bracket, normalized so that `[X, A]` is the Lie
/// derivative of `A` along a vector field `X` and `[X, f] = X(f)`.
///
/// Computed by bilinear expansion over decomposable terms: for
/// `A = f e_I`, `B = g e_J` with nonzero degrees,
///
/// ```text
/// [f e_I, g e_J] = sum_a (-1)^a f (d_{I_a} g) e_{[J_0] ++ I\a ++ J\0}
///                - sum_b (-1)^b g (d_{J_b} f) e_{I ++ J\b}
/// ```
///
/// which is the classical signed double sum of Lie brackets wedged with
/// complements, with the coefficient carried by the first factor.
pub fn schouten(a: &MultiVectorField, b: &MultiVectorField) -> MultiVectorField {
    assert_eq!(a.ambient_dim(), b.ambient_dim(), "dimension mismatch");
    let m = a.ambient_dim();
    let (p, q) = (a.degree(), b.degree());
    let out_degree = (p + q).saturating_sub(1);
    let mut out = MultiVectorField::zero(m, out_degree);
    if p == 0 && q == 0 {
        return out;
    }
    for (ia, ca) in a.terms() {
        for (ib, cb) in b.terms() {
            if p == 0 {
                // [f, g e_J] = -sum_b (-1)^b g (d_{J_b} f) e_{J\b}
                for (pos, &dir) in ib.indices().iter().enumerate() {
                    let d = ca.partial(dir);
                    if d.is_zero() {
                        continue;
                    }
                    let piece = cb.mul(&d);
                    let piece = if pos % 2 == 0 { piece.neg() } else { piece };
                    out.add_term(ib.without(pos), piece);
                }
            } else if q == 0 {
                // [f e_I, g] = sum_a (-1)^{p+a+1} f (d_{I_a} g) e_{I\a}
                for (pos, &dir) in ia.indices().iter().enumerate() {
                    let d = cb.partial(dir);
                    if d.is_zero() {
                        continue;
                    }
                    let piece = ca.mul(&d);
                    let piece = if (p + pos + 1) % 2 == 1 { piece.neg() } else { piece };
                    out.add_term(ia.without(pos), piece);
                }
            } else {
                for (pos, &dir) in ia.indices().iter().enumerate() {
                    let d = cb.partial(dir);
                    if d.is_zero() {
                        continue;
                    }
                    let piece = ca.mul(&d);
                    let piece = if pos % 2 == 1 { piece.neg() } else { piece };
                    let mut indices = vec![ib.indices()[0]];
                    indices.extend(ia.without(pos).0.iter());
                    indices.extend(ib.indices()[1..].iter());
                    out.add_signed(indices, piece);
                }
                for (pos, &dir) in ib.indices().iter().enumerate() {
                    let d = ca.partial(dir);
                    if d.is_zero() {
                        continue;
                    }
                    let piece = cb.mul(&d);
                    let piece = if pos % 2 == 0 { piece.neg() } else { piece };
                    let mut indices = ia.0.clone();
                    indices.extend(ib.without(pos).0.iter());
                    out.add_signed(indices, piece);
                }
            }
        }
    }
    out
}

/// Lie derivative of a multivector field along a vector field.
pub fn lie_derivative_mv(x: &MultiVectorField, t: &MultiVectorField) -> MultiVectorField {
    assert_eq!(x.degree(), 1, "lie derivative needs a vector field");
    schouten(x, t)
}

/// Lie derivative of a form along a vector field, by Cartan's formula
/// `L_X = i_X d + d i_X`.
pub fn lie_derivative_form(x: &MultiVectorField, omega: &DiffForm) -> DiffForm {
    assert_eq!(x.degree(), 1, "lie derivative needs a vector field");
    let a = contract_form(x, &exterior_derivative(omega));
    let b = exterior_derivative(&contract_form(x, omega));
    a.add(&b)
}

/// Complete (tangent) lift of a function: `d_T f = sum_k xdot_k df/dx_k` on
/// the doubled space, variables ordered (base block, dotted block).
pub fn tangent_lift_function(f: &Poly) -> Poly {
    let m = f.nvars();
    let mut out = Poly::zero(2 * m);
    for k in 0..m {
        let d = f.partial(k);
        if d.is_zero() {
            continue;
        }
        out = out.add(&d.pad(2 * m).mul(&Poly::var(2 * m, m + k)));
    }
    out
}

/// Complete (tangent) lift of a multivector field to the doubled space:
/// the derivative term carries all dotted directions, plus one term per
/// slot with that slot left undotted.
pub fn tangent_lift(a: &MultiVectorField) -> MultiVectorField {
    let m = a.ambient_dim();
    let mut out = MultiVectorField::zero(2 * m, a.degree());
    for (mi, c) in a.terms() {
        let dotted: Vec<usize> = mi.indices().iter().map(|&i| i + m).collect();
        out.add_signed(dotted.clone(), tangent_lift_function(c));
        let cpad = c.pad(2 * m);
        for k in 0..mi.len() {
            let mut indices = dotted.clone();
            indices[k] = mi.indices()[k];
            out.add_signed(indices, cpad.clone());
        }
    }
    out
}

/// Constant-coefficient multivector: an element of the exterior power of
/// the ambient vector space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstMultiVector {
    m: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl ConstMultiVector {
    pub fn zero(m: usize, degree: usize) -> Self {
        ConstMultiVector { m, degree, terms: BTreeMap::new() }
    }

    pub fn from_terms(
        m: usize,
        degree: usize,
        items: impl IntoIterator<Item = (Vec<usize>, Rational)>,
    ) -> Self {
        let mut out = Self::zero(m, degree);
        for (indices, c) in items {
            assert_eq!(indices.len(), degree, "term degree mismatch");
            assert!(indices.iter().all(|&i| i < m), "direction index out of range");
            if let Some((mi, sign)) = sort_with_sign(indices) {
                out.add_term(mi, if sign < 0 { -c } else { c });
            }
        }
        out
    }

    fn add_term(&mut self, mi: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mi) {
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

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "dimension mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (mi, c) in &other.terms {
            out.add_term(mi.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.m, self.degree);
        }
        ConstMultiVector {
            m: self.m,
            degree: self.degree,
            terms: self.terms.iter().map(|(mi, k)| (mi.clone(), k * c)).collect(),
        }
    }

    /// View as a multivector field with constant coefficients.
    pub fn to_field(&self) -> MultiVectorField {
        let mut out = MultiVectorField::zero(self.m, self.degree);
        for (mi, c) in &self.terms {
            out.add_term(mi.clone(), Poly::constant(self.m, c.clone()));
        }
        out
    }

    /// Extracts a constant multivector from a field with constant
    /// coefficients.
    pub fn from_field(field: &MultiVectorField) -> Option<Self> {
        let mut out = Self::zero(field.ambient_dim(), field.degree());
        for (mi, c) in field.terms() {
            out.add_term(mi.clone(), c.as_constant()?);
        }
        Some(out)
    }

    /// Components of a degree-1 constant multivector as a dense vector.
    pub fn to_vector(&self) -> Vec<Rational> {
        assert_eq!(self.degree, 1);
        let mut v = vec![Rational::zero(); self.m];
        for (mi, c) in &self.terms {
            v[mi.indices()[0]] = c.clone();
        }
        v
    }

    /// Contraction by a constant basis covector tuple.
    pub fn contract_basis(&self, tuple: &[usize]) -> ConstMultiVector {
        assert!(tuple.len() <= self.degree);
        let mut cur = self.clone();
        for &j in tuple {
            let mut next = ConstMultiVector::zero(self.m, cur.degree - 1);
            for (mi, c) in &cur.terms {
                if let Some(pos) = mi.indices().iter().position(|&d| d == j) {
                    let v = if pos % 2 == 1 { -c.clone() } else { c.clone() };
                    next.add_term(mi.without(pos), v);
                }
            }
            cur = next;
        }
        cur
    }
}

impl fmt::Display for ConstMultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_field())
    }
}

/// Span of all contractions of a nonzero constant multivector by basis
/// covector tuples of length degree-1. For a decomposable multivector this
/// is the factor subspace. Returned as a reduced-echelon basis.
pub fn support_subspace(lambda: &ConstMultiVector) -> Vec<Vec<Rational>> {
    assert!(!lambda.is_zero(), "support of the zero multivector is undefined");
    assert!(lambda.degree() >= 1, "support needs degree >= 1");
    let m = lambda.ambient_dim();
    let vectors: Vec<Vec<Rational>> = (0..m)
        .combinations(lambda.degree() - 1)
        .map(|tuple| lambda.contract_basis(&tuple).to_vector())
        .filter(|v| v.iter().any(|c| !c.is_zero()))
        .collect();
    subspace_span(&vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::{rat, rat_int};

    fn x(m: usize, i: usize) -> Poly {
        Poly::var(m, i)
    }

    /// so(3) linear Poisson tensor: x2 d0^d1 - x1 d0^d2 + x0 d1^d2.
    pub(crate) fn lambda_so3() -> MultiVectorField {
        MultiVectorField::from_terms(
            3,
            2,
            vec![
                (vec![0, 1], x(3, 2)),
                (vec![0, 2], x(3, 1).neg()),
                (vec![1, 2], x(3, 0)),
            ],
        )
    }

    #[test]
    fn wedge_examples() {
        let m = 4;
        let d = |i: usize| MultiVectorField::coordinate(m, i);
        let d23 = d(2).wedge(&d(3));
        assert_eq!(d(1).wedge(&d23), MultiVectorField::basis(m, vec![1, 2, 3]));
        assert!(d(1).wedge(&d(1)).is_zero());
        // (x0 d2) ^ d1 = -x0 d1^d2
        let a = MultiVectorField::term(m, vec![2], x(m, 0));
        let expect = MultiVectorField::term(m, vec![1, 2], x(m, 0).neg());
        assert_eq!(a.wedge(&d(1)), expect);
    }

    #[test]
    fn wedge_graded_commutativity() {
        let m = 4;
        let a = MultiVectorField::from_terms(
            m,
            2,
            vec![(vec![0, 1], x(m, 2)), (vec![1, 3], Poly::one(m))],
        );
        let b = MultiVectorField::term(m, vec![2], x(m, 0));
        // deg 2 * deg 1: A^B = (+1)^{2*1} B^A
        assert_eq!(a.wedge(&b), b.wedge(&a));
        let c = MultiVectorField::term(m, vec![3], x(m, 1));
        // deg 1 * deg 1: anticommute
        assert_eq!(b.wedge(&c), c.wedge(&b).neg());
    }

    #[test]
    fn contraction_sign_anchors() {
        let m = 4;
        let d01 = MultiVectorField::basis(m, vec![0, 1]);
        let dx = |i: usize| DiffForm::coordinate(m, i);
        assert_eq!(contract_once(&dx(0), &d01), MultiVectorField::coordinate(m, 1));
        assert_eq!(contract_once(&dx(1), &d01), MultiVectorField::coordinate(m, 0).neg());
        // hand expansion of the insertion formula: i_{dx2}(d0^d2^d3) = -d0^d3
        let t = MultiVectorField::basis(m, vec![0, 2, 3]);
        assert_eq!(
            contract_once(&dx(2), &t),
            MultiVectorField::basis(m, vec![0, 3]).neg()
        );
    }

    #[test]
    fn contract_functions_determinant_anchor() {
        let m = 3;
        let vol = MultiVectorField::basis(m, vec![0, 1, 2]);
        let fs = vec![x(m, 0), x(m, 1), x(m, 2)];
        assert_eq!(contract_functions(&vol, &fs).as_scalar().unwrap(), Poly::one(m));
        let swapped = vec![x(m, 1), x(m, 0), x(m, 2)];
        assert_eq!(
            contract_functions(&vol, &swapped).as_scalar().unwrap(),
            Poly::one(m).neg()
        );
        let repeated = vec![x(m, 0), x(m, 0)];
        assert!(contract_functions(&vol, &repeated).is_zero());
    }

    #[test]
    fn pairing_examples() {
        let m = 3;
        let d01 = MultiVectorField::basis(m, vec![0, 1]);
        let dx = |i: usize| DiffForm::coordinate(m, i);
        assert_eq!(pairing(&d01, &[dx(0), dx(1)]), Poly::one(m));
        assert_eq!(pairing(&d01, &[dx(1), dx(0)]), Poly::one(m).neg());
        let t = MultiVectorField::term(m, vec![0, 1], x(m, 2));
        assert_eq!(pairing(&t, &[dx(0), dx(1)]), x(m, 2));
    }

    #[test]
    fn exterior_derivative_examples() {
        let m = 3;
        // d(x0 dx1) = dx0^dx1
        let w = DiffForm::term(m, vec![1], x(m, 0));
        assert_eq!(exterior_derivative(&w), DiffForm::basis(m, vec![0, 1]));
        // d(df) = 0
        let f = x(m, 0).mul(&x(m, 1)).add(&x(m, 2).mul(&x(m, 2)));
        assert!(exterior_derivative(&exterior_derivative(&DiffForm::scalar(m, f))).is_zero());
        // d((1/2)(x0 dx1 - x1 dx0)) = dx0^dx1
        let half = rat(1, 2);
        let w2 = DiffForm::term(m, vec![1], x(m, 0).scale(&half))
            .add(&DiffForm::term(m, vec![0], x(m, 1).scale(&half).neg()));
        assert_eq!(exterior_derivative(&w2), DiffForm::basis(m, vec![0, 1]));
    }

    #[test]
    fn schouten_is_lie_bracket_on_vector_fields() {
        let m = 1;
        let ddx = MultiVectorField::coordinate(m, 0);
        let xddx = MultiVectorField::term(m, vec![0], x(m, 0));
        assert_eq!(schouten(&ddx, &xddx), ddx);
        // [x d/dx, d/dx] = -d/dx
        assert_eq!(schouten(&xddx, &ddx), ddx.neg());
    }

    #[test]
    fn schouten_on_functions() {
        let m = 2;
        let f = x(m, 0);
        let xf = MultiVectorField::scalar(m, f.clone());
        let v = MultiVectorField::term(m, vec![0], x(m, 1));
        // [X, f] = X(f)
        assert_eq!(schouten(&v, &xf), MultiVectorField::scalar(m, x(m, 1)));
        // [f, X] = -X(f)
        assert_eq!(schouten(&xf, &v), MultiVectorField::scalar(m, x(m, 1).neg()));
    }

    #[test]
    fn schouten_constant_tensor_vanishes() {
        let vol = MultiVectorField::basis(3, vec![0, 1, 2]);
        assert!(schouten(&vol, &vol).is_zero());
    }

    #[test]
    fn schouten_so3_jacobi() {
        // [Lambda_so3, Lambda_so3] = 0 certifies the so(3) Jacobi identity.
        let l = lambda_so3();
        assert!(schouten(&l, &l).is_zero());
    }

    #[test]
    fn lie_derivative_examples() {
        let m = 2;
        // L_{d0}(x0 dx1) = dx1
        let v = MultiVectorField::coordinate(m, 0);
        let w = DiffForm::term(m, vec![1], x(m, 0));
        assert_eq!(lie_derivative_form(&v, &w), DiffForm::coordinate(m, 1));
        // L_X f = X(f)
        let xf = MultiVectorField::term(m, vec![0], x(m, 1));
        let f = MultiVectorField::scalar(m, x(m, 0));
        assert_eq!(lie_derivative_mv(&xf, &f), MultiVectorField::scalar(m, x(m, 1)));
        // constant field, constant tensor
        let t = MultiVectorField::basis(3, vec![1, 2]);
        assert!(lie_derivative_mv(&MultiVectorField::coordinate(3, 0), &t).is_zero());
    }

    #[test]
    fn tangent_lift_examples() {
        // d_T(x d/dx) = xdot d/dxdot + x d/dx
        let a = MultiVectorField::term(1, vec![0], x(1, 0));
        let lifted = tangent_lift(&a);
        let expect = MultiVectorField::from_terms(
            2,
            1,
            vec![(vec![1], x(2, 1)), (vec![0], x(2, 0))],
        );
        assert_eq!(lifted, expect);

        // d_T(d0^d1) = d_{xdot0}^d1 + d0^d_{xdot1}
        let b = MultiVectorField::basis(2, vec![0, 1]);
        let lifted = tangent_lift(&b);
        let expect = MultiVectorField::from_terms(
            4,
            2,
            vec![
                (vec![2, 1], Poly::one(4)),
                (vec![0, 3], Poly::one(4)),
            ],
        );
        assert_eq!(lifted, expect);

        assert!(tangent_lift(&MultiVectorField::zero(2, 1)).is_zero());
    }

    #[test]
    fn tangent_lift_function_examples() {
        assert_eq!(tangent_lift_function(&x(2, 0)), x(4, 2));
        assert!(tangent_lift_function(&Poly::constant(2, rat_int(7))).is_zero());
        let f = x(2, 0).mul(&x(2, 1));
        let expect = x(4, 2).mul(&x(4, 1)).add(&x(4, 0).mul(&x(4, 3)));
        assert_eq!(tangent_lift_function(&f), expect);
    }

    #[test]
    fn support_examples() {
        let e = |i: usize| {
            let mut v = vec![Rational::zero(); 4];
            v[i] = rat_int(1);
            v
        };
        let l = ConstMultiVector::from_terms(4, 2, vec![(vec![0, 1], rat_int(1))]);
        assert_eq!(support_subspace(&l), vec![e(0), e(1)]);

        let l2 = ConstMultiVector::from_terms(
            4,
            2,
            vec![(vec![0, 1], rat_int(1)), (vec![2, 3], rat_int(1))],
        );
        assert_eq!(support_subspace(&l2).len(), 4);

        assert_eq!(support_subspace(&l.scale(&rat(-7, 3))), support_subspace(&l));
    }

    #[test]
    fn evaluate_examples() {
        let m = 3;
        let t = MultiVectorField::term(m, vec![0, 1], x(m, 2));
        let at = t.evaluate(&[rat_int(0), rat_int(0), rat_int(2)]);
        assert_eq!(
            at,
            ConstMultiVector::from_terms(m, 2, vec![(vec![0, 1], rat_int(2))])
        );
        assert!(t.evaluate(&[rat_int(1), rat_int(1), rat_int(0)]).is_zero());
        let so3_at = lambda_so3().evaluate(&[rat_int(0), rat_int(0), rat_int(1)]);
        assert_eq!(
            so3_at,
            ConstMultiVector::from_terms(3, 2, vec![(vec![0, 1], rat_int(1))])
        );
    }

    #[test]
    fn double_contraction_vanishes() {
        let mut sampler = crate::sample::Sampler::new(31);
        for _ in 0..20 {
            let m = 4;
            let deg = 2 + sampler.index(2);
            let a = sampler.multivector(m, deg, 2);
            let omega = sampler.form(m, 1, 2);
            let once = contract_once(&omega, &a);
            if once.degree() >= 1 {
                assert!(contract_once(&omega, &once).is_zero());
            }
        }
    }

    #[test]
    fn d_squared_vanishes_on_random_forms() {
        let mut sampler = crate::sample::Sampler::new(32);
        for _ in 0..20 {
            let m = 4;
            let deg = sampler.index(4);
            let w = sampler.form(m, deg, 3);
            assert!(exterior_derivative(&exterior_derivative(&w)).is_zero());
        }
    }

    fn sign(k: usize) -> Rational {
        if k % 2 == 0 {
            rat_int(1)
        } else {
            rat_int(-1)
        }
    }

    /// Zero tensors compare equal whatever degree they were produced at;
    /// brackets of two degree-0 inputs have no honest degree to carry.
    fn assert_same(lhs: &MultiVectorField, rhs: &MultiVectorField, label: &str) {
        if lhs.is_zero() && rhs.is_zero() {
            return;
        }
        assert_eq!(lhs, rhs, "{label}");
    }

    #[test]
    fn schouten_graded_antisymmetry_and_leibniz() {
        let mut sampler = crate::sample::Sampler::new(33);
        let m = 3;
        for _ in 0..25 {
            let p = sampler.index(3);
            let q = sampler.index(3);
            let r = sampler.index(2);
            let a = sampler.multivector(m, p, 2);
            let b = sampler.multivector(m, q, 2);
            let c = sampler.multivector(m, r, 2);
            // [A,B] = -(-1)^{(p-1)(q-1)} [B,A]
            let lhs = schouten(&a, &b);
            let rhs = schouten(&b, &a)
                .scale(&sign((p + 1) * (q + 1)))
                .neg();
            assert_same(&lhs, &rhs, "antisymmetry");
            // [A, B^C] = [A,B]^C + (-1)^{(p-1)q} B^[A,C]
            let lhs = schouten(&a, &b.wedge(&c));
            let first = schouten(&a, &b).wedge(&c);
            let second = b.wedge(&schouten(&a, &c)).scale(&sign((p + 1) * q));
            let rhs = if first.is_zero() {
                second
            } else if second.is_zero() {
                first
            } else {
                first.add(&second)
            };
            assert_same(&lhs, &rhs, "leibniz");
        }
    }

    #[test]
    fn schouten_graded_jacobi() {
        let mut sampler = crate::sample::Sampler::new(34);
        let m = 3;
        for _ in 0..15 {
            let p = 1 + sampler.index(2);
            let q = 1 + sampler.index(2);
            let r = 1 + sampler.index(2);
            let a = sampler.multivector(m, p, 1);
            let b = sampler.multivector(m, q, 1);
            let c = sampler.multivector(m, r, 1);
            let t1 = schouten(&a, &schouten(&b, &c)).scale(&sign((p + 1) * (r + 1)));
            let t2 = schouten(&b, &schouten(&c, &a)).scale(&sign((q + 1) * (p + 1)));
            let t3 = schouten(&c, &schouten(&a, &b)).scale(&sign((r + 1) * (q + 1)));
            assert!(
                t1.add(&t2).add(&t3).is_zero(),
                "graded jacobi failed for degrees ({p},{q},{r})"
            );
        }
    }

    #[test]
    fn tangent_lift_is_a_schouten_morphism() {
        let mut sampler = crate::sample::Sampler::new(35);
        let m = 3;
        for _ in 0..15 {
            let p = sampler.index(3);
            let q = sampler.index(3);
            let a = sampler.multivector(m, p, 2);
            let b = sampler.multivector(m, q, 2);
            let lhs = tangent_lift(&schouten(&a, &b));
            let rhs = schouten(&tangent_lift(&a), &tangent_lift(&b));
            assert_same(&lhs, &rhs, "lift morphism");
        }
    }

    #[test]
    fn tangent_lift_commutes_with_single_contraction() {
        let mut sampler = crate::sample::Sampler::new(36);
        let m = 3;
        for _ in 0..15 {
            let deg = 1 + sampler.index(3);
            let a = sampler.multivector(m, deg, 2);
            let f = sampler.sparse_poly(m, 2);
            let lhs = contract_functions(&tangent_lift(&a), &[tangent_lift_function(&f)]);
            let rhs = tangent_lift(&contract_functions(&a, &[f]));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    #[should_panic(expected = "degree-0 input")]
    fn contract_once_rejects_degree_zero() {
        let f = MultiVectorField::scalar(2, Poly::one(2));
        let _ = contract_once(&DiffForm::coordinate(2, 0), &f);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn wedge_rejects_dimension_mismatch() {
        let _ = MultiVectorField::coordinate(2, 0).wedge(&MultiVectorField::coordinate(3, 0));
    }
}

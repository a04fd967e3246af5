//! Finite-dimensional n-ary skew brackets given by rational structure
//! constants: fundamental-identity checking, ideals and direct sums, the
//! correspondence with linear multivector fields, the wedge construction
//! that produces Filippov tensors from Lie algebras, the adjoint 1-cocycle
//! condition, and generators for the four linear normal-form families.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exterior::{
    contract_once, exterior_derivative, sort_with_sign, ConstMultiVector, DiffForm,
    MultiVectorField,
};
use crate::ratpoly::{in_span, rat, subspace_span, Poly, Rational};
use crate::report::{CheckReport, CheckStats, Residual, Witness};

/// n-ary skew-symmetric bracket on a finite-dimensional space, stored as
/// structure constants on strictly increasing index tuples only; access on
/// arbitrary tuples expands by the permutation sign and kills repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NAryStructure {
    n: usize,
    dim: usize,
    c: BTreeMap<Vec<usize>, Vec<Rational>>,
}

impl NAryStructure {
    pub fn new(n: usize, dim: usize) -> Self {
        assert!(n >= 2, "bracket arity must be at least 2");
        NAryStructure { n, dim, c: BTreeMap::new() }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Structure constants on increasing tuples, zero rows pruned.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Vec<Rational>)> {
        self.c.iter()
    }

    /// Sets `[e_{t_1},..,e_{t_n}] = sum_k value_k e_k` for an increasing
    /// tuple.
    pub fn set_bracket(&mut self, tuple: &[usize], value: Vec<Rational>) -> Result<()> {
        if tuple.len() != self.n {
            return Err(Error::Arity { expected: self.n, got: tuple.len() });
        }
        if !tuple.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Shape(format!("tuple {tuple:?} is not strictly increasing")));
        }
        if let Some(&i) = tuple.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange { index: i, bound: self.dim });
        }
        if value.len() != self.dim {
            return Err(Error::Dimension(format!(
                "output vector has length {}, expected {}",
                value.len(),
                self.dim
            )));
        }
        if value.iter().all(Rational::is_zero) {
            self.c.remove(tuple);
        } else {
            self.c.insert(tuple.to_vec(), value);
        }
        Ok(())
    }

    /// Bracket of basis vectors, with sign expansion; zero on repeats.
    pub fn bracket_apply(&self, indices: &[usize]) -> Result<Vec<Rational>> {
        if indices.len() != self.n {
            return Err(Error::Arity { expected: self.n, got: indices.len() });
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange { index: i, bound: self.dim });
        }
        let zero = vec![Rational::zero(); self.dim];
        let Some((sorted, sign)) = sort_with_sign(indices.to_vec()) else {
            return Ok(zero);
        };
        let Some(row) = self.c.get(sorted.indices()) else {
            return Ok(zero);
        };
        Ok(if sign < 0 { row.iter().map(|v| -v).collect() } else { row.clone() })
    }

    /// Multilinear extension of the bracket to arbitrary vectors.
    pub fn bracket_vectors(&self, args: &[Vec<Rational>]) -> Result<Vec<Rational>> {
        if args.len() != self.n {
            return Err(Error::Arity { expected: self.n, got: args.len() });
        }
        for a in args {
            if a.len() != self.dim {
                return Err(Error::Dimension(format!(
                    "argument of length {}, expected {}",
                    a.len(),
                    self.dim
                )));
            }
        }
        let supports: Vec<Vec<(usize, &Rational)>> = args
            .iter()
            .map(|a| a.iter().enumerate().filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        let mut out = vec![Rational::zero(); self.dim];
        if supports.iter().any(Vec::is_empty) {
            return Ok(out);
        }
        for combo in supports.iter().multi_cartesian_product() {
            let tuple: Vec<usize> = combo.iter().map(|(i, _)| *i).collect();
            let coeff = combo
                .iter()
                .fold(Rational::from_integer(1.into()), |acc, (_, v)| acc * *v);
            let bracket = self.bracket_apply(&tuple)?;
            for (o, b) in out.iter_mut().zip(bracket) {
                *o += &coeff * b;
            }
        }
        Ok(out)
    }
}

/// Exact fundamental-identity check over all basis tuples: the identity is
/// multilinear in every slot, so basis tuples decide it.
pub fn check_fundamental_identity(s: &NAryStructure) -> CheckReport {
    let n = s.arity();
    let m = s.dim();
    let f_tuples: Vec<Vec<usize>> = (0..m).combinations(n - 1).collect();
    let g_tuples: Vec<Vec<usize>> = (0..m).combinations(n).collect();
    let mut checked = 0u64;
    for fs in &f_tuples {
        for gs in &g_tuples {
            checked += 1;
            let inner = s.bracket_apply(gs).expect("valid tuple");
            let mut lhs = vec![Rational::zero(); m];
            for (k, coeff) in inner.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let mut t = fs.clone();
                t.push(k);
                for (o, b) in lhs.iter_mut().zip(s.bracket_apply(&t).expect("valid tuple")) {
                    *o += coeff * b;
                }
            }
            let mut rhs = vec![Rational::zero(); m];
            for i in 0..n {
                let mut t = fs.clone();
                t.push(gs[i]);
                let braced = s.bracket_apply(&t).expect("valid tuple");
                for (k, coeff) in braced.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    let mut outer = gs.clone();
                    outer[i] = k;
                    for (o, b) in
                        rhs.iter_mut().zip(s.bracket_apply(&outer).expect("valid tuple"))
                    {
                        *o += coeff * b;
                    }
                }
            }
            let residual: Vec<Rational> =
                lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            if residual.iter().any(|v| !v.is_zero()) {
                let witness = Witness::new("fundamental-identity", Residual::Vector(residual))
                    .with_tuples(vec![fs.clone(), gs.clone()]);
                return CheckReport::fail(witness, CheckStats::new(checked));
            }
        }
    }
    CheckReport::pass(CheckStats::new(checked))
}

/// A binary structure whose fundamental identity (Jacobi) has been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieAlgebra(NAryStructure);

impl LieAlgebra {
    pub fn new(s: NAryStructure) -> Result<Self> {
        if s.arity() != 2 {
            return Err(Error::Arity { expected: 2, got: s.arity() });
        }
        if !check_fundamental_identity(&s).is_pass() {
            return Err(Error::Precondition("structure does not satisfy the Jacobi identity".into()));
        }
        Ok(LieAlgebra(s))
    }

    pub fn structure(&self) -> &NAryStructure {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// The linear degree-n field whose coefficient on a basis n-vector is the
/// corresponding bracket of coordinates.
pub fn linear_tensor_from_structure(s: &NAryStructure) -> MultiVectorField {
    let m = s.dim();
    let items: Vec<(Vec<usize>, Poly)> = s
        .entries()
        .map(|(tuple, row)| (tuple.clone(), Poly::from_linear_coeffs(row)))
        .collect();
    MultiVectorField::from_terms(m, s.arity(), items)
}

/// Inverse of `linear_tensor_from_structure`; every coefficient must be
/// homogeneous linear.
pub fn structure_from_linear_tensor(lambda: &MultiVectorField) -> Result<NAryStructure> {
    let n = lambda.degree();
    if n < 2 {
        return Err(Error::Shape(format!("need a tensor of degree >= 2, got {n}")));
    }
    let mut s = NAryStructure::new(n, lambda.ambient_dim());
    for (mi, coeff) in lambda.terms() {
        let Some(row) = coeff.linear_coeffs() else {
            return Err(Error::Shape(format!(
                "coefficient of {:?} is not homogeneous linear: {coeff}",
                mi.indices()
            )));
        };
        s.set_bracket(mi.indices(), row)?;
    }
    Ok(s)
}

/// Fundamental identity restricted to linear functions, decided through
/// the structure constants of the linear tensor. Passing makes the tensor
/// a Filippov tensor.
pub fn fi_check_linear_functions(lambda: &MultiVectorField) -> Result<CheckReport> {
    Ok(check_fundamental_identity(&structure_from_linear_tensor(lambda)?))
}

/// Block direct sum; mixed brackets vanish.
pub fn direct_sum(s1: &NAryStructure, s2: &NAryStructure) -> Result<NAryStructure> {
    if s1.arity() != s2.arity() {
        return Err(Error::Arity { expected: s1.arity(), got: s2.arity() });
    }
    let m1 = s1.dim();
    let mut out = NAryStructure::new(s1.arity(), m1 + s2.dim());
    for (tuple, row) in s1.entries() {
        let mut value = row.clone();
        value.resize(m1 + s2.dim(), Rational::zero());
        out.set_bracket(tuple, value)?;
    }
    for (tuple, row) in s2.entries() {
        let shifted: Vec<usize> = tuple.iter().map(|&i| i + m1).collect();
        let mut value = vec![Rational::zero(); m1];
        value.extend(row.iter().cloned());
        out.set_bracket(&shifted, value)?;
    }
    Ok(out)
}

/// Span of all bracket values on basis tuples: the smallest ideal
/// containing the image of the bracket. Reduced-echelon basis.
pub fn derived_ideal(s: &NAryStructure) -> Vec<Vec<Rational>> {
    let values: Vec<Vec<Rational>> = s.entries().map(|(_, row)| row.clone()).collect();
    subspace_span(&values)
}

/// Does the bracket map `(anything, .., anything, W)` into `W`?
pub fn is_ideal(s: &NAryStructure, w: &[Vec<Rational>]) -> Result<bool> {
    let m = s.dim();
    for v in w {
        if v.len() != m {
            return Err(Error::Dimension(format!(
                "subspace vector of length {}, expected {m}",
                v.len()
            )));
        }
    }
    let basis = subspace_span(w);
    let unit = |i: usize| {
        let mut v = vec![Rational::zero(); m];
        v[i] = Rational::from_integer(1.into());
        v
    };
    for tuple in (0..m).combinations(s.arity() - 1) {
        for wv in &basis {
            let mut args: Vec<Vec<Rational>> = tuple.iter().map(|&i| unit(i)).collect();
            args.push(wv.clone());
            let out = s.bracket_vectors(&args)?;
            if !in_span(&basis, &out) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Wedges the linear tensor of a Lie algebra with k fresh coordinate
/// directions: a degree-(k+2) linear tensor on dim + k variables that
/// satisfies the fundamental identity on linear functions.
pub fn example1_build(g: &LieAlgebra, k: usize) -> MultiVectorField {
    assert!(k >= 1, "need at least one extra direction");
    let m = g.dim();
    let mut out = linear_tensor_from_structure(g.structure()).pad(m + k);
    for j in 0..k {
        out = out.wedge(&MultiVectorField::coordinate(m + k, m + j));
    }
    out
}

/// Linear map from the algebra into its n-th exterior power, given by the
/// images of the basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleMap {
    n: usize,
    dim: usize,
    images: Vec<ConstMultiVector>,
}

impl CocycleMap {
    pub fn new(n: usize, dim: usize, images: Vec<ConstMultiVector>) -> Result<Self> {
        if images.len() != dim {
            return Err(Error::Dimension(format!(
                "expected {dim} images, got {}",
                images.len()
            )));
        }
        for (i, img) in images.iter().enumerate() {
            if img.ambient_dim() != dim || img.degree() != n {
                return Err(Error::Shape(format!(
                    "image {i} must be a degree-{n} multivector on {dim} directions"
                )));
            }
        }
        Ok(CocycleMap { n, dim, images })
    }

    pub fn zero(n: usize, dim: usize) -> Self {
        CocycleMap { n, dim, images: vec![ConstMultiVector::zero(dim, n); dim] }
    }

    pub fn image(&self, basis_index: usize) -> &ConstMultiVector {
        &self.images[basis_index]
    }

    pub fn images(&self) -> &[ConstMultiVector] {
        &self.images
    }

    /// Image of an arbitrary vector.
    pub fn apply(&self, v: &[Rational]) -> ConstMultiVector {
        let mut out = ConstMultiVector::zero(self.dim, self.n);
        for (c, img) in v.iter().zip(&self.images) {
            if !c.is_zero() {
                out = out.add(&img.scale(c));
            }
        }
        out
    }
}

/// Adjoint action extended to the n-th exterior power as a derivation of
/// the wedge.
fn extended_ad(g: &LieAlgebra, a: usize, v: &ConstMultiVector) -> ConstMultiVector {
    let mut items: Vec<(Vec<usize>, Rational)> = Vec::new();
    for (mi, c) in v.terms() {
        for (slot, &t) in mi.indices().iter().enumerate() {
            let w = g.structure().bracket_apply(&[a, t]).expect("basis pair");
            for (k, coeff) in w.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let mut indices = mi.indices().to_vec();
                indices[slot] = k;
                items.push((indices, c * coeff));
            }
        }
    }
    ConstMultiVector::from_terms(v.ambient_dim(), v.degree(), items)
}

/// 1-cocycle condition for a map into the n-th exterior power of the
/// adjoint representation: `delta([X,Y]) = X.delta(Y) - Y.delta(X)` on all
/// basis pairs.
pub fn adjoint_cocycle_check(g: &LieAlgebra, delta: &CocycleMap) -> Result<CheckReport> {
    if delta.dim != g.dim() {
        return Err(Error::Shape(format!(
            "cocycle on dimension {}, algebra has {}",
            delta.dim,
            g.dim()
        )));
    }
    let m = g.dim();
    let mut checked = 0u64;
    for a in 0..m {
        for b in a + 1..m {
            checked += 1;
            let bracket = g.structure().bracket_apply(&[a, b])?;
            let lhs = delta.apply(&bracket);
            let rhs = extended_ad(g, a, delta.image(b))
                .add(&extended_ad(g, b, delta.image(a)).scale(&rat(-1, 1)));
            let residual = lhs.add(&rhs.scale(&rat(-1, 1)));
            if !residual.is_zero() {
                let witness =
                    Witness::new("adjoint-cocycle", Residual::ConstMultiVector(residual))
                        .with_tuples(vec![vec![a], vec![b]]);
                return Ok(CheckReport::fail(witness, CheckStats::new(checked)));
            }
        }
    }
    Ok(CheckReport::pass(CheckStats::new(checked)))
}

fn validate_linear(phi: &Poly, what: &str) -> Result<()> {
    if !phi.is_zero() && !phi.is_homogeneous_linear() {
        return Err(Error::Shape(format!("{what} must be homogeneous linear, got {phi}")));
    }
    Ok(())
}

fn validate_quadratic_in_prefix(phi: &Poly, prefix: usize, what: &str) -> Result<()> {
    for (mono, _) in phi.terms() {
        if mono.total_degree() != 2 {
            return Err(Error::Shape(format!("{what} must be homogeneous quadratic, got {phi}")));
        }
        if mono.degree_in(prefix..phi.nvars()) > 0 {
            return Err(Error::Shape(format!(
                "{what} may only involve the first {prefix} variables, got {phi}"
            )));
        }
    }
    Ok(())
}

/// Family (A): a linear function times the leading coordinate n-blade.
pub fn normal_form_a(n: usize, m: usize, phi: &Poly) -> Result<MultiVectorField> {
    if n == 0 || n > m {
        return Err(Error::Shape(format!("need 1 <= n <= m, got n={n}, m={m}")));
    }
    if phi.nvars() != m {
        return Err(Error::Dimension(format!("phi on {} variables, expected {m}", phi.nvars())));
    }
    validate_linear(phi, "phi")?;
    Ok(MultiVectorField::term(m, (0..n).collect(), phi.clone()))
}

/// Family (C): the leading (n-1)-blade wedged with a general linear vector
/// field in the trailing variables, `sum a_{ij} x_i d_j` over the trailing
/// block.
pub fn normal_form_c(n: usize, m: usize, a: &[Vec<Rational>]) -> Result<MultiVectorField> {
    if n < 2 || m < n - 1 {
        return Err(Error::Shape(format!("need n >= 2 and m >= n-1, got n={n}, m={m}")));
    }
    let block = m - (n - 1);
    if a.len() != block || a.iter().any(|row| row.len() != block) {
        return Err(Error::Dimension(format!("coefficient matrix must be {block}x{block}")));
    }
    let mut field = MultiVectorField::zero(m, 1);
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            field = field.add(&MultiVectorField::term(
                m,
                vec![n - 1 + j],
                Poly::var(m, n - 1 + i).scale(v),
            ));
        }
    }
    let mut out = MultiVectorField::basis(m, (0..n - 1).collect());
    out = out.wedge(&field);
    Ok(out)
}

/// Shared tail of the (B) families: contract the leading (n+1)-volume by a
/// linear 1-form.
fn contract_leading_volume(n: usize, m: usize, alpha: &DiffForm) -> MultiVectorField {
    let vol = MultiVectorField::basis(m, (0..=n).collect());
    contract_once(alpha, &vol)
}

/// Family (B)(1): `alpha = d phi + sum_{i>n+1, j<=n+1} a_ij x_i dx_j` with
/// phi quadratic in the first n+1 variables; the restriction of alpha to
/// that block is closed. Entries of `a` are (transverse index, block index,
/// value), 0-based.
pub fn normal_form_b1(
    n: usize,
    m: usize,
    phi: &Poly,
    a: &[(usize, usize, Rational)],
) -> Result<MultiVectorField> {
    if n < 1 || m < n + 1 {
        return Err(Error::Shape(format!("need m >= n+1, got n={n}, m={m}")));
    }
    if phi.nvars() != m {
        return Err(Error::Dimension(format!("phi on {} variables, expected {m}", phi.nvars())));
    }
    validate_quadratic_in_prefix(phi, n + 1, "phi")?;
    let mut alpha = DiffForm::differential(phi);
    for (i, j, v) in a {
        if *i < n + 1 || *i >= m {
            return Err(Error::IndexOutOfRange { index: *i, bound: m });
        }
        if *j > n {
            return Err(Error::IndexOutOfRange { index: *j, bound: n + 1 });
        }
        alpha = alpha.add(&DiffForm::term(m, vec![*j], Poly::var(m, *i).scale(v)));
    }
    let restricted = exterior_derivative(&alpha.restrict_prefix(n + 1));
    if !restricted.is_zero() {
        return Err(Error::Precondition(
            "restriction of alpha to the leading block must be closed".into(),
        ));
    }
    Ok(contract_leading_volume(n, m, &alpha))
}

/// Family (B)(2): `alpha = d phi + ((x_0 + sum a_i x_i) dx_1 - (x_1 + sum
/// b_j x_j) dx_0)/2` with phi quadratic in the first two variables and the
/// sums running over the transverse variables; the restriction of alpha to
/// the leading block has nonzero differential at the origin.
pub fn normal_form_b2(
    n: usize,
    m: usize,
    phi: &Poly,
    a: &[Rational],
    b: &[Rational],
) -> Result<MultiVectorField> {
    if n < 1 || m < n + 1 {
        return Err(Error::Shape(format!("need m >= n+1, got n={n}, m={m}")));
    }
    if phi.nvars() != m {
        return Err(Error::Dimension(format!("phi on {} variables, expected {m}", phi.nvars())));
    }
    validate_quadratic_in_prefix(phi, 2, "phi")?;
    let transverse = m - (n + 1);
    if a.len() != transverse || b.len() != transverse {
        return Err(Error::Dimension(format!(
            "expected {transverse} transverse coefficients in each of a and b"
        )));
    }
    let half = rat(1, 2);
    let mut p = Poly::var(m, 0);
    for (idx, v) in a.iter().enumerate() {
        p = p.add(&Poly::var(m, n + 1 + idx).scale(v));
    }
    let mut q = Poly::var(m, 1);
    for (idx, v) in b.iter().enumerate() {
        q = q.add(&Poly::var(m, n + 1 + idx).scale(v));
    }
    let alpha = DiffForm::differential(phi)
        .add(&DiffForm::term(m, vec![1], p.scale(&half)))
        .add(&DiffForm::term(m, vec![0], q.scale(&half).neg()));
    let restricted = exterior_derivative(&alpha.restrict_prefix(n + 1));
    let at_zero = restricted.evaluate(&vec![Rational::zero(); n + 1]);
    if at_zero.is_empty() {
        return Err(Error::Precondition(
            "restriction of alpha must have nonzero differential at the origin".into(),
        ));
    }
    Ok(contract_leading_volume(n, m, &alpha))
}

/// The rotation algebra so(3): `[e0,e1]=e2, [e1,e2]=e0, [e2,e0]=e1`.
pub fn so3() -> LieAlgebra {
    let one = Rational::from_integer(1.into());
    let zero = Rational::zero();
    let mut s = NAryStructure::new(2, 3);
    s.set_bracket(&[0, 1], vec![zero.clone(), zero.clone(), one.clone()]).unwrap();
    s.set_bracket(&[1, 2], vec![one.clone(), zero.clone(), zero.clone()]).unwrap();
    s.set_bracket(&[0, 2], vec![zero.clone(), -one, zero]).unwrap();
    LieAlgebra::new(s).expect("so(3) satisfies Jacobi")
}

/// so(4) realized as so(3) + so(3).
pub fn so4() -> LieAlgebra {
    let sum = direct_sum(so3().structure(), so3().structure()).expect("same arity");
    LieAlgebra::new(sum).expect("direct sum of Lie algebras")
}

/// The 3-dimensional Heisenberg algebra: `[e0,e1]=e2`.
pub fn heisenberg() -> LieAlgebra {
    let one = Rational::from_integer(1.into());
    let zero = Rational::zero();
    let mut s = NAryStructure::new(2, 3);
    s.set_bracket(&[0, 1], vec![zero.clone(), zero, one]).unwrap();
    LieAlgebra::new(s).expect("Heisenberg satisfies Jacobi")
}

/// The zero bracket of any arity and dimension.
pub fn abelian(n: usize, dim: usize) -> NAryStructure {
    NAryStructure::new(n, dim)
}

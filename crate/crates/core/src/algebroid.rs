//! n-ary algebroid brackets on trivial bundles over a flat base: structure
//! functions for frame brackets, an anchor on (n-1)-fold wedges of frame
//! sections, sampled checkers for the anchor-compatibility and Leibniz
//! axioms and the section-level fundamental identity, and the translation
//! to and from linear multivector fields on the dual bundle.
//!
//! Variables on the dual bundle are laid out base-first: `x_0..x_{m-1}`
//! then the fiber coordinates `xi_0..xi_{r-1}`.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exterior::{schouten, MultiVectorField};
use crate::filippov::NAryStructure;
use crate::ratpoly::{Monomial, Poly, Rational};
use crate::report::{CheckReport, CheckStats, Residual, Witness};
use crate::sample::Sampler;

/// Section of the trivial rank-r bundle: r polynomial components on the
/// base variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    components: Vec<Poly>,
}

impl Section {
    pub fn new(components: Vec<Poly>) -> Self {
        assert!(!components.is_empty(), "sections need at least one component");
        let m = components[0].nvars();
        assert!(
            components.iter().all(|c| c.nvars() == m),
            "all components must share the base variables"
        );
        Section { components }
    }

    pub fn zero(m: usize, r: usize) -> Self {
        Section::new(vec![Poly::zero(m); r])
    }

    /// The i-th frame section e_i.
    pub fn frame(m: usize, r: usize, i: usize) -> Self {
        assert!(i < r);
        let mut components = vec![Poly::zero(m); r];
        components[i] = Poly::one(m);
        Section::new(components)
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn base_dim(&self) -> usize {
        self.components[0].nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn add(&self, other: &Section) -> Section {
        assert_eq!(self.rank(), other.rank());
        Section::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Section) -> Section {
        assert_eq!(self.rank(), other.rank());
        Section::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn scale_poly(&self, f: &Poly) -> Section {
        Section::new(self.components.iter().map(|c| c.mul(f)).collect())
    }
}

/// Variable layout of the dual bundle: base block then fiber block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualVars {
    pub m: usize,
    pub r: usize,
}

impl DualVars {
    pub fn total(&self) -> usize {
        self.m + self.r
    }

    pub fn xi(&self, i: usize) -> usize {
        assert!(i < self.r);
        self.m + i
    }

    /// Fiber degree of a monomial.
    fn xi_degree(&self, mono: &Monomial) -> u32 {
        mono.degree_in(self.m..self.total())
    }
}

/// The fiber-linear function on the dual bundle attached to a section:
/// `sum_i Y_i(x) xi_i`. Injective by construction.
pub fn iota(dv: DualVars, y: &Section) -> Poly {
    assert_eq!(y.base_dim(), dv.m);
    assert_eq!(y.rank(), dv.r);
    let mut out = Poly::zero(dv.total());
    for (i, c) in y.components().iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&c.pad(dv.total()).mul(&Poly::var(dv.total(), dv.xi(i))));
        }
    }
    out
}

/// Anything that provides an n-ary bracket on sections and an anchor on
/// (n-1)-tuples. The checkers are written against this surface so that
/// deliberately broken controls can be checked alongside honest specs.
pub trait SectionBracket {
    fn arity(&self) -> usize;
    fn base_dim(&self) -> usize;
    fn rank(&self) -> usize;
    fn bracket(&self, ys: &[Section]) -> Result<Section>;
    fn anchor(&self, xs: &[Section]) -> Result<MultiVectorField>;
}

/// Bundle data of a candidate n-ary algebroid on a trivial bundle:
/// polynomial structure functions for the frame bracket and the anchor,
/// stored on strictly increasing frame tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebroidSpec {
    m: usize,
    r: usize,
    n: usize,
    bracket_sc: BTreeMap<Vec<usize>, Vec<Poly>>,
    anchor_sc: BTreeMap<Vec<usize>, Vec<Poly>>,
}

impl AlgebroidSpec {
    pub fn new(m: usize, r: usize, n: usize) -> Self {
        assert!(n >= 2, "bracket arity must be at least 2");
        AlgebroidSpec { m, r, n, bracket_sc: BTreeMap::new(), anchor_sc: BTreeMap::new() }
    }

    pub fn bracket_entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Vec<Poly>)> {
        self.bracket_sc.iter()
    }

    pub fn anchor_entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Vec<Poly>)> {
        self.anchor_sc.iter()
    }

    /// Sets `[e_{t_1},..,e_{t_n}] = sum_k value_k e_k` on an increasing
    /// frame tuple; components are polynomials on the base.
    pub fn set_bracket(&mut self, tuple: &[usize], value: Vec<Poly>) -> Result<()> {
        self.validate_tuple(tuple, self.n, self.r)?;
        self.validate_row(&value, self.r)?;
        if value.iter().all(Poly::is_zero) {
            self.bracket_sc.remove(tuple);
        } else {
            self.bracket_sc.insert(tuple.to_vec(), value);
        }
        Ok(())
    }

    /// Sets `a(e_{t_1}^..^e_{t_{n-1}}) = sum_j value_j d_j` on an
    /// increasing frame tuple.
    pub fn set_anchor(&mut self, tuple: &[usize], value: Vec<Poly>) -> Result<()> {
        self.validate_tuple(tuple, self.n - 1, self.r)?;
        self.validate_row(&value, self.m)?;
        if value.iter().all(Poly::is_zero) {
            self.anchor_sc.remove(tuple);
        } else {
            self.anchor_sc.insert(tuple.to_vec(), value);
        }
        Ok(())
    }

    fn validate_tuple(&self, tuple: &[usize], len: usize, bound: usize) -> Result<()> {
        if tuple.len() != len {
            return Err(Error::Arity { expected: len, got: tuple.len() });
        }
        if !tuple.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Shape(format!("tuple {tuple:?} is not strictly increasing")));
        }
        if let Some(&i) = tuple.iter().find(|&&i| i >= bound) {
            return Err(Error::IndexOutOfRange { index: i, bound });
        }
        Ok(())
    }

    fn validate_row(&self, value: &[Poly], len: usize) -> Result<()> {
        if value.len() != len {
            return Err(Error::Dimension(format!(
                "row has {} components, expected {len}",
                value.len()
            )));
        }
        for p in value {
            if p.nvars() != self.m {
                return Err(Error::Dimension(format!(
                    "structure function on {} variables, expected {}",
                    p.nvars(),
                    self.m
                )));
            }
        }
        Ok(())
    }

    fn validate_sections(&self, ys: &[Section], expected: usize) -> Result<()> {
        if ys.len() != expected {
            return Err(Error::Arity { expected, got: ys.len() });
        }
        for y in ys {
            if y.rank() != self.r || y.base_dim() != self.m {
                return Err(Error::Dimension(
                    "section does not match the bundle shape".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Determinant of a square matrix of polynomials by permutation expansion.
fn poly_det(m: usize, entry: impl Fn(usize, usize) -> Poly, nvars: usize) -> Poly {
    let mut out = Poly::zero(nvars);
    for perm in (0..m).permutations(m) {
        let mut inversions = 0;
        for i in 0..m {
            for j in i + 1..m {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let mut prod = Poly::one(nvars);
        for (row, &col) in perm.iter().enumerate() {
            prod = prod.mul(&entry(row, col));
        }
        if inversions % 2 == 1 {
            prod = prod.neg();
        }
        out = out.add(&prod);
    }
    out
}

impl SectionBracket for AlgebroidSpec {
    fn arity(&self) -> usize {
        self.n
    }

    fn base_dim(&self) -> usize {
        self.m
    }

    fn rank(&self) -> usize {
        self.r
    }

    /// Multilinear expansion with a Leibniz correction in every slot:
    /// the structure part contracts the component determinant against the
    /// frame brackets, and slot k contributes the anchor of the other
    /// sections applied to its components, with the sign that moves the
    /// slot last.
    fn bracket(&self, ys: &[Section]) -> Result<Section> {
        self.validate_sections(ys, self.n)?;
        let mut out = vec![Poly::zero(self.m); self.r];
        for (tuple, row) in &self.bracket_sc {
            let det = poly_det(
                self.n,
                |j, l| ys[j].components()[tuple[l]].clone(),
                self.m,
            );
            if det.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(row) {
                if !c.is_zero() {
                    *o = o.add(&det.mul(c));
                }
            }
        }
        for k in 0..self.n {
            let others: Vec<Section> =
                ys.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, y)| y.clone()).collect();
            let av = self.anchor(&others)?;
            if av.is_zero() {
                continue;
            }
            let comps = anchor_components(&av, self.m);
            let negate = (self.n - 1 - k) % 2 == 1;
            for (i, f) in ys[k].components().iter().enumerate() {
                let mut applied = Poly::zero(self.m);
                for (j, a) in comps.iter().enumerate() {
                    if !a.is_zero() {
                        applied = applied.add(&a.mul(&f.partial(j)));
                    }
                }
                if applied.is_zero() {
                    continue;
                }
                if negate {
                    applied = applied.neg();
                }
                out[i] = out[i].add(&applied);
            }
        }
        Ok(Section::new(out))
    }

    fn anchor(&self, xs: &[Section]) -> Result<MultiVectorField> {
        self.validate_sections(xs, self.n - 1)?;
        let mut out = MultiVectorField::zero(self.m, 1);
        for (tuple, row) in &self.anchor_sc {
            let det = poly_det(
                self.n - 1,
                |j, l| xs[j].components()[tuple[l]].clone(),
                self.m,
            );
            if det.is_zero() {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    out = out.add(&MultiVectorField::term(self.m, vec![j], det.mul(a)));
                }
            }
        }
        Ok(out)
    }
}

fn anchor_components(field: &MultiVectorField, m: usize) -> Vec<Poly> {
    let mut comps = vec![Poly::zero(m); m];
    for (mi, c) in field.terms() {
        comps[mi.indices()[0]] = c.clone();
    }
    comps
}

/// Frame bracket `g * c` with the trivial anchor: the constant n-ary
/// structure rescaled by one function of the base.
pub fn example3_build(c: &NAryStructure, g: &Poly) -> AlgebroidSpec {
    let m = g.nvars();
    let r = c.dim();
    let mut spec = AlgebroidSpec::new(m, r, c.arity());
    for (tuple, row) in c.entries() {
        let value: Vec<Poly> = row.iter().map(|v| g.scale(v)).collect();
        spec.set_bracket(tuple, value).expect("structure tuples are valid");
    }
    spec
}

/// The (n+1)-ary bracket on the rank-m trivial bundle with vanishing frame
/// brackets and the anchor `dx_1^..^dx_n (x) d_1`: the anchor of the
/// leading frame n-tuple is the first coordinate field.
pub fn example4_build(n: usize, m: usize) -> Result<AlgebroidSpec> {
    if n < 1 || n > m {
        return Err(Error::Shape(format!("need 1 <= n <= m, got n={n}, m={m}")));
    }
    let mut spec = AlgebroidSpec::new(m, m, n + 1);
    let mut row = vec![Poly::zero(m); m];
    row[0] = Poly::one(m);
    spec.set_anchor(&(0..n).collect::<Vec<_>>(), row)?;
    Ok(spec)
}

/// The bracket of Example-4 type written out as the explicit signed
/// permutation formula with the first-variable derivatives. Used as an
/// independent route for regression comparison and for building broken
/// controls.
#[derive(Debug, Clone)]
pub struct PermutationFormulaBracket {
    pub n: usize,
    pub m: usize,
}

impl SectionBracket for PermutationFormulaBracket {
    fn arity(&self) -> usize {
        self.n + 1
    }

    fn base_dim(&self) -> usize {
        self.m
    }

    fn rank(&self) -> usize {
        self.m
    }

    fn bracket(&self, ys: &[Section]) -> Result<Section> {
        if ys.len() != self.n + 1 {
            return Err(Error::Arity { expected: self.n + 1, got: ys.len() });
        }
        let m = self.m;
        let mut out = vec![Poly::zero(m); m];
        for k in 0..=self.n {
            let slots: Vec<usize> = (0..=self.n).filter(|&j| j != k).collect();
            for perm in (0..self.n).permutations(self.n) {
                let mut inversions = 0;
                for i in 0..self.n {
                    for j in i + 1..self.n {
                        if perm[i] > perm[j] {
                            inversions += 1;
                        }
                    }
                }
                let mut coeff = Poly::one(m);
                for (pos, &slot) in slots.iter().enumerate() {
                    coeff = coeff.mul(&ys[slot].components()[perm[pos]]);
                }
                if coeff.is_zero() {
                    continue;
                }
                // sign (-1)^{k+n} for 0-based slot k, times the permutation
                let mut negate = (k + self.n) % 2 == 1;
                if inversions % 2 == 1 {
                    negate = !negate;
                }
                for (i, target) in out.iter_mut().enumerate() {
                    let d = ys[k].components()[i].partial(0);
                    if d.is_zero() {
                        continue;
                    }
                    let piece = coeff.mul(&d);
                    *target = target.add(&if negate { piece.neg() } else { piece });
                }
            }
        }
        Ok(Section::new(out))
    }

    fn anchor(&self, xs: &[Section]) -> Result<MultiVectorField> {
        if xs.len() != self.n {
            return Err(Error::Arity { expected: self.n, got: xs.len() });
        }
        let det = poly_det(self.n, |j, l| xs[j].components()[l].clone(), self.m);
        Ok(MultiVectorField::term(self.m, vec![0], det))
    }
}

/// Control wrapper: same bracket, anchor forced to zero.
pub struct WithZeroAnchor<B: SectionBracket>(pub B);

impl<B: SectionBracket> SectionBracket for WithZeroAnchor<B> {
    fn arity(&self) -> usize {
        self.0.arity()
    }
    fn base_dim(&self) -> usize {
        self.0.base_dim()
    }
    fn rank(&self) -> usize {
        self.0.rank()
    }
    fn bracket(&self, ys: &[Section]) -> Result<Section> {
        self.0.bracket(ys)
    }
    fn anchor(&self, _xs: &[Section]) -> Result<MultiVectorField> {
        Ok(MultiVectorField::zero(self.0.base_dim(), 1))
    }
}

/// Control wrapper: same bracket, anchor with the sign flipped.
pub struct WithFlippedAnchor<B: SectionBracket>(pub B);

impl<B: SectionBracket> SectionBracket for WithFlippedAnchor<B> {
    fn arity(&self) -> usize {
        self.0.arity()
    }
    fn base_dim(&self) -> usize {
        self.0.base_dim()
    }
    fn rank(&self) -> usize {
        self.0.rank()
    }
    fn bracket(&self, ys: &[Section]) -> Result<Section> {
        self.0.bracket(ys)
    }
    fn anchor(&self, xs: &[Section]) -> Result<MultiVectorField> {
        Ok(self.0.anchor(xs)?.neg())
    }
}

/// Leibniz axiom on sampled sections and functions, exactly per sample:
/// `[X_1,..,X_{n-1}, fY] = f [X..,Y] + a(X_1^..^X_{n-1})(f) Y`.
pub fn check_axiom_leibniz(
    bracket: &dyn SectionBracket,
    samples: u64,
    seed: u64,
    degree: u32,
) -> CheckReport {
    let (n, m, r) = (bracket.arity(), bracket.base_dim(), bracket.rank());
    let mut sampler = Sampler::new(seed);
    for sample in 0..samples {
        let xs: Vec<Section> =
            (0..n - 1).map(|_| Section::new(sampler.section(m, r, degree))).collect();
        let y = Section::new(sampler.section(m, r, degree));
        let f = sampler.sparse_poly(m, degree);
        let mut args = xs.clone();
        args.push(y.scale_poly(&f));
        let lhs = bracket.bracket(&args).expect("sampled shapes are valid");
        let mut plain = xs.clone();
        plain.push(y.clone());
        let base = bracket.bracket(&plain).expect("sampled shapes are valid");
        let av = bracket.anchor(&xs).expect("sampled shapes are valid");
        let comps = anchor_components(&av, m);
        let mut derivative = Poly::zero(m);
        for (j, a) in comps.iter().enumerate() {
            if !a.is_zero() {
                derivative = derivative.add(&a.mul(&f.partial(j)));
            }
        }
        let rhs = base.scale_poly(&f).add(&y.scale_poly(&derivative));
        let residual = lhs.sub(&rhs);
        if !residual.is_zero() {
            let mut inputs: Vec<Poly> = Vec::new();
            for s in &xs {
                inputs.extend(s.components().iter().cloned());
            }
            inputs.extend(y.components().iter().cloned());
            inputs.push(f);
            let witness = Witness::new(
                "algebroid-leibniz",
                Residual::PolyVec(residual.components().to_vec()),
            )
            .with_tuples(vec![vec![sample as usize]])
            .with_inputs(inputs);
            return CheckReport::fail(witness, CheckStats::new(sample + 1));
        }
    }
    CheckReport::pass(CheckStats::new(samples))
}

/// Anchor-compatibility axiom on sampled sections, exactly per sample:
/// the vector-field bracket of two anchors equals the anchored sum of
/// bracket insertions.
pub fn check_axiom_anchor(
    bracket: &dyn SectionBracket,
    samples: u64,
    seed: u64,
    degree: u32,
) -> CheckReport {
    let (n, m, r) = (bracket.arity(), bracket.base_dim(), bracket.rank());
    let mut sampler = Sampler::new(seed);
    for sample in 0..samples {
        let xs: Vec<Section> =
            (0..n - 1).map(|_| Section::new(sampler.section(m, r, degree))).collect();
        let ys: Vec<Section> =
            (0..n - 1).map(|_| Section::new(sampler.section(m, r, degree))).collect();
        let ax = bracket.anchor(&xs).expect("sampled shapes are valid");
        let ay = bracket.anchor(&ys).expect("sampled shapes are valid");
        let lhs = schouten(&ax, &ay);
        let mut rhs = MultiVectorField::zero(m, 1);
        for i in 0..n - 1 {
            let mut args = xs.clone();
            args.push(ys[i].clone());
            let inserted = bracket.bracket(&args).expect("sampled shapes are valid");
            let mut modified = ys.clone();
            modified[i] = inserted;
            rhs = rhs.add(&bracket.anchor(&modified).expect("sampled shapes are valid"));
        }
        let residual = lhs.sub(&rhs);
        if !residual.is_zero() {
            let witness = Witness::new(
                "algebroid-anchor",
                Residual::MultiVector(residual),
            )
            .with_tuples(vec![vec![sample as usize]]);
            return CheckReport::fail(witness, CheckStats::new(sample + 1));
        }
    }
    CheckReport::pass(CheckStats::new(samples))
}

/// Fundamental identity on sampled sections, exactly per sample.
pub fn check_fi_sections(
    bracket: &dyn SectionBracket,
    samples: u64,
    seed: u64,
    degree: u32,
) -> CheckReport {
    let (n, m, r) = (bracket.arity(), bracket.base_dim(), bracket.rank());
    let mut sampler = Sampler::new(seed);
    for sample in 0..samples {
        let fs: Vec<Section> =
            (0..n - 1).map(|_| Section::new(sampler.section(m, r, degree))).collect();
        let gs: Vec<Section> =
            (0..n).map(|_| Section::new(sampler.section(m, r, degree))).collect();
        let inner = bracket.bracket(&gs).expect("sampled shapes are valid");
        let mut args = fs.clone();
        args.push(inner);
        let lhs = bracket.bracket(&args).expect("sampled shapes are valid");
        let mut rhs = Section::zero(m, r);
        for i in 0..n {
            let mut inner_args = fs.clone();
            inner_args.push(gs[i].clone());
            let braced = bracket.bracket(&inner_args).expect("sampled shapes are valid");
            let mut outer = gs.clone();
            outer[i] = braced;
            rhs = rhs.add(&bracket.bracket(&outer).expect("sampled shapes are valid"));
        }
        let residual = lhs.sub(&rhs);
        if !residual.is_zero() {
            let witness = Witness::new(
                "algebroid-fi",
                Residual::PolyVec(residual.components().to_vec()),
            )
            .with_tuples(vec![vec![sample as usize]]);
            return CheckReport::fail(witness, CheckStats::new(sample + 1));
        }
    }
    CheckReport::pass(CheckStats::new(samples))
}

/// The linear multivector field on the dual bundle encoding the bracket on
/// fiber-linear functions and the anchor on base functions.
pub fn filippov_tensor_of(spec: &AlgebroidSpec) -> MultiVectorField {
    let dv = DualVars { m: spec.m, r: spec.r };
    let total = dv.total();
    let mut out = MultiVectorField::zero(total, spec.n);
    for (tuple, row) in &spec.bracket_sc {
        let mut coeff = Poly::zero(total);
        for (k, c) in row.iter().enumerate() {
            if !c.is_zero() {
                coeff = coeff.add(&c.pad(total).mul(&Poly::var(total, dv.xi(k))));
            }
        }
        let indices: Vec<usize> = tuple.iter().map(|&i| dv.xi(i)).collect();
        out = out.add(&MultiVectorField::term(total, indices, coeff));
    }
    // a term g d_{x_j} ^ d_{xi_{u_1}} ^ .. contracts against the fiber
    // differentials with n-1 leading-slot insertions, so the stored
    // coefficient carries (-1)^{n-1} relative to the anchor value
    let negate = (spec.n - 1) % 2 == 1;
    for (tuple, row) in &spec.anchor_sc {
        for (j, a) in row.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut indices = vec![j];
            indices.extend(tuple.iter().map(|&i| dv.xi(i)));
            let coeff = if negate { a.pad(total).neg() } else { a.pad(total) };
            out = out.add(&MultiVectorField::term(total, indices, coeff));
        }
    }
    out
}

/// Reads bundle data back off a linear tensor on the dual bundle.
///
/// Terms with all directions in the fiber block must have fiber-linear
/// coefficients (a fiber-constant part lies outside the bundle data and is
/// discarded); terms with one base direction must have fiber-constant
/// coefficients; terms with two or more base directions are rejected.
pub fn algebroid_from_filippov_tensor(
    lambda: &MultiVectorField,
    dv: DualVars,
) -> Result<AlgebroidSpec> {
    if lambda.ambient_dim() != dv.total() {
        return Err(Error::Dimension(format!(
            "tensor on {} variables, expected {} + {}",
            lambda.ambient_dim(),
            dv.m,
            dv.r
        )));
    }
    let n = lambda.degree();
    if n < 2 {
        return Err(Error::Shape(format!("need a tensor of degree >= 2, got {n}")));
    }
    let mut spec = AlgebroidSpec::new(dv.m, dv.r, n);
    let negate = (n - 1) % 2 == 1;
    for (mi, coeff) in lambda.terms() {
        let base_dirs: Vec<usize> =
            mi.indices().iter().copied().filter(|&i| i < dv.m).collect();
        match base_dirs.len() {
            0 => {
                let tuple: Vec<usize> = mi.indices().iter().map(|&i| i - dv.m).collect();
                let mut row = vec![Poly::zero(dv.m); dv.r];
                for (mono, c) in coeff.terms() {
                    match dv.xi_degree(mono) {
                        0 => {}
                        1 => {
                            let k = (dv.m..dv.total())
                                .find(|&v| mono.0[v] == 1)
                                .expect("fiber degree one");
                            let mut exps = mono.0.clone();
                            exps[k] = 0;
                            let base_mono = Monomial(exps[..dv.m].to_vec());
                            row[k - dv.m] = row[k - dv.m]
                                .add(&Poly::from_terms(dv.m, [(base_mono, c.clone())]));
                        }
                        _ => {
                            return Err(Error::NotAlgebroidTensor(format!(
                                "bracket output is not fiber-linear: term {:?} has coefficient {coeff}",
                                mi.indices()
                            )));
                        }
                    }
                }
                spec.set_bracket(&tuple, row)?;
            }
            1 => {
                if dv.xi_degree_of_poly(coeff) > 0 {
                    return Err(Error::NotAlgebroidTensor(format!(
                        "anchor output depends on the fiber: term {:?} has coefficient {coeff}",
                        mi.indices()
                    )));
                }
                let j = base_dirs[0];
                let tuple: Vec<usize> =
                    mi.indices().iter().filter(|&&i| i >= dv.m).map(|&i| i - dv.m).collect();
                let base_coeff = coeff.restrict_prefix(dv.m);
                let value = if negate { base_coeff.neg() } else { base_coeff };
                let mut row = match spec.anchor_sc.get(&tuple) {
                    Some(existing) => existing.clone(),
                    None => vec![Poly::zero(dv.m); dv.m],
                };
                row[j] = row[j].add(&value);
                spec.set_anchor(&tuple, row)?;
            }
            _ => {
                return Err(Error::NotAlgebroidTensor(format!(
                    "term {:?} touches more than one base direction",
                    mi.indices()
                )));
            }
        }
    }
    Ok(spec)
}

impl DualVars {
    fn xi_degree_of_poly(&self, p: &Poly) -> u32 {
        p.degree_in(self.m..self.total())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filippov::{abelian, so3};
    use crate::nambu::nambu_bracket;
    use crate::ratpoly::rat_int;

    fn x(m: usize, i: usize) -> Poly {
        Poly::var(m, i)
    }

    fn example3_so3() -> AlgebroidSpec {
        example3_build(so3().structure(), &x(3, 0))
    }

    #[test]
    fn example3_frame_brackets_scale_the_constants() {
        let spec = example3_so3();
        let e = |i: usize| Section::frame(3, 3, i);
        let out = spec.bracket(&[e(0), e(1)]).unwrap();
        assert_eq!(out.components()[2], x(3, 0));
        assert!(out.components()[0].is_zero());
        let anchored = spec.anchor(&[e(0)]).unwrap();
        assert!(anchored.is_zero());
    }

    #[test]
    fn example4_frame_brackets_vanish_and_anchor_hits_the_first_direction() {
        let spec = example4_build(2, 3).unwrap();
        let e = |i: usize| Section::frame(3, 3, i);
        let out = spec.bracket(&[e(0), e(1), e(2)]).unwrap();
        assert!(out.is_zero());
        let a = spec.anchor(&[e(0), e(1)]).unwrap();
        assert_eq!(a, MultiVectorField::coordinate(3, 0));
        // repeated section: alternating anchor
        assert!(spec.anchor(&[e(1), e(1)]).unwrap().is_zero());
    }

    #[test]
    fn example4_bracket_matches_the_permutation_formula() {
        let spec = example4_build(2, 3).unwrap();
        let display = PermutationFormulaBracket { n: 2, m: 3 };
        let mut sampler = Sampler::new(17);
        for _ in 0..12 {
            let ys: Vec<Section> =
                (0..3).map(|_| Section::new(sampler.section(3, 3, 2))).collect();
            let lhs = spec.bracket(&ys).unwrap();
            let rhs = display.bracket(&ys).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn axioms_pass_on_both_constructors() {
        let e3 = example3_so3();
        assert!(check_axiom_leibniz(&e3, 12, 1, 2).is_pass());
        assert!(check_axiom_anchor(&e3, 12, 2, 2).is_pass());
        assert!(check_fi_sections(&e3, 12, 3, 1).is_pass());

        let e4 = example4_build(2, 3).unwrap();
        assert!(check_axiom_leibniz(&e4, 12, 4, 2).is_pass());
        assert!(check_axiom_anchor(&e4, 12, 5, 2).is_pass());
        assert!(check_fi_sections(&e4, 12, 6, 1).is_pass());
    }

    #[test]
    fn negative_controls_fail_with_witnesses() {
        // a bracket that differentiates its arguments but claims no anchor
        let broken = WithZeroAnchor(PermutationFormulaBracket { n: 2, m: 3 });
        let report = check_axiom_leibniz(&broken, 20, 7, 2);
        assert!(!report.is_pass());
        assert!(report.witness.is_some());

        // flipped anchor sign breaks compatibility
        let flipped = WithFlippedAnchor(example4_build(2, 3).unwrap());
        let report = check_axiom_anchor(&flipped, 20, 8, 2);
        assert!(!report.is_pass());

        // a frame structure violating the fundamental identity
        let mut bad = so3().structure().clone();
        bad.set_bracket(&[0, 2], vec![rat_int(1), rat_int(-1), rat_int(0)]).unwrap();
        let spec = example3_build(&bad, &x(3, 0));
        let report = check_fi_sections(&spec, 20, 9, 1);
        assert!(!report.is_pass());
    }

    #[test]
    fn trivial_example3_variants() {
        // zero scaling function: the abelian algebroid
        let spec = example3_build(so3().structure(), &Poly::zero(3));
        let e = |i: usize| Section::frame(3, 3, i);
        assert!(spec.bracket(&[e(0), e(1)]).unwrap().is_zero());
        // unit scaling function recovers the constant structure
        let spec = example3_build(so3().structure(), &Poly::one(3));
        let out = spec.bracket(&[e(0), e(1)]).unwrap();
        assert_eq!(out.components()[2], Poly::one(3));
    }

    #[test]
    fn iota_examples() {
        let dv = DualVars { m: 2, r: 3 };
        let e0 = Section::frame(2, 3, 0);
        assert_eq!(iota(dv, &e0), Poly::var(5, 2));
        let y = Section::new(vec![Poly::zero(2), x(2, 0), Poly::zero(2)]);
        assert_eq!(iota(dv, &y), x(2, 0).pad(5).mul(&Poly::var(5, 3)));
        assert!(iota(dv, &Section::zero(2, 3)).is_zero());
    }

    #[test]
    fn filippov_tensor_of_example4_is_the_fiber_volume_against_the_base() {
        // arity 3 bracket, n = 2: tensor d_{xi_0}^d_{xi_1}^d_{x_0},
        // canonically written with the base direction first and sign (-1)^2
        let spec = example4_build(2, 3).unwrap();
        let t = filippov_tensor_of(&spec);
        let expect = MultiVectorField::term(6, vec![0, 3, 4], Poly::one(6));
        assert_eq!(t, expect);
    }

    #[test]
    fn round_trip_on_both_examples() {
        for spec in [example3_so3(), example4_build(2, 3).unwrap()] {
            let t = filippov_tensor_of(&spec);
            let dv = DualVars { m: spec.base_dim(), r: spec.rank() };
            let back = algebroid_from_filippov_tensor(&t, dv).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn fiber_volume_alone_gives_the_zero_bundle_data() {
        // d_{xi_0}^d_{xi_1}^d_{xi_2} on a rank-3 bundle over R^1: constant
        // bracket output is outside the bundle data, so everything is zero
        let dv = DualVars { m: 1, r: 3 };
        let t = MultiVectorField::basis(4, vec![1, 2, 3]);
        let spec = algebroid_from_filippov_tensor(&t, dv).unwrap();
        assert_eq!(spec.bracket_entries().count(), 0);
        assert_eq!(spec.anchor_entries().count(), 0);
    }

    #[test]
    fn nonlinear_tensors_are_rejected_with_a_witness() {
        let dv = DualVars { m: 1, r: 2 };
        // coefficient xi_0^2 on the fiber 2-blade
        let bad = MultiVectorField::term(
            3,
            vec![1, 2],
            Poly::var(3, 1).mul(&Poly::var(3, 1)),
        );
        let err = algebroid_from_filippov_tensor(&bad, dv).unwrap_err();
        assert!(matches!(err, Error::NotAlgebroidTensor(_)));

        // anchor coefficient depending on the fiber
        let bad = MultiVectorField::term(3, vec![0, 1], Poly::var(3, 2));
        assert!(matches!(
            algebroid_from_filippov_tensor(&bad, dv),
            Err(Error::NotAlgebroidTensor(_))
        ));

        // two base directions
        let dv2 = DualVars { m: 2, r: 2 };
        let bad = MultiVectorField::basis(4, vec![0, 1]);
        assert!(matches!(
            algebroid_from_filippov_tensor(&bad, dv2),
            Err(Error::NotAlgebroidTensor(_))
        ));
    }

    #[test]
    fn iota_intertwines_brackets() {
        for (spec, seed) in [(example3_so3(), 21u64), (example4_build(2, 3).unwrap(), 22u64)] {
            let dv = DualVars { m: spec.base_dim(), r: spec.rank() };
            let t = filippov_tensor_of(&spec);
            let mut sampler = Sampler::new(seed);
            for _ in 0..10 {
                let ys: Vec<Section> = (0..spec.arity())
                    .map(|_| Section::new(sampler.section(dv.m, dv.r, 2)))
                    .collect();
                let lhs = iota(dv, &spec.bracket(&ys).unwrap());
                let duals: Vec<Poly> = ys.iter().map(|y| iota(dv, y)).collect();
                let rhs = nambu_bracket(&t, &duals).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn abelian_example3_has_abelian_tensor() {
        let spec = example3_build(&abelian(2, 3), &x(2, 0));
        let t = filippov_tensor_of(&spec);
        assert!(t.is_zero());
    }

    /// The induced bracket of 1-forms is not an algebroid bracket for
    /// order 3: a frozen non-closed tuple violates the fundamental
    /// identity on the volume tensor, with residual exactly dx1.
    #[test]
    fn form_bracket_is_no_algebroid_for_order_three() {
        use crate::exterior::DiffForm;
        use crate::nambu::form_filippov_residual;
        let m = 3;
        let vol = MultiVectorField::basis(m, vec![0, 1, 2]);
        let dx = |i: usize| DiffForm::coordinate(m, i);
        let mus = vec![
            DiffForm::term(m, vec![0], x(m, 1)),
            DiffForm::term(m, vec![1], x(m, 2)),
        ];
        let nus = vec![dx(0), dx(1), dx(2)];
        let residual = form_filippov_residual(&vol, &mus, &nus).unwrap();
        assert_eq!(residual, dx(1));
    }
}

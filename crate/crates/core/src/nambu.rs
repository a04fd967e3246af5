//! Checkers for the defining identities of Nambu-Poisson tensors: global
//! decomposability (Pluecker relations), involutivity of the characteristic
//! distribution, randomized fundamental-identity falsification, Hamiltonian
//! invariance and closure, the induced bracket of 1-forms, and the
//! two-branch dichotomy for families of decomposable constant n-vectors.
//!
//! The Nambu-Poisson verdict for order >= 3 is decomposable + involutive;
//! the universally quantified fundamental identity is not finitely
//! checkable, so the randomized test is a falsifier, not the verdict.

use itertools::Itertools;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{
    contract_basis_covectors, contract_functions, exterior_derivative, lie_derivative_form,
    pairing, pairing_skip, schouten, ConstMultiVector, DiffForm, MultiVectorField,
};
use crate::ratpoly::{rat_int, subspace_intersect, subspace_span, Poly, Rational};
use crate::report::{CheckReport, CheckStats, Residual, Verdict, Witness};
use crate::sample::Sampler;

/// Strictly increasing tuple of n-1 coordinate indices selecting a
/// Hamiltonian vector field of coordinate functions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HamiltonianKey(Vec<usize>);

impl HamiltonianKey {
    pub fn new(indices: Vec<usize>) -> Self {
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "hamiltonian key must be strictly increasing"
        );
        HamiltonianKey(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// All keys for a degree-n tensor on m coordinates, in canonical order.
    pub fn enumerate(m: usize, n: usize) -> Vec<HamiltonianKey> {
        if n == 0 {
            return Vec::new();
        }
        (0..m).combinations(n - 1).map(HamiltonianKey).collect()
    }
}

/// Deterministic small-integer point where `p` does not vanish; `None` iff
/// `p` is zero. Scans integer grids of growing radius in lexicographic
/// order, so the returned point is canonical.
pub fn find_nonvanishing_point(p: &Poly) -> Option<Vec<Rational>> {
    if p.is_zero() {
        return None;
    }
    let m = p.nvars();
    if m == 0 {
        return Some(Vec::new());
    }
    for radius in 0i64..=64 {
        let side = 2 * radius + 1;
        let mut offsets = vec![0i64; m];
        'grid: loop {
            let point: Vec<i64> = offsets.iter().map(|&o| o - radius).collect();
            if point.iter().map(|v| v.abs()).max() == Some(radius) {
                let rp: Vec<Rational> = point.iter().map(|&v| rat_int(v)).collect();
                if !p.eval(&rp).is_zero() {
                    return Some(rp);
                }
            }
            let mut k = m;
            loop {
                if k == 0 {
                    break 'grid;
                }
                k -= 1;
                offsets[k] += 1;
                if offsets[k] < side {
                    break;
                }
                offsets[k] = 0;
            }
        }
    }
    unreachable!("nonzero polynomial vanished on every tested grid")
}

/// First (canonical order) term of a nonzero tensor together with a point
/// where its coefficient does not vanish.
fn tensor_witness_point(t: &MultiVectorField) -> (Vec<usize>, Vec<Rational>) {
    let (mi, coeff) = t.terms().next().expect("nonzero tensor");
    let point = find_nonvanishing_point(coeff).expect("stored coefficients are nonzero");
    (mi.indices().to_vec(), point)
}

/// Hamiltonian vector field of n-1 functions: the iterated contraction of
/// the tensor by their differentials.
pub fn hamiltonian_field(lambda: &MultiVectorField, fs: &[Poly]) -> Result<MultiVectorField> {
    let n = lambda.degree();
    if n == 0 || fs.len() != n - 1 {
        return Err(Error::Arity { expected: n.saturating_sub(1), got: fs.len() });
    }
    check_function_dims(lambda, fs)?;
    Ok(contract_functions(lambda, fs))
}

/// The n-ary bracket of functions defined by the tensor: full contraction.
pub fn nambu_bracket(lambda: &MultiVectorField, fs: &[Poly]) -> Result<Poly> {
    let n = lambda.degree();
    if fs.len() != n {
        return Err(Error::Arity { expected: n, got: fs.len() });
    }
    check_function_dims(lambda, fs)?;
    Ok(contract_functions(lambda, fs)
        .as_scalar()
        .expect("full contraction has degree 0"))
}

fn check_function_dims(lambda: &MultiVectorField, fs: &[Poly]) -> Result<()> {
    for f in fs {
        if f.nvars() != lambda.ambient_dim() {
            return Err(Error::Dimension(format!(
                "function on {} variables fed to a tensor on {} variables",
                f.nvars(),
                lambda.ambient_dim()
            )));
        }
    }
    Ok(())
}

/// Global decomposability via the Pluecker relations: for every basis
/// (n-1)-covector w, `(i_w L) ^ L = 0` must hold as a polynomial identity.
/// That is pointwise decomposability at every point, zeros included.
pub fn is_decomposable_everywhere(lambda: &MultiVectorField) -> CheckReport {
    let m = lambda.ambient_dim();
    let n = lambda.degree();
    if n <= 1 || lambda.is_zero() {
        return CheckReport::pass(CheckStats::new(0));
    }
    let tuples: Vec<Vec<usize>> = (0..m).combinations(n - 1).collect();
    let stats = CheckStats::new(tuples.len() as u64);
    let mut failures: Vec<(Vec<usize>, MultiVectorField)> = tuples
        .par_iter()
        .filter_map(|tuple| {
            let residual = contract_basis_covectors(lambda, tuple).wedge(lambda);
            if residual.is_zero() {
                None
            } else {
                Some((tuple.clone(), residual))
            }
        })
        .collect();
    failures.sort_by(|a, b| a.0.cmp(&b.0));
    match failures.into_iter().next() {
        None => CheckReport::pass(stats),
        Some((tuple, residual)) => {
            let (term, point) = tensor_witness_point(&residual);
            let witness = Witness::new("plucker", Residual::MultiVector(residual))
                .with_tuples(vec![tuple, term])
                .with_point(point);
            CheckReport::fail(witness, stats)
        }
    }
}

/// Involutivity of the characteristic distribution, as a polynomial
/// identity: every bracket of coordinate Hamiltonian fields must wedge to
/// zero against the tensor. Requires a decomposable tensor, where the
/// wedge criterion is exact membership in the support wherever the tensor
/// does not vanish; on the vanishing locus it holds by continuity.
pub fn is_involutive(lambda: &MultiVectorField) -> Result<CheckReport> {
    let n = lambda.degree();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "involutivity needs a tensor of degree >= 2, got {n}"
        )));
    }
    if !is_decomposable_everywhere(lambda).is_pass() {
        return Err(Error::Precondition(
            "involutivity check requires a decomposable tensor".into(),
        ));
    }
    let m = lambda.ambient_dim();
    let keys = HamiltonianKey::enumerate(m, n);
    let fields: Vec<MultiVectorField> = keys
        .iter()
        .map(|k| {
            let coords: Vec<Poly> = k.indices().iter().map(|&i| Poly::var(m, i)).collect();
            contract_functions(lambda, &coords)
        })
        .collect();
    let pairs: Vec<(usize, usize)> =
        (0..keys.len()).flat_map(|i| (i + 1..keys.len()).map(move |j| (i, j))).collect();
    let stats = CheckStats::new(pairs.len() as u64);
    let mut failures: Vec<((usize, usize), MultiVectorField)> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let bracket = schouten(&fields[i], &fields[j]);
            let residual = bracket.wedge(lambda);
            if residual.is_zero() {
                None
            } else {
                Some(((i, j), residual))
            }
        })
        .collect();
    failures.sort_by_key(|(ij, _)| *ij);
    Ok(match failures.into_iter().next() {
        None => CheckReport::pass(stats),
        Some(((i, j), residual)) => {
            let (term, point) = tensor_witness_point(&residual);
            let witness = Witness::new("involutivity", Residual::MultiVector(residual))
                .with_tuples(vec![
                    keys[i].indices().to_vec(),
                    keys[j].indices().to_vec(),
                    term,
                ])
                .with_point(point);
            CheckReport::fail(witness, stats)
        }
    })
}

/// Nambu-Poisson verdict. Order >= 3: decomposable everywhere and
/// involutive. Order 2: classical Poisson, `[L, L] = 0`. Orders 0 and 1
/// and the zero tensor pass trivially.
pub fn check_nambu_poisson(lambda: &MultiVectorField) -> CheckReport {
    let n = lambda.degree();
    if n <= 1 || lambda.is_zero() {
        return CheckReport::pass(CheckStats::new(0));
    }
    if n == 2 {
        let residual = schouten(lambda, lambda);
        if residual.is_zero() {
            return CheckReport::pass(CheckStats::new(1));
        }
        let (term, point) = tensor_witness_point(&residual);
        let witness = Witness::new("schouten-square", Residual::MultiVector(residual))
            .with_tuples(vec![term])
            .with_point(point);
        return CheckReport::fail(witness, CheckStats::new(1));
    }
    let dec = is_decomposable_everywhere(lambda);
    if !dec.is_pass() {
        return dec;
    }
    let inv = is_involutive(lambda).expect("decomposability was just established");
    CheckReport {
        verdict: inv.verdict,
        witness: inv.witness,
        stats: CheckStats::new(dec.stats.identities_checked + inv.stats.identities_checked),
    }
}

/// One fundamental-identity instance, as a polynomial residual:
/// `{f_1..f_{n-1},{g_1..g_n}} - sum_i {g_1,..,{f..,g_i},..,g_n}`.
pub fn filippov_identity_residual(
    lambda: &MultiVectorField,
    fs: &[Poly],
    gs: &[Poly],
) -> Result<Poly> {
    let n = lambda.degree();
    if fs.len() != n.saturating_sub(1) || gs.len() != n {
        return Err(Error::Arity { expected: 2 * n - 1, got: fs.len() + gs.len() });
    }
    let inner = nambu_bracket(lambda, gs)?;
    let mut args = fs.to_vec();
    args.push(inner);
    let lhs = nambu_bracket(lambda, &args)?;
    let mut rhs = Poly::zero(lambda.ambient_dim());
    for i in 0..n {
        let mut inner_args = fs.to_vec();
        inner_args.push(gs[i].clone());
        let braced = nambu_bracket(lambda, &inner_args)?;
        let mut outer = gs.to_vec();
        outer[i] = braced;
        rhs = rhs.add(&nambu_bracket(lambda, &outer)?);
    }
    Ok(lhs.sub(&rhs))
}

/// Seeded randomized falsifier for the fundamental identity: each trial
/// draws 2n-1 dense polynomials of degree <= `degree_bound` and checks the
/// identity exactly. Stops at the first violation.
pub fn fi_random_test(
    lambda: &MultiVectorField,
    degree_bound: u32,
    trials: u64,
    seed: u64,
) -> CheckReport {
    let n = lambda.degree();
    if n == 0 {
        return CheckReport::pass(CheckStats::new(0));
    }
    let m = lambda.ambient_dim();
    let mut sampler = Sampler::new(seed);
    for trial in 0..trials {
        let fs: Vec<Poly> = (0..n - 1).map(|_| sampler.poly(m, degree_bound)).collect();
        let gs: Vec<Poly> = (0..n).map(|_| sampler.poly(m, degree_bound)).collect();
        let residual =
            filippov_identity_residual(lambda, &fs, &gs).expect("sampled arities are consistent");
        if !residual.is_zero() {
            let point = find_nonvanishing_point(&residual).expect("residual is nonzero");
            let mut inputs = fs;
            inputs.extend(gs);
            let witness = Witness::new("filippov-identity", Residual::Poly(residual))
                .with_tuples(vec![vec![trial as usize]])
                .with_inputs(inputs)
                .with_point(point);
            return CheckReport::fail(witness, CheckStats::new(trial + 1));
        }
    }
    CheckReport::pass(CheckStats::new(trials))
}

/// Invariance of the tensor under one Hamiltonian field:
/// `[L_{f_1..f_{n-1}}, L] = 0` as a polynomial identity.
pub fn hamiltonian_invariance(lambda: &MultiVectorField, fs: &[Poly]) -> Result<CheckReport> {
    let field = hamiltonian_field(lambda, fs)?;
    let residual = schouten(&field, lambda);
    if residual.is_zero() {
        return Ok(CheckReport::pass(CheckStats::new(1)));
    }
    let (term, point) = tensor_witness_point(&residual);
    let witness = Witness::new("hamiltonian-invariance", Residual::MultiVector(residual))
        .with_tuples(vec![term])
        .with_inputs(fs.to_vec())
        .with_point(point);
    Ok(CheckReport::fail(witness, CheckStats::new(1)))
}

/// Closure of Hamiltonian fields:
/// `[L_f, L_g] = sum_i L_{g_1,..,{f..,g_i},..,g_{n-1}}` exactly.
pub fn hamiltonian_closure_test(
    lambda: &MultiVectorField,
    fs: &[Poly],
    gs: &[Poly],
) -> Result<CheckReport> {
    let n = lambda.degree();
    if gs.len() != n.saturating_sub(1) {
        return Err(Error::Arity { expected: n.saturating_sub(1), got: gs.len() });
    }
    let xf = hamiltonian_field(lambda, fs)?;
    let xg = hamiltonian_field(lambda, gs)?;
    let lhs = schouten(&xf, &xg);
    let mut rhs = MultiVectorField::zero(lambda.ambient_dim(), 1);
    for i in 0..gs.len() {
        let mut bracket_args = fs.to_vec();
        bracket_args.push(gs[i].clone());
        let braced = nambu_bracket(lambda, &bracket_args)?;
        let mut modified = gs.to_vec();
        modified[i] = braced;
        rhs = rhs.add(&hamiltonian_field(lambda, &modified)?);
    }
    let residual = lhs.sub(&rhs);
    if residual.is_zero() {
        return Ok(CheckReport::pass(CheckStats::new(1)));
    }
    let (term, point) = tensor_witness_point(&residual);
    let mut inputs = fs.to_vec();
    inputs.extend(gs.to_vec());
    let witness = Witness::new("hamiltonian-closure", Residual::MultiVector(residual))
        .with_tuples(vec![term])
        .with_inputs(inputs)
        .with_point(point);
    Ok(CheckReport::fail(witness, CheckStats::new(1)))
}

/// The bracket of n one-forms induced by the tangent lift of the tensor:
///
/// ```text
/// [mu_1,..,mu_n] = sum_k (-1)^{n+k} L_{L_k} mu_k - (n-1) d<L, mu_1^..^mu_n>
/// ```
///
/// where `L_k` is the contraction leaving slot k open.
pub fn form_bracket(lambda: &MultiVectorField, mus: &[DiffForm]) -> Result<DiffForm> {
    let n = lambda.degree();
    let m = lambda.ambient_dim();
    if mus.len() != n {
        return Err(Error::Arity { expected: n, got: mus.len() });
    }
    for mu in mus {
        if mu.ambient_dim() != m {
            return Err(Error::Dimension("form on the wrong ambient space".into()));
        }
        if mu.degree() != 1 {
            return Err(Error::Shape(format!("expected 1-forms, got degree {}", mu.degree())));
        }
    }
    let mut acc = DiffForm::zero(m, 1);
    for (k, mu) in mus.iter().enumerate() {
        let field_k = pairing_skip(lambda, mus, k);
        let term = lie_derivative_form(&field_k, mu);
        // 1-based slot index: sign (-1)^{n+k}
        if (n + k + 1) % 2 == 0 {
            acc = acc.add(&term);
        } else {
            acc = acc.sub(&term);
        }
    }
    let scalar = pairing(lambda, mus);
    let correction =
        exterior_derivative(&DiffForm::scalar(m, scalar)).scale(&rat_int(n as i64 - 1));
    Ok(acc.sub(&correction))
}

/// Fundamental-identity residual for the 1-form bracket; zero on closed
/// forms, generally nonzero otherwise.
pub fn form_filippov_residual(
    lambda: &MultiVectorField,
    mus: &[DiffForm],
    nus: &[DiffForm],
) -> Result<DiffForm> {
    let n = lambda.degree();
    if mus.len() != n.saturating_sub(1) || nus.len() != n {
        return Err(Error::Arity { expected: 2 * n - 1, got: mus.len() + nus.len() });
    }
    let inner = form_bracket(lambda, nus)?;
    let mut args = mus.to_vec();
    args.push(inner);
    let lhs = form_bracket(lambda, &args)?;
    let mut rhs = DiffForm::zero(lambda.ambient_dim(), 1);
    for i in 0..n {
        let mut inner_args = mus.to_vec();
        inner_args.push(nus[i].clone());
        let braced = form_bracket(lambda, &inner_args)?;
        let mut outer = nus.to_vec();
        outer[i] = braced;
        rhs = rhs.add(&form_bracket(lambda, &outer)?);
    }
    Ok(lhs.sub(&rhs))
}

/// Which branches of the two-branch alternative hold for a family of
/// decomposable constant n-vectors with decomposable pairwise sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DichotomyReport {
    /// Supports span at most an (n+1)-dimensional subspace.
    pub branch_a: bool,
    /// Supports intersect in at least an (n-1)-dimensional subspace.
    pub branch_b: bool,
    pub span_dim: usize,
    pub intersection_dim: usize,
    pub members: usize,
}

fn const_decomposable(v: &ConstMultiVector) -> bool {
    is_decomposable_everywhere(&v.to_field()).is_pass()
}

/// Validates the hypothesis (nonzero decomposable members, decomposable
/// pairwise sums), then asserts the two-branch alternative on supports. An
/// error of kind `DichotomyViolated` would falsify the underlying lemma.
pub fn lemma1_dichotomy(family: &[ConstMultiVector]) -> Result<DichotomyReport> {
    if family.is_empty() {
        return Err(Error::Hypothesis("empty family".into()));
    }
    let m = family[0].ambient_dim();
    let n = family[0].degree();
    if n < 1 {
        return Err(Error::Hypothesis("members must have degree >= 1".into()));
    }
    for (i, member) in family.iter().enumerate() {
        if member.ambient_dim() != m || member.degree() != n {
            return Err(Error::Dimension(format!("family member {i} has mismatched shape")));
        }
        if member.is_zero() {
            return Err(Error::Hypothesis(format!("family member {i} is zero")));
        }
        if !const_decomposable(member) {
            return Err(Error::Hypothesis(format!("family member {i} is not decomposable")));
        }
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if !const_decomposable(&family[i].add(&family[j])) {
                return Err(Error::Hypothesis(format!(
                    "sum of members {i} and {j} is not decomposable"
                )));
            }
        }
    }
    let supports: Vec<Vec<Vec<Rational>>> =
        family.iter().map(crate::exterior::support_subspace).collect();
    let all: Vec<Vec<Rational>> = supports.iter().flatten().cloned().collect();
    let span_dim = subspace_span(&all).len();
    let mut meet = supports[0].clone();
    for s in &supports[1..] {
        meet = subspace_intersect(&meet, s);
    }
    let intersection_dim = meet.len();
    let branch_a = span_dim <= n + 1;
    let branch_b = intersection_dim >= n - 1;
    if !branch_a && !branch_b {
        return Err(Error::DichotomyViolated(format!(
            "span dim {span_dim} > {} and intersection dim {intersection_dim} < {}",
            n + 1,
            n - 1
        )));
    }
    Ok(DichotomyReport { branch_a, branch_b, span_dim, intersection_dim, members: family.len() })
}

pub fn verdict_label(report: &CheckReport) -> &'static str {
    match report.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

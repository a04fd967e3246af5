//! Seeded, reproducible samplers for the property checkers.
//!
//! Polynomials are drawn dense over all monomials up to a degree bound with
//! coefficients uniform in {-3..3}\{0}; the same seed always reproduces the
//! same stream, independent of platform.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::{ConstMultiVector, DiffForm, MultiVectorField};
use crate::ratpoly::{rat_int, Monomial, Poly, Rational};
use num_traits::Zero;

pub struct Sampler {
    rng: ChaCha8Rng,
}

/// All exponent vectors on `nvars` variables with total degree <= `bound`.
fn monomials_up_to(nvars: usize, bound: u32) -> Vec<Monomial> {
    fn rec(exps: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Monomial>) {
        if pos == exps.len() {
            out.push(Monomial(exps.clone()));
            return;
        }
        for e in 0..=left {
            exps[pos] = e;
            rec(exps, pos + 1, left - e, out);
            exps[pos] = 0;
        }
    }
    let mut out = Vec::new();
    let mut exps = vec![0u32; nvars];
    rec(&mut exps, 0, bound, &mut out);
    out
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform in {-3..3}\{0}.
    pub fn coefficient(&mut self) -> Rational {
        let choices = [-3i64, -2, -1, 1, 2, 3];
        rat_int(choices[self.rng.gen_range(0..choices.len())])
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    /// Dense polynomial over all monomials of degree <= `degree_bound`.
    pub fn poly(&mut self, nvars: usize, degree_bound: u32) -> Poly {
        let items = monomials_up_to(nvars, degree_bound)
            .into_iter()
            .map(|m| (m, self.coefficient()))
            .collect::<Vec<_>>();
        Poly::from_terms(nvars, items)
    }

    /// Sparser polynomial: each monomial kept with probability 1/2.
    pub fn sparse_poly(&mut self, nvars: usize, degree_bound: u32) -> Poly {
        let items = monomials_up_to(nvars, degree_bound)
            .into_iter()
            .filter_map(|m| {
                if self.rng.gen_bool(0.5) {
                    Some((m, self.coefficient()))
                } else {
                    None
                }
            })
            .collect::<Vec<_>>();
        Poly::from_terms(nvars, items)
    }

    /// Multivector field of the given degree with sparse polynomial
    /// coefficients of degree <= `coeff_degree`.
    pub fn multivector(&mut self, m: usize, degree: usize, coeff_degree: u32) -> MultiVectorField {
        let items: Vec<(Vec<usize>, Poly)> = (0..m)
            .combinations(degree)
            .map(|idx| (idx, self.sparse_poly(m, coeff_degree)))
            .collect();
        MultiVectorField::from_terms(m, degree, items)
    }

    /// Differential form of the given degree.
    pub fn form(&mut self, m: usize, degree: usize, coeff_degree: u32) -> DiffForm {
        let items: Vec<(Vec<usize>, Poly)> = (0..m)
            .combinations(degree)
            .map(|idx| (idx, self.sparse_poly(m, coeff_degree)))
            .collect();
        DiffForm::from_terms(m, degree, items)
    }

    /// Constant multivector with small rational coefficients.
    pub fn const_multivector(&mut self, m: usize, degree: usize) -> ConstMultiVector {
        let items: Vec<(Vec<usize>, Rational)> = (0..m)
            .combinations(degree)
            .filter_map(|idx| {
                if self.rng.gen_bool(0.5) {
                    Some((idx, self.coefficient()))
                } else {
                    None
                }
            })
            .collect();
        ConstMultiVector::from_terms(m, degree, items)
    }

    /// Constant vector with entries in {-3..3}.
    pub fn vector(&mut self, dim: usize) -> Vec<Rational> {
        (0..dim).map(|_| rat_int(self.rng.gen_range(-3i64..=3))).collect()
    }

    /// Bundle section: `rank` polynomial components on `m` base variables.
    pub fn section(&mut self, m: usize, rank: usize, degree_bound: u32) -> Vec<Poly> {
        (0..rank).map(|_| self.sparse_poly(m, degree_bound)).collect()
    }

    /// Family of constant `n`-vectors satisfying the decomposable-sums
    /// hypothesis by construction. Half of the seeds confine the family to
    /// an (n+1)-dimensional subspace (any n-vector there is decomposable,
    /// as is any sum); the other half share a common (n-1)-blade factor.
    pub fn dichotomy_family(
        &mut self,
        n: usize,
        ambient: usize,
        members: usize,
    ) -> Vec<ConstMultiVector> {
        assert!(ambient >= n + 1);
        if self.rng.gen_bool(0.5) {
            // Pattern (a): random n-vectors of span{e_s..e_{s+n}}.
            let start = self.index(ambient - n);
            let dirs: Vec<usize> = (start..start + n + 1).collect();
            (0..members)
                .map(|_| loop {
                    let items: Vec<(Vec<usize>, Rational)> = dirs
                        .iter()
                        .copied()
                        .combinations(n)
                        .map(|idx| (idx, self.coefficient()))
                        .collect();
                    let v = ConstMultiVector::from_terms(ambient, n, items);
                    if !v.is_zero() {
                        break v;
                    }
                })
                .collect()
        } else {
            // Pattern (b): v_i ^ blade for a fixed (n-1)-blade.
            let blade_dirs: Vec<usize> = (0..n - 1).collect();
            let blade = ConstMultiVector::from_terms(
                ambient,
                n - 1,
                vec![(blade_dirs.clone(), rat_int(1))],
            );
            (0..members)
                .map(|_| loop {
                    let mut v = self.vector(ambient);
                    for d in &blade_dirs {
                        v[*d] = Rational::zero();
                    }
                    let vec_mv = ConstMultiVector::from_terms(
                        ambient,
                        1,
                        v.iter()
                            .enumerate()
                            .map(|(i, c)| (vec![i], c.clone()))
                            .collect::<Vec<_>>(),
                    );
                    let w = wedge_const(&vec_mv, &blade);
                    if !w.is_zero() {
                        break w;
                    }
                })
                .collect()
        }
    }
}

/// Wedge of constant multivectors, via the polynomial-coefficient machinery.
pub fn wedge_const(a: &ConstMultiVector, b: &ConstMultiVector) -> ConstMultiVector {
    ConstMultiVector::from_field(&a.to_field().wedge(&b.to_field()))
        .expect("wedge of constants is constant")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_reproducible() {
        let a = Sampler::new(42).poly(3, 2);
        let b = Sampler::new(42).poly(3, 2);
        assert_eq!(a, b);
        let c = Sampler::new(43).poly(3, 2);
        assert_ne!(a, c);
    }

    #[test]
    fn dense_poly_covers_all_monomials() {
        let p = Sampler::new(1).poly(2, 2);
        // C(2+2,2) = 6 monomials of degree <= 2 on two variables
        assert_eq!(p.num_terms(), 6);
        assert!(p.terms().all(|(_, c)| !c.is_zero()));
    }

    #[test]
    fn family_members_are_nonzero() {
        for seed in 0..20 {
            let fam = Sampler::new(seed).dichotomy_family(3, 6, 4);
            assert_eq!(fam.len(), 4);
            assert!(fam.iter().all(|v| !v.is_zero()));
        }
    }
}

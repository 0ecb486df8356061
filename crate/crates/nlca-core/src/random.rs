//! Seeded random inputs for the property suites and randomized CLI checks.
//!
//! Everything goes through one ChaCha stream so failures replay from a seed.

use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

use crate::arith::{rat, Rational};
use crate::combi::{multi_indices, permutations, stable_sort_parity};
use crate::poly::{Monomial, MultiPoly, VarId};

pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform integer in `-bound..=bound` as a rational.
    pub fn small_rational(&mut self, bound: i64) -> Rational {
        rat(self.0.gen_range(-bound..=bound))
    }

    pub fn usize_below(&mut self, bound: usize) -> usize {
        self.0.gen_range(0..bound)
    }

    pub fn chance(&mut self, p_num: u32, p_den: u32) -> bool {
        self.0.gen_range(0..p_den) < p_num
    }

    /// Random polynomial over the given variables with total degree at most
    /// `max_total` and integer coefficients bounded by `coeff_bound`.
    pub fn poly(&mut self, vars: &[VarId], max_total: u32, coeff_bound: i64) -> MultiPoly {
        let mut terms = Vec::new();
        for exps in multi_indices(vars.len(), max_total) {
            let c = self.small_rational(coeff_bound);
            let pairs: Vec<(VarId, u32)> = vars
                .iter()
                .copied()
                .zip(exps.iter().copied())
                .filter(|(_, e)| *e > 0)
                .collect();
            terms.push((Monomial::from_pairs(pairs), c));
        }
        MultiPoly::from_terms(terms)
    }

    /// Random polynomial symmetrized over all permutations of `vars`.
    pub fn symmetric_poly(
        &mut self,
        vars: &[VarId],
        max_total: u32,
        coeff_bound: i64,
    ) -> MultiPoly {
        let base = self.poly(vars, max_total, coeff_bound);
        symmetrize(&base, vars, false)
    }

    /// Random polynomial antisymmetrized over all permutations of `vars`.
    pub fn skew_poly(&mut self, vars: &[VarId], max_total: u32, coeff_bound: i64) -> MultiPoly {
        let base = self.poly(vars, max_total, coeff_bound);
        symmetrize(&base, vars, true)
    }

    /// Random antisymmetric square matrix with small integer entries.
    pub fn antisymmetric_matrix(&mut self, size: usize, bound: i64) -> Vec<Vec<Rational>> {
        let mut a = vec![vec![rat(0); size]; size];
        for i in 0..size {
            for j in i + 1..size {
                let c = self.small_rational(bound);
                a[i][j] = c.clone();
                a[j][i] = -c;
            }
        }
        a
    }
}

/// Sum of `p` over all permutations of `vars`, with the sign of the
/// permutation when `signed` is set.
pub fn symmetrize(p: &MultiPoly, vars: &[VarId], signed: bool) -> MultiPoly {
    let mut total = MultiPoly::zero();
    for perm in permutations(vars.len()) {
        let map: std::collections::BTreeMap<VarId, MultiPoly> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, MultiPoly::var(vars[perm[i]])))
            .collect();
        let image = p.substitute(&map);
        if signed && stable_sort_parity(&perm) {
            total = total.sub(&image);
        } else {
            total = total.add(&image);
        }
    }
    total
}

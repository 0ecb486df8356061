//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are drawn from a fixed two-level family: the translation
//! generator `d` and doubly indexed spectral variables `l<block>_<slot>`.
//! Monomials are kept sorted by variable, terms sorted graded-lexicographically,
//! and zero coefficients are never stored, so structural equality is
//! polynomial equality and rendering is canonical.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{factorial, is_negative, rat, render_rational, Rational};

/// A polynomial variable: the translation generator or one spectral variable.
///
/// Ordering puts `Partial` first, then spectral variables by `(block, slot)`;
/// this order drives canonical monomial comparison and rendering.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarId {
    /// The translation generator, rendered `d`.
    Partial,
    /// Spectral variable `l<block>_<slot>`.
    Lambda { block: u32, slot: u32 },
}

impl VarId {
    /// Spectral variable in block `block` at position `slot` (both 1-based by
    /// convention; block 0 is reserved for the lone variable of degree-one
    /// cochains).
    pub fn lambda(block: u32, slot: u32) -> Self {
        VarId::Lambda { block, slot }
    }

    pub fn is_lambda(&self) -> bool {
        matches!(self, VarId::Lambda { .. })
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Partial => write!(f, "d"),
            VarId::Lambda { block, slot } => write!(f, "l{}_{}", block, slot),
        }
    }
}

/// Product of variable powers, sorted by variable with no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    exps: Vec<(VarId, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(v: VarId) -> Self {
        Monomial { exps: vec![(v, 1)] }
    }

    /// Builds a monomial from arbitrary (variable, exponent) pairs, merging
    /// duplicates and dropping zero exponents.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        Monomial {
            exps: map.into_iter().collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().map(|(_, e)| *e).sum()
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.exps
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.exps.iter().map(|(v, _)| *v)
    }

    pub fn exponents(&self) -> &[(VarId, u32)] {
        &self.exps
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            match self.exps[i].0.cmp(&other.exps[j].0) {
                Ordering::Less => {
                    out.push(self.exps[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.exps[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.exps[i].0, self.exps[i].1 + other.exps[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial { exps: out }
    }
}

/// Graded-lexicographic order: total degree first, then exponent vectors
/// compared variable by variable in `VarId` order (missing variables count
/// as exponent zero, larger exponent on the earliest differing variable wins).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.exps.get(i), other.exps.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    // Earlier variable present only on one side: that side has
                    // the larger exponent there, hence is lex-greater.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match ea.cmp(&eb) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with rational coefficients in canonical form.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        MultiPoly::constant(rat(1))
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        MultiPoly { terms }
    }

    pub fn var(v: VarId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(v), rat(1));
        MultiPoly { terms }
    }

    /// The variable `d`.
    pub fn partial() -> Self {
        MultiPoly::var(VarId::Partial)
    }

    /// The variable `l<block>_<slot>`.
    pub fn lambda(block: u32, slot: u32) -> Self {
        MultiPoly::var(VarId::lambda(block, slot))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut out = MultiPoly::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
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

    /// Coefficient of an exact monomial (zero when absent).
    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut out = MultiPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    /// Maximal total degree in the spectral variables alone.
    pub fn lambda_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| {
                m.exponents()
                    .iter()
                    .filter(|(v, _)| v.is_lambda())
                    .map(|(_, e)| *e)
                    .sum::<u32>()
            })
            .max()
            .unwrap_or(0)
    }

    /// Sorted list of the variables that occur.
    pub fn vars(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = Vec::new();
        for m in self.terms.keys() {
            for v in m.vars() {
                if let Err(pos) = vs.binary_search(&v) {
                    vs.insert(pos, v);
                }
            }
        }
        vs
    }

    /// Simultaneous substitution: every variable in the map is replaced by its
    /// image in one pass, so images may mention substituted variables without
    /// capture.
    pub fn substitute(&self, map: &BTreeMap<VarId, MultiPoly>) -> MultiPoly {
        if map.is_empty() {
            return self.clone();
        }
        let mut powers: BTreeMap<(VarId, u32), MultiPoly> = BTreeMap::new();
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = MultiPoly::constant(c.clone());
            let mut untouched: Vec<(VarId, u32)> = Vec::new();
            for &(v, e) in m.exponents() {
                match map.get(&v) {
                    None => untouched.push((v, e)),
                    Some(image) => {
                        let p = powers
                            .entry((v, e))
                            .or_insert_with(|| image.pow(e))
                            .clone();
                        acc = acc.mul(&p);
                    }
                }
            }
            if !untouched.is_empty() {
                let mono = MultiPoly {
                    terms: BTreeMap::from([(Monomial::from_pairs(untouched), rat(1))]),
                };
                acc = acc.mul(&mono);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Substitution of a single variable.
    pub fn substitute_var(&self, v: VarId, image: &MultiPoly) -> MultiPoly {
        self.substitute(&BTreeMap::from([(v, image.clone())]))
    }

    /// Coefficient of `prod vars[i]^k[i]` scaled by `prod k[i]!`, as a
    /// polynomial in the remaining variables. Inverts the divided-power
    /// expansion `p = sum_k (prod vars^k / k!) * dpc(p, vars, k)`.
    pub fn divided_power_coefficient(&self, vars: &[VarId], k: &[u32]) -> MultiPoly {
        assert_eq!(vars.len(), k.len(), "one exponent per variable");
        let mut out = MultiPoly::zero();
        'terms: for (m, c) in &self.terms {
            let mut rest: Vec<(VarId, u32)> = Vec::new();
            for &(v, e) in m.exponents() {
                match vars.iter().position(|w| *w == v) {
                    Some(i) => {
                        if k[i] != e {
                            continue 'terms;
                        }
                    }
                    None => rest.push((v, e)),
                }
            }
            // Variables requested with k > 0 but absent from the monomial.
            for (i, &v) in vars.iter().enumerate() {
                if k[i] > 0 && m.degree_in(v) == 0 {
                    continue 'terms;
                }
            }
            out.add_term(Monomial::from_pairs(rest), c.clone());
        }
        let scale: Rational = k.iter().map(|&e| factorial(e)).product();
        out.scale(&scale)
    }

    /// Dense coefficients by power of `d`, provided no spectral variable
    /// occurs. Index `i` holds the coefficient of `d^i`.
    pub fn partial_coefficients(&self) -> Option<Vec<Rational>> {
        let mut out: Vec<Rational> = Vec::new();
        for (m, c) in &self.terms {
            let exps = m.exponents();
            let deg = match exps {
                [] => 0,
                [(VarId::Partial, e)] => *e as usize,
                _ => return None,
            };
            if out.len() <= deg {
                out.resize(deg + 1, Rational::zero());
            }
            out[deg] = c.clone();
        }
        Some(out)
    }

    /// Renders with a custom variable namer (reports use the default
    /// `Display`, the pseudo-bracket printer renames variables).
    pub fn render_with(&self, namer: &dyn Fn(VarId) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = is_negative(c);
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let coeff_is_one = abs.is_one();
            if m.is_one() {
                out.push_str(&render_rational(&abs));
            } else {
                if !coeff_is_one {
                    out.push_str(&render_rational(&abs));
                    out.push('*');
                }
                let mono = m
                    .exponents()
                    .iter()
                    .map(|&(v, e)| {
                        if e == 1 {
                            namer(v)
                        } else {
                            format!("{}^{}", namer(v), e)
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("*");
                out.push_str(&mono);
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_with(&|v| v.to_string()))
    }
}

/// Sum of a slice of polynomials.
pub fn poly_sum<'a>(ps: impl IntoIterator<Item = &'a MultiPoly>) -> MultiPoly {
    let mut out = MultiPoly::zero();
    for p in ps {
        out = out.add(p);
    }
    out
}

/// The Vandermonde determinant `prod_{i<j} (vars[i] - vars[j])`; one for
/// fewer than two variables.
pub fn vandermonde(vars: &[VarId]) -> MultiPoly {
    let mut out = MultiPoly::one();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            out = out.mul(&MultiPoly::var(vars[i]).sub(&MultiPoly::var(vars[j])));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    fn l(slot: u32) -> MultiPoly {
        MultiPoly::lambda(1, slot)
    }

    fn d() -> MultiPoly {
        MultiPoly::partial()
    }

    #[test]
    fn addition_cancels() {
        let p = l(1).add(&l(1).neg());
        assert!(p.is_zero());
    }

    #[test]
    fn addition_collects() {
        let p = d().add(&l(1).scale(&rat(2))).add(&l(1));
        assert_eq!(p, d().add(&l(1).scale(&rat(3))));
        let half = l(1).mul(&l(1)).scale(&ratio(1, 2));
        assert_eq!(half.add(&half), l(1).mul(&l(1)));
    }

    #[test]
    fn multiplication() {
        let p = l(1).sub(&l(2)).mul(&l(1).add(&l(2)));
        let expect = l(1).mul(&l(1)).sub(&l(2).mul(&l(2)));
        assert_eq!(p, expect);
        assert_eq!(MultiPoly::one().mul(&p), p);
        assert!(MultiPoly::zero().mul(&p).is_zero());
    }

    #[test]
    fn vandermonde_n3() {
        let v = vandermonde(&[VarId::lambda(1, 1), VarId::lambda(1, 2)]);
        assert_eq!(v, l(1).sub(&l(2)));
        assert_eq!(vandermonde(&[VarId::lambda(1, 1)]), MultiPoly::one());
    }

    #[test]
    fn substitute_shifts_partial() {
        // d + 2*l1 under d -> d + l1 + l2 gives d + 3*l1 + l2.
        let p = d().add(&l(1).scale(&rat(2)));
        let image = d().add(&l(1)).add(&l(2));
        let q = p.substitute_var(VarId::Partial, &image);
        assert_eq!(q, d().add(&l(1).scale(&rat(3))).add(&l(2)));
    }

    #[test]
    fn substitute_is_simultaneous() {
        // Swapping l1 and l2 through a simultaneous map must not cascade.
        let p = l(1).sub(&l(2));
        let map = BTreeMap::from([
            (VarId::lambda(1, 1), l(2)),
            (VarId::lambda(1, 2), l(1)),
        ]);
        assert_eq!(p.substitute(&map), l(2).sub(&l(1)));
    }

    #[test]
    fn substitute_into_product() {
        let p = l(1).mul(&l(1));
        let q = p.substitute_var(VarId::lambda(1, 1), &d().add(&l(2)));
        let expect = d().add(&l(2)).mul(&d().add(&l(2)));
        assert_eq!(q, expect);
    }

    #[test]
    fn divided_power_examples() {
        // dpc(l1^2/2 * d, [l1], [2]) = d.
        let p = l(1).mul(&l(1)).mul(&d()).scale(&ratio(1, 2));
        assert_eq!(
            p.divided_power_coefficient(&[VarId::lambda(1, 1)], &[2]),
            d()
        );
        // dpc(d + 2*l1, [l1], [0]) = d.
        let p = d().add(&l(1).scale(&rat(2)));
        assert_eq!(
            p.divided_power_coefficient(&[VarId::lambda(1, 1)], &[0]),
            d()
        );
        // dpc(l1*l2^2, [l1, l2], [1, 2]) = 1!*2! = 2.
        let p = l(1).mul(&l(2)).mul(&l(2));
        assert_eq!(
            p.divided_power_coefficient(
                &[VarId::lambda(1, 1), VarId::lambda(1, 2)],
                &[1, 2]
            ),
            MultiPoly::constant(rat(2))
        );
        // Requesting an absent power gives zero.
        assert_eq!(
            p.divided_power_coefficient(&[VarId::Partial], &[1]),
            MultiPoly::zero()
        );
    }

    #[test]
    fn degrees() {
        let p = d().mul(&l(1)).add(&l(2).pow(3));
        assert_eq!(p.total_degree(), 3);
        assert_eq!(p.degree_in(VarId::Partial), 1);
        assert_eq!(p.lambda_degree(), 3);
        assert_eq!(p.vars().len(), 3);
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let m_d2 = Monomial::from_pairs([(VarId::Partial, 2)]);
        let m_dl = Monomial::from_pairs([(VarId::Partial, 1), (VarId::lambda(1, 1), 1)]);
        let m_l2 = Monomial::from_pairs([(VarId::lambda(1, 1), 2)]);
        let m_d = Monomial::from_pairs([(VarId::Partial, 1)]);
        assert!(m_d2 > m_dl);
        assert!(m_dl > m_l2);
        assert!(m_l2 > m_d);
        assert!(m_d > Monomial::one());
    }

    #[test]
    fn rendering_is_canonical() {
        let p = d()
            .mul(&d())
            .sub(&l(1).mul(&l(2)).scale(&ratio(1, 2)))
            .add(&MultiPoly::constant(rat(3)));
        assert_eq!(p.to_string(), "d^2 - 1/2*l1_1*l1_2 + 3");
        assert_eq!(MultiPoly::zero().to_string(), "0");
        assert_eq!(l(1).neg().to_string(), "-l1_1");
        assert_eq!(
            d().pow(2).scale(&rat(-2)).add(&l(1)).to_string(),
            "-2*d^2 + l1_1"
        );
    }

    #[test]
    fn partial_coefficients_dense() {
        let p = d().pow(2).scale(&rat(3)).add(&MultiPoly::one());
        assert_eq!(
            p.partial_coefficients(),
            Some(vec![rat(1), rat(0), rat(3)])
        );
        assert!(d().add(&l(1)).partial_coefficients().is_none());
    }
}

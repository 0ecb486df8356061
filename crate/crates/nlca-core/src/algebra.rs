//! Presentations of finite n-Lie conformal algebras and the axiom checkers.
//!
//! A presentation stores the bracket on canonical generator tuples (first
//! `n-1` indices non-decreasing, last index free) as polynomial values in
//! `d` and the slot variables `l1_1 .. l1_{n-1}`. Every other bracket is
//! derived by stable-sorting the first `n-1` slots with the sign of the
//! permutation and permuting slot labels along. Missing entries are zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::arith::Rational;
use crate::combi::{cartesian, stable_sort_parity};
use crate::poly::{poly_sum, MultiPoly, VarId};
use crate::report::CheckReport;

/// Index of a generator inside one presentation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GeneratorId(pub usize);

/// Element of the free module over the polynomial ring on one generator set:
/// a finite sum `sum_k q_k(d, l...) e_k`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PolyValue {
    coeffs: BTreeMap<GeneratorId, MultiPoly>,
}

impl PolyValue {
    pub fn zero() -> Self {
        PolyValue {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_gen(g: GeneratorId) -> Self {
        PolyValue::term(g, MultiPoly::one())
    }

    pub fn term(g: GeneratorId, q: MultiPoly) -> Self {
        let mut coeffs = BTreeMap::new();
        if !q.is_zero() {
            coeffs.insert(g, q);
        }
        PolyValue { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GeneratorId, &MultiPoly)> {
        self.coeffs.iter()
    }

    /// Coefficient polynomial of one generator (zero when absent).
    pub fn coefficient(&self, g: GeneratorId) -> MultiPoly {
        self.coeffs.get(&g).cloned().unwrap_or_else(MultiPoly::zero)
    }

    pub fn insert_add(&mut self, g: GeneratorId, q: MultiPoly) {
        if q.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(g) {
            Entry::Vacant(e) => {
                e.insert(q);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&q);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &PolyValue) -> PolyValue {
        let mut out = self.clone();
        for (g, q) in &other.coeffs {
            out.insert_add(*g, q.clone());
        }
        out
    }

    pub fn sub(&self, other: &PolyValue) -> PolyValue {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PolyValue {
        PolyValue {
            coeffs: self
                .coeffs
                .iter()
                .map(|(g, q)| (*g, q.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> PolyValue {
        let mut out = PolyValue::zero();
        for (g, q) in &self.coeffs {
            out.insert_add(*g, q.scale(c));
        }
        out
    }

    pub fn scale_poly(&self, p: &MultiPoly) -> PolyValue {
        let mut out = PolyValue::zero();
        for (g, q) in &self.coeffs {
            out.insert_add(*g, q.mul(p));
        }
        out
    }

    /// Applies one substitution map to every coefficient polynomial.
    pub fn substitute_all(&self, map: &BTreeMap<VarId, MultiPoly>) -> PolyValue {
        let mut out = PolyValue::zero();
        for (g, q) in &self.coeffs {
            out.insert_add(*g, q.substitute(map));
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> PolyValue {
        let mut out = PolyValue::zero();
        for (g, q) in &self.coeffs {
            out.insert_add(*g, f(q));
        }
        out
    }

    /// Variables occurring in any coefficient.
    pub fn vars(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = Vec::new();
        for q in self.coeffs.values() {
            for v in q.vars() {
                if let Err(pos) = vs.binary_search(&v) {
                    vs.insert(pos, v);
                }
            }
        }
        vs
    }

    /// True when no spectral variable occurs in any coefficient.
    pub fn is_conformal(&self) -> bool {
        self.vars().iter().all(|v| !v.is_lambda())
    }

    /// Canonical rendering against a generator name table: terms by
    /// generator index, coefficients in canonical polynomial form.
    pub fn render(&self, names: &[String]) -> String {
        self.render_with_vars(names, &|v: VarId| v.to_string())
    }

    /// Rendering with a custom variable namer (for translated tables).
    pub fn render_with_vars(&self, names: &[String], namer: &dyn Fn(VarId) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (g, q)) in self.coeffs.iter().enumerate() {
            let name = &names[g.0];
            let rendered = q.render_with(namer);
            let (sign_str, body) = if q.num_terms() == 1 {
                // Fold the sign of a single-term coefficient into the join.
                let neg = rendered.starts_with('-');
                let stripped = rendered.trim_start_matches('-');
                let body = if stripped == "1" {
                    name.clone()
                } else {
                    format!("{}*{}", stripped, name)
                };
                (neg, body)
            } else {
                (false, format!("({})*{}", rendered, name))
            };
            if i == 0 {
                if sign_str {
                    out.push('-');
                }
            } else if sign_str {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&body);
        }
        out
    }
}

/// Element of the algebra itself: coefficients are polynomials in `d` only.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConformalElement(PolyValue);

impl ConformalElement {
    pub fn new(v: PolyValue) -> Result<Self, AlgebraError> {
        match v.vars().into_iter().find(|v| v.is_lambda()) {
            Some(var) => Err(AlgebraError::NotConformal {
                var: var.to_string(),
            }),
            None => Ok(ConformalElement(v)),
        }
    }

    pub fn zero() -> Self {
        ConformalElement(PolyValue::zero())
    }

    pub fn from_gen(g: GeneratorId) -> Self {
        ConformalElement(PolyValue::from_gen(g))
    }

    /// `q(d) * e_g`; `q` must not mention spectral variables.
    pub fn term(g: GeneratorId, q: MultiPoly) -> Result<Self, AlgebraError> {
        ConformalElement::new(PolyValue::term(g, q))
    }

    pub fn as_value(&self) -> &PolyValue {
        &self.0
    }

    pub fn into_value(self) -> PolyValue {
        self.0
    }

    pub fn add(&self, other: &ConformalElement) -> ConformalElement {
        ConformalElement(self.0.add(&other.0))
    }

    pub fn neg(&self) -> ConformalElement {
        ConformalElement(self.0.neg())
    }

    pub fn scale(&self, c: &Rational) -> ConformalElement {
        ConformalElement(self.0.scale(c))
    }

    /// Applies the translation generator: multiplies every coefficient by `d`.
    pub fn apply_partial(&self) -> ConformalElement {
        ConformalElement(self.0.scale_poly(&MultiPoly::partial()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn render(&self, names: &[String]) -> String {
        self.0.render(names)
    }
}

#[derive(Error, Clone, Debug, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("arity {got} does not match the algebra arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("bracket arity must be at least 2, got {0}")]
    ArityTooSmall(usize),
    #[error("generator index {id} out of range for {count} generators")]
    GeneratorOutOfRange { id: usize, count: usize },
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("generator names must be non-empty")]
    EmptyName,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("tuple {tuple} is not canonical: first {arity} indices must be non-decreasing")]
    NonCanonicalKey { tuple: String, arity: usize },
    #[error("bracket value for {tuple} uses variable `{var}` outside d, l1_1..l1_{max_slot}")]
    InvalidValueVariable {
        tuple: String,
        var: String,
        max_slot: usize,
    },
    #[error("element coefficient mentions spectral variable `{var}`")]
    NotConformal { var: String },
    #[error("polynomial parameter uses variable `{var}` outside the allowed set {allowed}")]
    InvalidParameterVariable { var: String, allowed: String },
    #[error("parameter is not symmetric under exchange of slots {i} and {j}")]
    NotSymmetric { i: usize, j: usize },
    #[error("parameter is not skew-symmetric under exchange of slots {i} and {j}")]
    NotSkew { i: usize, j: usize },
}

/// Slot variable `l1_<t>` for 1-based slot `t`.
pub fn slot_var(t: usize) -> VarId {
    VarId::lambda(1, t as u32)
}

/// Presentation of a finite n-Lie conformal algebra on free generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NlcaPresentation {
    n: usize,
    names: Vec<String>,
    table: BTreeMap<Vec<GeneratorId>, PolyValue>,
}

impl NlcaPresentation {
    pub fn new(n: usize, names: Vec<String>) -> Result<Self, AlgebraError> {
        if n < 2 {
            return Err(AlgebraError::ArityTooSmall(n));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(AlgebraError::EmptyName);
            }
            if !seen.insert(name.clone()) {
                return Err(AlgebraError::DuplicateName(name.clone()));
            }
        }
        Ok(NlcaPresentation {
            n,
            names,
            table: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_generators(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn gen_name(&self, g: GeneratorId) -> &str {
        &self.names[g.0]
    }

    pub fn gen_by_name(&self, name: &str) -> Option<GeneratorId> {
        self.names.iter().position(|n| n == name).map(GeneratorId)
    }

    pub fn generators(&self) -> impl Iterator<Item = GeneratorId> {
        (0..self.names.len()).map(GeneratorId)
    }

    /// Stored canonical entries (first `n-1` indices non-decreasing).
    pub fn table(&self) -> impl Iterator<Item = (&Vec<GeneratorId>, &PolyValue)> {
        self.table.iter()
    }

    fn check_ids(&self, tuple: &[GeneratorId]) -> Result<(), AlgebraError> {
        for g in tuple {
            if g.0 >= self.names.len() {
                return Err(AlgebraError::GeneratorOutOfRange {
                    id: g.0,
                    count: self.names.len(),
                });
            }
        }
        Ok(())
    }

    /// Renders `(name,name,...)` for failure reports.
    pub fn render_tuple(&self, tuple: &[GeneratorId]) -> String {
        let mut s = String::from("(");
        for (i, g) in tuple.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(self.gen_name(*g));
        }
        s.push(')');
        s
    }

    /// Installs the bracket value on a canonical tuple. The first `n-1`
    /// indices must be non-decreasing; the value may only mention `d` and
    /// the slot variables.
    pub fn set_bracket(
        &mut self,
        tuple: &[GeneratorId],
        value: PolyValue,
    ) -> Result<(), AlgebraError> {
        if tuple.len() != self.n {
            return Err(AlgebraError::ArityMismatch {
                expected: self.n,
                got: tuple.len(),
            });
        }
        self.check_ids(tuple)?;
        if tuple[..self.n - 1].windows(2).any(|w| w[0] > w[1]) {
            return Err(AlgebraError::NonCanonicalKey {
                tuple: self.render_tuple(tuple),
                arity: self.n - 1,
            });
        }
        self.check_ids(&value.coeffs.keys().copied().collect::<Vec<_>>())?;
        let allowed: Vec<VarId> = (1..self.n).map(slot_var).collect();
        for v in value.vars() {
            if v != VarId::Partial && !allowed.contains(&v) {
                return Err(AlgebraError::InvalidValueVariable {
                    tuple: self.render_tuple(tuple),
                    var: v.to_string(),
                    max_slot: self.n - 1,
                });
            }
        }
        if value.is_zero() {
            self.table.remove(&tuple.to_vec());
        } else {
            self.table.insert(tuple.to_vec(), value);
        }
        Ok(())
    }

    /// The standard slot labels `l1_1 .. l1_{n-1}`.
    pub fn std_labels(&self) -> Vec<MultiPoly> {
        (1..self.n).map(|t| MultiPoly::var(slot_var(t))).collect()
    }

    /// Bracket of a generator tuple with explicit polynomial labels on the
    /// first `n-1` slots: the canonical entry is looked up after stably
    /// sorting those slots (labels travel with their generators) and carries
    /// the sign of the sorting permutation.
    pub fn bracket_with_labels(
        &self,
        tuple: &[GeneratorId],
        labels: &[MultiPoly],
    ) -> PolyValue {
        assert_eq!(tuple.len(), self.n, "bracket arity");
        assert_eq!(labels.len(), self.n - 1, "one label per leading slot");
        let mut pairs: Vec<(GeneratorId, &MultiPoly)> = tuple[..self.n - 1]
            .iter()
            .copied()
            .zip(labels.iter())
            .collect();
        let odd = stable_sort_parity(
            &pairs.iter().map(|(g, _)| *g).collect::<Vec<_>>(),
        );
        pairs.sort_by_key(|(g, _)| *g);
        let mut key: Vec<GeneratorId> = pairs.iter().map(|(g, _)| *g).collect();
        key.push(tuple[self.n - 1]);
        let Some(value) = self.table.get(&key) else {
            return PolyValue::zero();
        };
        let mut map: BTreeMap<VarId, MultiPoly> = BTreeMap::new();
        for (t, (_, label)) in pairs.iter().enumerate() {
            let v = slot_var(t + 1);
            if **label != MultiPoly::var(v) {
                map.insert(v, (*label).clone());
            }
        }
        let out = if map.is_empty() {
            value.clone()
        } else {
            value.substitute_all(&map)
        };
        if odd {
            out.neg()
        } else {
            out
        }
    }

    /// Bracket of a generator tuple under the standard labels.
    pub fn bracket(&self, tuple: &[GeneratorId]) -> PolyValue {
        self.bracket_with_labels(tuple, &self.std_labels())
    }

    /// Sesquilinear evaluation on polynomial-valued slot entries.
    ///
    /// Entry `s < n` with label `mu_s` contributes its coefficients with
    /// `d -> -mu_s`; the last entry contributes with `d -> d + sum(labels)`.
    /// The base bracket is then taken with the given labels.
    pub fn eval_composite(&self, args: &[PolyValue], labels: &[MultiPoly]) -> PolyValue {
        assert_eq!(args.len(), self.n, "one entry per slot");
        assert_eq!(labels.len(), self.n - 1, "one label per leading slot");
        let shift = MultiPoly::partial().add(&poly_sum(labels.iter()));
        let mut transformed: Vec<Vec<(GeneratorId, MultiPoly)>> = Vec::with_capacity(self.n);
        for (s, arg) in args.iter().enumerate() {
            let image = if s + 1 < self.n {
                labels[s].neg()
            } else {
                shift.clone()
            };
            transformed.push(
                arg.iter()
                    .map(|(g, q)| (*g, q.substitute_var(VarId::Partial, &image)))
                    .collect(),
            );
        }
        if transformed.iter().any(|t| t.is_empty()) {
            return PolyValue::zero();
        }
        let mut base_cache: BTreeMap<Vec<GeneratorId>, PolyValue> = BTreeMap::new();
        let mut out = PolyValue::zero();
        let mut idx = vec![0usize; self.n];
        loop {
            let mut coeff = MultiPoly::one();
            let mut tuple = Vec::with_capacity(self.n);
            for (s, &i) in idx.iter().enumerate() {
                let (g, q) = &transformed[s][i];
                tuple.push(*g);
                coeff = coeff.mul(q);
            }
            let base = base_cache
                .entry(tuple.clone())
                .or_insert_with(|| self.bracket_with_labels(&tuple, labels));
            out = out.add(&base.scale_poly(&coeff));
            // Odometer.
            let mut s = self.n;
            loop {
                if s == 0 {
                    return out;
                }
                s -= 1;
                idx[s] += 1;
                if idx[s] < transformed[s].len() {
                    break;
                }
                idx[s] = 0;
            }
        }
    }

    /// Bracket of algebra elements under the standard labels.
    pub fn eval_bracket(&self, args: &[ConformalElement]) -> PolyValue {
        let values: Vec<PolyValue> = args.iter().map(|a| a.as_value().clone()).collect();
        self.eval_composite(&values, &self.std_labels())
    }

    /// Conformal skew-symmetry: for every generator tuple, (C3a) adjacent
    /// exchanges among the first `n-1` slots flip the sign (with labels
    /// exchanged), and (C3b) exchanging the last two slots equals minus the
    /// bracket with the moved label replaced by `-d - l1_1 - .. - l1_{n-1}`.
    pub fn check_skew(&self) -> CheckReport {
        let mut rep = CheckReport::pass("skew");
        let labels = self.std_labels();
        let mu = MultiPoly::partial()
            .add(&poly_sum(labels.iter()))
            .neg();
        for raw in cartesian(self.num_generators(), self.n) {
            let tuple: Vec<GeneratorId> = raw.into_iter().map(GeneratorId).collect();
            let lhs = self.bracket_with_labels(&tuple, &labels);
            for i in 0..self.n.saturating_sub(2) {
                let mut t2 = tuple.clone();
                t2.swap(i, i + 1);
                let mut lab2 = labels.clone();
                lab2.swap(i, i + 1);
                let residual = lhs.add(&self.bracket_with_labels(&t2, &lab2));
                if !residual.is_zero() {
                    rep.record(
                        self.render_tuple(&tuple),
                        "C3a",
                        residual.render(&self.names),
                    );
                }
            }
            let mut t2 = tuple.clone();
            t2.swap(self.n - 2, self.n - 1);
            let mut lab2 = labels.clone();
            lab2[self.n - 2] = mu.clone();
            let residual = lhs.add(&self.bracket_with_labels(&t2, &lab2));
            if !residual.is_zero() {
                rep.record(
                    self.render_tuple(&tuple),
                    "C3b",
                    residual.render(&self.names),
                );
            }
        }
        rep
    }

    /// The Filippov identity (C4) on all generator tuples, expanded with
    /// spectral variables `l1_1 .. l1_{2n-2}`.
    pub fn check_filippov(&self) -> CheckReport {
        let mut rep = CheckReport::pass("filippov");
        let n = self.n;
        let lam: Vec<MultiPoly> = (1..=2 * n - 2)
            .map(|t| MultiPoly::var(slot_var(t)))
            .collect();
        let gens = self.num_generators();
        for a_raw in cartesian(gens, n) {
            let a: Vec<GeneratorId> = a_raw.into_iter().map(GeneratorId).collect();
            for b_raw in cartesian(gens, n - 1) {
                let b: Vec<GeneratorId> = b_raw.into_iter().map(GeneratorId).collect();
                let residual = self.filippov_residual(&a, &b, &lam);
                if !residual.is_zero() {
                    let mut t = self.render_tuple(&a);
                    t.pop();
                    let _ = write!(t, ";{}", &self.render_tuple(&b)[1..]);
                    rep.record(t, "C4", residual.render(&self.names));
                }
            }
        }
        rep
    }

    /// Left side minus right side of (C4) for one generator tuple.
    ///
    /// `lam` supplies the `2n-2` outer spectral labels: `lam[0..n]` label the
    /// n left-hand elements, `lam[n..]` the trailing inner-slot elements.
    pub fn filippov_residual(
        &self,
        a: &[GeneratorId],
        b: &[GeneratorId],
        lam: &[MultiPoly],
    ) -> PolyValue {
        let n = self.n;
        assert_eq!(a.len(), n);
        assert_eq!(b.len(), n - 1);
        assert_eq!(lam.len(), 2 * n - 2);
        let mut lhs = PolyValue::zero();
        for i in 0..n {
            // Inner bracket [a_i, b...] labelled (lam_i, lam_n..lam_{2n-3}).
            let mut inner_tuple = Vec::with_capacity(n);
            inner_tuple.push(a[i]);
            inner_tuple.extend_from_slice(b);
            let mut inner_labels = Vec::with_capacity(n - 1);
            inner_labels.push(lam[i].clone());
            inner_labels.extend(lam[n..2 * n - 2].iter().cloned());
            let inner = self.bracket_with_labels(&inner_tuple, &inner_labels);
            // Outer bracket with the remaining a's and the inner value last.
            let mut args: Vec<PolyValue> = Vec::with_capacity(n);
            let mut labels: Vec<MultiPoly> = Vec::with_capacity(n - 1);
            for (j, g) in a.iter().enumerate() {
                if j != i {
                    args.push(PolyValue::from_gen(*g));
                    labels.push(lam[j].clone());
                }
            }
            args.push(inner);
            let term = self.eval_composite(&args, &labels);
            let sign_odd = (n - 1 - i) % 2 == 1;
            lhs = lhs.add(&if sign_odd { term.neg() } else { term });
        }
        // Right side: bracket of all a's placed first with the summed label.
        let inner = self.bracket_with_labels(a, &lam[..n - 1]);
        let sum_label = poly_sum(lam[..n].iter());
        let mut args: Vec<PolyValue> = vec![inner];
        let mut labels: Vec<MultiPoly> = vec![sum_label];
        for (k, g) in b.iter().enumerate() {
            args.push(PolyValue::from_gen(*g));
            if k < n - 2 {
                labels.push(lam[n + k].clone());
            }
        }
        let rhs = self.eval_composite(&args, &labels);
        lhs.sub(&rhs)
    }

    /// Both axiom checkers in order.
    pub fn check_axioms(&self) -> Vec<CheckReport> {
        vec![self.check_skew(), self.check_filippov()]
    }

    /// The k-th products: scaled coefficient extraction from the bracket of a
    /// generator tuple. Coefficients of the result involve `d` only.
    pub fn k_product(
        &self,
        tuple: &[GeneratorId],
        k: &[u32],
    ) -> Result<ConformalElement, AlgebraError> {
        if tuple.len() != self.n {
            return Err(AlgebraError::ArityMismatch {
                expected: self.n,
                got: tuple.len(),
            });
        }
        if k.len() != self.n - 1 {
            return Err(AlgebraError::ArityMismatch {
                expected: self.n - 1,
                got: k.len(),
            });
        }
        self.check_ids(tuple)?;
        let vars: Vec<VarId> = (1..self.n).map(slot_var).collect();
        let value = self.bracket(tuple);
        let extracted = value.map_coeffs(|q| q.divided_power_coefficient(&vars, k));
        ConformalElement::new(extracted)
    }

    /// Largest total degree over all stored bracket values (zero for the
    /// commutative table). Bounds the filtration shift of index expansions.
    pub fn table_max_total_degree(&self) -> u32 {
        self.table
            .values()
            .flat_map(|v| v.coeffs.values())
            .map(|q| q.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Largest total spectral degree over all stored bracket values.
    pub fn table_max_lambda_degree(&self) -> u32 {
        self.table
            .values()
            .flat_map(|v| v.coeffs.values())
            .map(|q| q.lambda_degree())
            .max()
            .unwrap_or(0)
    }
}

//! Conformal modules, conformal operators, and the induced representations
//! of the indexed algebras.
//!
//! A module stores the action of `n-1` algebra generators on a module
//! generator the same way a presentation stores its bracket: canonical
//! non-decreasing acting tuples, polynomial values in `d` and the slot
//! variables, every other order derived through the sorting sign. On top of
//! the action sit conformal operators (images per generator plus an
//! evaluation variable and parameter labels), the derivation checker, the
//! operator bracket, the semidirect presentation, and the divided action of
//! indexed symbols.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{
    slot_var, AlgebraError, ConformalElement, GeneratorId, NlcaPresentation, PolyValue,
};
use crate::annihilation::{ann_basis_bracket, AnnGenerator};
use crate::combi::{cartesian, increasing, multi_indices, nondecreasing, stable_sort_parity};
use crate::poly::{poly_sum, MultiPoly, VarId};
use crate::report::CheckReport;

/// Errors from module construction, operator brackets, and divided actions.
#[derive(Error, Clone, Debug, PartialEq, Eq)]
pub enum ReprError {
    #[error("module axiom check `{check}` failed with {failures} failures")]
    ModuleAxioms { check: String, failures: usize },
    #[error("operator carriers have sizes {left} and {right}")]
    CarrierMismatch { left: usize, right: usize },
    #[error("label `{0}` is used twice")]
    SharedParameter(String),
    #[error("variable `{0}` is not fresh for this bracket")]
    StaleVariable(String),
    #[error("operator label must be spectral, got `{0}`")]
    BadLabelVariable(String),
    #[error("index tuple has level {got}, expected {expected}")]
    LevelMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Conformal module over a presentation: the action of `n-1` algebra
/// generators on each module generator, stored on canonical keys.
///
/// A key is a non-decreasing algebra tuple plus one module generator; the
/// value is a module-side polynomial combination in `d` and the slot
/// variables `l1_1 .. l1_{n-1}`. Other acting orders are derived by
/// stable-sorting with the sign of the permutation, so the action is skew
/// across distinct acting generators by construction; a repeated acting
/// generator must store a value that is skew in its two slot variables for
/// the skew checker to pass.
///
/// Module generator names must be distinct from each other and from the
/// algebra's, so the semidirect carrier is well-named.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformalModule {
    n: usize,
    alg_names: Vec<String>,
    names: Vec<String>,
    table: BTreeMap<(Vec<GeneratorId>, GeneratorId), PolyValue>,
}

impl ConformalModule {
    /// Empty (zero-action) module on the given generator names.
    pub fn new(alg: &NlcaPresentation, names: Vec<String>) -> Result<Self, AlgebraError> {
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(AlgebraError::EmptyName);
            }
            if names[..i].contains(name) || alg.names().contains(name) {
                return Err(AlgebraError::DuplicateName(name.clone()));
            }
        }
        Ok(ConformalModule {
            n: alg.n(),
            alg_names: alg.names().to_vec(),
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

    /// Number of generators of the acting algebra.
    pub fn algebra_size(&self) -> usize {
        self.alg_names.len()
    }

    pub fn algebra_names(&self) -> &[String] {
        &self.alg_names
    }

    /// Stored canonical entries: acting tuple, module generator, value.
    pub fn table(&self) -> impl Iterator<Item = (&[GeneratorId], GeneratorId, &PolyValue)> {
        self.table.iter().map(|((t, v), val)| (t.as_slice(), *v, val))
    }

    fn assert_algebra(&self, alg: &NlcaPresentation) {
        assert_eq!(alg.n(), self.n, "module and algebra arity");
        assert_eq!(alg.names(), &self.alg_names[..], "module built over this algebra");
    }

    /// `(e1,e2;w)` rendering of an acting tuple and module generator.
    pub fn render_action_tuple(&self, tuple: &[GeneratorId], v: GeneratorId) -> String {
        let parts: Vec<&str> = tuple.iter().map(|g| self.alg_names[g.0].as_str()).collect();
        format!("({};{})", parts.join(","), self.names[v.0])
    }

    /// Stores one canonical action value; a zero value clears the entry.
    pub fn set_action(
        &mut self,
        tuple: &[GeneratorId],
        v: GeneratorId,
        value: PolyValue,
    ) -> Result<(), AlgebraError> {
        if tuple.len() != self.n - 1 {
            return Err(AlgebraError::ArityMismatch {
                expected: self.n - 1,
                got: tuple.len(),
            });
        }
        for g in tuple {
            if g.0 >= self.alg_names.len() {
                return Err(AlgebraError::GeneratorOutOfRange {
                    id: g.0,
                    count: self.alg_names.len(),
                });
            }
        }
        if v.0 >= self.names.len() {
            return Err(AlgebraError::GeneratorOutOfRange {
                id: v.0,
                count: self.names.len(),
            });
        }
        if tuple.windows(2).any(|w| w[0] > w[1]) {
            return Err(AlgebraError::NonCanonicalKey {
                tuple: self.render_action_tuple(tuple, v),
                arity: self.n - 1,
            });
        }
        for (g, _) in value.iter() {
            if g.0 >= self.names.len() {
                return Err(AlgebraError::GeneratorOutOfRange {
                    id: g.0,
                    count: self.names.len(),
                });
            }
        }
        let allowed: Vec<VarId> = (1..self.n).map(slot_var).collect();
        for var in value.vars() {
            if var != VarId::Partial && !allowed.contains(&var) {
                return Err(AlgebraError::InvalidValueVariable {
                    tuple: self.render_action_tuple(tuple, v),
                    var: var.to_string(),
                    max_slot: self.n - 1,
                });
            }
        }
        if value.is_zero() {
            self.table.remove(&(tuple.to_vec(), v));
        } else {
            self.table.insert((tuple.to_vec(), v), value);
        }
        Ok(())
    }

    /// The standard slot labels `l1_1 .. l1_{n-1}`.
    pub fn std_labels(&self) -> Vec<MultiPoly> {
        (1..self.n).map(|t| MultiPoly::var(slot_var(t))).collect()
    }

    /// Action of a generator tuple with explicit labels on a module
    /// generator: canonical lookup after a stable sort, labels traveling
    /// with their generators, with the sign of the permutation.
    pub fn action_with_labels(
        &self,
        tuple: &[GeneratorId],
        labels: &[MultiPoly],
        v: GeneratorId,
    ) -> PolyValue {
        assert_eq!(tuple.len(), self.n - 1, "action arity");
        assert_eq!(labels.len(), self.n - 1, "one label per acting slot");
        let mut pairs: Vec<(GeneratorId, &MultiPoly)> =
            tuple.iter().copied().zip(labels.iter()).collect();
        let odd = stable_sort_parity(&pairs.iter().map(|(g, _)| *g).collect::<Vec<_>>());
        pairs.sort_by_key(|(g, _)| *g);
        let key: Vec<GeneratorId> = pairs.iter().map(|(g, _)| *g).collect();
        let Some(value) = self.table.get(&(key, v)) else {
            return PolyValue::zero();
        };
        let mut map: BTreeMap<VarId, MultiPoly> = BTreeMap::new();
        for (t, (_, label)) in pairs.iter().enumerate() {
            let var = slot_var(t + 1);
            if **label != MultiPoly::var(var) {
                map.insert(var, (*label).clone());
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

    /// Action of a generator tuple under the standard labels.
    pub fn action(&self, tuple: &[GeneratorId], v: GeneratorId) -> PolyValue {
        self.action_with_labels(tuple, &self.std_labels(), v)
    }

    /// Sesquilinear action on polynomial-valued entries.
    ///
    /// Acting entry `s` with label `mu_s` contributes its coefficients with
    /// `d -> -mu_s`; the module entry contributes with `d -> d +
    /// sum(labels)`. The base action is then taken with the given labels.
    pub fn eval_action_composite(
        &self,
        args: &[PolyValue],
        labels: &[MultiPoly],
        varg: &PolyValue,
    ) -> PolyValue {
        assert_eq!(args.len(), self.n - 1, "one entry per acting slot");
        assert_eq!(labels.len(), self.n - 1, "one label per acting slot");
        let shift = MultiPoly::partial().add(&poly_sum(labels.iter()));
        let mut transformed: Vec<Vec<(GeneratorId, MultiPoly)>> = Vec::with_capacity(self.n);
        for (s, arg) in args.iter().enumerate() {
            transformed.push(
                arg.iter()
                    .map(|(g, q)| (*g, q.substitute_var(VarId::Partial, &labels[s].neg())))
                    .collect(),
            );
        }
        transformed.push(
            varg.iter()
                .map(|(w, q)| (*w, q.substitute_var(VarId::Partial, &shift)))
                .collect(),
        );
        if transformed.iter().any(|t| t.is_empty()) {
            return PolyValue::zero();
        }
        let mut base_cache: BTreeMap<(Vec<GeneratorId>, GeneratorId), PolyValue> =
            BTreeMap::new();
        let mut out = PolyValue::zero();
        let mut idx = vec![0usize; self.n];
        loop {
            let mut coeff = MultiPoly::one();
            let mut tuple = Vec::with_capacity(self.n - 1);
            for (s, &i) in idx.iter().take(self.n - 1).enumerate() {
                let (g, q) = &transformed[s][i];
                tuple.push(*g);
                coeff = coeff.mul(q);
            }
            let (w, qv) = &transformed[self.n - 1][idx[self.n - 1]];
            coeff = coeff.mul(qv);
            let base = base_cache
                .entry((tuple.clone(), *w))
                .or_insert_with(|| self.action_with_labels(&tuple, labels, *w));
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

    /// Action of algebra elements on a module element, standard labels.
    pub fn eval_action(&self, args: &[ConformalElement], varg: &ConformalElement) -> PolyValue {
        let values: Vec<PolyValue> = args.iter().map(|a| a.as_value().clone()).collect();
        self.eval_action_composite(&values, &self.std_labels(), varg.as_value())
    }

    /// (M3): adjacent exchanges among the acting slots flip the sign, with
    /// labels exchanged along. The module argument does not move.
    pub fn check_skew(&self) -> CheckReport {
        let mut rep = CheckReport::pass("module-skew");
        let labels = self.std_labels();
        for raw in cartesian(self.alg_names.len(), self.n - 1) {
            let tuple: Vec<GeneratorId> = raw.into_iter().map(GeneratorId).collect();
            for w in 0..self.names.len() {
                let v = GeneratorId(w);
                let lhs = self.action_with_labels(&tuple, &labels, v);
                for i in 0..self.n.saturating_sub(2) {
                    let mut t2 = tuple.clone();
                    t2.swap(i, i + 1);
                    let mut lab2 = labels.clone();
                    lab2.swap(i, i + 1);
                    let residual = lhs.add(&self.action_with_labels(&t2, &lab2, v));
                    if !residual.is_zero() {
                        rep.record(
                            self.render_action_tuple(&tuple, v),
                            "M3",
                            residual.render(&self.names),
                        );
                    }
                }
            }
        }
        rep
    }

    /// Left minus right side of (M4a) for one tuple.
    ///
    /// `lam` supplies `2n-2` labels: `lam[0..n]` for the n left elements,
    /// `lam[n..2n-2]` for the trailing acting elements.
    pub fn filippov_residual(
        &self,
        alg: &NlcaPresentation,
        a: &[GeneratorId],
        b: &[GeneratorId],
        v: GeneratorId,
        lam: &[MultiPoly],
    ) -> PolyValue {
        let n = self.n;
        assert_eq!(a.len(), n);
        assert_eq!(b.len(), n - 2);
        assert_eq!(lam.len(), 2 * n - 2);
        let mut lhs = PolyValue::zero();
        for i in 0..n {
            // Inner action (a_i, b...) on v, labels (lam_i, lam_n..).
            let mut inner_tuple = Vec::with_capacity(n - 1);
            inner_tuple.push(a[i]);
            inner_tuple.extend_from_slice(b);
            let mut inner_labels = Vec::with_capacity(n - 1);
            inner_labels.push(lam[i].clone());
            inner_labels.extend(lam[n..2 * n - 2].iter().cloned());
            let inner = self.action_with_labels(&inner_tuple, &inner_labels, v);
            // Outer action of the remaining a's on the inner value.
            let mut args: Vec<PolyValue> = Vec::with_capacity(n - 1);
            let mut labels: Vec<MultiPoly> = Vec::with_capacity(n - 1);
            for (j, g) in a.iter().enumerate() {
                if j != i {
                    args.push(PolyValue::from_gen(*g));
                    labels.push(lam[j].clone());
                }
            }
            let term = self.eval_action_composite(&args, &labels, &inner);
            let sign_odd = (n - 1 - i) % 2 == 1;
            lhs = lhs.add(&if sign_odd { term.neg() } else { term });
        }
        // Right side: the bracket of all a's acts first with the summed
        // label, followed by the b's.
        let inner = alg.bracket_with_labels(a, &lam[..n - 1]);
        let mut args: Vec<PolyValue> = vec![inner];
        let mut labels: Vec<MultiPoly> = vec![poly_sum(lam[..n].iter())];
        for (k, g) in b.iter().enumerate() {
            args.push(PolyValue::from_gen(*g));
            labels.push(lam[n + k].clone());
        }
        let rhs = self.eval_action_composite(&args, &labels, &PolyValue::from_gen(v));
        lhs.sub(&rhs)
    }

    /// Left minus right side of (M4b) for one pair of acting tuples:
    /// the commutator of two actions against the slotwise bracket action.
    ///
    /// `lam[0..n-1]` label the first tuple, `lam[n-1..2n-2]` the second. On
    /// the right, slot `t` of the second tuple is replaced by the bracket of
    /// the first tuple with that entry, and its label picks up the full
    /// first-tuple weight.
    pub fn commutator_residual(
        &self,
        alg: &NlcaPresentation,
        a: &[GeneratorId],
        b: &[GeneratorId],
        v: GeneratorId,
        lam: &[MultiPoly],
    ) -> PolyValue {
        let n = self.n;
        assert_eq!(a.len(), n - 1);
        assert_eq!(b.len(), n - 1);
        assert_eq!(lam.len(), 2 * n - 2);
        let (la, lb) = lam.split_at(n - 1);
        let a_args: Vec<PolyValue> = a.iter().map(|g| PolyValue::from_gen(*g)).collect();
        let b_args: Vec<PolyValue> = b.iter().map(|g| PolyValue::from_gen(*g)).collect();
        let vv = PolyValue::from_gen(v);
        let bv = self.eval_action_composite(&b_args, lb, &vv);
        let av = self.eval_action_composite(&a_args, la, &vv);
        let lhs = self
            .eval_action_composite(&a_args, la, &bv)
            .sub(&self.eval_action_composite(&b_args, lb, &av));
        let weight = poly_sum(la.iter());
        let mut rhs = PolyValue::zero();
        for t in 0..n - 1 {
            let mut bracket_tuple: Vec<GeneratorId> = a.to_vec();
            bracket_tuple.push(b[t]);
            let ct = alg.bracket_with_labels(&bracket_tuple, la);
            let mut args = b_args.clone();
            args[t] = ct;
            let mut labels = lb.to_vec();
            labels[t] = weight.add(&lb[t]);
            rhs = rhs.add(&self.eval_action_composite(&args, &labels, &vv));
        }
        lhs.sub(&rhs)
    }

    /// Both composition axioms (M4a) and (M4b) on all generator tuples,
    /// expanded with spectral variables `l1_1 .. l1_{2n-2}`.
    pub fn check_filippov(&self, alg: &NlcaPresentation) -> CheckReport {
        self.assert_algebra(alg);
        let mut rep = CheckReport::pass("module-filippov");
        let n = self.n;
        let lam: Vec<MultiPoly> = (1..=2 * n - 2)
            .map(|t| MultiPoly::var(slot_var(t)))
            .collect();
        let gens = self.alg_names.len();
        for a_raw in cartesian(gens, n) {
            let a: Vec<GeneratorId> = a_raw.into_iter().map(GeneratorId).collect();
            for b_raw in cartesian(gens, n - 2) {
                let b: Vec<GeneratorId> = b_raw.into_iter().map(GeneratorId).collect();
                for w in 0..self.names.len() {
                    let v = GeneratorId(w);
                    let residual = self.filippov_residual(alg, &a, &b, v, &lam);
                    if !residual.is_zero() {
                        let mut t = alg.render_tuple(&a);
                        t.pop();
                        for g in &b {
                            t.push(',');
                            t.push_str(&self.alg_names[g.0]);
                        }
                        t.push(';');
                        t.push_str(&self.names[w]);
                        t.push(')');
                        rep.record(t, "M4a", residual.render(&self.names));
                    }
                }
            }
        }
        for a_raw in cartesian(gens, n - 1) {
            let a: Vec<GeneratorId> = a_raw.into_iter().map(GeneratorId).collect();
            for b_raw in cartesian(gens, n - 1) {
                let b: Vec<GeneratorId> = b_raw.into_iter().map(GeneratorId).collect();
                for w in 0..self.names.len() {
                    let v = GeneratorId(w);
                    let residual = self.commutator_residual(alg, &a, &b, v, &lam);
                    if !residual.is_zero() {
                        let mut t = alg.render_tuple(&a);
                        t.pop();
                        for g in &b {
                            t.push(',');
                            t.push_str(&self.alg_names[g.0]);
                        }
                        t.push(';');
                        t.push_str(&self.names[w]);
                        t.push(')');
                        rep.record(t, "M4b", residual.render(&self.names));
                    }
                }
            }
        }
        rep
    }

    /// Both axiom checkers in order.
    pub fn check_axioms(&self, alg: &NlcaPresentation) -> Vec<CheckReport> {
        vec![self.check_skew(), self.check_filippov(alg)]
    }

    /// The k-th action products: scaled coefficient extraction from the
    /// action of a generator tuple. Coefficients involve `d` only.
    pub fn action_k_product(
        &self,
        tuple: &[GeneratorId],
        k: &[u32],
        v: GeneratorId,
    ) -> Result<ConformalElement, AlgebraError> {
        if tuple.len() != self.n - 1 {
            return Err(AlgebraError::ArityMismatch {
                expected: self.n - 1,
                got: tuple.len(),
            });
        }
        if k.len() != self.n - 1 {
            return Err(AlgebraError::ArityMismatch {
                expected: self.n - 1,
                got: k.len(),
            });
        }
        for g in tuple {
            if g.0 >= self.alg_names.len() {
                return Err(AlgebraError::GeneratorOutOfRange {
                    id: g.0,
                    count: self.alg_names.len(),
                });
            }
        }
        if v.0 >= self.names.len() {
            return Err(AlgebraError::GeneratorOutOfRange {
                id: v.0,
                count: self.names.len(),
            });
        }
        let vars: Vec<VarId> = (1..self.n).map(slot_var).collect();
        let value = self.action(tuple, v);
        ConformalElement::new(value.map_coeffs(|q| q.divided_power_coefficient(&vars, k)))
    }
}

/// The algebra acting on itself through its own bracket, on a primed copy
/// of the generator names.
pub fn adjoint_module(alg: &NlcaPresentation) -> ConformalModule {
    let mut names: Vec<String> = alg.names().iter().map(|s| format!("{s}'")).collect();
    while names.iter().any(|nm| alg.names().contains(nm)) {
        for nm in &mut names {
            nm.push('\'');
        }
    }
    let mut m = ConformalModule::new(alg, names).expect("suffixed names stay distinct");
    for raw in nondecreasing(alg.num_generators(), alg.n() - 1) {
        let tuple: Vec<GeneratorId> = raw.into_iter().map(GeneratorId).collect();
        for v in alg.generators() {
            let mut full = tuple.clone();
            full.push(v);
            let value = alg.bracket(&full);
            if !value.is_zero() {
                m.set_action(&tuple, v, value)
                    .expect("bracket values are valid action values");
            }
        }
    }
    m
}

/// The module with the zero action on the given generator names.
pub fn trivial_module(
    alg: &NlcaPresentation,
    names: Vec<String>,
) -> Result<ConformalModule, AlgebraError> {
    ConformalModule::new(alg, names)
}

fn shift_gens(v: &PolyValue, offset: usize) -> PolyValue {
    let mut out = PolyValue::zero();
    for (g, q) in v.iter() {
        out.insert_add(GeneratorId(g.0 + offset), q.clone());
    }
    out
}

/// Joins an algebra and one of its modules into a single presentation on
/// the disjoint generator union.
///
/// All-algebra brackets copy the table; one module entry in the last slot
/// reads the action; one module entry inside the leading block is moved to
/// the last slot, which flips the sign and turns its label into
/// `-d - l1_1 - .. - l1_{n-1}`; two or more module entries give zero. The
/// module axioms are verified first, and the output satisfies the algebra
/// axioms.
pub fn semidirect_sum(
    alg: &NlcaPresentation,
    m: &ConformalModule,
) -> Result<NlcaPresentation, ReprError> {
    m.assert_algebra(alg);
    for report in m.check_axioms(alg) {
        if !report.passed() {
            return Err(ReprError::ModuleAxioms {
                check: report.name.clone(),
                failures: report.failure_count,
            });
        }
    }
    let n = alg.n();
    let na = alg.num_generators();
    let mut names = alg.names().to_vec();
    names.extend(m.names().iter().cloned());
    let mut out = NlcaPresentation::new(n, names)?;
    let total = na + m.num_generators();
    let moved_label = MultiPoly::partial()
        .add(&poly_sum(alg.std_labels().iter()))
        .neg();
    for raw in nondecreasing(total, n - 1) {
        for last in 0..total {
            let mut key: Vec<GeneratorId> = raw.iter().copied().map(GeneratorId).collect();
            key.push(GeneratorId(last));
            let module_count = key.iter().filter(|g| g.0 >= na).count();
            let value = match module_count {
                0 => alg.bracket(&key),
                1 if last >= na => {
                    shift_gens(&m.action(&key[..n - 1], GeneratorId(last - na)), na)
                }
                1 => {
                    // Sorting puts the one module entry at the end of the
                    // leading block; swap it with the last slot.
                    let w = GeneratorId(key[n - 2].0 - na);
                    let mut args: Vec<PolyValue> = key[..n - 2]
                        .iter()
                        .map(|g| PolyValue::from_gen(*g))
                        .collect();
                    args.push(PolyValue::from_gen(key[n - 1]));
                    let mut labels: Vec<MultiPoly> =
                        (1..n - 1).map(|t| MultiPoly::var(slot_var(t))).collect();
                    labels.push(moved_label.clone());
                    shift_gens(
                        &m.eval_action_composite(&args, &labels, &PolyValue::from_gen(w))
                            .neg(),
                        na,
                    )
                }
                _ => PolyValue::zero(),
            };
            out.set_bracket(&key, value)?;
        }
    }
    Ok(out)
}

/// A conformal operator on a free module: one polynomial image per carrier
/// generator, an evaluation variable, and parameter labels that enter the
/// conformal shift alongside it.
///
/// Applied to `q(d) v`, the operator substitutes `d -> d + eval +
/// sum(params)` into `q` and multiplies the image of `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CendOperator {
    images: Vec<PolyValue>,
    eval: VarId,
    params: Vec<VarId>,
}

impl CendOperator {
    /// Operator from its generator images. The evaluation variable and the
    /// parameters must be distinct spectral variables.
    pub fn new(
        images: Vec<PolyValue>,
        eval: VarId,
        params: Vec<VarId>,
    ) -> Result<Self, ReprError> {
        if !eval.is_lambda() {
            return Err(ReprError::BadLabelVariable(eval.to_string()));
        }
        for (i, p) in params.iter().enumerate() {
            if !p.is_lambda() {
                return Err(ReprError::BadLabelVariable(p.to_string()));
            }
            if *p == eval || params[..i].contains(p) {
                return Err(ReprError::SharedParameter(p.to_string()));
            }
        }
        Ok(CendOperator {
            images,
            eval,
            params,
        })
    }

    pub fn carrier(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, g: GeneratorId) -> &PolyValue {
        &self.images[g.0]
    }

    pub fn eval_var(&self) -> VarId {
        self.eval
    }

    pub fn params(&self) -> &[VarId] {
        &self.params
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(PolyValue::is_zero)
    }

    /// The full spectral weight `eval + sum(params)` entering the shift.
    pub fn label_shift(&self) -> MultiPoly {
        let mut s = MultiPoly::var(self.eval);
        for p in &self.params {
            s = s.add(&MultiPoly::var(*p));
        }
        s
    }

    /// Every variable mentioned by the operator, deduplicated.
    pub fn all_vars(&self) -> Vec<VarId> {
        let mut vars = vec![self.eval];
        vars.extend(self.params.iter().copied());
        for im in &self.images {
            vars.extend(im.vars());
        }
        vars.sort();
        vars.dedup();
        vars
    }

    /// Value on an element, with `at` in place of the evaluation variable.
    pub fn apply_at(&self, v: &PolyValue, at: &MultiPoly) -> PolyValue {
        let mut shift = MultiPoly::partial().add(at);
        for p in &self.params {
            shift = shift.add(&MultiPoly::var(*p));
        }
        let eval_map: Option<BTreeMap<VarId, MultiPoly>> = if *at == MultiPoly::var(self.eval) {
            None
        } else {
            Some([(self.eval, at.clone())].into_iter().collect())
        };
        let mut out = PolyValue::zero();
        for (g, q) in v.iter() {
            assert!(g.0 < self.images.len(), "element exceeds the operator carrier");
            let image = match &eval_map {
                None => self.images[g.0].clone(),
                Some(map) => self.images[g.0].substitute_all(map),
            };
            out = out.add(&image.scale_poly(&q.substitute_var(VarId::Partial, &shift)));
        }
        out
    }

    /// Value on an element at the evaluation variable itself.
    pub fn apply(&self, v: &PolyValue) -> PolyValue {
        self.apply_at(v, &MultiPoly::var(self.eval))
    }

    /// The operator `d f`: every image scaled by `-eval`.
    pub fn partial_action(&self) -> CendOperator {
        let neg = MultiPoly::var(self.eval).neg();
        CendOperator {
            images: self.images.iter().map(|im| im.scale_poly(&neg)).collect(),
            eval: self.eval,
            params: self.params.clone(),
        }
    }
}

/// The operator given by bracketing with a fixed tuple of `n-1` algebra
/// elements: parameters `l<block>_1 .. l<block>_{n-2}` and evaluation
/// variable `l<block>_{n-1}`.
pub fn inner_derivation(
    alg: &NlcaPresentation,
    args: &[ConformalElement],
    block: u32,
) -> Result<CendOperator, ReprError> {
    let n = alg.n();
    if args.len() != n - 1 {
        return Err(AlgebraError::ArityMismatch {
            expected: n - 1,
            got: args.len(),
        }
        .into());
    }
    for a in args {
        for (g, _) in a.as_value().iter() {
            if g.0 >= alg.num_generators() {
                return Err(AlgebraError::GeneratorOutOfRange {
                    id: g.0,
                    count: alg.num_generators(),
                }
                .into());
            }
        }
    }
    let labels: Vec<MultiPoly> = (1..n).map(|t| MultiPoly::lambda(block, t as u32)).collect();
    let mut images = Vec::with_capacity(alg.num_generators());
    for r in alg.generators() {
        let mut a: Vec<PolyValue> = args.iter().map(|x| x.as_value().clone()).collect();
        a.push(PolyValue::from_gen(r));
        images.push(alg.eval_composite(&a, &labels));
    }
    let params: Vec<VarId> = (1..n - 1).map(|t| VarId::lambda(block, t as u32)).collect();
    CendOperator::new(images, VarId::lambda(block, (n - 1) as u32), params)
}

/// Bracket of two operators on the same carrier, with images
/// `f_free(g_{eval-free} r) - g_{eval-free}(f_free r)`.
///
/// `free` stays inside the images as a scalar parameter; the shift
/// parameters of the result are the union of both operands' parameters and
/// the new evaluation variable is `eval`. Both `free` and `eval` must be
/// spectral variables fresh for both operands.
pub fn cend_bracket(
    f: &CendOperator,
    g: &CendOperator,
    free: VarId,
    eval: VarId,
) -> Result<CendOperator, ReprError> {
    if f.images.len() != g.images.len() {
        return Err(ReprError::CarrierMismatch {
            left: f.images.len(),
            right: g.images.len(),
        });
    }
    for p in &f.params {
        if g.params.contains(p) {
            return Err(ReprError::SharedParameter(p.to_string()));
        }
    }
    if !free.is_lambda() {
        return Err(ReprError::BadLabelVariable(free.to_string()));
    }
    if !eval.is_lambda() {
        return Err(ReprError::BadLabelVariable(eval.to_string()));
    }
    let mut stale = f.all_vars();
    stale.extend(g.all_vars());
    if free == eval || stale.contains(&free) {
        return Err(ReprError::StaleVariable(free.to_string()));
    }
    if stale.contains(&eval) {
        return Err(ReprError::StaleVariable(eval.to_string()));
    }
    let lam = MultiPoly::var(free);
    let mu_minus = MultiPoly::var(eval).sub(&lam);
    let f_at: BTreeMap<VarId, MultiPoly> = [(f.eval, lam.clone())].into_iter().collect();
    let g_at: BTreeMap<VarId, MultiPoly> = [(g.eval, mu_minus.clone())].into_iter().collect();
    let mut images = Vec::with_capacity(f.images.len());
    for r in 0..f.images.len() {
        let t1 = f.apply_at(&g.images[r].substitute_all(&g_at), &lam);
        let t2 = g.apply_at(&f.images[r].substitute_all(&f_at), &mu_minus);
        images.push(t1.sub(&t2));
    }
    let mut params = f.params.clone();
    params.extend(g.params.iter().copied());
    CendOperator::new(images, eval, params)
}

/// Leibniz property of an operator over the bracket, on every generator
/// tuple with fresh spectral labels: applying the operator to a bracket
/// equals the sum over slots of the bracket with the operator applied to
/// that entry, the slot label raised by the operator weight (the last slot
/// keeps its labels).
pub fn check_derivation(f: &CendOperator, alg: &NlcaPresentation) -> CheckReport {
    assert_eq!(
        f.images.len(),
        alg.num_generators(),
        "operator carrier matches the algebra"
    );
    let mut rep = CheckReport::pass("derivation");
    let n = alg.n();
    let mut top = 1u32;
    for v in f.all_vars() {
        if let VarId::Lambda { block, .. } = v {
            top = top.max(block);
        }
    }
    let labels: Vec<MultiPoly> = (1..n)
        .map(|t| MultiPoly::lambda(top + 1, t as u32))
        .collect();
    let weight = f.label_shift();
    for raw in cartesian(alg.num_generators(), n) {
        let tuple: Vec<GeneratorId> = raw.into_iter().map(GeneratorId).collect();
        let lhs = f.apply(&alg.bracket_with_labels(&tuple, &labels));
        let mut rhs = PolyValue::zero();
        for i in 0..n {
            let mut args: Vec<PolyValue> =
                tuple.iter().map(|g| PolyValue::from_gen(*g)).collect();
            args[i] = f.images[tuple[i].0].clone();
            let mut lab = labels.clone();
            if i < n - 1 {
                lab[i] = weight.add(&labels[i]);
            }
            rhs = rhs.add(&alg.eval_composite(&args, &lab));
        }
        let residual = lhs.sub(&rhs);
        if !residual.is_zero() {
            rep.record(
                alg.render_tuple(&tuple),
                "derivation",
                residual.render(alg.names()),
            );
        }
    }
    rep
}

/// Divided action of indexed symbols on a module element: the coefficient
/// extraction of the symbolic action at the slot totals.
///
/// Index tuples act through their totals only. The element may carry `d`
/// coefficients, which shift into the extraction.
pub fn module_to_ann_rep(
    m: &ConformalModule,
    p: usize,
    args: &[AnnGenerator],
    v: &ConformalElement,
) -> Result<ConformalElement, ReprError> {
    let n = m.n();
    if args.len() != n - 1 {
        return Err(AlgebraError::ArityMismatch {
            expected: n - 1,
            got: args.len(),
        }
        .into());
    }
    for a in args {
        if a.m.len() != p {
            return Err(ReprError::LevelMismatch {
                expected: p,
                got: a.m.len(),
            });
        }
        if a.gen.0 >= m.algebra_size() {
            return Err(AlgebraError::GeneratorOutOfRange {
                id: a.gen.0,
                count: m.algebra_size(),
            }
            .into());
        }
    }
    for (g, _) in v.as_value().iter() {
        if g.0 >= m.num_generators() {
            return Err(AlgebraError::GeneratorOutOfRange {
                id: g.0,
                count: m.num_generators(),
            }
            .into());
        }
    }
    let arg_vals: Vec<PolyValue> = args.iter().map(|a| PolyValue::from_gen(a.gen)).collect();
    let value = m.eval_action_composite(&arg_vals, &m.std_labels(), v.as_value());
    let vars: Vec<VarId> = (1..n).map(slot_var).collect();
    let ks: Vec<u32> = args.iter().map(AnnGenerator::total).collect();
    let out = value.map_coeffs(|q| q.divided_power_coefficient(&vars, &ks));
    ConformalElement::new(out).map_err(ReprError::from)
}

/// Windowed check that the divided action represents the indexed bracket:
/// slot antisymmetry, the commutator identity against the slotwise bracket,
/// and the fundamental identity against the first-slot bracket, over all
/// index symbols up to the degree bound, applied to module generators and
/// their `d`-multiples.
pub fn check_ann_rep(
    m: &ConformalModule,
    alg: &NlcaPresentation,
    p: usize,
    max_total_degree: u32,
) -> CheckReport {
    m.assert_algebra(alg);
    let mut rep = CheckReport::pass("ann-rep");
    let n = m.n();
    let mut basis: Vec<AnnGenerator> = Vec::new();
    for g in alg.generators() {
        for idx in multi_indices(p, max_total_degree) {
            basis.push(AnnGenerator::new(g, idx));
        }
    }
    let b = basis.len();
    let mut window: Vec<ConformalElement> = Vec::new();
    for w in 0..m.num_generators() {
        let e = ConformalElement::from_gen(GeneratorId(w));
        window.push(e.apply_partial());
        window.push(e);
    }
    let rho = |ids: &[usize], v: &ConformalElement| -> ConformalElement {
        let args: Vec<AnnGenerator> = ids.iter().map(|&i| basis[i].clone()).collect();
        module_to_ann_rep(m, p, &args, v).expect("window symbols are valid")
    };
    let render = |ids: &[usize], v: &ConformalElement| -> String {
        let parts: Vec<String> = ids.iter().map(|&i| basis[i].render(m.algebra_names())).collect();
        format!("({};{})", parts.join(","), v.render(m.names()))
    };
    // Slot antisymmetry, once per unordered neighbor pair.
    for ids in cartesian(b, n - 1) {
        for pos in 0..n.saturating_sub(2) {
            if ids[pos] > ids[pos + 1] {
                continue;
            }
            let mut swapped = ids.clone();
            swapped.swap(pos, pos + 1);
            for v in &window {
                let defect = rho(&ids, v).add(&rho(&swapped, v));
                if !defect.is_zero() {
                    rep.record(render(&ids, v), "rep-skew", defect.render(m.names()));
                }
            }
        }
    }
    // Commutator of two divided actions against the slotwise bracket.
    for x in increasing(b, n - 1) {
        for y in increasing(b, n - 1) {
            for v in &window {
                let xv = rho(&x, v);
                let yv = rho(&y, v);
                let mut residual = rho(&x, &yv).add(&rho(&y, &xv).neg());
                for t in 0..n - 1 {
                    let mut targs: Vec<AnnGenerator> =
                        x.iter().map(|&i| basis[i].clone()).collect();
                    targs.push(basis[y[t]].clone());
                    let inner =
                        ann_basis_bracket(alg, p, &targs).expect("window symbols are valid");
                    for (z, c) in inner.terms() {
                        let mut yt: Vec<AnnGenerator> =
                            y.iter().map(|&i| basis[i].clone()).collect();
                        yt[t] = z.clone();
                        let term = module_to_ann_rep(m, p, &yt, v)
                            .expect("bracket symbols are valid");
                        residual = residual.add(&term.scale(c).neg());
                    }
                }
                if !residual.is_zero() {
                    rep.record(render(&x, v), "rep-commutator", residual.render(m.names()));
                }
            }
        }
    }
    // Fundamental identity against the first-slot bracket.
    for x in increasing(b, n) {
        for y in increasing(b, n - 2) {
            for v in &window {
                let mut lhs = ConformalElement::zero();
                for i in 0..n {
                    let mut inner_ids = vec![x[i]];
                    inner_ids.extend_from_slice(&y);
                    let inner = rho(&inner_ids, v);
                    let outer_ids: Vec<usize> = x
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, &id)| id)
                        .collect();
                    let term = rho(&outer_ids, &inner);
                    let sign_odd = (n - 1 - i) % 2 == 1;
                    lhs = lhs.add(&if sign_odd { term.neg() } else { term });
                }
                let xargs: Vec<AnnGenerator> = x.iter().map(|&i| basis[i].clone()).collect();
                let bx = ann_basis_bracket(alg, p, &xargs).expect("window symbols are valid");
                let mut rhs = ConformalElement::zero();
                for (z, c) in bx.terms() {
                    let mut zargs = vec![z.clone()];
                    zargs.extend(y.iter().map(|&i| basis[i].clone()));
                    let term =
                        module_to_ann_rep(m, p, &zargs, v).expect("bracket symbols are valid");
                    rhs = rhs.add(&term.scale(c));
                }
                let residual = lhs.add(&rhs.neg());
                if !residual.is_zero() {
                    rep.record(render(&x, v), "rep-filippov", residual.render(m.names()));
                }
            }
        }
    }
    rep
}

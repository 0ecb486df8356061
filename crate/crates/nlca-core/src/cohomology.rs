//! Cochain complexes over a conformal module, exactly.
//!
//! A degree-`q` cochain sends `q-1` blocks of `n-1` algebra generators plus
//! one final generator to a module value that is polynomial in `d` and one
//! spectral label per argument. Two storage rules keep the table finite:
//! values on `d`-multiples of an argument expand with a factor of minus that
//! argument's label, and each block is kept non-decreasing, with other orders
//! derived by stable sorting (labels travel, the sign is the permutation
//! parity). A block that repeats a generator must store a value that is skew
//! under exchanging the matching labels.
//!
//! On top of the storage sit the differential, the `d`-action by
//! `d + sum of labels`, the quotient test modulo `d`-multiples, and the
//! comparison map onto cochains of the index-expanded algebras, which turns
//! spectral polynomials into divided-power coefficients at index totals.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{AlgebraError, ConformalElement, GeneratorId, NlcaPresentation, PolyValue};
use crate::annihilation::{ann_basis_bracket, AnnError, AnnGenerator};
use crate::arith::{rat, Rational};
use crate::combi::{cartesian, nondecreasing, permutations, stable_sort_parity};
use crate::poly::{poly_sum, MultiPoly, VarId};
use crate::random::SeededRng;
use crate::repr::{module_to_ann_rep, ConformalModule, ReprError};

/// Errors from cochain storage, arithmetic, and the comparison maps.
#[derive(Error, Clone, Debug, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("cochain degree must be at least 1, got {0}")]
    BadDegree(usize),
    #[error("expected {expected} argument blocks, got {got}")]
    BlockCount { expected: usize, got: usize },
    #[error("cochain value for {key} uses variable `{var}` outside d and the block labels")]
    InvalidValueVariable { key: String, var: String },
    #[error("value for {key} is not skew under exchanging labels {i} and {j} of block {block}")]
    NotSkewUnderLabels {
        key: String,
        block: usize,
        i: usize,
        j: usize,
    },
    #[error("cochain degrees differ: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("cochains live over different carriers: {left} vs {right}")]
    CarrierMismatch { left: String, right: String },
    #[error("multi-index has level {got}, expected {expected}")]
    LevelMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ann(#[from] AnnError),
    #[error(transparent)]
    Repr(#[from] ReprError),
}

/// A degree-`q` cochain over an algebra and one of its conformal modules.
///
/// Keys pair `q-1` non-decreasing blocks of `n-1` algebra generators with a
/// final algebra generator; values are module-side polynomial combinations.
/// The canonical label of block `i` (1-based), slot `j` is `l<i>_<j>`, and
/// the final argument's label is `l<q-1>_<n>`, so a degree-1 cochain uses
/// `l0_<n>` alone. Absent keys are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    q: usize,
    n: usize,
    alg_names: Vec<String>,
    module_names: Vec<String>,
    values: BTreeMap<(Vec<Vec<GeneratorId>>, GeneratorId), PolyValue>,
}

impl Cochain {
    /// Empty (zero) cochain of the given degree over `alg` and `m`.
    pub fn new(
        q: usize,
        alg: &NlcaPresentation,
        m: &ConformalModule,
    ) -> Result<Self, CohomologyError> {
        if q == 0 {
            return Err(CohomologyError::BadDegree(0));
        }
        if m.algebra_names() != alg.names() || m.n() != alg.n() {
            return Err(CohomologyError::CarrierMismatch {
                left: alg.names().join(","),
                right: m.algebra_names().join(","),
            });
        }
        Ok(Cochain {
            q,
            n: alg.n(),
            alg_names: alg.names().to_vec(),
            module_names: m.names().to_vec(),
            values: BTreeMap::new(),
        })
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra_size(&self) -> usize {
        self.alg_names.len()
    }

    pub fn module_size(&self) -> usize {
        self.module_names.len()
    }

    pub fn algebra_names(&self) -> &[String] {
        &self.alg_names
    }

    pub fn module_names(&self) -> &[String] {
        &self.module_names
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// The canonical label variables, one per argument position.
    pub fn label_vars(&self) -> Vec<VarId> {
        let mut vars = Vec::new();
        for i in 1..self.q {
            for j in 1..self.n {
                vars.push(VarId::lambda(i as u32, j as u32));
            }
        }
        vars.push(self.final_var());
        vars
    }

    fn final_var(&self) -> VarId {
        VarId::lambda((self.q - 1) as u32, self.n as u32)
    }

    fn render_key(&self, blocks: &[Vec<GeneratorId>], last: GeneratorId) -> String {
        let mut out = String::from("(");
        for b in blocks {
            out.push('(');
            let names: Vec<&str> = b.iter().map(|g| self.alg_names[g.0].as_str()).collect();
            out.push_str(&names.join(","));
            out.push(')');
        }
        if !blocks.is_empty() {
            out.push(';');
        }
        out.push_str(&self.alg_names[last.0]);
        out.push(')');
        out
    }

    /// Stores a value on a canonical key, replacing any previous one; a zero
    /// value clears the key. Blocks must be non-decreasing, the value may
    /// only use `d` and the canonical labels, and a block with a repeated
    /// generator only accepts values that are skew in the repeated labels.
    pub fn set_value(
        &mut self,
        blocks: &[Vec<GeneratorId>],
        last: GeneratorId,
        value: PolyValue,
    ) -> Result<(), CohomologyError> {
        if blocks.len() != self.q - 1 {
            return Err(CohomologyError::BlockCount {
                expected: self.q - 1,
                got: blocks.len(),
            });
        }
        let na = self.alg_names.len();
        for block in blocks {
            if block.len() != self.n - 1 {
                return Err(AlgebraError::ArityMismatch {
                    expected: self.n - 1,
                    got: block.len(),
                }
                .into());
            }
            for g in block {
                if g.0 >= na {
                    return Err(AlgebraError::GeneratorOutOfRange { id: g.0, count: na }.into());
                }
            }
        }
        if last.0 >= na {
            return Err(AlgebraError::GeneratorOutOfRange { id: last.0, count: na }.into());
        }
        for block in blocks {
            if block.windows(2).any(|w| w[0] > w[1]) {
                return Err(AlgebraError::NonCanonicalKey {
                    tuple: self.render_key(blocks, last),
                    arity: self.n - 1,
                }
                .into());
            }
        }
        let nm = self.module_names.len();
        for (g, _) in value.iter() {
            if g.0 >= nm {
                return Err(AlgebraError::GeneratorOutOfRange { id: g.0, count: nm }.into());
            }
        }
        let allowed = self.label_vars();
        for v in value.vars() {
            if v != VarId::Partial && !allowed.contains(&v) {
                return Err(CohomologyError::InvalidValueVariable {
                    key: self.render_key(blocks, last),
                    var: v.to_string(),
                });
            }
        }
        // A repeated generator makes the matching labels interchangeable, so
        // the stored value must flip sign under that exchange.
        for (b, block) in blocks.iter().enumerate() {
            for s in 0..block.len() - 1 {
                if block[s] != block[s + 1] {
                    continue;
                }
                let x = VarId::lambda((b + 1) as u32, (s + 1) as u32);
                let y = VarId::lambda((b + 1) as u32, (s + 2) as u32);
                let swap: BTreeMap<VarId, MultiPoly> = [
                    (x, MultiPoly::var(y)),
                    (y, MultiPoly::var(x)),
                ]
                .into_iter()
                .collect();
                if value.substitute_all(&swap) != value.neg() {
                    return Err(CohomologyError::NotSkewUnderLabels {
                        key: self.render_key(blocks, last),
                        block: b + 1,
                        i: s + 1,
                        j: s + 2,
                    });
                }
            }
        }
        let key = (blocks.to_vec(), last);
        if value.is_zero() {
            self.values.remove(&key);
        } else {
            self.values.insert(key, value);
        }
        Ok(())
    }

    /// Stored value on a canonical key; zero when absent.
    pub fn value(&self, blocks: &[Vec<GeneratorId>], last: GeneratorId) -> PolyValue {
        self.values
            .get(&(blocks.to_vec(), last))
            .cloned()
            .unwrap_or_else(PolyValue::zero)
    }

    pub fn entries(
        &self,
    ) -> impl Iterator<Item = (&[Vec<GeneratorId>], GeneratorId, &PolyValue)> {
        self.values.iter().map(|((b, g), v)| (b.as_slice(), *g, v))
    }

    /// Multilinear evaluation on polynomial entries with explicit labels.
    ///
    /// Each entry's coefficients contribute with `d -> -label`; the surviving
    /// generator picks are stably sorted per block with labels traveling, and
    /// the stored value is taken with its canonical labels replaced by the
    /// actual ones, all at once.
    pub fn eval_composite(
        &self,
        blocks: &[Vec<PolyValue>],
        block_labels: &[Vec<MultiPoly>],
        last: &PolyValue,
        last_label: &MultiPoly,
    ) -> PolyValue {
        assert_eq!(blocks.len(), self.q - 1, "one entry block per slot group");
        assert_eq!(block_labels.len(), self.q - 1, "one label block per slot group");
        let width = self.n - 1;
        let mut transformed: Vec<Vec<(GeneratorId, MultiPoly)>> = Vec::new();
        for (ents, labs) in blocks.iter().zip(block_labels) {
            assert_eq!(ents.len(), width, "entries per block");
            assert_eq!(labs.len(), width, "labels per block");
            for (e, l) in ents.iter().zip(labs) {
                let image = l.neg();
                transformed.push(
                    e.iter()
                        .map(|(g, c)| (*g, c.substitute_var(VarId::Partial, &image)))
                        .collect(),
                );
            }
        }
        let image = last_label.neg();
        transformed.push(
            last.iter()
                .map(|(g, c)| (*g, c.substitute_var(VarId::Partial, &image)))
                .collect(),
        );
        if transformed.iter().any(|t| t.is_empty()) {
            return PolyValue::zero();
        }
        let positions = transformed.len();
        let fv = self.final_var();
        let mut out = PolyValue::zero();
        let mut idx = vec![0usize; positions];
        loop {
            let mut coeff = MultiPoly::one();
            for (p, &i) in idx.iter().enumerate() {
                coeff = coeff.mul(&transformed[p][i].1);
            }
            if !coeff.is_zero() {
                let mut key_blocks: Vec<Vec<GeneratorId>> = Vec::with_capacity(self.q - 1);
                let mut map: BTreeMap<VarId, MultiPoly> = BTreeMap::new();
                let mut odd = false;
                for b in 0..self.q - 1 {
                    let picks: Vec<GeneratorId> = (0..width)
                        .map(|s| transformed[b * width + s][idx[b * width + s]].0)
                        .collect();
                    odd ^= stable_sort_parity(&picks);
                    let mut pairs: Vec<(GeneratorId, usize)> =
                        picks.into_iter().zip(0..width).collect();
                    pairs.sort_by_key(|&(g, s)| (g, s));
                    key_blocks.push(pairs.iter().map(|(g, _)| *g).collect());
                    for (t, &(_, s)) in pairs.iter().enumerate() {
                        let v = VarId::lambda((b + 1) as u32, (t + 1) as u32);
                        let label = &block_labels[b][s];
                        if *label != MultiPoly::var(v) {
                            map.insert(v, label.clone());
                        }
                    }
                }
                if *last_label != MultiPoly::var(fv) {
                    map.insert(fv, last_label.clone());
                }
                let g_last = transformed[positions - 1][idx[positions - 1]].0;
                if let Some(value) = self.values.get(&(key_blocks, g_last)) {
                    let subbed = if map.is_empty() {
                        value.clone()
                    } else {
                        value.substitute_all(&map)
                    };
                    let signed = if odd { subbed.neg() } else { subbed };
                    out = out.add(&signed.scale_poly(&coeff));
                }
            }
            // Odometer.
            let mut p = positions;
            loop {
                if p == 0 {
                    return out;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < transformed[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }

    fn compatible(&self, other: &Cochain) -> Result<(), CohomologyError> {
        if self.q != other.q {
            return Err(CohomologyError::DegreeMismatch {
                left: self.q,
                right: other.q,
            });
        }
        if self.n != other.n
            || self.alg_names != other.alg_names
            || self.module_names != other.module_names
        {
            return Err(CohomologyError::CarrierMismatch {
                left: self.alg_names.join(","),
                right: other.alg_names.join(","),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain, CohomologyError> {
        self.compatible(other)?;
        let mut values = self.values.clone();
        for (k, v) in &other.values {
            let merged = values
                .get(k)
                .map(|u| u.add(v))
                .unwrap_or_else(|| v.clone());
            if merged.is_zero() {
                values.remove(k);
            } else {
                values.insert(k.clone(), merged);
            }
        }
        Ok(Cochain {
            values,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain, CohomologyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cochain {
        Cochain {
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.clone(), v.neg()))
                .collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, c: &Rational) -> Cochain {
        if c == &rat(0) {
            return Cochain {
                values: BTreeMap::new(),
                ..self.clone()
            };
        }
        Cochain {
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.clone(), v.scale(c)))
                .collect(),
            ..self.clone()
        }
    }
}

/// The `d`-action on cochains: every value picks up the factor
/// `d + sum of all labels`.
pub fn partial_on_cochain(gamma: &Cochain) -> Cochain {
    let labels: Vec<MultiPoly> = gamma.label_vars().into_iter().map(MultiPoly::var).collect();
    let shift = MultiPoly::partial().add(&poly_sum(labels.iter()));
    Cochain {
        values: gamma
            .values
            .iter()
            .map(|(k, v)| (k.clone(), v.scale_poly(&shift)))
            .collect(),
        ..gamma.clone()
    }
}

fn signed_add(acc: &PolyValue, term: &PolyValue, negated: bool) -> PolyValue {
    if negated {
        acc.sub(term)
    } else {
        acc.add(term)
    }
}

/// Whether two cochains agree modulo the image of the `d`-action.
///
/// A value lies in that image exactly when it is divisible by
/// `d + sum of labels`, so the difference is tested at
/// `d = -(sum of labels)`.
pub fn reduced_equal(a: &Cochain, b: &Cochain) -> Result<bool, CohomologyError> {
    let diff = a.sub(b)?;
    let labels: Vec<MultiPoly> = diff.label_vars().into_iter().map(MultiPoly::var).collect();
    let image = poly_sum(labels.iter()).neg();
    let map: BTreeMap<VarId, MultiPoly> = [(VarId::Partial, image)].into_iter().collect();
    Ok(diff
        .values
        .values()
        .all(|v| v.substitute_all(&map).is_zero()))
}

/// The differential, sending a degree-`q` cochain to a degree-`q+1` one.
///
/// On an argument list of `q` blocks plus a final generator it is the
/// alternating sum of four families: remove a block and splice it into a
/// later block slot by slot through the bracket (the replaced slot's label
/// grows by the removed block's label sum); remove a block and bracket it
/// onto the final argument (the final label grows the same way); act with a
/// removed block on the evaluation that skips it; and act with the last
/// block minus one slot, together with the final argument, on the evaluation
/// at that remaining slot.
pub fn cochain_differential(
    gamma: &Cochain,
    alg: &NlcaPresentation,
    m: &ConformalModule,
) -> Result<Cochain, CohomologyError> {
    let mut out = Cochain::new(gamma.q + 1, alg, m)?;
    if gamma.alg_names != out.alg_names || gamma.module_names != out.module_names {
        return Err(CohomologyError::CarrierMismatch {
            left: gamma.alg_names.join(","),
            right: out.alg_names.join(","),
        });
    }
    let q = gamma.q;
    let n = gamma.n;
    let na = alg.num_generators();
    let width = n - 1;
    let lam: Vec<Vec<MultiPoly>> = (1..=q)
        .map(|i| {
            (1..=width)
                .map(|j| MultiPoly::lambda(i as u32, j as u32))
                .collect()
        })
        .collect();
    let last_label = MultiPoly::lambda(q as u32, n as u32);
    let nd = nondecreasing(na, width);
    for combo in cartesian(nd.len(), q) {
        let blocks: Vec<Vec<GeneratorId>> = combo
            .iter()
            .map(|&c| nd[c].iter().map(|&g| GeneratorId(g)).collect())
            .collect();
        let pure: Vec<Vec<PolyValue>> = blocks
            .iter()
            .map(|b| b.iter().map(|&g| PolyValue::from_gen(g)).collect())
            .collect();
        for g_last in (0..na).map(GeneratorId) {
            let last_pure = PolyValue::from_gen(g_last);
            let mut total = PolyValue::zero();
            for i in 0..q {
                // Removing block i+1 (1-based) carries the sign (-1)^{i+1}.
                let removed_odd = (i + 1) % 2 == 1;
                let weight = poly_sum(lam[i].iter());
                let rest: Vec<usize> = (0..q).filter(|&r| r != i).collect();
                for (jr, &j) in rest.iter().enumerate().filter(|&(_, &j)| j > i) {
                    for t in 0..width {
                        let mut tup = blocks[i].clone();
                        tup.push(blocks[j][t]);
                        let ct = alg.bracket_with_labels(&tup, &lam[i]);
                        if ct.is_zero() {
                            continue;
                        }
                        let mut e_blocks: Vec<Vec<PolyValue>> =
                            rest.iter().map(|&r| pure[r].clone()).collect();
                        let mut e_labels: Vec<Vec<MultiPoly>> =
                            rest.iter().map(|&r| lam[r].clone()).collect();
                        e_blocks[jr][t] = ct;
                        e_labels[jr][t] = weight.add(&lam[j][t]);
                        let term =
                            gamma.eval_composite(&e_blocks, &e_labels, &last_pure, &last_label);
                        total = signed_add(&total, &term, removed_odd);
                    }
                }
                let e_blocks: Vec<Vec<PolyValue>> =
                    rest.iter().map(|&r| pure[r].clone()).collect();
                let e_labels: Vec<Vec<MultiPoly>> =
                    rest.iter().map(|&r| lam[r].clone()).collect();
                let mut tup = blocks[i].clone();
                tup.push(g_last);
                let ct = alg.bracket_with_labels(&tup, &lam[i]);
                if !ct.is_zero() {
                    let term = gamma.eval_composite(
                        &e_blocks,
                        &e_labels,
                        &ct,
                        &last_label.add(&weight),
                    );
                    total = signed_add(&total, &term, removed_odd);
                }
                let inner =
                    gamma.eval_composite(&e_blocks, &e_labels, &last_pure, &last_label);
                if !inner.is_zero() {
                    let term = m.eval_action_composite(&pure[i], &lam[i], &inner);
                    total = signed_add(&total, &term, !removed_odd);
                }
            }
            for i in 1..=width {
                // Acting with the last block minus slot i plus the final
                // argument carries the sign (-1)^{n+q-i+1}.
                let act_odd = (n + q + 1 - i) % 2 == 1;
                let mut args: Vec<PolyValue> = Vec::with_capacity(width);
                let mut labels: Vec<MultiPoly> = Vec::with_capacity(width);
                for s in 0..width {
                    if s + 1 != i {
                        args.push(pure[q - 1][s].clone());
                        labels.push(lam[q - 1][s].clone());
                    }
                }
                args.push(last_pure.clone());
                labels.push(last_label.clone());
                let inner = gamma.eval_composite(
                    &pure[..q - 1],
                    &lam[..q - 1],
                    &pure[q - 1][i - 1],
                    &lam[q - 1][i - 1],
                );
                if inner.is_zero() {
                    continue;
                }
                let term = m.eval_action_composite(&args, &labels, &inner);
                total = signed_add(&total, &term, act_odd);
            }
            out.set_value(&blocks, g_last, total)?;
        }
    }
    Ok(out)
}

/// Random cochain with polynomial values of bounded total degree.
///
/// Values over blocks with repeated generators are skew-averaged over the
/// matching label permutations, so every stored entry is valid.
pub fn random_cochain(
    alg: &NlcaPresentation,
    m: &ConformalModule,
    q: usize,
    max_degree: u32,
    coeff_bound: i64,
    rng: &mut SeededRng,
) -> Result<Cochain, CohomologyError> {
    let mut out = Cochain::new(q, alg, m)?;
    let mut vars = vec![VarId::Partial];
    vars.extend(out.label_vars());
    let width = alg.n() - 1;
    let nd = nondecreasing(alg.num_generators(), width);
    for combo in cartesian(nd.len(), q - 1) {
        let blocks: Vec<Vec<GeneratorId>> = combo
            .iter()
            .map(|&c| nd[c].iter().map(|&g| GeneratorId(g)).collect())
            .collect();
        for g_last in (0..alg.num_generators()).map(GeneratorId) {
            let mut value = PolyValue::zero();
            for w in 0..m.num_generators() {
                if rng.chance(2, 3) {
                    value = value.add(&PolyValue::term(
                        GeneratorId(w),
                        rng.poly(&vars, max_degree, coeff_bound),
                    ));
                }
            }
            for (b, block) in blocks.iter().enumerate() {
                let mut s = 0;
                while s < width {
                    let mut e = s + 1;
                    while e < width && block[e] == block[s] {
                        e += 1;
                    }
                    if e - s > 1 {
                        value = skew_average(&value, (b + 1) as u32, s, e - s);
                    }
                    s = e;
                }
            }
            out.set_value(&blocks, g_last, value)?;
        }
    }
    Ok(out)
}

/// Signed sum over all permutations of `len` consecutive labels of one
/// block, starting at slot `start+1`. The result is skew in those labels.
fn skew_average(value: &PolyValue, block: u32, start: usize, len: usize) -> PolyValue {
    let mut acc = PolyValue::zero();
    for perm in permutations(len) {
        let odd = stable_sort_parity(&perm);
        let mut map: BTreeMap<VarId, MultiPoly> = BTreeMap::new();
        for (t, &pt) in perm.iter().enumerate() {
            if t != pt {
                map.insert(
                    VarId::lambda(block, (start + t + 1) as u32),
                    MultiPoly::var(VarId::lambda(block, (start + pt + 1) as u32)),
                );
            }
        }
        let moved = if map.is_empty() {
            value.clone()
        } else {
            value.substitute_all(&map)
        };
        acc = acc.add(&if odd { moved.neg() } else { moved });
    }
    acc
}

/// Comparison map onto cochains of the level-`p` index-expanded algebra:
/// the value on arguments at multi-indices is the divided-power coefficient
/// of the spectral evaluation, taken at each argument's index total.
pub fn phi_map(
    gamma: &Cochain,
    p: usize,
    blocks: &[Vec<AnnGenerator>],
    last: &AnnGenerator,
) -> Result<ConformalElement, CohomologyError> {
    if blocks.len() != gamma.q - 1 {
        return Err(CohomologyError::BlockCount {
            expected: gamma.q - 1,
            got: blocks.len(),
        });
    }
    let width = gamma.n - 1;
    let na = gamma.alg_names.len();
    let mut e_blocks: Vec<Vec<PolyValue>> = Vec::with_capacity(blocks.len());
    let mut e_labels: Vec<Vec<MultiPoly>> = Vec::with_capacity(blocks.len());
    let mut vars: Vec<VarId> = Vec::new();
    let mut totals: Vec<u32> = Vec::new();
    for (i, block) in blocks.iter().enumerate() {
        if block.len() != width {
            return Err(AlgebraError::ArityMismatch {
                expected: width,
                got: block.len(),
            }
            .into());
        }
        let mut ents = Vec::with_capacity(width);
        let mut labs = Vec::with_capacity(width);
        for (j, a) in block.iter().enumerate() {
            check_arg(a, p, na)?;
            let v = VarId::lambda((i + 1) as u32, (j + 1) as u32);
            vars.push(v);
            totals.push(a.total());
            ents.push(PolyValue::from_gen(a.gen));
            labs.push(MultiPoly::var(v));
        }
        e_blocks.push(ents);
        e_labels.push(labs);
    }
    check_arg(last, p, na)?;
    let fv = VarId::lambda((gamma.q - 1) as u32, gamma.n as u32);
    vars.push(fv);
    totals.push(last.total());
    let sym = gamma.eval_composite(
        &e_blocks,
        &e_labels,
        &PolyValue::from_gen(last.gen),
        &MultiPoly::var(fv),
    );
    let out = sym.map_coeffs(|c| c.divided_power_coefficient(&vars, &totals));
    Ok(ConformalElement::new(out)?)
}

fn check_arg(a: &AnnGenerator, p: usize, count: usize) -> Result<(), CohomologyError> {
    if a.m.len() != p {
        return Err(CohomologyError::LevelMismatch {
            expected: p,
            got: a.m.len(),
        });
    }
    if a.gen.0 >= count {
        return Err(AlgebraError::GeneratorOutOfRange { id: a.gen.0, count }.into());
    }
    Ok(())
}

/// Differential on cochains of the level-`p` index-expanded algebra, given
/// as an evaluation closure. Same four families as `cochain_differential`,
/// with brackets and actions taken slotwise over index-expanded basis
/// elements.
pub fn nlie_cochain_differential<F>(
    alg: &NlcaPresentation,
    m: &ConformalModule,
    p: usize,
    degree: usize,
    gamma: &F,
    blocks: &[Vec<AnnGenerator>],
    last: &AnnGenerator,
) -> Result<ConformalElement, CohomologyError>
where
    F: Fn(&[Vec<AnnGenerator>], &AnnGenerator) -> Result<ConformalElement, CohomologyError>,
{
    let n = alg.n();
    let q = degree;
    if blocks.len() != q {
        return Err(CohomologyError::BlockCount {
            expected: q,
            got: blocks.len(),
        });
    }
    let mut total = ConformalElement::zero();
    for i in 0..q {
        let removed_odd = (i + 1) % 2 == 1;
        let rest: Vec<Vec<AnnGenerator>> = (0..q)
            .filter(|&r| r != i)
            .map(|r| blocks[r].clone())
            .collect();
        for j in i + 1..q {
            for t in 0..n - 1 {
                let mut tup = blocks[i].clone();
                tup.push(blocks[j][t].clone());
                let br = ann_basis_bracket(alg, p, &tup)?;
                for (z, c) in br.terms() {
                    let mut spliced = rest.clone();
                    spliced[j - 1][t] = z.clone();
                    let term = gamma(&spliced, last)?.scale(c);
                    total = total.add(&if removed_odd { term.neg() } else { term });
                }
            }
        }
        let mut tup = blocks[i].clone();
        tup.push(last.clone());
        let br = ann_basis_bracket(alg, p, &tup)?;
        for (z, c) in br.terms() {
            let term = gamma(&rest, z)?.scale(c);
            total = total.add(&if removed_odd { term.neg() } else { term });
        }
        let inner = gamma(&rest, last)?;
        if !inner.is_zero() {
            let term = module_to_ann_rep(m, p, &blocks[i], &inner)?;
            total = total.add(&if removed_odd { term } else { term.neg() });
        }
    }
    for i in 1..=n - 1 {
        let act_odd = (n + q + 1 - i) % 2 == 1;
        let mut acting: Vec<AnnGenerator> = Vec::with_capacity(n - 1);
        for (s, a) in blocks[q - 1].iter().enumerate() {
            if s + 1 != i {
                acting.push(a.clone());
            }
        }
        acting.push(last.clone());
        let inner = gamma(&blocks[..q - 1], &blocks[q - 1][i - 1])?;
        if inner.is_zero() {
            continue;
        }
        let term = module_to_ann_rep(m, p, &acting, &inner)?;
        total = total.add(&if act_odd { term.neg() } else { term });
    }
    Ok(total)
}

/// The `d`-action on index-expanded cochains: apply `d` to the value and add
/// every argument with one index lowered, weighted by the lowered index.
pub fn ann_cochain_partial<F>(
    p: usize,
    degree: usize,
    gamma: &F,
    blocks: &[Vec<AnnGenerator>],
    last: &AnnGenerator,
) -> Result<ConformalElement, CohomologyError>
where
    F: Fn(&[Vec<AnnGenerator>], &AnnGenerator) -> Result<ConformalElement, CohomologyError>,
{
    if blocks.len() != degree - 1 {
        return Err(CohomologyError::BlockCount {
            expected: degree - 1,
            got: blocks.len(),
        });
    }
    let mut total = gamma(blocks, last)?.apply_partial();
    for (b, block) in blocks.iter().enumerate() {
        for (s, a) in block.iter().enumerate() {
            for k in 0..p {
                if a.m[k] == 0 {
                    continue;
                }
                let mut lowered = blocks.to_vec();
                lowered[b][s].m[k] -= 1;
                let term = gamma(&lowered, last)?;
                total = total.add(&term.scale(&rat(a.m[k] as i64)));
            }
        }
    }
    for k in 0..p {
        if last.m[k] == 0 {
            continue;
        }
        let mut lowered = last.clone();
        lowered.m[k] -= 1;
        let term = gamma(blocks, &lowered)?;
        total = total.add(&term.scale(&rat(last.m[k] as i64)));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::slot_var;
    use crate::constructions::{current_algebra, rank2_family_ii, simple_3lie};
    use crate::repr::adjoint_module;

    fn cur_simple3() -> NlcaPresentation {
        current_algebra(&simple_3lie()).expect("builtin constants pass")
    }

    fn rank2_ii() -> NlcaPresentation {
        let h = MultiPoly::var(slot_var(1)).sub(&MultiPoly::var(slot_var(2)));
        rank2_family_ii(3, &h).expect("h is skew")
    }

    fn lam(i: u32, j: u32) -> MultiPoly {
        MultiPoly::lambda(i, j)
    }

    #[test]
    fn set_value_validates_input() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut c = Cochain::new(2, &alg, &m).unwrap();
        let ok = PolyValue::term(GeneratorId(0), lam(1, 1).sub(&lam(1, 2)));
        assert!(matches!(
            c.set_value(&[], GeneratorId(0), ok.clone()),
            Err(CohomologyError::BlockCount { expected: 1, got: 0 })
        ));
        assert!(matches!(
            c.set_value(
                &[vec![GeneratorId(1), GeneratorId(0)]],
                GeneratorId(0),
                ok.clone()
            ),
            Err(CohomologyError::Algebra(AlgebraError::NonCanonicalKey { .. }))
        ));
        assert!(matches!(
            c.set_value(
                &[vec![GeneratorId(0), GeneratorId(1)]],
                GeneratorId(0),
                PolyValue::term(GeneratorId(0), lam(2, 1))
            ),
            Err(CohomologyError::InvalidValueVariable { .. })
        ));
        // A repeated generator needs a value that is skew in its labels.
        assert!(matches!(
            c.set_value(
                &[vec![GeneratorId(0), GeneratorId(0)]],
                GeneratorId(0),
                PolyValue::term(GeneratorId(0), lam(1, 1).add(&lam(1, 2)))
            ),
            Err(CohomologyError::NotSkewUnderLabels { block: 1, i: 1, j: 2, .. })
        ));
        c.set_value(&[vec![GeneratorId(0), GeneratorId(0)]], GeneratorId(0), ok.clone())
            .unwrap();
        c.set_value(&[vec![GeneratorId(0), GeneratorId(1)]], GeneratorId(1), ok)
            .unwrap();
        assert_eq!(c.entries().count(), 2);
        c.set_value(
            &[vec![GeneratorId(0), GeneratorId(1)]],
            GeneratorId(1),
            PolyValue::zero(),
        )
        .unwrap();
        assert_eq!(c.entries().count(), 1);
    }

    #[test]
    fn eval_expands_partial_arguments() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut c = Cochain::new(2, &alg, &m).unwrap();
        let block = vec![GeneratorId(0), GeneratorId(1)];
        let value = PolyValue::term(
            GeneratorId(1),
            MultiPoly::partial().add(&lam(1, 1)).mul(&lam(1, 3)),
        );
        c.set_value(&[block.clone()], GeneratorId(0), value.clone())
            .unwrap();
        let labels = vec![lam(1, 1), lam(1, 2)];
        let ents = vec![PolyValue::from_gen(GeneratorId(0)), PolyValue::from_gen(GeneratorId(1))];
        let base = c.eval_composite(
            &[ents.clone()],
            &[labels.clone()],
            &PolyValue::from_gen(GeneratorId(0)),
            &lam(1, 3),
        );
        assert_eq!(base, value);
        // d on a block argument turns into minus that argument's label.
        let shifted = vec![
            PolyValue::term(GeneratorId(0), MultiPoly::partial()),
            PolyValue::from_gen(GeneratorId(1)),
        ];
        let left = c.eval_composite(
            &[shifted],
            &[labels.clone()],
            &PolyValue::from_gen(GeneratorId(0)),
            &lam(1, 3),
        );
        assert_eq!(left, base.scale_poly(&lam(1, 1).neg()));
        // d on the final argument turns into minus the final label.
        let right = c.eval_composite(
            &[ents],
            &[labels],
            &PolyValue::term(GeneratorId(0), MultiPoly::partial()),
            &lam(1, 3),
        );
        assert_eq!(right, base.scale_poly(&lam(1, 3).neg()));
    }

    #[test]
    fn eval_sorts_blocks_with_signs() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut c = Cochain::new(2, &alg, &m).unwrap();
        let value = PolyValue::term(GeneratorId(0), lam(1, 1).mul(&lam(1, 2).pow(2)));
        c.set_value(
            &[vec![GeneratorId(0), GeneratorId(1)]],
            GeneratorId(1),
            value.clone(),
        )
        .unwrap();
        let alpha = MultiPoly::partial().add(&lam(1, 3));
        let beta = lam(1, 1).scale(&rat(2));
        // Swapped entries pick up the permutation sign, labels traveling.
        let swapped = c.eval_composite(
            &[vec![
                PolyValue::from_gen(GeneratorId(1)),
                PolyValue::from_gen(GeneratorId(0)),
            ]],
            &[vec![alpha.clone(), beta.clone()]],
            &PolyValue::from_gen(GeneratorId(1)),
            &lam(1, 3),
        );
        let map: BTreeMap<VarId, MultiPoly> = [
            (VarId::lambda(1, 1), beta),
            (VarId::lambda(1, 2), alpha),
        ]
        .into_iter()
        .collect();
        assert_eq!(swapped, value.substitute_all(&map).neg());
    }

    #[test]
    fn arithmetic_checks_shapes() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut a = Cochain::new(1, &alg, &m).unwrap();
        a.set_value(&[], GeneratorId(0), PolyValue::from_gen(GeneratorId(1)))
            .unwrap();
        let b = Cochain::new(2, &alg, &m).unwrap();
        assert!(matches!(
            a.add(&b),
            Err(CohomologyError::DegreeMismatch { left: 1, right: 2 })
        ));
        let two = a.add(&a).unwrap();
        assert_eq!(two, a.scale(&rat(2)));
        assert!(a.sub(&a).unwrap().is_zero());
        assert!(a.scale(&rat(0)).is_zero());
        assert_eq!(a.neg().neg(), a);
    }

    #[test]
    fn partial_action_and_reduction() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0xc0c0a);
        let gamma = random_cochain(&alg, &m, 2, 2, 3, &mut rng).unwrap();
        let shifted = partial_on_cochain(&gamma);
        let shift = MultiPoly::partial()
            .add(&lam(1, 1))
            .add(&lam(1, 2))
            .add(&lam(1, 3));
        for (blocks, last, v) in gamma.entries() {
            assert_eq!(shifted.value(blocks, last), v.scale_poly(&shift));
        }
        // d-multiples vanish in the quotient; a plain difference does not.
        let zero = gamma.scale(&rat(0));
        assert!(reduced_equal(&shifted, &zero).unwrap());
        assert!(reduced_equal(&gamma.add(&shifted).unwrap(), &gamma).unwrap());
        let mut bump = zero.clone();
        bump.set_value(
            &[vec![GeneratorId(0), GeneratorId(1)]],
            GeneratorId(0),
            PolyValue::from_gen(GeneratorId(0)),
        )
        .unwrap();
        assert!(!reduced_equal(&gamma.add(&bump).unwrap(), &gamma).unwrap());
    }

    #[test]
    fn differential_matches_hand_expansion_in_lowest_degree() {
        let alg = cur_simple3();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0xd1ff);
        let gamma = random_cochain(&alg, &m, 1, 2, 3, &mut rng).unwrap();
        let d = cochain_differential(&gamma, &alg, &m).unwrap();
        let labels = vec![lam(1, 1), lam(1, 2)];
        let weight = lam(1, 1).add(&lam(1, 2));
        let fl = lam(1, 3);
        for a in 0..alg.num_generators() {
            for b in 0..alg.num_generators() {
                for w in 0..alg.num_generators() {
                    let block = vec![GeneratorId(a), GeneratorId(b)];
                    if block[0] > block[1] {
                        continue;
                    }
                    let pure: Vec<PolyValue> =
                        block.iter().map(|&g| PolyValue::from_gen(g)).collect();
                    let mut tup = block.clone();
                    tup.push(GeneratorId(w));
                    // Bracket onto the final argument, final label grows.
                    let mut expect = gamma
                        .eval_composite(
                            &[],
                            &[],
                            &alg.bracket_with_labels(&tup, &labels),
                            &fl.add(&weight),
                        )
                        .neg();
                    // Action of the block on the skipped evaluation.
                    let inner = gamma.eval_composite(
                        &[],
                        &[],
                        &PolyValue::from_gen(GeneratorId(w)),
                        &fl,
                    );
                    expect = expect.add(&m.eval_action_composite(&pure, &labels, &inner));
                    // Action of one slot plus the final argument on the other.
                    let left = gamma.eval_composite(
                        &[],
                        &[],
                        &PolyValue::from_gen(block[0]),
                        &lam(1, 1),
                    );
                    expect = expect.add(&m.eval_action_composite(
                        &[pure[1].clone(), PolyValue::from_gen(GeneratorId(w))],
                        &[lam(1, 2), fl.clone()],
                        &left,
                    ));
                    let right = gamma.eval_composite(
                        &[],
                        &[],
                        &PolyValue::from_gen(block[1]),
                        &lam(1, 2),
                    );
                    expect = expect.sub(&m.eval_action_composite(
                        &[pure[0].clone(), PolyValue::from_gen(GeneratorId(w))],
                        &[lam(1, 1), fl.clone()],
                        &right,
                    ));
                    assert_eq!(d.value(&[block], GeneratorId(w)), expect);
                }
            }
        }
    }

    #[test]
    fn differential_squares_to_zero_on_rank2() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0x0dd);
        for q in 1..=2 {
            let gamma = random_cochain(&alg, &m, q, 2, 3, &mut rng).unwrap();
            let d1 = cochain_differential(&gamma, &alg, &m).unwrap();
            let d2 = cochain_differential(&d1, &alg, &m).unwrap();
            assert!(d2.is_zero(), "degree {q}");
        }
    }

    #[test]
    fn differential_commutes_with_partial_on_rank2() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0xdd00);
        for q in 1..=2 {
            let gamma = random_cochain(&alg, &m, q, 2, 3, &mut rng).unwrap();
            let left = cochain_differential(&partial_on_cochain(&gamma), &alg, &m).unwrap();
            let right = partial_on_cochain(&cochain_differential(&gamma, &alg, &m).unwrap());
            assert_eq!(left, right, "degree {q}");
        }
    }

    #[test]
    fn random_cochains_store_valid_repeated_blocks() {
        let alg = cur_simple3();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0xabcd);
        let gamma = random_cochain(&alg, &m, 2, 2, 3, &mut rng).unwrap();
        let mut copy = Cochain::new(2, &alg, &m).unwrap();
        let mut repeated = 0;
        for (blocks, last, v) in gamma.entries() {
            if blocks[0][0] == blocks[0][1] {
                repeated += 1;
            }
            copy.set_value(blocks, last, v.clone()).unwrap();
        }
        assert!(repeated > 0, "the sweep should hit repeated blocks");
        assert_eq!(copy, gamma);
    }

    #[test]
    fn phi_of_constant_cochain_lives_at_zero_indices() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut c = Cochain::new(1, &alg, &m).unwrap();
        c.set_value(&[], GeneratorId(1), PolyValue::from_gen(GeneratorId(0)))
            .unwrap();
        let at = |k: u32| AnnGenerator::new(GeneratorId(1), vec![k]);
        let hit = phi_map(&c, 1, &[], &at(0)).unwrap();
        assert_eq!(hit, ConformalElement::from_gen(GeneratorId(0)));
        assert!(phi_map(&c, 1, &[], &at(1)).unwrap().is_zero());
        assert!(matches!(
            phi_map(&c, 2, &[], &at(1)),
            Err(CohomologyError::LevelMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn phi_reconstructs_bounded_degree_cochains() {
        use crate::arith::factorial;
        use crate::combi::multi_indices;
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0x1e57);
        let gamma = random_cochain(&alg, &m, 2, 2, 3, &mut rng).unwrap();
        let vars = gamma.label_vars();
        // Divided powers at every index total up to the degree bound carry
        // the whole spectral polynomial, so the map forgets nothing.
        for (blocks, last, v) in gamma.entries() {
            let mut rebuilt = PolyValue::zero();
            for ks in multi_indices(vars.len(), 4) {
                let mut pos = 0;
                let args: Vec<Vec<AnnGenerator>> = blocks
                    .iter()
                    .map(|b| {
                        b.iter()
                            .map(|&g| {
                                pos += 1;
                                AnnGenerator::new(g, vec![ks[pos - 1]])
                            })
                            .collect()
                    })
                    .collect();
                let fin = AnnGenerator::new(last, vec![ks[vars.len() - 1]]);
                let piece = phi_map(&gamma, 1, &args, &fin).unwrap();
                let mut weight = MultiPoly::one();
                for (v, &k) in vars.iter().zip(&ks) {
                    let inv = rat(1) / factorial(k);
                    weight = weight.mul(&MultiPoly::var(*v).pow(k).scale(&inv));
                }
                rebuilt = rebuilt.add(&piece.as_value().scale_poly(&weight));
            }
            assert_eq!(&rebuilt, v);
        }
    }

    #[test]
    fn phi_intertwines_both_differentials() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0xc4a1);
        let gamma = random_cochain(&alg, &m, 1, 2, 3, &mut rng).unwrap();
        let d = cochain_differential(&gamma, &alg, &m).unwrap();
        let phi_gamma = |bs: &[Vec<AnnGenerator>], l: &AnnGenerator| phi_map(&gamma, 1, bs, l);
        for a in 0..2 {
            for b in 0..2 {
                for w in 0..2 {
                    for ks in crate::combi::multi_indices(3, 2) {
                        let block = vec![
                            AnnGenerator::new(GeneratorId(a), vec![ks[0]]),
                            AnnGenerator::new(GeneratorId(b), vec![ks[1]]),
                        ];
                        let fin = AnnGenerator::new(GeneratorId(w), vec![ks[2]]);
                        let left = phi_map(&d, 1, &[block.clone()], &fin).unwrap();
                        let right = nlie_cochain_differential(
                            &alg,
                            &m,
                            1,
                            1,
                            &phi_gamma,
                            &[block],
                            &fin,
                        )
                        .unwrap();
                        assert_eq!(left, right);
                    }
                }
            }
        }
    }

    #[test]
    fn phi_commutes_with_the_partial_actions() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0x9a57);
        let gamma = random_cochain(&alg, &m, 2, 2, 3, &mut rng).unwrap();
        let shifted = partial_on_cochain(&gamma);
        let phi_gamma = |bs: &[Vec<AnnGenerator>], l: &AnnGenerator| phi_map(&gamma, 1, bs, l);
        for a in 0..2 {
            for b in 0..2 {
                for w in 0..2 {
                    for ks in crate::combi::multi_indices(3, 2) {
                        let block = vec![
                            AnnGenerator::new(GeneratorId(a), vec![ks[0]]),
                            AnnGenerator::new(GeneratorId(b), vec![ks[1]]),
                        ];
                        let fin = AnnGenerator::new(GeneratorId(w), vec![ks[2]]);
                        let left = phi_map(&shifted, 1, &[block.clone()], &fin).unwrap();
                        let right =
                            ann_cochain_partial(1, 2, &phi_gamma, &[block], &fin).unwrap();
                        assert_eq!(left, right);
                    }
                }
            }
        }
    }

    #[test]
    fn expanded_differential_squares_to_zero_pointwise() {
        let alg = rank2_ii();
        let m = adjoint_module(&alg);
        let mut rng = SeededRng::new(0x5a5a);
        let gamma = random_cochain(&alg, &m, 1, 2, 3, &mut rng).unwrap();
        let phi_gamma = |bs: &[Vec<AnnGenerator>], l: &AnnGenerator| phi_map(&gamma, 1, bs, l);
        let d_phi = |bs: &[Vec<AnnGenerator>], l: &AnnGenerator| {
            nlie_cochain_differential(&alg, &m, 1, 1, &phi_gamma, bs, l)
        };
        for ks in crate::combi::multi_indices(5, 2) {
            let blocks = vec![
                vec![
                    AnnGenerator::new(GeneratorId(0), vec![ks[0]]),
                    AnnGenerator::new(GeneratorId(1), vec![ks[1]]),
                ],
                vec![
                    AnnGenerator::new(GeneratorId(0), vec![ks[2]]),
                    AnnGenerator::new(GeneratorId(1), vec![ks[3]]),
                ],
            ];
            let fin = AnnGenerator::new(GeneratorId(0), vec![ks[4]]);
            let out =
                nlie_cochain_differential(&alg, &m, 1, 2, &d_phi, &blocks, &fin).unwrap();
            assert!(out.is_zero(), "indices {ks:?}");
        }
    }
}

//! Index expansions of a presentation over `p` formal directions.
//!
//! Every generator `a` spreads into symbols `a[m1,...,mp]` indexed by
//! multi-indices in `N^p`. The bracket of such symbols expands the k-products
//! of the presentation with binomial weights and places the result at a
//! shifted multi-index; `d` acts by lowering indices. This module provides
//! that bracket, the directional lowering operators, the index filtration,
//! the reconstruction of k-products from expanded brackets, windowed n-Lie
//! axiom checks, and the induction of a presentation homomorphism from an
//! index-level one.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{
    slot_var, AlgebraError, ConformalElement, GeneratorId, NlcaPresentation, PolyValue,
};
use crate::arith::{binomial, factorial, is_negative, multinomial, rat, render_rational, Rational};
use crate::combi::{cartesian, increasing, multi_indices, nondecreasing, sub_indices};
use crate::poly::{Monomial, MultiPoly, VarId};
use crate::report::CheckReport;

/// Basis symbol `a[m1,...,mp]`: a generator at a multi-index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnGenerator {
    pub gen: GeneratorId,
    pub m: Vec<u32>,
}

impl AnnGenerator {
    pub fn new(gen: GeneratorId, m: Vec<u32>) -> Self {
        AnnGenerator { gen, m }
    }

    /// Total index weight, the filtration degree of the symbol.
    pub fn total(&self) -> u32 {
        self.m.iter().sum()
    }

    pub fn render(&self, names: &[String]) -> String {
        let idx: Vec<String> = self.m.iter().map(u32::to_string).collect();
        format!("{}[{}]", names[self.gen.0], idx.join(","))
    }
}

/// Finite rational combination of indexed symbols.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AnnElement {
    terms: BTreeMap<AnnGenerator, Rational>,
}

impl AnnElement {
    pub fn zero() -> Self {
        AnnElement::default()
    }

    pub fn basis(gen: GeneratorId, m: Vec<u32>) -> Self {
        AnnElement::term(Rational::one(), gen, m)
    }

    pub fn term(c: Rational, gen: GeneratorId, m: Vec<u32>) -> Self {
        let mut out = AnnElement::zero();
        out.insert_add(AnnGenerator::new(gen, m), c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&AnnGenerator, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, g: &AnnGenerator) -> Rational {
        self.terms.get(g).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c` to the coefficient of `g`, dropping the term when it cancels.
    pub fn insert_add(&mut self, g: AnnGenerator, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(g) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &AnnElement) {
        for (g, c) in &other.terms {
            self.insert_add(g.clone(), c.clone());
        }
    }

    pub fn add_assign_scaled(&mut self, other: &AnnElement, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (g, q) in &other.terms {
            self.insert_add(g.clone(), q * c);
        }
    }

    pub fn add(&self, other: &AnnElement) -> AnnElement {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &AnnElement) -> AnnElement {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-Rational::one());
        out
    }

    pub fn neg(&self) -> AnnElement {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> AnnElement {
        let mut out = AnnElement::zero();
        out.add_assign_scaled(self, c);
        out
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (g, c)) in self.terms.iter().enumerate() {
            let neg = is_negative(c);
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !abs.is_one() {
                out.push_str(&render_rational(&abs));
                out.push('*');
            }
            out.push_str(&g.render(names));
        }
        out
    }
}

#[derive(Error, Clone, Debug, PartialEq, Eq)]
pub enum AnnError {
    #[error("expected {expected} index components, got {got}")]
    LevelMismatch { expected: usize, got: usize },
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("direction {dir} out of range 1..={p}")]
    DirectionOutOfRange { dir: usize, p: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn check_level(p: usize, m: &[u32]) -> Result<(), AnnError> {
    if m.len() != p {
        return Err(AnnError::LevelMismatch {
            expected: p,
            got: m.len(),
        });
    }
    Ok(())
}

fn check_element_level(p: usize, x: &AnnElement) -> Result<(), AnnError> {
    for (g, _) in x.terms() {
        check_level(p, &g.m)?;
    }
    Ok(())
}

/// Realizes `q(d)*c` at index `m`: each power of `d` lowers indices once.
pub fn embed_at(x: &ConformalElement, m: &[u32]) -> AnnElement {
    let mut out = AnnElement::zero();
    add_embedded(&mut out, x, m, &Rational::one());
    out
}

fn add_embedded(out: &mut AnnElement, x: &ConformalElement, m: &[u32], scale: &Rational) {
    for (g, q) in x.as_value().iter() {
        let coeffs = q
            .partial_coefficients()
            .expect("element coefficients involve d only");
        let mut layer = AnnElement::basis(*g, m.to_vec());
        for (e, c) in coeffs.iter().enumerate() {
            if e > 0 {
                layer = lower_index(&layer);
                if layer.is_zero() {
                    break;
                }
            }
            if !c.is_zero() {
                out.add_assign_scaled(&layer, &(c * scale));
            }
        }
    }
}

fn lower_index(x: &AnnElement) -> AnnElement {
    let mut out = AnnElement::zero();
    for (g, c) in x.terms() {
        for (i, &mi) in g.m.iter().enumerate() {
            if mi > 0 {
                let mut m = g.m.clone();
                m[i] -= 1;
                out.insert_add(AnnGenerator::new(g.gen, m), -(c * rat(mi as i64)));
            }
        }
    }
    out
}

/// The module action of `d`: `a[m] -> -sum_i m_i a[m - e_i]`.
pub fn partial_action(p: usize, x: &AnnElement) -> Result<AnnElement, AnnError> {
    check_element_level(p, x)?;
    Ok(lower_index(x))
}

/// Lowering along one direction: `a[m] -> m_i a[m - e_i]`; `dir` is 1-based.
pub fn dti_action(p: usize, dir: usize, x: &AnnElement) -> Result<AnnElement, AnnError> {
    if dir == 0 || dir > p {
        return Err(AnnError::DirectionOutOfRange { dir, p });
    }
    check_element_level(p, x)?;
    let mut out = AnnElement::zero();
    for (g, c) in x.terms() {
        let mi = g.m[dir - 1];
        if mi > 0 {
            let mut m = g.m.clone();
            m[dir - 1] -= 1;
            out.insert_add(AnnGenerator::new(g.gen, m), c * rat(mi as i64));
        }
    }
    Ok(out)
}

/// Largest filtration layer containing `x`: the minimum total index over its
/// terms. `None` encodes the zero element, which lies in every layer.
pub fn filtration_degree(x: &AnnElement) -> Option<u32> {
    x.terms().map(|(g, _)| g.total()).min()
}

/// Bound on how far a bracket can drop below the sum of input filtration
/// degrees. Spectral degrees consume index weight through the k-products and
/// `d`-powers consume it through index lowering, so the total degree of the
/// table bounds both at once.
pub fn filtration_shift(alg: &NlcaPresentation) -> u32 {
    alg.table_max_total_degree()
}

/// Bracket of basis symbols: k-products weighted by index binomials, placed
/// at the leftover multi-index.
pub fn ann_basis_bracket(
    alg: &NlcaPresentation,
    p: usize,
    args: &[AnnGenerator],
) -> Result<AnnElement, AnnError> {
    let n = alg.n();
    if args.len() != n {
        return Err(AnnError::ArityMismatch {
            expected: n,
            got: args.len(),
        });
    }
    for a in args {
        check_level(p, &a.m)?;
    }
    let gens: Vec<GeneratorId> = args.iter().map(|a| a.gen).collect();
    let l_bound = alg.table_max_lambda_degree();
    let mut slots: HashMap<Vec<u32>, ConformalElement> = HashMap::new();
    for k in multi_indices(n - 1, l_bound) {
        let kp = alg.k_product(&gens, &k)?;
        if !kp.is_zero() {
            slots.insert(k, kp);
        }
    }
    let arg_refs: Vec<&AnnGenerator> = args.iter().collect();
    Ok(expand_bracket(p, &arg_refs, l_bound, &slots))
}

/// Shared index expansion over one generator tuple: sums over componentwise
/// sub-indices of the leading slots, pruned by the spectral degree bound.
fn expand_bracket(
    p: usize,
    args: &[&AnnGenerator],
    l_bound: u32,
    slots: &HashMap<Vec<u32>, ConformalElement>,
) -> AnnElement {
    let n = args.len();
    if slots.is_empty() {
        return AnnElement::zero();
    }
    let mut bound = Vec::with_capacity((n - 1) * p);
    for a in &args[..n - 1] {
        bound.extend_from_slice(&a.m);
    }
    let mut out = AnnElement::zero();
    let mut ks = vec![0u32; n - 1];
    let mut place = vec![0u32; p];
    for j in sub_indices(&bound, Some(l_bound)) {
        for (s, k) in ks.iter_mut().enumerate() {
            *k = j[s * p..(s + 1) * p].iter().sum();
        }
        let Some(kp) = slots.get(&ks) else { continue };
        let mut weight = Rational::one();
        for (t, &jt) in j.iter().enumerate() {
            weight *= binomial(bound[t], jt);
        }
        for (i, pl) in place.iter_mut().enumerate() {
            *pl = args[n - 1].m[i];
            for s in 0..n - 1 {
                *pl += args[s].m[i] - j[s * p + i];
            }
        }
        add_embedded(&mut out, kp, &place, &weight);
    }
    out
}

/// Multilinear extension of the basis bracket.
pub fn ann_bracket(
    alg: &NlcaPresentation,
    p: usize,
    args: &[AnnElement],
) -> Result<AnnElement, AnnError> {
    let n = alg.n();
    if args.len() != n {
        return Err(AnnError::ArityMismatch {
            expected: n,
            got: args.len(),
        });
    }
    let factors: Vec<Vec<(&AnnGenerator, &Rational)>> =
        args.iter().map(|a| a.terms().collect()).collect();
    if factors.iter().any(|f| f.is_empty()) {
        return Ok(AnnElement::zero());
    }
    let mut out = AnnElement::zero();
    let mut pick = vec![0usize; n];
    loop {
        let mut coeff = Rational::one();
        let mut tuple = Vec::with_capacity(n);
        for (s, &t) in pick.iter().enumerate() {
            let (g, c) = factors[s][t];
            coeff *= c;
            tuple.push(g.clone());
        }
        let base = ann_basis_bracket(alg, p, &tuple)?;
        out.add_assign_scaled(&base, &coeff);
        let mut slot = n;
        loop {
            if slot == 0 {
                return Ok(out);
            }
            slot -= 1;
            pick[slot] += 1;
            if pick[slot] < factors[slot].len() {
                break;
            }
            pick[slot] = 0;
        }
    }
}

fn render_ann_tuple(args: &[&AnnGenerator], names: &[String]) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.render(names)).collect();
    format!("({})", parts.join(","))
}

/// Verifies that the k-product at the slot totals is recovered from the
/// alternating binomial sum of expanded brackets.
pub fn check_reconstruction(
    alg: &NlcaPresentation,
    p: usize,
    tuple: &[GeneratorId],
    indices: &[Vec<u32>],
) -> Result<CheckReport, AnnError> {
    let n = alg.n();
    if tuple.len() != n || indices.len() != n {
        return Err(AnnError::ArityMismatch {
            expected: n,
            got: tuple.len().max(indices.len()),
        });
    }
    for m in indices {
        check_level(p, m)?;
    }
    let ks: Vec<u32> = indices[..n - 1].iter().map(|m| m.iter().sum()).collect();
    let kp = alg.k_product(tuple, &ks)?;
    let lhs = embed_at(&kp, &indices[n - 1]);

    let mut bound = Vec::with_capacity((n - 1) * p);
    for m in &indices[..n - 1] {
        bound.extend_from_slice(m);
    }
    let total: u32 = bound.iter().sum();
    let mut rhs = AnnElement::zero();
    for j in sub_indices(&bound, None) {
        let mut weight = Rational::one();
        for (t, &jt) in j.iter().enumerate() {
            weight *= binomial(bound[t], jt);
        }
        if (total - j.iter().sum::<u32>()) % 2 == 1 {
            weight = -weight;
        }
        let mut args: Vec<AnnGenerator> = (0..n - 1)
            .map(|s| AnnGenerator::new(tuple[s], j[s * p..(s + 1) * p].to_vec()))
            .collect();
        let mut last = indices[n - 1].clone();
        for (i, l) in last.iter_mut().enumerate() {
            for s in 0..n - 1 {
                *l += indices[s][i] - j[s * p + i];
            }
        }
        args.push(AnnGenerator::new(tuple[n - 1], last));
        let base = ann_basis_bracket(alg, p, &args)?;
        rhs.add_assign_scaled(&base, &weight);
    }

    let mut rep = CheckReport::pass("reconstruction");
    let residual = lhs.sub(&rhs);
    if !residual.is_zero() {
        let args: Vec<AnnGenerator> = tuple
            .iter()
            .zip(indices)
            .map(|(&g, m)| AnnGenerator::new(g, m.clone()))
            .collect();
        let arg_refs: Vec<&AnnGenerator> = args.iter().collect();
        rep.record(
            render_ann_tuple(&arg_refs, alg.names()),
            "reconstruction",
            residual.render(alg.names()),
        );
    }
    Ok(rep)
}

/// Windowed axiom check for the expanded bracket: full antisymmetry on every
/// ordered symbol tuple, then the generalized Jacobi identity over ordered
/// windows. The window holds all symbols with total index at most
/// `max_total_degree`.
pub fn check_ann_filippov(
    alg: &NlcaPresentation,
    p: usize,
    max_total_degree: u32,
) -> CheckReport {
    let mut rep = CheckReport::pass("annihilation");
    let n = alg.n();
    let names = alg.names();
    let l_bound = alg.table_max_lambda_degree();

    let mut basis: Vec<AnnGenerator> = Vec::new();
    for g in alg.generators() {
        for m in multi_indices(p, max_total_degree) {
            basis.push(AnnGenerator::new(g, m));
        }
    }
    let b = basis.len();

    // k-products for every ordered generator tuple, nonzero entries only.
    let mut kcache: HashMap<Vec<GeneratorId>, HashMap<Vec<u32>, ConformalElement>> =
        HashMap::new();
    for raw in cartesian(alg.num_generators(), n) {
        let gens: Vec<GeneratorId> = raw.into_iter().map(GeneratorId).collect();
        let mut slots = HashMap::new();
        for k in multi_indices(n - 1, l_bound) {
            let kp = alg
                .k_product(&gens, &k)
                .expect("basis tuples are always valid");
            if !kp.is_zero() {
                slots.insert(k, kp);
            }
        }
        kcache.insert(gens, slots);
    }
    let bracket_of = |ids: &[usize], last: &AnnGenerator| -> AnnElement {
        let mut args: Vec<&AnnGenerator> = ids.iter().map(|&i| &basis[i]).collect();
        args.push(last);
        let gens: Vec<GeneratorId> = args.iter().map(|a| a.gen).collect();
        expand_bracket(p, &args, l_bound, &kcache[&gens])
    };

    // Raw brackets of every ordered basis tuple, indexed first-slot-major.
    let size = b.pow(n as u32);
    let mut table: Vec<AnnElement> = Vec::with_capacity(size);
    for flat in 0..size {
        let mut ids = vec![0usize; n];
        let mut rem = flat;
        for slot in (0..n).rev() {
            ids[slot] = rem % b;
            rem /= b;
        }
        table.push(bracket_of(&ids[..n - 1], &basis[ids[n - 1]]));
    }
    let flat_of = |ids: &[usize]| -> usize { ids.iter().fold(0, |acc, &i| acc * b + i) };

    // Antisymmetry: every adjacent swap flips the sign. Checked on all
    // ordered tuples, once per unordered pair of neighbors.
    for ids in cartesian(b, n) {
        for pos in 0..n - 1 {
            if ids[pos] > ids[pos + 1] {
                continue;
            }
            let mut swapped = ids.clone();
            swapped.swap(pos, pos + 1);
            let defect = table[flat_of(&ids)].add(&table[flat_of(&swapped)]);
            if !defect.is_zero() {
                let arg_refs: Vec<&AnnGenerator> = ids.iter().map(|&i| &basis[i]).collect();
                rep.record(
                    render_ann_tuple(&arg_refs, names),
                    "ann-skew",
                    defect.render(names),
                );
            }
        }
    }

    // Generalized Jacobi over ordered windows. Inner brackets land outside
    // the window, so those outer brackets are computed directly and memoized.
    let mut outer: HashMap<Vec<usize>, HashMap<AnnGenerator, AnnElement>> = HashMap::new();
    fn fetch<'a>(
        outer: &'a mut HashMap<Vec<usize>, HashMap<AnnGenerator, AnnElement>>,
        ids: &[usize],
        z: &AnnGenerator,
        compute: impl FnOnce() -> AnnElement,
    ) -> &'a AnnElement {
        let need = outer.get(ids).map_or(true, |m| !m.contains_key(z));
        if need {
            let val = compute();
            outer
                .entry(ids.to_vec())
                .or_default()
                .insert(z.clone(), val);
        }
        &outer[ids][z]
    }
    for x in increasing(b, n - 1) {
        for y in increasing(b, n) {
            let mut residual = AnnElement::zero();
            for (z, c) in table[flat_of(&y)].terms() {
                let o = fetch(&mut outer, &x, z, || bracket_of(&x, z));
                residual.add_assign_scaled(o, c);
            }
            let mut ids = x.clone();
            ids.push(0);
            for (i, &yi) in y.iter().enumerate() {
                ids[n - 1] = yi;
                let inner = &table[flat_of(&ids)];
                if inner.is_zero() {
                    continue;
                }
                let ydrop: Vec<usize> = y
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != i)
                    .map(|(_, &v)| v)
                    .collect();
                let flip = (n - 1 - i) % 2 == 1;
                for (w, c) in inner.terms() {
                    let o = fetch(&mut outer, &ydrop, w, || bracket_of(&ydrop, w));
                    let c = if flip { c.clone() } else { -c.clone() };
                    residual.add_assign_scaled(o, &c);
                }
            }
            if !residual.is_zero() {
                let mut t = String::from("(");
                for (i, &yi) in y.iter().enumerate() {
                    if i > 0 {
                        t.push(',');
                    }
                    t.push_str(&basis[yi].render(names));
                }
                t.push(';');
                for (i, &xi) in x.iter().enumerate() {
                    if i > 0 {
                        t.push(',');
                    }
                    t.push_str(&basis[xi].render(names));
                }
                t.push(')');
                rep.record(t, "ann-filippov", residual.render(names));
            }
        }
    }
    rep
}

/// Whether the presentation and its index expansion are both trivial.
pub struct CommutativityOutcome {
    pub table_trivial: bool,
    pub window_trivial: bool,
    pub report: CheckReport,
}

/// Compares triviality of the stored table with triviality of all expanded
/// brackets on the index window. Conclusive once the window weight reaches
/// the total degree of the table.
pub fn commutativity_check(
    alg: &NlcaPresentation,
    p: usize,
    max_total_degree: u32,
) -> CommutativityOutcome {
    let table_trivial = alg.table().all(|(_, v)| v.is_zero());
    let n = alg.n();
    let mut basis: Vec<AnnGenerator> = Vec::new();
    for g in alg.generators() {
        for m in multi_indices(p, max_total_degree) {
            basis.push(AnnGenerator::new(g, m));
        }
    }
    let mut window_trivial = true;
    let mut witness = None;
    'outer: for ids in cartesian(basis.len(), n) {
        let args: Vec<AnnGenerator> = ids.iter().map(|&i| basis[i].clone()).collect();
        let val = ann_basis_bracket(alg, p, &args).expect("window symbols are valid");
        if !val.is_zero() {
            window_trivial = false;
            let arg_refs: Vec<&AnnGenerator> = args.iter().collect();
            witness = Some((render_ann_tuple(&arg_refs, alg.names()), val));
            break 'outer;
        }
    }
    let mut report = CheckReport::pass("commutativity");
    if table_trivial != window_trivial {
        let (tuple, residual) = witness
            .map(|(t, v)| (t, v.render(alg.names())))
            .unwrap_or_else(|| ("(table)".to_string(), "trivial window over nonzero table".to_string()));
        report.record(tuple, "commutativity", residual);
    }
    CommutativityOutcome {
        table_trivial,
        window_trivial,
        report,
    }
}

#[derive(Error, Clone, Debug, PartialEq, Eq)]
pub enum InduceError {
    #[error("source and target must share the same arity")]
    ArityMismatch,
    #[error("image of {symbol} carries indices of the wrong length")]
    BadImageLevel { symbol: String },
    #[error("t{dir}-equivariance fails at {symbol}: residual {residual}")]
    NotEquivariant {
        symbol: String,
        dir: usize,
        residual: String,
    },
    #[error("images of {gen} match no single target element: {detail}")]
    Inconsistent { gen: String, detail: String },
}

/// A homomorphism candidate recovered from index-level data.
pub struct InducedHom {
    /// Image of each source generator over the target presentation.
    pub images: Vec<ConformalElement>,
    /// Window reproduction and symbolic bracket compatibility.
    pub report: CheckReport,
}

/// Recovers a presentation homomorphism from a map of indexed symbols.
///
/// `phi` must be defined on the box window `m <= (max_degree,...)`. After a
/// directional-equivariance check on that window, the coefficients of each
/// image are read off the top layer and collapsed to powers of `d`; the
/// collapse is overdetermined for `p >= 2` and inconsistency means no single
/// element reproduces the data. The window only determines `d`-powers up to
/// `max_degree` per direction, so it must dominate the candidate's degree.
pub fn induce_hom<F>(
    src: &NlcaPresentation,
    dst: &NlcaPresentation,
    p: usize,
    phi: F,
    max_degree: u32,
) -> Result<InducedHom, InduceError>
where
    F: Fn(&AnnGenerator) -> AnnElement,
{
    if src.n() != dst.n() {
        return Err(InduceError::ArityMismatch);
    }
    let n = src.n();
    let cap = vec![max_degree; p];
    let window = sub_indices(&cap, None);
    let cap_factorial: Rational = cap.iter().map(|&c| factorial(c)).product();
    let mut images: Vec<ConformalElement> = Vec::new();
    let mut report = CheckReport::pass("induced-hom");

    for g in src.generators() {
        let mut values: HashMap<Vec<u32>, AnnElement> = HashMap::new();
        for m in &window {
            let sym = AnnGenerator::new(g, m.clone());
            let v = phi(&sym);
            if check_element_level(p, &v).is_err() {
                return Err(InduceError::BadImageLevel {
                    symbol: sym.render(src.names()),
                });
            }
            values.insert(m.clone(), v);
        }
        for m in &window {
            for dir in 1..=p {
                let lhs = dti_action(p, dir, &values[m]).expect("levels validated");
                let rhs = if m[dir - 1] == 0 {
                    AnnElement::zero()
                } else {
                    let mut m2 = m.clone();
                    m2[dir - 1] -= 1;
                    values[&m2].scale(&rat(m[dir - 1] as i64))
                };
                let defect = lhs.sub(&rhs);
                if !defect.is_zero() {
                    return Err(InduceError::NotEquivariant {
                        symbol: AnnGenerator::new(g, m.clone()).render(src.names()),
                        dir,
                        residual: defect.render(dst.names()),
                    });
                }
            }
        }

        // Top-layer coefficients, indexed by how far below the cap they sit.
        let mut dcoeffs: HashMap<(usize, Vec<u32>), Rational> = HashMap::new();
        for (t, c) in values[&cap].terms() {
            if t.m.iter().zip(&cap).any(|(a, b)| a > b) {
                return Err(InduceError::Inconsistent {
                    gen: src.names()[g.0].clone(),
                    detail: format!(
                        "top-layer term {} lies outside the window",
                        t.render(dst.names())
                    ),
                });
            }
            let jfact: Rational = t.m.iter().map(|&j| factorial(j)).product();
            let alpha: Vec<u32> = cap.iter().zip(&t.m).map(|(c, j)| c - j).collect();
            dcoeffs.insert((t.gen.0, alpha), c * jfact / cap_factorial.clone());
        }

        // Collapse to one d-polynomial per target generator: coefficients at
        // equal depth must agree up to the multinomial weight of the depth
        // split, or no single element reproduces the layer.
        let mut polys: HashMap<usize, BTreeMap<u32, Rational>> = HashMap::new();
        let depths: Vec<(usize, u32)> = {
            let mut d: Vec<(usize, u32)> = dcoeffs
                .keys()
                .map(|(tg, alpha)| (*tg, alpha.iter().sum()))
                .collect();
            d.sort_unstable();
            d.dedup();
            d
        };
        for (tg, k) in depths {
            let mut candidate: Option<Rational> = None;
            for alpha in multi_indices(p, k) {
                if alpha.iter().sum::<u32>() != k || alpha.iter().zip(&cap).any(|(a, c)| a > c) {
                    continue;
                }
                let d = dcoeffs
                    .get(&(tg, alpha.clone()))
                    .cloned()
                    .unwrap_or_else(Rational::zero);
                let c = d / multinomial(&alpha);
                match &candidate {
                    None => candidate = Some(c),
                    Some(prev) if *prev == c => {}
                    Some(prev) => {
                        return Err(InduceError::Inconsistent {
                            gen: src.names()[g.0].clone(),
                            detail: format!(
                                "depth {k} splits disagree on {}: {} vs {}",
                                dst.names()[tg],
                                render_rational(prev),
                                render_rational(&c)
                            ),
                        });
                    }
                }
            }
            let c = candidate.expect("depth list comes from stored coefficients");
            if !c.is_zero() {
                let signed = if k % 2 == 1 { -c } else { c };
                polys.entry(tg).or_default().insert(k, signed);
            }
        }
        let mut image = PolyValue::zero();
        for (tg, coeffs) in polys {
            let poly = MultiPoly::from_terms(
                coeffs
                    .into_iter()
                    .map(|(k, c)| (Monomial::from_pairs([(VarId::Partial, k)]), c)),
            );
            image.insert_add(GeneratorId(tg), poly);
        }
        let image = ConformalElement::new(image).expect("built from d-powers only");

        for m in &window {
            let defect = embed_at(&image, m).sub(&values[m]);
            if !defect.is_zero() {
                report.record(
                    AnnGenerator::new(g, m.clone()).render(src.names()),
                    "induced-window",
                    defect.render(dst.names()),
                );
            }
        }
        images.push(image);
    }

    // Symbolic bracket compatibility over the source table.
    let labels: Vec<MultiPoly> = (1..n).map(|t| MultiPoly::var(slot_var(t))).collect();
    for prefix in nondecreasing(src.num_generators(), n - 1) {
        for last in 0..src.num_generators() {
            let tuple: Vec<GeneratorId> = prefix
                .iter()
                .map(|&i| GeneratorId(i))
                .chain([GeneratorId(last)])
                .collect();
            let lhs = apply_images(&images, &src.bracket(&tuple));
            let args: Vec<PolyValue> = tuple
                .iter()
                .map(|g| images[g.0].as_value().clone())
                .collect();
            let rhs = dst.eval_composite(&args, &labels);
            let defect = lhs.sub(&rhs);
            if !defect.is_zero() {
                report.record(
                    src.render_tuple(&tuple),
                    "phi-bracket",
                    defect.render(dst.names()),
                );
            }
        }
    }

    Ok(InducedHom { images, report })
}

/// Extends a generator substitution linearly over polynomial coefficients.
fn apply_images(images: &[ConformalElement], v: &PolyValue) -> PolyValue {
    let mut out = PolyValue::zero();
    for (g, q) in v.iter() {
        for (tg, tq) in images[g.0].as_value().iter() {
            out.insert_add(*tg, q.mul(tq));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        current_algebra, h_from_matrix, rank2_family_i, rank2_family_ii, simple_3lie,
    };
    use crate::random::SeededRng;

    fn cur_simple3() -> NlcaPresentation {
        current_algebra(&simple_3lie()).expect("valid structure constants")
    }

    fn rank2_ii_linear() -> NlcaPresentation {
        let h = h_from_matrix(&[vec![rat(0), rat(-1)], vec![rat(1), rat(0)]])
            .expect("antisymmetric");
        rank2_family_ii(3, &h).expect("valid skew parameter")
    }

    fn sym(g: usize, m: &[u32]) -> AnnGenerator {
        AnnGenerator::new(GeneratorId(g), m.to_vec())
    }

    #[test]
    fn render_examples() {
        let names: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let mut x = AnnElement::zero();
        x.insert_add(sym(0, &[1, 1]), rat(-2));
        x.insert_add(sym(0, &[2, 0]), rat(-1));
        assert_eq!(x.render(&names), "-2*a[1,1] - a[2,0]");
        assert_eq!(AnnElement::zero().render(&names), "0");
        assert_eq!(AnnElement::basis(GeneratorId(1), vec![0]).render(&names), "b[0]");
    }

    #[test]
    fn current_bracket_adds_indices() {
        let alg = cur_simple3();
        let out = ann_basis_bracket(&alg, 1, &[sym(0, &[2]), sym(1, &[3]), sym(2, &[1])])
            .expect("valid arguments");
        assert_eq!(out, AnnElement::basis(GeneratorId(3), vec![6]));

        let out = ann_basis_bracket(&alg, 2, &[sym(0, &[1, 0]), sym(1, &[0, 1]), sym(2, &[1, 1])])
            .expect("valid arguments");
        assert_eq!(out, AnnElement::basis(GeneratorId(3), vec![2, 2]));
    }

    #[test]
    fn repeated_symbol_vanishes() {
        let alg = cur_simple3();
        let out = ann_basis_bracket(&alg, 1, &[sym(0, &[2]), sym(0, &[2]), sym(1, &[0])])
            .expect("valid arguments");
        assert!(out.is_zero());
    }

    #[test]
    fn linear_family_basis_bracket() {
        let alg = rank2_ii_linear();
        let out = ann_basis_bracket(&alg, 1, &[sym(0, &[1]), sym(0, &[0]), sym(1, &[0])])
            .expect("valid arguments");
        assert_eq!(out, AnnElement::basis(GeneratorId(1), vec![0]));
    }

    #[test]
    fn bracket_is_multilinear() {
        let alg = cur_simple3();
        let x = AnnElement::basis(GeneratorId(0), vec![1])
            .scale(&rat(2))
            .add(&AnnElement::basis(GeneratorId(1), vec![0]));
        let y = AnnElement::basis(GeneratorId(1), vec![2]);
        let z = AnnElement::basis(GeneratorId(2), vec![0]);
        let whole = ann_bracket(&alg, 1, &[x, y.clone(), z.clone()]).expect("valid");
        let part1 = ann_bracket(
            &alg,
            1,
            &[AnnElement::basis(GeneratorId(0), vec![1]), y.clone(), z.clone()],
        )
        .expect("valid");
        let part2 = ann_bracket(
            &alg,
            1,
            &[AnnElement::basis(GeneratorId(1), vec![0]), y, z],
        )
        .expect("valid");
        assert_eq!(whole, part1.scale(&rat(2)).add(&part2));
    }

    #[test]
    fn lowering_examples() {
        let x = AnnElement::basis(GeneratorId(0), vec![2, 1]);
        let down = partial_action(2, &x).expect("level 2");
        let mut expect = AnnElement::zero();
        expect.insert_add(sym(0, &[1, 1]), rat(-2));
        expect.insert_add(sym(0, &[2, 0]), rat(-1));
        assert_eq!(down, expect);

        let origin = AnnElement::basis(GeneratorId(0), vec![0, 0]);
        assert!(partial_action(2, &origin).expect("level 2").is_zero());

        let d1 = dti_action(2, 1, &x).expect("direction 1");
        assert_eq!(d1, AnnElement::term(rat(2), GeneratorId(0), vec![1, 1]));
        let flat = AnnElement::basis(GeneratorId(0), vec![2, 0]);
        assert!(dti_action(2, 2, &flat).expect("direction 2").is_zero());

        assert_eq!(
            dti_action(2, 3, &x),
            Err(AnnError::DirectionOutOfRange { dir: 3, p: 2 })
        );
        assert_eq!(
            partial_action(1, &x),
            Err(AnnError::LevelMismatch { expected: 1, got: 2 })
        );
    }

    fn random_element(rng: &mut SeededRng, gens: usize, p: usize, dmax: u32) -> AnnElement {
        let mut out = AnnElement::zero();
        for _ in 0..3 {
            let g = GeneratorId(rng.usize_below(gens));
            let m: Vec<u32> = (0..p)
                .map(|_| rng.usize_below(dmax as usize + 1) as u32)
                .collect();
            out.insert_add(AnnGenerator::new(g, m), rng.small_rational(4));
        }
        out
    }

    #[test]
    fn lowering_is_minus_directional_sum() {
        let mut rng = SeededRng::new(11);
        for _ in 0..20 {
            let x = random_element(&mut rng, 4, 2, 3);
            let lhs = partial_action(2, &x).expect("level 2");
            let rhs = dti_action(2, 1, &x)
                .expect("dir 1")
                .add(&dti_action(2, 2, &x).expect("dir 2"))
                .neg();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn lowering_operators_are_derivations() {
        let linear = rank2_ii_linear();
        let cur = cur_simple3();
        let cases: Vec<(&NlcaPresentation, usize, [AnnGenerator; 3])> = vec![
            (&linear, 1, [sym(0, &[2]), sym(0, &[1]), sym(1, &[1])]),
            (&linear, 1, [sym(0, &[1]), sym(1, &[2]), sym(0, &[2])]),
            (&cur, 2, [sym(0, &[1, 1]), sym(1, &[2, 0]), sym(2, &[0, 2])]),
        ];
        for (alg, p, args) in cases {
            let elems: Vec<AnnElement> =
                args.iter().map(|a| AnnElement::basis(a.gen, a.m.clone())).collect();
            let whole = ann_bracket(alg, p, &elems).expect("valid");
            for dir in 0..=p {
                let (lhs, act): (AnnElement, Box<dyn Fn(&AnnElement) -> AnnElement>) = if dir == 0 {
                    (
                        partial_action(p, &whole).expect("level"),
                        Box::new(move |x| lower_index(x)),
                    )
                } else {
                    (
                        dti_action(p, dir, &whole).expect("direction"),
                        Box::new(move |x| dti_action(p, dir, x).expect("direction")),
                    )
                };
                let mut rhs = AnnElement::zero();
                for s in 0..3 {
                    let mut moved = elems.clone();
                    moved[s] = act(&elems[s]);
                    rhs.add_assign(&ann_bracket(alg, p, &moved).expect("valid"));
                }
                assert_eq!(lhs, rhs, "direction {dir} fails the product rule");
            }
        }
    }

    #[test]
    fn filtration_examples() {
        assert_eq!(filtration_degree(&AnnElement::basis(GeneratorId(0), vec![2, 1])), Some(3));
        let mut x = AnnElement::basis(GeneratorId(0), vec![0, 0]);
        x.insert_add(sym(0, &[5, 0]), rat(1));
        assert_eq!(filtration_degree(&x), Some(0));
        assert_eq!(filtration_degree(&AnnElement::zero()), None);
    }

    #[test]
    fn bracket_respects_filtration_shift() {
        let alg = rank2_ii_linear();
        let shift = filtration_shift(&alg);
        assert_eq!(shift, 1);
        let mut rng = SeededRng::new(23);
        for _ in 0..40 {
            let args: Vec<AnnGenerator> = (0..3)
                .map(|_| {
                    sym(
                        rng.usize_below(2),
                        &[rng.usize_below(4) as u32],
                    )
                })
                .collect();
            let total: u32 = args.iter().map(AnnGenerator::total).sum();
            let out = ann_basis_bracket(&alg, 1, &args).expect("valid");
            if let Some(deg) = filtration_degree(&out) {
                assert!(deg + shift >= total, "degree {deg} under total {total}");
            }
        }
    }

    #[test]
    fn reconstruction_on_current() {
        let alg = cur_simple3();
        let tuple = [GeneratorId(0), GeneratorId(1), GeneratorId(2)];
        for indices in [
            vec![vec![0], vec![0], vec![0]],
            vec![vec![2], vec![3], vec![1]],
            vec![vec![1], vec![0], vec![4]],
        ] {
            let rep = check_reconstruction(&alg, 1, &tuple, &indices).expect("valid");
            assert!(rep.passed());
        }
        let rep = check_reconstruction(
            &alg,
            2,
            &tuple,
            &[vec![1, 1], vec![0, 2], vec![1, 0]],
        )
        .expect("valid");
        assert!(rep.passed());
    }

    #[test]
    fn reconstruction_exhaustive_on_linear_family() {
        let alg = rank2_ii_linear();
        for raw in cartesian(2, 3) {
            let tuple: Vec<GeneratorId> = raw.into_iter().map(GeneratorId).collect();
            for m in cartesian(3, 3) {
                let indices: Vec<Vec<u32>> = m.iter().map(|&v| vec![v as u32]).collect();
                let rep = check_reconstruction(&alg, 1, &tuple, &indices).expect("valid");
                assert!(rep.passed(), "fails at {:?} {:?}", tuple, indices);
            }
        }
    }

    #[test]
    fn reconstruction_trivial_on_commutative() {
        let alg = NlcaPresentation::new(3, vec!["a".into(), "b".into()]).expect("valid");
        let rep = check_reconstruction(
            &alg,
            1,
            &[GeneratorId(0), GeneratorId(0), GeneratorId(1)],
            &[vec![1], vec![2], vec![0]],
        )
        .expect("valid");
        assert!(rep.passed());
    }

    #[test]
    fn window_axioms_on_current() {
        let rep = check_ann_filippov(&cur_simple3(), 1, 2);
        assert!(rep.passed(), "failures: {:?}", rep.failures);
    }

    #[test]
    fn window_axioms_on_linear_family() {
        let rep = check_ann_filippov(&rank2_ii_linear(), 1, 3);
        assert!(rep.passed(), "failures: {:?}", rep.failures);
    }

    #[test]
    fn vandermonde_scalar_parameter_breaks_window_skew() {
        let alg = rank2_family_i(3, &MultiPoly::constant(rat(1))).expect("symmetric");
        let rep = check_ann_filippov(&alg, 1, 1);
        assert!(!rep.passed());
        assert_eq!(rep.failures.len(), rep.failure_count, "small window records all");
        assert!(rep.failures.iter().all(|f| f.equation == "ann-skew"));
    }

    #[test]
    fn vandermonde_structured_parameter_passes_window() {
        let d = MultiPoly::partial();
        let l1 = MultiPoly::var(slot_var(1));
        let l2 = MultiPoly::var(slot_var(2));
        let g = d
            .add(&l1.scale(&rat(2)))
            .add(&l2)
            .mul(&d.add(&l1).add(&l2.scale(&rat(2))));
        let alg = rank2_family_i(3, &g).expect("symmetric");
        let rep = check_ann_filippov(&alg, 1, 2);
        assert!(rep.passed(), "failures: {:?}", rep.failures);
    }

    #[test]
    fn quadruple_constraint_violation_breaks_window() {
        let mut a = vec![vec![rat(0); 4]; 4];
        a[0][1] = rat(1);
        a[1][0] = rat(-1);
        a[2][3] = rat(1);
        a[3][2] = rat(-1);
        let h = h_from_matrix(&a).expect("antisymmetric");
        let alg = rank2_family_ii(3, &h).expect("skew parameter");
        let rep = check_ann_filippov(&alg, 1, 3);
        assert!(!rep.passed());
        assert!(rep.failures.iter().any(|f| f.equation == "ann-filippov"));
        assert!(rep.failures.iter().all(|f| f.equation != "ann-skew"));
    }

    #[test]
    fn embed_at_examples() {
        let d = MultiPoly::partial();
        let e = ConformalElement::term(GeneratorId(0), d.clone()).expect("d only");
        assert_eq!(
            embed_at(&e, &[2]),
            AnnElement::term(rat(-2), GeneratorId(0), vec![1])
        );
        let e2 = ConformalElement::term(GeneratorId(0), d.mul(&d)).expect("d only");
        assert_eq!(
            embed_at(&e2, &[1, 1]),
            AnnElement::term(rat(2), GeneratorId(0), vec![0, 0])
        );
    }

    #[test]
    fn induction_recovers_identity() {
        let alg = rank2_ii_linear();
        let hom = induce_hom(
            &alg,
            &alg,
            1,
            |g| AnnElement::basis(g.gen, g.m.clone()),
            3,
        )
        .expect("identity is equivariant");
        assert_eq!(hom.images.len(), 2);
        for (i, img) in hom.images.iter().enumerate() {
            assert_eq!(*img, ConformalElement::from_gen(GeneratorId(i)));
        }
        assert!(hom.report.passed(), "failures: {:?}", hom.report.failures);
    }

    #[test]
    fn induction_recovers_scalars() {
        let alg = rank2_ii_linear();
        let hom = induce_hom(
            &alg,
            &alg,
            1,
            |g| AnnElement::basis(g.gen, g.m.clone()).neg(),
            3,
        )
        .expect("negation is equivariant");
        for (i, img) in hom.images.iter().enumerate() {
            assert_eq!(*img, ConformalElement::from_gen(GeneratorId(i)).neg());
        }
        assert!(hom.report.passed(), "negation cubes to itself on triple brackets");

        let hom = induce_hom(
            &alg,
            &alg,
            1,
            |g| AnnElement::basis(g.gen, g.m.clone()).scale(&rat(2)),
            3,
        )
        .expect("doubling is equivariant");
        for (i, img) in hom.images.iter().enumerate() {
            assert_eq!(*img, ConformalElement::from_gen(GeneratorId(i)).scale(&rat(2)));
        }
        assert!(!hom.report.passed(), "doubling scales triple brackets by eight");
        assert!(hom.report.failures.iter().all(|f| f.equation == "phi-bracket"));
    }

    #[test]
    fn induction_reads_off_partial_twist() {
        let alg = rank2_ii_linear();
        let one_plus_d = MultiPoly::constant(rat(1)).add(&MultiPoly::partial());
        let twist: Vec<ConformalElement> = (0..2)
            .map(|i| ConformalElement::term(GeneratorId(i), one_plus_d.clone()).expect("d only"))
            .collect();
        let hom = induce_hom(&alg, &alg, 1, |g| embed_at(&twist[g.gen.0], &g.m), 3)
            .expect("module maps are equivariant");
        assert_eq!(hom.images, twist);
        assert!(hom
            .report
            .failures
            .iter()
            .all(|f| f.equation == "phi-bracket"));
        assert!(!hom.report.passed(), "the twist is no bracket homomorphism");
    }

    #[test]
    fn induction_rejects_shifts() {
        let alg = rank2_ii_linear();
        let res = induce_hom(
            &alg,
            &alg,
            1,
            |g| {
                let mut m = g.m.clone();
                m[0] += 1;
                AnnElement::basis(g.gen, m)
            },
            2,
        );
        assert!(matches!(res, Err(InduceError::NotEquivariant { .. })));
    }

    #[test]
    fn induction_rejects_single_direction_lowering() {
        let alg = rank2_ii_linear();
        let res = induce_hom(
            &alg,
            &alg,
            2,
            |g| {
                let x = AnnElement::basis(g.gen, g.m.clone());
                dti_action(2, 1, &x).expect("level 2")
            },
            2,
        );
        assert!(matches!(res, Err(InduceError::Inconsistent { .. })));
    }

    #[test]
    fn commutativity_agreement() {
        let trivial = NlcaPresentation::new(3, vec!["a".into(), "b".into()]).expect("valid");
        let out = commutativity_check(&trivial, 1, 2);
        assert!(out.table_trivial && out.window_trivial && out.report.passed());

        let out = commutativity_check(&cur_simple3(), 1, 1);
        assert!(!out.table_trivial && !out.window_trivial && out.report.passed());

        let alg = rank2_family_i(3, &MultiPoly::constant(rat(1))).expect("symmetric");
        let out = commutativity_check(&alg, 1, 1);
        assert!(!out.table_trivial && !out.window_trivial && out.report.passed());
    }

    #[test]
    fn arity_and_level_validation() {
        let alg = cur_simple3();
        assert_eq!(
            ann_basis_bracket(&alg, 1, &[sym(0, &[1]), sym(1, &[0])]),
            Err(AnnError::ArityMismatch { expected: 3, got: 2 })
        );
        assert_eq!(
            ann_basis_bracket(&alg, 2, &[sym(0, &[1]), sym(1, &[0]), sym(2, &[0])]),
            Err(AnnError::LevelMismatch { expected: 2, got: 1 })
        );
    }
}

//! Line-oriented text formats for algebras, modules, and cochains, plus the
//! deterministic report renderings used for golden comparisons.
//!
//! Files are UTF-8 with `[section]` headers, `key = value` entries, blank
//! lines, and `#` comments running to end of line. Polynomial expressions
//! accept integers, rationals `p/q`, the translation variable `d`, spectral
//! variables `l<k>` (short for `l1_<k>`) and `l<block>_<slot>`, generator
//! names, the operators `+ - * ^`, and parentheses. There is no implicit
//! multiplication. Errors carry 1-based line and column positions.
//!
//! An algebra file either spells out a table:
//!
//! ```text
//! [algebra]
//! n = 3
//! generators = e1, e2
//!
//! [brackets]
//! [e1 e1 e2] = l1 - l2
//! ```
//!
//! or names a builder (`current`, `rank2_i`, `rank2_ii`, `simple3lie`) with
//! its parameters. A bracket value with no generator mention is shorthand
//! for that polynomial times the last generator of the tuple. Table entries
//! whose canonical keys are reachable from the given ones by exchanging the
//! last two slots are filled in automatically with the sign and label
//! substitution that exchange dictates; `complete = none` stores the table
//! verbatim instead.
//!
//! Module files hold `generators` plus `[actions]` entries `[e1 e2; m1] =
//! ...` with values over the module generators, or a builder (`adjoint`,
//! `trivial`). Cochain files hold the degree `q` and `[values]` entries
//! keyed by parenthesized generator blocks and a final generator, e.g.
//! `[(e1 e2); e1]` for degree 2 or `[e1]` for degree 1.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{slot_var, GeneratorId, NlcaPresentation, PolyValue};
use crate::arith::Rational;
use crate::cohomology::Cochain;
use crate::combi::cartesian;
use crate::constructions::{
    current_algebra, rank2_family_i, rank2_family_ii, simple_3lie, NLieAlgebra,
};
use crate::poly::{poly_sum, MultiPoly, VarId};
use crate::report::CheckReport;
use crate::repr::{adjoint_module, trivial_module, ConformalModule};

#[derive(Error, Clone, Debug, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {msg}")]
    Entry { line: usize, msg: String },
    #[error("{msg}")]
    File { msg: String },
}

fn entry_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Entry {
        line,
        msg: msg.into(),
    }
}

fn file_err(msg: impl Into<String>) -> FormatError {
    FormatError::File { msg: msg.into() }
}

// ---------------------------------------------------------------------------
// Cursor over one comment-stripped line.

#[derive(Clone, Debug)]
struct Cursor {
    line: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(line: usize, chars: &[char], pos: usize) -> Cursor {
        Cursor {
            line,
            chars: chars.to_vec(),
            pos,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, msg: impl Into<String>) -> FormatError {
        FormatError::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FormatError> {
        self.skip_ws();
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c)))
        }
    }

    fn expect_end(&mut self) -> Result<(), FormatError> {
        self.skip_ws();
        if self.pos >= self.chars.len() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    /// Name token: a letter or `_`, then letters, digits, `_`, `'`.
    fn ident(&mut self) -> Result<String, FormatError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected a name")),
        }
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '\'' {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn digits(&mut self) -> Result<String, FormatError> {
        self.skip_ws();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if s.is_empty() {
            Err(self.err("expected a number"))
        } else {
            Ok(s)
        }
    }
}

/// `d` and the `l<k>` / `l<block>_<slot>` spellings; `None` for anything else.
fn var_of_ident(s: &str) -> Option<VarId> {
    if s == "d" {
        return Some(VarId::Partial);
    }
    let rest = s.strip_prefix('l')?;
    if let Some((b, sl)) = rest.split_once('_') {
        if b.is_empty() || sl.is_empty() {
            return None;
        }
        let block = b.parse::<u32>().ok()?;
        let slot = sl.parse::<u32>().ok()?;
        if slot == 0 {
            return None;
        }
        Some(VarId::lambda(block, slot))
    } else {
        let k = rest.parse::<u32>().ok()?;
        if k == 0 {
            return None;
        }
        Some(slot_var(k as usize))
    }
}

// ---------------------------------------------------------------------------
// Expression parsing.

/// Mixed value: a bare polynomial part plus a generator combination.
#[derive(Clone, Debug)]
struct ExprVal {
    scalar: MultiPoly,
    vector: PolyValue,
}

impl ExprVal {
    fn from_scalar(p: MultiPoly) -> ExprVal {
        ExprVal {
            scalar: p,
            vector: PolyValue::zero(),
        }
    }

    fn from_gen(g: GeneratorId) -> ExprVal {
        ExprVal {
            scalar: MultiPoly::zero(),
            vector: PolyValue::from_gen(g),
        }
    }

    fn add(&self, o: &ExprVal) -> ExprVal {
        ExprVal {
            scalar: self.scalar.add(&o.scalar),
            vector: self.vector.add(&o.vector),
        }
    }

    fn neg(&self) -> ExprVal {
        ExprVal {
            scalar: self.scalar.neg(),
            vector: self.vector.neg(),
        }
    }
}

fn mul_vals(
    line: usize,
    col: usize,
    a: &ExprVal,
    b: &ExprVal,
) -> Result<ExprVal, FormatError> {
    if !a.vector.is_zero() && !b.vector.is_zero() {
        return Err(FormatError::Syntax {
            line,
            col,
            msg: "generators cannot be multiplied together".into(),
        });
    }
    let mut vector = a.vector.scale_poly(&b.scalar);
    vector = vector.add(&b.vector.scale_poly(&a.scalar));
    Ok(ExprVal {
        scalar: a.scalar.mul(&b.scalar),
        vector,
    })
}

fn parse_expr(
    c: &mut Cursor,
    gens: &BTreeMap<String, GeneratorId>,
) -> Result<ExprVal, FormatError> {
    c.skip_ws();
    let negated = c.eat('-');
    let mut val = parse_term(c, gens)?;
    if negated {
        val = val.neg();
    }
    loop {
        c.skip_ws();
        if c.eat('+') {
            val = val.add(&parse_term(c, gens)?);
        } else if c.eat('-') {
            val = val.add(&parse_term(c, gens)?.neg());
        } else {
            break;
        }
    }
    Ok(val)
}

fn parse_term(
    c: &mut Cursor,
    gens: &BTreeMap<String, GeneratorId>,
) -> Result<ExprVal, FormatError> {
    let mut val = parse_factor(c, gens)?;
    loop {
        c.skip_ws();
        let col = c.col();
        if c.eat('*') {
            let rhs = parse_factor(c, gens)?;
            val = mul_vals(c.line, col, &val, &rhs)?;
        } else {
            break;
        }
    }
    Ok(val)
}

fn parse_factor(
    c: &mut Cursor,
    gens: &BTreeMap<String, GeneratorId>,
) -> Result<ExprVal, FormatError> {
    let base = parse_base(c, gens)?;
    c.skip_ws();
    let col = c.col();
    if !c.eat('^') {
        return Ok(base);
    }
    let digits = c.digits()?;
    let k: u32 = digits.parse().map_err(|_| FormatError::Syntax {
        line: c.line,
        col,
        msg: "exponent out of range".into(),
    })?;
    if !base.vector.is_zero() {
        if k == 1 {
            return Ok(base);
        }
        return Err(FormatError::Syntax {
            line: c.line,
            col,
            msg: "generators cannot be raised to powers".into(),
        });
    }
    Ok(ExprVal::from_scalar(base.scalar.pow(k)))
}

fn parse_base(
    c: &mut Cursor,
    gens: &BTreeMap<String, GeneratorId>,
) -> Result<ExprVal, FormatError> {
    c.skip_ws();
    let col = c.col();
    match c.peek() {
        Some(ch) if ch.is_ascii_digit() => {
            let num = c.digits()?;
            let numerator = BigInt::parse_bytes(num.as_bytes(), 10).expect("digit string");
            if c.eat('/') {
                let den = c.digits()?;
                let denominator =
                    BigInt::parse_bytes(den.as_bytes(), 10).expect("digit string");
                if denominator.is_zero() {
                    return Err(FormatError::Syntax {
                        line: c.line,
                        col,
                        msg: "zero denominator".into(),
                    });
                }
                Ok(ExprVal::from_scalar(MultiPoly::constant(Rational::new(
                    numerator,
                    denominator,
                ))))
            } else {
                Ok(ExprVal::from_scalar(MultiPoly::constant(
                    Rational::from_integer(numerator),
                )))
            }
        }
        Some('(') => {
            c.pos += 1;
            let val = parse_expr(c, gens)?;
            c.expect(')')?;
            Ok(val)
        }
        Some(ch) if ch.is_alphabetic() || ch == '_' => {
            let name = c.ident()?;
            if let Some(v) = var_of_ident(&name) {
                return Ok(ExprVal::from_scalar(MultiPoly::var(v)));
            }
            if let Some(&g) = gens.get(&name) {
                return Ok(ExprVal::from_gen(g));
            }
            Err(FormatError::Syntax {
                line: c.line,
                col,
                msg: format!("unknown name `{}`", name),
            })
        }
        Some(ch) => Err(c.err(format!("unexpected character `{}`", ch))),
        None => Err(c.err("expected an expression")),
    }
}

// ---------------------------------------------------------------------------
// Document scanning.

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    chars: Vec<char>,
    eq: usize,
}

impl Entry {
    fn key_cursor(&self) -> Cursor {
        Cursor::new(self.line, &self.chars[..self.eq], 0)
    }

    fn value_cursor(&self) -> Cursor {
        Cursor::new(self.line, &self.chars, self.eq + 1)
    }
}

#[derive(Debug)]
struct Document {
    sections: Vec<(String, usize, Vec<Entry>)>,
}

impl Document {
    fn scan(text: &str, allowed: &[&str]) -> Result<Document, FormatError> {
        let mut sections: Vec<(String, usize, Vec<Entry>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let mut chars: Vec<char> = raw.chars().collect();
            if let Some(p) = chars.iter().position(|&c| c == '#') {
                chars.truncate(p);
            }
            if chars.iter().all(|c| c.is_whitespace()) {
                continue;
            }
            if let Some(eq) = chars.iter().position(|&c| c == '=') {
                let entry = Entry { line, chars, eq };
                match sections.last_mut() {
                    Some((_, _, entries)) => entries.push(entry),
                    None => {
                        return Err(FormatError::Syntax {
                            line,
                            col: 1,
                            msg: "entries must follow a [section] header".into(),
                        })
                    }
                }
            } else {
                let mut c = Cursor::new(line, &chars, 0);
                c.expect('[')?;
                let name = c.ident()?;
                c.expect(']')?;
                c.expect_end()?;
                if !allowed.contains(&name.as_str()) {
                    return Err(FormatError::Syntax {
                        line,
                        col: 1,
                        msg: format!("unknown section `[{}]`", name),
                    });
                }
                if sections.iter().any(|(n, _, _)| n == &name) {
                    return Err(FormatError::Syntax {
                        line,
                        col: 1,
                        msg: format!("duplicate section `[{}]`", name),
                    });
                }
                sections.push((name, line, Vec::new()));
            }
        }
        Ok(Document { sections })
    }

    fn entries(&self, name: &str) -> &[Entry] {
        self.sections
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, _, e)| e.as_slice())
            .unwrap_or(&[])
    }

    fn has(&self, name: &str) -> bool {
        self.sections.iter().any(|(n, _, _)| n == name)
    }
}

/// Entries of a section that takes plain `key = value` pairs.
fn scalar_entries(
    entries: &[Entry],
    allowed: &[&str],
) -> Result<BTreeMap<String, Entry>, FormatError> {
    let mut map = BTreeMap::new();
    for e in entries {
        let mut k = e.key_cursor();
        let name = k.ident()?;
        k.expect_end()?;
        if !allowed.contains(&name.as_str()) {
            return Err(entry_err(e.line, format!("unknown key `{}`", name)));
        }
        if map.insert(name.clone(), e.clone()).is_some() {
            return Err(entry_err(e.line, format!("duplicate key `{}`", name)));
        }
    }
    Ok(map)
}

fn int_value(e: &Entry) -> Result<usize, FormatError> {
    let mut c = e.value_cursor();
    let digits = c.digits()?;
    c.expect_end()?;
    digits
        .parse::<usize>()
        .map_err(|_| entry_err(e.line, "number out of range"))
}

fn ident_value(e: &Entry) -> Result<String, FormatError> {
    let mut c = e.value_cursor();
    let name = c.ident()?;
    c.expect_end()?;
    Ok(name)
}

/// Comma-separated generator names; rejects names that collide with the
/// variable spellings.
fn name_list_value(e: &Entry) -> Result<Vec<String>, FormatError> {
    let mut c = e.value_cursor();
    let mut names = Vec::new();
    loop {
        c.skip_ws();
        let col = c.col();
        let name = c.ident()?;
        if var_of_ident(&name).is_some() {
            return Err(FormatError::Syntax {
                line: e.line,
                col,
                msg: format!("name `{}` is reserved for a variable", name),
            });
        }
        names.push(name);
        c.skip_ws();
        if !c.eat(',') {
            break;
        }
    }
    c.expect_end()?;
    Ok(names)
}

fn expr_value(
    e: &Entry,
    gens: &BTreeMap<String, GeneratorId>,
) -> Result<ExprVal, FormatError> {
    let mut c = e.value_cursor();
    let val = parse_expr(&mut c, gens)?;
    c.expect_end()?;
    Ok(val)
}

fn name_map(names: &[String]) -> BTreeMap<String, GeneratorId> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), GeneratorId(i)))
        .collect()
}

/// One generator resolved against a name table.
fn resolve_gen(
    c: &mut Cursor,
    map: &BTreeMap<String, GeneratorId>,
    kind: &str,
) -> Result<GeneratorId, FormatError> {
    c.skip_ws();
    let col = c.col();
    let name = c.ident()?;
    map.get(&name).copied().ok_or_else(|| FormatError::Syntax {
        line: c.line,
        col,
        msg: format!("unknown {} `{}`", kind, name),
    })
}

// ---------------------------------------------------------------------------
// Algebra files.

/// Reads an algebra file into a presentation with a canonicalized table.
pub fn parse_algebra(text: &str) -> Result<NlcaPresentation, FormatError> {
    let doc = Document::scan(text, &["algebra", "brackets", "structure"])?;
    if !doc.has("algebra") {
        return Err(file_err("missing [algebra] section"));
    }
    let head = scalar_entries(
        doc.entries("algebra"),
        &["n", "generators", "builder", "complete", "g", "h"],
    )?;
    let builder = match head.get("builder") {
        Some(e) => Some((ident_value(e)?, e.line)),
        None => None,
    };

    let forbid = |key: &str, reason: &str| -> Result<(), FormatError> {
        match head.get(key) {
            Some(e) => Err(entry_err(e.line, format!("key `{}` {}", key, reason))),
            None => Ok(()),
        }
    };
    let forbid_section = |doc: &Document, name: &str, reason: &str| -> Result<(), FormatError> {
        if let Some((_, line, _)) = doc.sections.iter().find(|(n, _, _)| n == name) {
            return Err(entry_err(*line, format!("section [{}] {}", name, reason)));
        }
        Ok(())
    };

    match builder.as_ref().map(|(b, l)| (b.as_str(), *l)) {
        None => {
            forbid("g", "requires `builder = rank2_i`")?;
            forbid("h", "requires `builder = rank2_ii`")?;
            forbid_section(&doc, "structure", "requires `builder = current`")?;
            let n_entry = head
                .get("n")
                .ok_or_else(|| file_err("missing key `n` in [algebra]"))?;
            let n = int_value(n_entry)?;
            let gen_entry = head
                .get("generators")
                .ok_or_else(|| file_err("missing key `generators` in [algebra]"))?;
            let names = name_list_value(gen_entry)?;
            let complete = match head.get("complete") {
                Some(e) => match ident_value(e)?.as_str() {
                    "none" => false,
                    "skew" => true,
                    other => {
                        return Err(entry_err(
                            e.line,
                            format!("unknown completion mode `{}` (skew, none)", other),
                        ))
                    }
                },
                None => true,
            };
            let mut alg = NlcaPresentation::new(n, names.clone()).map_err(|err| {
                let line = if matches!(err, crate::algebra::AlgebraError::ArityTooSmall(_)) {
                    n_entry.line
                } else {
                    gen_entry.line
                };
                entry_err(line, err.to_string())
            })?;
            let gens = name_map(&names);
            let mut explicit: BTreeSet<Vec<GeneratorId>> = BTreeSet::new();
            for e in doc.entries("brackets") {
                let mut k = e.key_cursor();
                k.expect('[')?;
                let mut tuple = Vec::new();
                loop {
                    k.skip_ws();
                    if k.eat(']') {
                        break;
                    }
                    tuple.push(resolve_gen(&mut k, &gens, "generator")?);
                }
                k.expect_end()?;
                let value = bracket_value(e, &gens, tuple.last().copied())?;
                alg.set_bracket(&tuple, value)
                    .map_err(|err| entry_err(e.line, err.to_string()))?;
                if !explicit.insert(tuple) {
                    return Err(entry_err(e.line, "duplicate bracket entry"));
                }
            }
            if complete {
                complete_skew(&mut alg, &explicit)?;
            }
            Ok(alg)
        }
        Some(("simple3lie", _)) => {
            for key in ["n", "generators", "complete", "g", "h"] {
                forbid(key, "does not apply to `builder = simple3lie`")?;
            }
            forbid_section(&doc, "brackets", "does not apply to builders")?;
            forbid_section(&doc, "structure", "requires `builder = current`")?;
            current_algebra(&simple_3lie()).map_err(|e| file_err(e.to_string()))
        }
        Some(("rank2_i", _)) | Some(("rank2_ii", _)) => {
            let is_i = builder.as_ref().unwrap().0 == "rank2_i";
            forbid("generators", "does not apply to the rank-2 builders")?;
            forbid("complete", "does not apply to builders")?;
            forbid(if is_i { "h" } else { "g" }, "belongs to the other rank-2 builder")?;
            forbid_section(&doc, "brackets", "does not apply to builders")?;
            forbid_section(&doc, "structure", "requires `builder = current`")?;
            let n_entry = head
                .get("n")
                .ok_or_else(|| file_err("missing key `n` in [algebra]"))?;
            let n = int_value(n_entry)?;
            let key = if is_i { "g" } else { "h" };
            let p_entry = head.get(key).ok_or_else(|| {
                file_err(format!("missing key `{}` in [algebra]", key))
            })?;
            let empty = BTreeMap::new();
            let param = expr_value(p_entry, &empty)?.scalar;
            let built = if is_i {
                rank2_family_i(n, &param)
            } else {
                rank2_family_ii(n, &param)
            };
            built.map_err(|err| entry_err(p_entry.line, err.to_string()))
        }
        Some(("current", _)) => {
            forbid("g", "requires `builder = rank2_i`")?;
            forbid("h", "requires `builder = rank2_ii`")?;
            forbid("complete", "does not apply to builders")?;
            forbid_section(&doc, "brackets", "does not apply to builders")?;
            let n_entry = head
                .get("n")
                .ok_or_else(|| file_err("missing key `n` in [algebra]"))?;
            let n = int_value(n_entry)?;
            let gen_entry = head
                .get("generators")
                .ok_or_else(|| file_err("missing key `generators` in [algebra]"))?;
            let names = name_list_value(gen_entry)?;
            let mut nl = NLieAlgebra::new(n, names.clone())
                .map_err(|err| entry_err(n_entry.line, err.to_string()))?;
            let gens = name_map(&names);
            let mut explicit: BTreeSet<Vec<usize>> = BTreeSet::new();
            for e in doc.entries("structure") {
                let mut k = e.key_cursor();
                k.expect('[')?;
                let mut tuple = Vec::new();
                loop {
                    k.skip_ws();
                    if k.eat(']') {
                        break;
                    }
                    tuple.push(resolve_gen(&mut k, &gens, "generator")?.0);
                }
                k.expect_end()?;
                let value = structure_value(e, &gens, names.len())?;
                nl.set_bracket(&tuple, value)
                    .map_err(|err| entry_err(e.line, err.to_string()))?;
                if !explicit.insert(tuple) {
                    return Err(entry_err(e.line, "duplicate structure entry"));
                }
            }
            current_algebra(&nl).map_err(|err| file_err(err.to_string()))
        }
        Some((other, line)) => Err(entry_err(
            line,
            format!(
                "unknown builder `{}` (current, rank2_i, rank2_ii, simple3lie)",
                other
            ),
        )),
    }
}

/// Bracket value; a bare polynomial is shorthand for it times the last
/// generator of the tuple.
fn bracket_value(
    e: &Entry,
    gens: &BTreeMap<String, GeneratorId>,
    last: Option<GeneratorId>,
) -> Result<PolyValue, FormatError> {
    let val = expr_value(e, gens)?;
    if val.scalar.is_zero() {
        return Ok(val.vector);
    }
    if !val.vector.is_zero() {
        return Err(entry_err(
            e.line,
            "value mixes a bare polynomial with generator terms",
        ));
    }
    match last {
        Some(g) => Ok(PolyValue::term(g, val.scalar)),
        None => Err(entry_err(e.line, "empty tuple cannot take a bare polynomial")),
    }
}

/// Structure-constant value: a rational combination of generators.
fn structure_value(
    e: &Entry,
    gens: &BTreeMap<String, GeneratorId>,
    dim: usize,
) -> Result<Vec<Rational>, FormatError> {
    let val = expr_value(e, gens)?;
    if !val.scalar.is_zero() {
        return Err(entry_err(
            e.line,
            "structure values are rational combinations of generators",
        ));
    }
    let mut out = vec![Rational::zero(); dim];
    for (g, c) in val.vector.iter() {
        if !c.vars().is_empty() {
            return Err(entry_err(
                e.line,
                "structure coefficients must be rational constants",
            ));
        }
        out[g.0] = c.constant_term();
    }
    Ok(out)
}

/// Fills absent canonical keys whose last-two-slot exchange lands on a known
/// entry, iterating until nothing new is reachable. Keys listed in
/// `explicit` (even explicit zeros) are never overwritten.
fn complete_skew(
    alg: &mut NlcaPresentation,
    explicit: &BTreeSet<Vec<GeneratorId>>,
) -> Result<(), FormatError> {
    let n = alg.n();
    let labels = alg.std_labels();
    let mu = MultiPoly::partial().add(&poly_sum(labels.iter())).neg();
    let mut settled = explicit.clone();
    let keys: Vec<Vec<GeneratorId>> = cartesian(alg.num_generators(), n)
        .into_iter()
        .map(|raw| raw.into_iter().map(GeneratorId).collect::<Vec<_>>())
        .filter(|t| t[..n - 1].windows(2).all(|w| w[0] <= w[1]))
        .collect();
    loop {
        let mut progress = false;
        for key in &keys {
            if settled.contains(key) {
                continue;
            }
            let mut swapped = key.clone();
            swapped.swap(n - 2, n - 1);
            let mut lookup = swapped[..n - 1].to_vec();
            lookup.sort();
            lookup.push(swapped[n - 1]);
            if !settled.contains(&lookup) {
                continue;
            }
            let mut lab2 = labels.clone();
            lab2[n - 2] = mu.clone();
            let derived = alg.bracket_with_labels(&swapped, &lab2).neg();
            alg.set_bracket(key, derived)
                .map_err(|err| file_err(format!("completion produced an invalid entry: {}", err)))?;
            settled.insert(key.clone());
            progress = true;
        }
        if !progress {
            return Ok(());
        }
    }
}

/// Canonical text for a presentation; `parse_algebra` reads it back
/// verbatim (the table is stored as written, with completion disabled).
pub fn render_algebra(alg: &NlcaPresentation) -> String {
    let names = alg.names();
    let mut out = String::new();
    out.push_str("[algebra]\n");
    out.push_str(&format!("n = {}\n", alg.n()));
    out.push_str(&format!("generators = {}\n", names.join(", ")));
    out.push_str("complete = none\n");
    out.push_str("\n[brackets]\n");
    for (key, value) in alg.table() {
        let tuple: Vec<&str> = key.iter().map(|g| names[g.0].as_str()).collect();
        out.push_str(&format!("[{}] = {}\n", tuple.join(" "), value.render(names)));
    }
    out
}

// ---------------------------------------------------------------------------
// Module files.

/// Reads a module file against the algebra it acts under.
pub fn parse_module(
    text: &str,
    alg: &NlcaPresentation,
) -> Result<ConformalModule, FormatError> {
    let doc = Document::scan(text, &["module", "actions"])?;
    if !doc.has("module") {
        return Err(file_err("missing [module] section"));
    }
    let head = scalar_entries(doc.entries("module"), &["builder", "generators"])?;
    let builder = match head.get("builder") {
        Some(e) => Some((ident_value(e)?, e.line)),
        None => None,
    };
    match builder.as_ref().map(|(b, l)| (b.as_str(), *l)) {
        Some(("adjoint", line)) => {
            if let Some(e) = head.get("generators") {
                return Err(entry_err(
                    e.line,
                    "key `generators` does not apply to `builder = adjoint`",
                ));
            }
            if doc.has("actions") {
                return Err(entry_err(line, "section [actions] does not apply to builders"));
            }
            Ok(adjoint_module(alg))
        }
        Some(("trivial", line)) => {
            if doc.has("actions") {
                return Err(entry_err(line, "section [actions] does not apply to builders"));
            }
            let gen_entry = head
                .get("generators")
                .ok_or_else(|| file_err("missing key `generators` in [module]"))?;
            let names = name_list_value(gen_entry)?;
            trivial_module(alg, names).map_err(|err| entry_err(gen_entry.line, err.to_string()))
        }
        Some((other, line)) => Err(entry_err(
            line,
            format!("unknown builder `{}` (adjoint, trivial)", other),
        )),
        None => {
            let gen_entry = head
                .get("generators")
                .ok_or_else(|| file_err("missing key `generators` in [module]"))?;
            let names = name_list_value(gen_entry)?;
            let mut module = ConformalModule::new(alg, names.clone())
                .map_err(|err| entry_err(gen_entry.line, err.to_string()))?;
            let alg_gens = name_map(alg.names());
            let mod_gens = name_map(&names);
            let mut seen: BTreeSet<(Vec<GeneratorId>, GeneratorId)> = BTreeSet::new();
            for e in doc.entries("actions") {
                let mut k = e.key_cursor();
                k.expect('[')?;
                let mut tuple = Vec::new();
                loop {
                    k.skip_ws();
                    if k.peek() == Some(';') {
                        break;
                    }
                    if k.peek() == Some(']') {
                        return Err(k.err("expected `;` and a module generator"));
                    }
                    tuple.push(resolve_gen(&mut k, &alg_gens, "generator")?);
                }
                k.expect(';')?;
                let target = resolve_gen(&mut k, &mod_gens, "module generator")?;
                k.expect(']')?;
                k.expect_end()?;
                let value = vector_value(e, &mod_gens, "action")?;
                module
                    .set_action(&tuple, target, value)
                    .map_err(|err| entry_err(e.line, err.to_string()))?;
                if !seen.insert((tuple, target)) {
                    return Err(entry_err(e.line, "duplicate action entry"));
                }
            }
            Ok(module)
        }
    }
}

/// A value required to be a combination of module generators (or zero).
fn vector_value(
    e: &Entry,
    gens: &BTreeMap<String, GeneratorId>,
    what: &str,
) -> Result<PolyValue, FormatError> {
    let val = expr_value(e, gens)?;
    if !val.scalar.is_zero() {
        return Err(entry_err(
            e.line,
            format!("{} values are combinations of module generators", what),
        ));
    }
    Ok(val.vector)
}

/// Canonical text for a module; `parse_module` reads it back verbatim.
pub fn render_module(m: &ConformalModule) -> String {
    let alg_names = m.algebra_names();
    let names = m.names();
    let mut out = String::new();
    out.push_str("[module]\n");
    out.push_str(&format!("generators = {}\n", names.join(", ")));
    out.push_str("\n[actions]\n");
    for (tuple, target, value) in m.table() {
        let parts: Vec<&str> = tuple.iter().map(|g| alg_names[g.0].as_str()).collect();
        out.push_str(&format!(
            "[{}; {}] = {}\n",
            parts.join(" "),
            names[target.0],
            value.render(names)
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Cochain files.

/// Reads a cochain file against its algebra and coefficient module.
pub fn parse_cochain(
    text: &str,
    alg: &NlcaPresentation,
    module: &ConformalModule,
) -> Result<Cochain, FormatError> {
    let doc = Document::scan(text, &["cochain", "values"])?;
    if !doc.has("cochain") {
        return Err(file_err("missing [cochain] section"));
    }
    let head = scalar_entries(doc.entries("cochain"), &["q"])?;
    let q_entry = head
        .get("q")
        .ok_or_else(|| file_err("missing key `q` in [cochain]"))?;
    let q = int_value(q_entry)?;
    let mut cochain =
        Cochain::new(q, alg, module).map_err(|err| entry_err(q_entry.line, err.to_string()))?;
    let alg_gens = name_map(alg.names());
    let mod_gens = name_map(module.names());
    let mut seen: BTreeSet<(Vec<Vec<GeneratorId>>, GeneratorId)> = BTreeSet::new();
    for e in doc.entries("values") {
        let mut k = e.key_cursor();
        k.expect('[')?;
        let mut blocks = Vec::new();
        loop {
            k.skip_ws();
            if k.peek() != Some('(') {
                break;
            }
            k.pos += 1;
            let mut block = Vec::new();
            loop {
                k.skip_ws();
                if k.eat(')') {
                    break;
                }
                block.push(resolve_gen(&mut k, &alg_gens, "generator")?);
            }
            blocks.push(block);
        }
        k.skip_ws();
        if k.peek() == Some(';') {
            k.pos += 1;
        } else if !blocks.is_empty() {
            return Err(k.err("expected `;` before the final generator"));
        }
        let last = resolve_gen(&mut k, &alg_gens, "generator")?;
        k.expect(']')?;
        k.expect_end()?;
        let value = vector_value(e, &mod_gens, "cochain")?;
        cochain
            .set_value(&blocks, last, value)
            .map_err(|err| entry_err(e.line, err.to_string()))?;
        if !seen.insert((blocks, last)) {
            return Err(entry_err(e.line, "duplicate cochain entry"));
        }
    }
    Ok(cochain)
}

/// Canonical text for a cochain; `parse_cochain` reads it back verbatim.
pub fn render_cochain(c: &Cochain) -> String {
    let alg_names = c.algebra_names();
    let mod_names = c.module_names();
    let mut out = String::new();
    out.push_str("[cochain]\n");
    out.push_str(&format!("q = {}\n", c.degree()));
    out.push_str("\n[values]\n");
    for (blocks, last, value) in c.entries() {
        let mut key = String::from("[");
        for (i, block) in blocks.iter().enumerate() {
            if i > 0 {
                key.push(' ');
            }
            let parts: Vec<&str> = block.iter().map(|g| alg_names[g.0].as_str()).collect();
            key.push_str(&format!("({})", parts.join(" ")));
        }
        if !blocks.is_empty() {
            key.push_str("; ");
        }
        key.push_str(alg_names[last.0].as_str());
        key.push(']');
        out.push_str(&format!("{} = {}\n", key, value.render(mod_names)));
    }
    out
}

// ---------------------------------------------------------------------------
// Report rendering.

/// Human-readable report: one header line, then one line per recorded
/// counterexample. Byte-identical for identical inputs.
pub fn render_report(rep: &CheckReport) -> String {
    let mut out = String::new();
    if rep.passed() {
        out.push_str(&format!("{}: pass\n", rep.name));
        return out;
    }
    let plural = if rep.failure_count == 1 { "" } else { "s" };
    out.push_str(&format!(
        "{}: FAIL ({} counterexample{})\n",
        rep.name, rep.failure_count, plural
    ));
    for f in &rep.failures {
        out.push_str(&format!(
            "  {} at {}: residual {}\n",
            f.equation, f.tuple, f.residual
        ));
    }
    if rep.failure_count > rep.failures.len() {
        out.push_str(&format!(
            "  ... and {} more\n",
            rep.failure_count - rep.failures.len()
        ));
    }
    out
}

/// Machine form: tab-separated `key=value` fields in a fixed order, one
/// record per line. The first record summarizes the check; each recorded
/// counterexample follows as its own record.
pub fn render_report_machine(rep: &CheckReport) -> String {
    let status = if rep.passed() { "pass" } else { "fail" };
    let mut out = format!(
        "check={}\tstatus={}\tfailures={}\n",
        rep.name, status, rep.failure_count
    );
    for f in &rep.failures {
        out.push_str(&format!(
            "fail={}\tequation={}\ttuple={}\tresidual={}\n",
            rep.name, f.equation, f.tuple, f.residual
        ));
    }
    out
}

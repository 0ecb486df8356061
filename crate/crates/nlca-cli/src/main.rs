//! Command-line front end: axiom checks on algebra files, bracket and
//! product evaluation, annihilation and cochain suites, and the quadruple
//! test for antisymmetric matrices.
//!
//! Exit codes: 0 all requested checks pass, 1 a check fails mathematically,
//! 2 usage error, 3 file or parse error.

use clap::{Parser, Subcommand};
use nlca_core::combi::{cartesian, multi_indices};
use nlca_core::{
    adjoint_module, ann_basis_bracket, ann_bracket, ann_cochain_partial, check_ann_filippov,
    check_reconstruction, cochain_differential, dti_action, nlie_cochain_differential,
    parse_algebra, parse_cochain, parse_module, partial_action, partial_on_cochain, phi_map,
    plucker_check, pseudo_translate, random_cochain, rat, ratio, render_report,
    render_report_machine,
    AnnElement, AnnGenerator, CheckReport, Cochain, ConformalModule, GeneratorId,
    NlcaPresentation, Rational, SeededRng,
};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_MATH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nlca",
    version,
    about = "Exact checks and evaluations for finite n-Lie conformal algebras"
)]
struct Cli {
    /// Emit one tab-separated key=value record per check instead of prose.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the axiom suite on an algebra file; add module axioms with --module.
    Check {
        /// Algebra file.
        file: PathBuf,
        /// Module file checked over the same algebra.
        #[arg(long)]
        module: Option<PathBuf>,
    },
    /// Evaluate one bracket, with polynomial labels or at explicit indices.
    Bracket {
        /// Algebra file.
        file: PathBuf,
        /// Comma-separated generator names, one per slot.
        #[arg(long)]
        tuple: String,
        /// Semicolon-separated index vectors (one per argument, entries
        /// comma-separated); switches to the annihilation bracket.
        #[arg(long)]
        indices: Option<String>,
        /// Number of expansion indeterminates for --indices.
        #[arg(short = 'p', long, default_value_t = 1)]
        level: usize,
    },
    /// Extract the coefficient product of a bracket at given label exponents.
    Kprod {
        /// Algebra file.
        file: PathBuf,
        /// Comma-separated generator names, one per slot.
        #[arg(long)]
        tuple: String,
        /// Comma-separated exponents, one per label slot.
        #[arg(short = 'k', long)]
        exponents: String,
    },
    /// Run the annihilation suite over a bounded index window: product rules
    /// for the translation operators, skew and Filippov identities, and the
    /// coefficient reconstruction of the bracket.
    Annihilate {
        /// Algebra file.
        file: PathBuf,
        /// Number of expansion indeterminates.
        #[arg(short = 'p', long, default_value_t = 1)]
        level: usize,
        /// Largest index total in the window.
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
    },
    /// Check the cochain differential at a given degree: it computes, squares
    /// to zero, and commutes with the translation action.
    Cohomology {
        /// Algebra file; coefficients are its adjoint module.
        file: PathBuf,
        /// Cochain degree.
        #[arg(short = 'q', long, default_value_t = 1)]
        degree: usize,
        /// Explicit cochain file; otherwise seeded random cochains are drawn.
        #[arg(long)]
        cochain: Option<PathBuf>,
        /// Number of random cochains when no file is given.
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Largest label degree of random cochain values.
        #[arg(long, default_value_t = 2)]
        lambda_degree: u32,
        /// Random seed.
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Compare the cochain differential with its coefficient-level
    /// counterpart through the index-expansion map.
    Phi {
        /// Algebra file; coefficients are its adjoint module.
        file: PathBuf,
        /// Number of expansion indeterminates.
        #[arg(short = 'p', long, default_value_t = 1)]
        level: usize,
        /// Cochain degree.
        #[arg(short = 'q', long, default_value_t = 1)]
        degree: usize,
        /// Largest joint index total over all arguments.
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
        /// Largest label degree of the random cochain.
        #[arg(long, default_value_t = 2)]
        lambda_degree: u32,
        /// Random seed.
        #[arg(long, default_value_t = 0x9e11)]
        seed: u64,
    },
    /// Check the quadruple constraints of an antisymmetric matrix.
    Plucker {
        /// Matrix order.
        #[arg(long, conflicts_with = "matrix")]
        size: Option<usize>,
        /// Matrix order written as NxN.
        #[arg(long)]
        matrix: Option<String>,
        /// Entries above the diagonal, "i,j=value" joined by ';'.
        #[arg(long, default_value = "")]
        entries: String,
    },
    /// Print the expansion-variable form of every stored bracket.
    Pseudo {
        /// Algebra file.
        file: PathBuf,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn file(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_MATH),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let machine = cli.machine;
    match cli.command {
        Command::Check { file, module } => cmd_check(&file, module.as_deref(), machine),
        Command::Bracket {
            file,
            tuple,
            indices,
            level,
        } => cmd_bracket(&file, &tuple, indices.as_deref(), level, machine),
        Command::Kprod {
            file,
            tuple,
            exponents,
        } => cmd_kprod(&file, &tuple, &exponents, machine),
        Command::Annihilate {
            file,
            level,
            max_degree,
        } => cmd_annihilate(&file, level, max_degree, machine),
        Command::Cohomology {
            file,
            degree,
            cochain,
            trials,
            lambda_degree,
            seed,
        } => cmd_cohomology(
            &file,
            degree,
            cochain.as_deref(),
            trials,
            lambda_degree,
            seed,
            machine,
        ),
        Command::Phi {
            file,
            level,
            degree,
            max_degree,
            lambda_degree,
            seed,
        } => cmd_phi(&file, level, degree, max_degree, lambda_degree, seed, machine),
        Command::Plucker {
            size,
            matrix,
            entries,
        } => cmd_plucker(size, matrix.as_deref(), &entries, machine),
        Command::Pseudo { file } => cmd_pseudo(&file, machine),
    }
}

fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::file(format!("{}: {e}", path.display())))
}

fn load_algebra(path: &std::path::Path) -> Result<NlcaPresentation, CliError> {
    let text = read_file(path)?;
    parse_algebra(&text).map_err(|e| CliError::file(format!("{}: {e}", path.display())))
}

fn parse_tuple(alg: &NlcaPresentation, s: &str) -> Result<Vec<GeneratorId>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let name = part.trim();
        let g = alg
            .gen_by_name(name)
            .ok_or_else(|| CliError::usage(format!("unknown generator `{name}`")))?;
        out.push(g);
    }
    if out.len() != alg.n() {
        return Err(CliError::usage(format!(
            "expected {} tuple entries, got {}",
            alg.n(),
            out.len()
        )));
    }
    Ok(out)
}

fn emit(rep: &CheckReport, machine: bool, ok: &mut bool) {
    if machine {
        print!("{}", render_report_machine(rep));
    } else {
        print!("{}", render_report(rep));
    }
    *ok &= rep.passed();
}

fn cmd_check(
    file: &std::path::Path,
    module: Option<&std::path::Path>,
    machine: bool,
) -> Result<bool, CliError> {
    let alg = load_algebra(file)?;
    let mut ok = true;
    for rep in alg.check_axioms() {
        emit(&rep, machine, &mut ok);
    }
    if let Some(mpath) = module {
        let text = read_file(mpath)?;
        let m = parse_module(&text, &alg)
            .map_err(|e| CliError::file(format!("{}: {e}", mpath.display())))?;
        for rep in m.check_axioms(&alg) {
            emit(&rep, machine, &mut ok);
        }
    }
    Ok(ok)
}

fn cmd_bracket(
    file: &std::path::Path,
    tuple: &str,
    indices: Option<&str>,
    p: usize,
    machine: bool,
) -> Result<bool, CliError> {
    let alg = load_algebra(file)?;
    let ids = parse_tuple(&alg, tuple)?;
    match indices {
        None => {
            let value = alg.bracket(&ids);
            let rendered = value.render(alg.names());
            if machine {
                println!("tuple={tuple}\tvalue={rendered}");
            } else {
                println!("{} = {rendered}", alg.render_tuple(&ids));
            }
        }
        Some(spec) => {
            if p == 0 {
                return Err(CliError::usage("level must be at least 1"));
            }
            let index_vectors = parse_index_vectors(spec, alg.n(), p)?;
            let args: Vec<AnnGenerator> = ids
                .iter()
                .zip(&index_vectors)
                .map(|(&g, m)| AnnGenerator::new(g, m.clone()))
                .collect();
            let value = ann_basis_bracket(&alg, p, &args)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let rendered = value.render(alg.names());
            let shown: Vec<String> = args.iter().map(|a| a.render(alg.names())).collect();
            if machine {
                println!("tuple={tuple}\tindices={spec}\tvalue={rendered}");
            } else {
                println!("[{}] = {rendered}", shown.join(" "));
            }
        }
    }
    Ok(true)
}

fn parse_index_vectors(spec: &str, n: usize, p: usize) -> Result<Vec<Vec<u32>>, CliError> {
    let parts: Vec<&str> = spec.split(';').collect();
    if parts.len() != n {
        return Err(CliError::usage(format!(
            "expected {n} index vectors, got {}",
            parts.len()
        )));
    }
    let mut out = Vec::new();
    for part in parts {
        let mut m = Vec::new();
        for entry in part.split(',') {
            let v: u32 = entry
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad index entry `{}`", entry.trim())))?;
            m.push(v);
        }
        if m.len() != p {
            return Err(CliError::usage(format!(
                "expected {p} components per index, got {}",
                m.len()
            )));
        }
        out.push(m);
    }
    Ok(out)
}

fn cmd_kprod(
    file: &std::path::Path,
    tuple: &str,
    exponents: &str,
    machine: bool,
) -> Result<bool, CliError> {
    let alg = load_algebra(file)?;
    let ids = parse_tuple(&alg, tuple)?;
    let mut k = Vec::new();
    for part in exponents.split(',') {
        let v: u32 = part
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad exponent `{}`", part.trim())))?;
        k.push(v);
    }
    if k.len() != alg.n() - 1 {
        return Err(CliError::usage(format!(
            "expected {} exponents, got {}",
            alg.n() - 1,
            k.len()
        )));
    }
    let elem = alg
        .k_product(&ids, &k)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let rendered = elem.render(alg.names());
    if machine {
        println!("tuple={tuple}\tk={exponents}\tvalue={rendered}");
    } else {
        println!("{} at ({exponents}) = {rendered}", alg.render_tuple(&ids));
    }
    Ok(true)
}

fn window_symbols(alg: &NlcaPresentation, p: usize, max_total: u32) -> Vec<AnnGenerator> {
    let mut out = Vec::new();
    for g in alg.generators() {
        for m in multi_indices(p, max_total) {
            out.push(AnnGenerator::new(g, m));
        }
    }
    out
}

fn render_args(args: &[AnnGenerator], names: &[String]) -> String {
    let shown: Vec<String> = args.iter().map(|a| a.render(names)).collect();
    shown.join(" ")
}

fn cmd_annihilate(
    file: &std::path::Path,
    p: usize,
    max_degree: u32,
    machine: bool,
) -> Result<bool, CliError> {
    if p == 0 {
        return Err(CliError::usage("level must be at least 1"));
    }
    let alg = load_algebra(file)?;
    let names = alg.names();
    let symbols = window_symbols(&alg, p, max_degree);

    let mut partial_rule = CheckReport::pass("partial-leibniz");
    let mut lowering_rule = CheckReport::pass("lowering-leibniz");
    for ids in cartesian(symbols.len(), alg.n()) {
        let args: Vec<AnnGenerator> = ids.iter().map(|&i| symbols[i].clone()).collect();
        let whole = ann_basis_bracket(&alg, p, &args).expect("window symbols are valid");
        for dir in 0..=p {
            let act = |x: &AnnElement| -> AnnElement {
                if dir == 0 {
                    partial_action(p, x).expect("level matches")
                } else {
                    dti_action(p, dir, x).expect("direction in range")
                }
            };
            let lhs = act(&whole);
            let mut rhs = AnnElement::zero();
            for s in 0..alg.n() {
                let mut moved: Vec<AnnElement> = args
                    .iter()
                    .map(|a| AnnElement::basis(a.gen, a.m.clone()))
                    .collect();
                moved[s] = act(&moved[s]);
                rhs = rhs.add(&ann_bracket(&alg, p, &moved).expect("valid window"));
            }
            if lhs != rhs {
                let diff = lhs.sub(&rhs);
                let target = if dir == 0 {
                    &mut partial_rule
                } else {
                    &mut lowering_rule
                };
                let equation = if dir == 0 {
                    "partial-leibniz".to_string()
                } else {
                    format!("dt{dir}-leibniz")
                };
                target.record(render_args(&args, names), &equation, diff.render(names));
            }
        }
    }

    let window = check_ann_filippov(&alg, p, max_degree);

    let mut reconstruction = CheckReport::pass("reconstruction");
    let indices = multi_indices(p, max_degree);
    for raw in cartesian(alg.num_generators(), alg.n()) {
        let tuple: Vec<GeneratorId> = raw.into_iter().map(GeneratorId).collect();
        for pick in cartesian(indices.len(), alg.n()) {
            let chosen: Vec<Vec<u32>> = pick.iter().map(|&i| indices[i].clone()).collect();
            let rep =
                check_reconstruction(&alg, p, &tuple, &chosen).expect("window tuples are valid");
            reconstruction.absorb(rep);
        }
    }

    let mut ok = true;
    emit(&partial_rule, machine, &mut ok);
    emit(&lowering_rule, machine, &mut ok);
    emit(&window, machine, &mut ok);
    emit(&reconstruction, machine, &mut ok);
    Ok(ok)
}

fn render_cochain_key(
    alg: &NlcaPresentation,
    blocks: &[Vec<GeneratorId>],
    last: GeneratorId,
) -> String {
    let name = |g: GeneratorId| alg.gen_name(g).to_string();
    if blocks.is_empty() {
        return format!("[{}]", name(last));
    }
    let shown: Vec<String> = blocks
        .iter()
        .map(|b| {
            let inner: Vec<String> = b.iter().map(|&g| name(g)).collect();
            format!("({})", inner.join(" "))
        })
        .collect();
    format!("[{}; {}]", shown.join(" "), name(last))
}

fn record_nonzero_entries(
    rep: &mut CheckReport,
    equation: &str,
    context: &str,
    alg: &NlcaPresentation,
    module: &ConformalModule,
    cochain: &Cochain,
) {
    for (blocks, last, v) in cochain.entries() {
        if v.is_zero() {
            continue;
        }
        rep.record(
            format!("{context} {}", render_cochain_key(alg, blocks, last)),
            equation,
            v.render(module.names()),
        );
    }
}

fn cmd_cohomology(
    file: &std::path::Path,
    q: usize,
    cochain: Option<&std::path::Path>,
    trials: usize,
    lambda_degree: u32,
    seed: u64,
    machine: bool,
) -> Result<bool, CliError> {
    let alg = load_algebra(file)?;
    let m = adjoint_module(&alg);

    let mut cochains: Vec<(String, Cochain)> = Vec::new();
    match cochain {
        Some(cpath) => {
            let text = read_file(cpath)?;
            let gamma = parse_cochain(&text, &alg, &m)
                .map_err(|e| CliError::file(format!("{}: {e}", cpath.display())))?;
            if gamma.degree() != q {
                return Err(CliError::usage(format!(
                    "cochain file has degree {}, requested {q}",
                    gamma.degree()
                )));
            }
            cochains.push(("file".to_string(), gamma));
        }
        None => {
            let mut rng = SeededRng::new(seed);
            for t in 0..trials {
                let gamma = random_cochain(&alg, &m, q, lambda_degree, 3, &mut rng)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                cochains.push((format!("trial {t}"), gamma));
            }
        }
    }

    let mut closure = CheckReport::pass("differential");
    let mut square = CheckReport::pass("differential-squared");
    let mut translation = CheckReport::pass("differential-partial");
    for (context, gamma) in &cochains {
        let d1 = match cochain_differential(gamma, &alg, &m) {
            Ok(d1) => d1,
            Err(e) => {
                closure.record(context.clone(), "closure", e.to_string());
                continue;
            }
        };
        match cochain_differential(&d1, &alg, &m) {
            Ok(d2) => {
                record_nonzero_entries(&mut square, "d-squared", context, &alg, &m, &d2);
            }
            Err(e) => square.record(context.clone(), "closure", e.to_string()),
        }
        let shifted = cochain_differential(&partial_on_cochain(gamma), &alg, &m)
            .map_err(|e| CliError::usage(e.to_string()))?;
        let commuted = partial_on_cochain(&d1);
        let diff = shifted
            .sub(&commuted)
            .map_err(|e| CliError::usage(e.to_string()))?;
        record_nonzero_entries(&mut translation, "d-partial", context, &alg, &m, &diff);
    }

    let mut ok = true;
    emit(&closure, machine, &mut ok);
    emit(&square, machine, &mut ok);
    emit(&translation, machine, &mut ok);
    Ok(ok)
}

/// Non-decreasing generator tuples of the given length, as id vectors.
fn sorted_blocks(gens: usize, len: usize) -> Vec<Vec<usize>> {
    cartesian(gens, len)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[0] <= w[1]))
        .collect()
}

fn cmd_phi(
    file: &std::path::Path,
    p: usize,
    q: usize,
    max_degree: u32,
    lambda_degree: u32,
    seed: u64,
    machine: bool,
) -> Result<bool, CliError> {
    if p == 0 {
        return Err(CliError::usage("level must be at least 1"));
    }
    let alg = load_algebra(file)?;
    let m = adjoint_module(&alg);
    let mut rng = SeededRng::new(seed);
    let gamma = random_cochain(&alg, &m, q, lambda_degree, 3, &mut rng)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let d = cochain_differential(&gamma, &alg, &m).map_err(|e| CliError::usage(e.to_string()))?;
    let shifted = partial_on_cochain(&gamma);
    let phi_gamma =
        |bs: &[Vec<AnnGenerator>], l: &AnnGenerator| phi_map(&gamma, p, bs, l);
    let names = m.names();

    let mut intertwine = CheckReport::pass("comparison-differential");
    for_each_window(&alg, p, q, max_degree, |blocks, fin| {
        let left = phi_map(&d, p, blocks, fin).expect("window arguments are valid");
        let right = nlie_cochain_differential(&alg, &m, p, q, &phi_gamma, blocks, fin)
            .expect("window arguments are valid");
        if left != right {
            let flat: Vec<AnnGenerator> = blocks
                .iter()
                .flatten()
                .cloned()
                .chain(std::iter::once(fin.clone()))
                .collect();
            let residual = left.as_value().sub(right.as_value());
            intertwine.record(
                render_args(&flat, alg.names()),
                "phi-differential",
                residual.render(names),
            );
        }
    });

    let mut commute = CheckReport::pass("comparison-partial");
    for_each_window(&alg, p, q - 1, max_degree, |blocks, fin| {
        let left = phi_map(&shifted, p, blocks, fin).expect("window arguments are valid");
        let right = ann_cochain_partial(p, q, &phi_gamma, blocks, fin)
            .expect("window arguments are valid");
        if left != right {
            let flat: Vec<AnnGenerator> = blocks
                .iter()
                .flatten()
                .cloned()
                .chain(std::iter::once(fin.clone()))
                .collect();
            let residual = left.as_value().sub(right.as_value());
            commute.record(
                render_args(&flat, alg.names()),
                "phi-partial",
                residual.render(names),
            );
        }
    });

    let mut ok = true;
    emit(&intertwine, machine, &mut ok);
    emit(&commute, machine, &mut ok);
    Ok(ok)
}

/// Visit every argument window with `nblocks` sorted generator blocks plus a
/// final generator, over all joint index choices with the given total bound.
fn for_each_window(
    alg: &NlcaPresentation,
    p: usize,
    nblocks: usize,
    max_degree: u32,
    mut visit: impl FnMut(&[Vec<AnnGenerator>], &AnnGenerator),
) {
    let block_len = alg.n() - 1;
    let gens = alg.num_generators();
    let blocks_pool = sorted_blocks(gens, block_len);
    let positions = nblocks * block_len + 1;
    let joint = multi_indices(positions * p, max_degree);
    for picks in cartesian(blocks_pool.len(), nblocks) {
        for w in 0..gens {
            for ks in &joint {
                let chunks: Vec<Vec<u32>> = ks.chunks(p).map(|c| c.to_vec()).collect();
                let mut blocks: Vec<Vec<AnnGenerator>> = Vec::new();
                let mut pos = 0;
                for &b in &picks {
                    let block: Vec<AnnGenerator> = blocks_pool[b]
                        .iter()
                        .map(|&g| {
                            let a = AnnGenerator::new(GeneratorId(g), chunks[pos].clone());
                            pos += 1;
                            a
                        })
                        .collect();
                    blocks.push(block);
                }
                let fin = AnnGenerator::new(GeneratorId(w), chunks[pos].clone());
                visit(&blocks, &fin);
            }
        }
    }
}

fn parse_order(size: Option<usize>, matrix: Option<&str>) -> Result<usize, CliError> {
    match (size, matrix) {
        (Some(n), None) => Ok(n),
        (None, Some(spec)) => {
            let parts: Vec<&str> = spec.split('x').collect();
            if parts.len() != 2 {
                return Err(CliError::usage(format!("bad matrix shape `{spec}`")));
            }
            let rows: usize = parts[0]
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad matrix shape `{spec}`")))?;
            let cols: usize = parts[1]
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad matrix shape `{spec}`")))?;
            if rows != cols {
                return Err(CliError::usage("matrix must be square"));
            }
            Ok(rows)
        }
        (None, None) => Err(CliError::usage("one of --size or --matrix is required")),
        (Some(_), Some(_)) => Err(CliError::usage("--size conflicts with --matrix")),
    }
}

fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::usage(format!("bad rational `{s}`"));
    let parts: Vec<&str> = s.split('/').collect();
    match parts.as_slice() {
        [num] => {
            let p: i64 = num.trim().parse().map_err(|_| bad())?;
            Ok(ratio(p, 1))
        }
        [num, den] => {
            let p: i64 = num.trim().parse().map_err(|_| bad())?;
            let q: i64 = den.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(CliError::usage(format!("zero denominator in `{s}`")));
            }
            Ok(ratio(p, q))
        }
        _ => Err(bad()),
    }
}

fn cmd_plucker(
    size: Option<usize>,
    matrix: Option<&str>,
    entries: &str,
    machine: bool,
) -> Result<bool, CliError> {
    let order = parse_order(size, matrix)?;
    let mut a = vec![vec![rat(0); order]; order];
    let mut seen = std::collections::BTreeSet::new();
    for item in entries.split(';') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (pos, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("bad entry `{item}`")))?;
        let (i, j) = pos
            .split_once(',')
            .ok_or_else(|| CliError::usage(format!("bad entry position `{pos}`")))?;
        let i: usize = i
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad entry position `{pos}`")))?;
        let j: usize = j
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad entry position `{pos}`")))?;
        if i >= order || j >= order {
            return Err(CliError::usage(format!(
                "entry ({i},{j}) outside a {order}x{order} matrix"
            )));
        }
        if i == j {
            return Err(CliError::usage(
                "diagonal entries of an antisymmetric matrix are zero",
            ));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(CliError::usage(format!("entry ({i},{j}) given twice")));
        }
        let v = parse_rational(value.trim())?;
        a[i][j] = v.clone();
        a[j][i] = -v;
    }
    let rep = plucker_check(&a).map_err(|e| CliError::usage(e.to_string()))?;
    let mut ok = true;
    emit(&rep, machine, &mut ok);
    Ok(ok)
}

fn cmd_pseudo(file: &std::path::Path, machine: bool) -> Result<bool, CliError> {
    let alg = load_algebra(file)?;
    let table = pseudo_translate(&alg);
    for line in table.render_lines() {
        if machine {
            println!("entry={line}");
        } else {
            println!("{line}");
        }
    }
    Ok(true)
}

//! Heavier module and operator suites: the semidirect presentation over the
//! four-generator current algebra, windowed divided-action representations,
//! and derivation checks with randomized inputs.

use nlca_core::{
    adjoint_module, cend_bracket, check_ann_rep, check_derivation, current_algebra,
    inner_derivation, rank2_family_ii, semidirect_sum, simple_3lie, slot_var, CendOperator,
    ConformalElement, GeneratorId, MultiPoly, NlcaPresentation, PolyValue, SeededRng, VarId,
};

fn cur_simple3() -> NlcaPresentation {
    current_algebra(&simple_3lie()).expect("valid structure constants")
}

fn rank2_ii_linear() -> NlcaPresentation {
    let h = MultiPoly::var(slot_var(1)).sub(&MultiPoly::var(slot_var(2)));
    rank2_family_ii(3, &h).expect("valid skew parameter")
}

fn random_element(rng: &mut SeededRng, gens: usize) -> ConformalElement {
    let mut v = PolyValue::zero();
    for g in 0..gens {
        if rng.chance(2, 3) {
            v = v.add(&PolyValue::term(
                GeneratorId(g),
                rng.poly(&[VarId::Partial], 2, 3),
            ));
        }
    }
    ConformalElement::new(v).expect("d-only coefficients")
}

#[test]
fn semidirect_current_adjoint_passes_axioms() {
    let alg = cur_simple3();
    let m = adjoint_module(&alg);
    let joined = semidirect_sum(&alg, &m).expect("adjoint module satisfies the axioms");
    assert_eq!(joined.num_generators(), 8);
    for report in joined.check_axioms() {
        assert!(report.passed(), "{}: {:?}", report.name, report.failures);
    }
    // The moved-entry block: one module generator inside the leading slots.
    let mixed = joined.bracket(&[GeneratorId(0), GeneratorId(6), GeneratorId(1)]);
    assert!(!mixed.is_zero());
    // It agrees with minus the skew-moved action of (e1, e2) on e3'.
    let direct = joined.bracket(&[GeneratorId(0), GeneratorId(1), GeneratorId(6)]);
    let moved = MultiPoly::partial()
        .add(&MultiPoly::var(slot_var(1)))
        .add(&MultiPoly::var(slot_var(2)))
        .neg();
    let swap = [(slot_var(2), moved)].into_iter().collect();
    assert_eq!(mixed, direct.substitute_all(&swap).neg());
}

#[test]
fn divided_action_represents_current_adjoint() {
    let alg = cur_simple3();
    let m = adjoint_module(&alg);
    let report = check_ann_rep(&m, &alg, 1, 1);
    assert!(report.passed(), "{:?}", report.failures);
    let report = check_ann_rep(&m, &alg, 2, 1);
    assert!(report.passed(), "{:?}", report.failures);
}

#[test]
fn divided_action_represents_rank2_adjoint_deeper() {
    let alg = rank2_ii_linear();
    let m = adjoint_module(&alg);
    for p in [1, 2] {
        let report = check_ann_rep(&m, &alg, p, 2);
        assert!(report.passed(), "p={p}: {:?}", report.failures);
    }
}

#[test]
fn random_inner_derivations_satisfy_leibniz() {
    let mut rng = SeededRng::new(0x5eed_1e1b);
    for alg in [cur_simple3(), rank2_ii_linear()] {
        for _ in 0..3 {
            let args = [
                random_element(&mut rng, alg.num_generators()),
                random_element(&mut rng, alg.num_generators()),
            ];
            let f = inner_derivation(&alg, &args, 2).expect("valid arguments");
            let report = check_derivation(&f, &alg);
            assert!(report.passed(), "{:?}", report.failures);
        }
    }
}

#[test]
fn random_operators_generically_fail_leibniz() {
    let mut rng = SeededRng::new(0xfa11);
    let alg = cur_simple3();
    let vars = [VarId::Partial, VarId::lambda(2, 1), VarId::lambda(2, 2)];
    for _ in 0..5 {
        let images: Vec<PolyValue> = alg
            .generators()
            .map(|g| PolyValue::term(g, rng.poly(&vars, 2, 3).add(&MultiPoly::one())))
            .collect();
        let f = CendOperator::new(images, VarId::lambda(2, 2), vec![VarId::lambda(2, 1)])
            .expect("spectral labels");
        assert!(!check_derivation(&f, &alg).passed());
    }
}

#[test]
fn operator_brackets_stay_derivations() {
    let mut rng = SeededRng::new(0xb4ac);
    let alg = cur_simple3();
    for round in 0..3 {
        let f = inner_derivation(
            &alg,
            &[
                random_element(&mut rng, 4),
                random_element(&mut rng, 4),
            ],
            2,
        )
        .expect("valid arguments");
        let g = inner_derivation(
            &alg,
            &[
                random_element(&mut rng, 4),
                random_element(&mut rng, 4),
            ],
            3,
        )
        .expect("valid arguments");
        let h = cend_bracket(&f, &g, VarId::lambda(4, 1), VarId::lambda(4, 2))
            .expect("fresh variables");
        let report = check_derivation(&h, &alg);
        assert!(report.passed(), "round {round}: {:?}", report.failures);
    }
}

#[test]
fn partial_of_operator_shifts_by_minus_eval() {
    let alg = rank2_ii_linear();
    let f = inner_derivation(&alg, &[ConformalElement::from_gen(GeneratorId(0)),
        ConformalElement::from_gen(GeneratorId(1))], 2)
        .expect("valid arguments");
    let df = f.partial_action();
    assert!(check_derivation(&df, &alg).passed());
    let v = PolyValue::from_gen(GeneratorId(1));
    assert_eq!(
        df.apply(&v),
        f.apply(&v).scale_poly(&MultiPoly::var(f.eval_var()).neg())
    );
}

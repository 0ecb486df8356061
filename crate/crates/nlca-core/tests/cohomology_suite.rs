//! Cochain complex suites at scale: the differential squares to zero and
//! commutes with the d-action over the four-generator current algebra and
//! the rank-2 family, and the comparison map onto index-expanded cochains
//! is a chain map, commutes with the d-actions, and forgets nothing.

use nlca_core::combi::multi_indices;
use nlca_core::{
    adjoint_module, ann_cochain_partial, cochain_differential, current_algebra,
    nlie_cochain_differential, partial_on_cochain, phi_map, random_cochain, rank2_family_ii,
    simple_3lie, slot_var, AnnGenerator, GeneratorId, MultiPoly, NlcaPresentation, SeededRng,
};

fn cur_simple3() -> NlcaPresentation {
    current_algebra(&simple_3lie()).expect("valid structure constants")
}

fn rank2_ii_linear() -> NlcaPresentation {
    let h = MultiPoly::var(slot_var(1)).sub(&MultiPoly::var(slot_var(2)));
    rank2_family_ii(3, &h).expect("valid skew parameter")
}

#[test]
fn differential_squares_to_zero_current_adjoint() {
    let alg = cur_simple3();
    let m = adjoint_module(&alg);
    let mut rng = SeededRng::new(0xdd2_c4a);
    for (q, trials) in [(1, 2), (2, 1)] {
        for trial in 0..trials {
            let gamma = random_cochain(&alg, &m, q, 2, 3, &mut rng).unwrap();
            assert!(!gamma.is_zero(), "q={q} trial {trial} drew the zero cochain");
            let d1 = cochain_differential(&gamma, &alg, &m).unwrap();
            assert!(!d1.is_zero(), "q={q} trial {trial} has a degenerate image");
            let d2 = cochain_differential(&d1, &alg, &m).unwrap();
            assert!(d2.is_zero(), "q={q} trial {trial}");
        }
    }
}

#[test]
fn differential_squares_to_zero_rank2_adjoint() {
    let alg = rank2_ii_linear();
    let m = adjoint_module(&alg);
    let mut rng = SeededRng::new(0xdd2_122);
    for q in 1..=2 {
        for trial in 0..3 {
            let gamma = random_cochain(&alg, &m, q, 2, 3, &mut rng).unwrap();
            let d2 = cochain_differential(
                &cochain_differential(&gamma, &alg, &m).unwrap(),
                &alg,
                &m,
            )
            .unwrap();
            assert!(d2.is_zero(), "q={q} trial {trial}");
        }
    }
}

#[test]
fn differential_commutes_with_partial_action() {
    let mut rng = SeededRng::new(0xdd_9a57);
    for alg in [cur_simple3(), rank2_ii_linear()] {
        let m = adjoint_module(&alg);
        for q in 1..=2 {
            let gamma = random_cochain(&alg, &m, q, 2, 3, &mut rng).unwrap();
            let left = cochain_differential(&partial_on_cochain(&gamma), &alg, &m).unwrap();
            let right = partial_on_cochain(&cochain_differential(&gamma, &alg, &m).unwrap());
            assert_eq!(left, right, "{} generators, q={q}", alg.num_generators());
        }
    }
}

#[test]
fn comparison_map_intertwines_differentials_current() {
    let alg = cur_simple3();
    let m = adjoint_module(&alg);
    let mut rng = SeededRng::new(0xc4a1_1);
    let gamma = random_cochain(&alg, &m, 1, 2, 3, &mut rng).unwrap();
    let d = cochain_differential(&gamma, &alg, &m).unwrap();
    let phi_gamma = |bs: &[Vec<AnnGenerator>], l: &AnnGenerator| phi_map(&gamma, 1, bs, l);
    let mut nonzero = 0;
    for a in 0..alg.num_generators() {
        for b in a..alg.num_generators() {
            for w in 0..alg.num_generators() {
                for ks in multi_indices(3, 2) {
                    let block = vec![
                        AnnGenerator::new(GeneratorId(a), vec![ks[0]]),
                        AnnGenerator::new(GeneratorId(b), vec![ks[1]]),
                    ];
                    let fin = AnnGenerator::new(GeneratorId(w), vec![ks[2]]);
                    let left = phi_map(&d, 1, &[block.clone()], &fin).unwrap();
                    let right =
                        nlie_cochain_differential(&alg, &m, 1, 1, &phi_gamma, &[block], &fin)
                            .unwrap();
                    assert_eq!(left, right, "({a},{b};{w}) at {ks:?}");
                    if !left.is_zero() {
                        nonzero += 1;
                    }
                }
            }
        }
    }
    assert!(nonzero > 0, "the sweep should hit nonzero values");
    // Swapped block entries agree too: both sides flip sign together.
    let block = vec![
        AnnGenerator::new(GeneratorId(2), vec![1]),
        AnnGenerator::new(GeneratorId(0), vec![0]),
    ];
    let fin = AnnGenerator::new(GeneratorId(1), vec![1]);
    let left = phi_map(&d, 1, &[block.clone()], &fin).unwrap();
    let right =
        nlie_cochain_differential(&alg, &m, 1, 1, &phi_gamma, &[block.clone()], &fin).unwrap();
    assert_eq!(left, right);
    let sorted = vec![block[1].clone(), block[0].clone()];
    let flipped = phi_map(&d, 1, &[sorted], &fin).unwrap();
    assert_eq!(left, flipped.neg());
}

#[test]
fn comparison_map_commutes_with_partial_current() {
    let alg = cur_simple3();
    let m = adjoint_module(&alg);
    let mut rng = SeededRng::new(0x9a57_1);
    for q in 1..=2 {
        let gamma = random_cochain(&alg, &m, q, 2, 3, &mut rng).unwrap();
        let shifted = partial_on_cochain(&gamma);
        let phi_gamma = |bs: &[Vec<AnnGenerator>], l: &AnnGenerator| phi_map(&gamma, 1, bs, l);
        if q == 1 {
            for w in 0..alg.num_generators() {
                for k in 0..=2 {
                    let fin = AnnGenerator::new(GeneratorId(w), vec![k]);
                    let left = phi_map(&shifted, 1, &[], &fin).unwrap();
                    let right = ann_cochain_partial(1, 1, &phi_gamma, &[], &fin).unwrap();
                    assert_eq!(left, right, "({w}) at [{k}]");
                }
            }
        } else {
            for a in 0..alg.num_generators() {
                for b in a..alg.num_generators() {
                    for w in 0..alg.num_generators() {
                        for ks in multi_indices(3, 2) {
                            let block = vec![
                                AnnGenerator::new(GeneratorId(a), vec![ks[0]]),
                                AnnGenerator::new(GeneratorId(b), vec![ks[1]]),
                            ];
                            let fin = AnnGenerator::new(GeneratorId(w), vec![ks[2]]);
                            let left = phi_map(&shifted, 1, &[block.clone()], &fin).unwrap();
                            let right =
                                ann_cochain_partial(1, 2, &phi_gamma, &[block], &fin).unwrap();
                            assert_eq!(left, right, "({a},{b};{w}) at {ks:?}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn comparison_map_reconstructs_current_cochains() {
    use nlca_core::{factorial, rat, PolyValue};
    let alg = cur_simple3();
    let m = adjoint_module(&alg);
    let mut rng = SeededRng::new(0x1e57_1);
    let gamma = random_cochain(&alg, &m, 2, 2, 3, &mut rng).unwrap();
    let vars = gamma.label_vars();
    for (blocks, last, v) in gamma.entries() {
        let mut rebuilt = PolyValue::zero();
        for ks in multi_indices(vars.len(), 4) {
            let mut pos = 0;
            let args: Vec<Vec<AnnGenerator>> = blocks
                .iter()
                .map(|bl| {
                    bl.iter()
                        .map(|&g| {
                            pos += 1;
                            AnnGenerator::new(g, vec![ks[pos - 1]])
                        })
                        .collect()
                })
                .collect();
            let fin = AnnGenerator::new(last, vec![ks[vars.len() - 1]]);
            let piece = phi_map(&gamma, 1, &args, &fin).unwrap();
            if piece.is_zero() {
                continue;
            }
            let mut weight = MultiPoly::one();
            for (var, &k) in vars.iter().zip(&ks) {
                let inv = rat(1) / factorial(k);
                weight = weight.mul(&MultiPoly::var(*var).pow(k).scale(&inv));
            }
            rebuilt = rebuilt.add(&piece.as_value().scale_poly(&weight));
        }
        assert_eq!(&rebuilt, v, "key ({blocks:?};{last:?})");
    }
}

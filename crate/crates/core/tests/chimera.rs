use std::collections::BTreeMap;

use proptest::prelude::*;
use qbp_core::chimera::*;
use qbp_core::ldpc::ParityCheckMatrix;
use qbp_core::qubo::{assemble_objective, build_distance, build_satisfier, ObjectiveWeights, QuadraticBinaryProblem};

fn objective(h: &ParityCheckMatrix) -> QuadraticBinaryProblem {
    let (sat, plan) = build_satisfier(h).unwrap();
    let p: Vec<f64> = (0..h.num_bits()).map(|i| (i % 7) as f64 / 7.0).collect();
    let dist = build_distance(&p).unwrap();
    assemble_objective(&sat, &dist, &plan, ObjectiveWeights::new(1.0, 0.05).unwrap()).unwrap()
}

fn full16() -> (ChimeraCode, ChimeraGraph, QuadraticBinaryProblem, ChimeraEmbedding, HardwareProblem) {
    let code = ChimeraCode::build(&GridLayout::full16()).unwrap();
    let g = ChimeraGraph::new(16).unwrap();
    let problem = objective(&code.h);
    let (emb, hw) = embed_code(&problem, &code.h, &g, DEFAULT_JFERRO).unwrap();
    (code, g, problem, emb, hw)
}

fn strip(k: usize) -> (ChimeraGraph, QuadraticBinaryProblem, ChimeraEmbedding, HardwareProblem) {
    let code = ChimeraCode::build(&GridLayout::strip(k).unwrap()).unwrap();
    let g = ChimeraGraph::new(3 * k).unwrap();
    let problem = objective(&code.h);
    let (emb, hw) = embed_code(&problem, &code.h, &g, DEFAULT_JFERRO).unwrap();
    (g, problem, emb, hw)
}

/// Rows `0..m` of `h`, with bits renumbered densely.
fn first_checks(h: &ParityCheckMatrix, m: usize) -> ParityCheckMatrix {
    let rows: Vec<Vec<usize>> = (0..m).map(|c| h.check(c).to_vec()).collect();
    let mut bits: Vec<usize> = rows.iter().flatten().copied().collect();
    bits.sort_unstable();
    bits.dedup();
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|b| bits.binary_search(&b).unwrap()).collect())
        .collect();
    ParityCheckMatrix::from_checks(bits.len(), rows).unwrap()
}

#[test]
fn full_grid_code_embeds() {
    let (code, g, problem, emb, hw) = full16();
    let h = &code.h;
    assert_eq!((h.num_checks(), h.num_bits()), (280, 420));
    assert!(h.is_regular(2, 3));
    assert_eq!(emb.placement.num_level1(), 256);
    assert_eq!(emb.placement.num_level2(), 24);
    let report = verify_embedding(&emb, &problem, &g);
    assert!(report.passed(), "{:?}", report.violations);
    assert!(report.max_level1_chain <= LEVEL1_MAX_CHAIN && report.max_level2_chain <= LEVEL2_MAX_CHAIN);
    assert!(report.qubits_used <= 2048);
    assert_eq!(hw.problem.max_abs_coupler(), 1.0);
    hw.validate(&g).unwrap();
}

#[test]
fn full_grid_cell_accounting() {
    let (code, g, _, emb, _) = full16();
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (v, ch) in emb.chains.iter().enumerate() {
        for &q in ch {
            assert!(owner.insert(q, v).is_none(), "qubit {q} in two chains");
        }
    }
    let layout = realize(&code.h, &g, &emb.placement).unwrap();
    assert_eq!(layout.cells.len(), 256);
    for (&cell, lay) in &layout.cells {
        for k in lay.used() {
            assert!(owner.contains_key(&g.qubit(cell, k)), "cell {cell:?} qubit {k} unused");
        }
        let (il, ir) = lay.idle();
        for k in [il, ir] {
            if let Some(&v) = owner.get(&g.qubit(cell, k)) {
                assert!(emb.level2[v], "idle qubit {k} of {cell:?} taken by a Level-I chain");
            }
        }
    }
    assert!(owner.len() <= 2048);
}

#[test]
fn strips_embed_within_bounds() {
    for k in 2..=5 {
        let (g, problem, emb, hw) = strip(k);
        let report = verify_embedding(&emb, &problem, &g);
        assert!(report.passed(), "strip {k}: {:?}", report.violations);
        assert!(report.max_level1_chain <= LEVEL1_MAX_CHAIN && report.max_level2_chain <= LEVEL2_MAX_CHAIN);
        for (v, ch) in emb.chains.iter().enumerate() {
            assert!(ch.len() <= emb.chain_limit(v));
        }
        assert_eq!(hw.problem.max_abs_coupler(), 1.0);
    }
}

#[test]
fn single_check_uses_one_cell() {
    let h = ParityCheckMatrix::from_checks(3, vec![vec![0, 1, 2]]).unwrap();
    let g = ChimeraGraph::new(1).unwrap();
    let problem = objective(&h);
    let (emb, _) = embed_code(&problem, &h, &g, DEFAULT_JFERRO).unwrap();
    assert_eq!(emb.placement.sites, vec![Site::Cell(Cell::new(0, 0))]);
    assert_eq!(emb.qubits_used(), 6);
    assert!(verify_embedding(&emb, &problem, &g).passed());
}

#[test]
fn more_checks_than_cells_needs_level2() {
    let code = ChimeraCode::build(&GridLayout::full16()).unwrap();
    let h = first_checks(&code.h, 257);
    let g = ChimeraGraph::new(16).unwrap();
    let placement = place_checks(&h, &g).unwrap();
    assert!(placement.num_level2() >= 1);
    let problem = objective(&h);
    let (emb, _) = embed_code(&problem, &h, &g, DEFAULT_JFERRO).unwrap();
    assert!(verify_embedding(&emb, &problem, &g).passed());
}

#[test]
fn verifier_flags_broken_chains() {
    let (g, problem, emb, _) = strip(2);
    let v = emb.chains.iter().position(|c| c.len() >= 3).unwrap();

    let mut cut = emb.clone();
    let far = (0..g.num_qubits())
        .find(|q| !emb.chains.iter().flatten().any(|x| x == q) && !emb.chains[v].iter().any(|&c| g.has_coupler(c, *q)))
        .unwrap();
    let last = cut.chains[v].len() - 1;
    cut.chains[v][last] = far;
    let r = verify_embedding(&cut, &problem, &g);
    assert!(r.violations.iter().any(|x| matches!(x, Violation::Disconnected { var } if *var == v)), "{:?}", r.violations);

    let mut shared = emb.clone();
    let q = emb.chains[0][0];
    shared.chains[1].push(q);
    let r = verify_embedding(&shared, &problem, &g);
    assert!(r.violations.iter().any(|x| matches!(x, Violation::SharedQubit { qubit, .. } if *qubit == q)));
}

#[test]
fn unembed_majority_and_ties() {
    let (_, problem, emb, _) = strip(2);
    let n = emb.num_vars();
    let ising = problem.to_ising();

    let v = emb.chains.iter().position(|c| c.len() == 3).unwrap();
    let mut sample = emb.extend(&vec![-1; n]).unwrap();
    sample[emb.chains[v][0]] = 1;
    sample[emb.chains[v][1]] = 1;
    let u = unembed(&sample, &emb).unwrap();
    assert_eq!(u.spins[v], 1);
    assert_eq!(u.broken, 1);

    for (v, ch) in emb.chains.iter().enumerate().filter(|(_, c)| c.len() % 2 == 0) {
        let mut sample = emb.extend(&vec![1; n]).unwrap();
        for &q in &ch[..ch.len() / 2] {
            sample[q] = -1;
        }
        let u = unembed(&sample, &emb).unwrap();
        let h = ising.bias(v);
        let preferred = if h > 0.0 { -1 } else if h < 0.0 { 1 } else { -1 };
        assert_eq!(u.spins[v], preferred, "var {v} bias {h}");
        assert_eq!(u.broken, 1);
    }
}

#[test]
fn embedding_file_round_trip() {
    let (_, _, emb, _) = strip(2);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("emb.json");
    emb.save(&p).unwrap();
    assert_eq!(ChimeraEmbedding::load(&p).unwrap(), emb);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_uniform_energies_match(seed in any::<u64>(), k in 2usize..4) {
        let (_, problem, emb, hw) = strip(k);
        let ising = problem.to_ising();
        let spins: Vec<i8> = (0..emb.num_vars())
            .map(|i| if (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1 { 1 } else { -1 })
            .collect();
        let physical = emb.extend(&spins).unwrap();
        let logical = ising.energy(&spins).unwrap();
        let phys = hw.problem.energy(&physical).unwrap();
        prop_assert!((logical / hw.jferro + hw.chain_constant() - phys).abs() < 1e-9);
        let u = unembed(&physical, &emb).unwrap();
        prop_assert_eq!(u.spins, spins);
        prop_assert_eq!(u.broken, 0);
    }

    #[test]
    fn capacity_monotone(a in 0u64..1 << 40, d in 0u64..1000) {
        prop_assert!(capacity(a) <= capacity(a + d));
        prop_assert_eq!(u128::from(capacity(a)), u128::from(a) * 5 / 24);
    }
}

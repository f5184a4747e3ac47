mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use transtab::netred::{
    build_t1, build_t2, build_y_bus, constant_internal_admittance, expand_real_blocks, internal_bus_admittance,
    kron_reduce, rotation_block, Branch, ComplexAdmittanceMatrix, SourceImpedance, TerminalNetwork,
};
use transtab::wscc9;

use common::*;

#[test]
fn y_bus_matches_branch_current_summation() {
    let mut rng = rng(7);
    for _ in 0..20 {
        let (branches, shunts) = random_network(&mut rng, 5);
        let y = build_y_bus(&branches, &shunts, 5).unwrap();
        assert!(y.is_symmetric());
        let v = random_voltages(&mut rng, 5);
        let mut oracle = vec![Complex64::new(0.0, 0.0); 5];
        for br in &branches {
            let (f, t) = (br.from - 1, br.to - 1);
            let flow = br.admittance * (v[f] - v[t]);
            oracle[f] += flow;
            oracle[t] -= flow;
        }
        for sh in &shunts {
            oracle[sh.node - 1] += sh.admittance * v[sh.node - 1];
        }
        let injected = y.currents(&v).unwrap();
        assert!(max_abs_diff(&injected, &oracle) < 1e-12);
    }
}

#[test]
fn three_node_chain_reduction() {
    let one = Complex64::new(1.0, 0.0);
    let branches = [
        Branch {
            from: 1,
            to: 2,
            admittance: one,
        },
        Branch {
            from: 2,
            to: 3,
            admittance: one,
        },
    ];
    let y = build_y_bus(&branches, &[], 3).unwrap();
    let y_t = kron_reduce(&y, &[1, 3]).unwrap();
    // Two unit admittances in series.
    assert!((y_t.get(0, 0) - 0.5).norm() < 1e-15);
    assert!((y_t.get(0, 1) + 0.5).norm() < 1e-15);
    let v = [Complex64::new(1.0, 0.2), Complex64::new(0.7, -0.1)];
    let oracle = full_solve_currents(&to_nalgebra(&y), &[1, 3], &v);
    assert!(max_abs_diff(&y_t.currents(&v).unwrap(), &oracle) < 1e-12);
}

#[test]
fn eight_node_reduction_injection_equivalence() {
    let mut rng = rng(88);
    for _ in 0..10 {
        let (branches, shunts) = random_network(&mut rng, 8);
        let y = build_y_bus(&branches, &shunts, 8).unwrap();
        let mut nodes: Vec<usize> = (1..=8).collect();
        rand::seq::SliceRandom::shuffle(nodes.as_mut_slice(), &mut rng);
        let retained = &nodes[..3];
        let y_t = kron_reduce(&y, retained).unwrap();
        let v = random_voltages(&mut rng, 3);
        let oracle = full_solve_currents(&to_nalgebra(&y), retained, &v);
        assert!(max_abs_diff(&y_t.currents(&v).unwrap(), &oracle) < 1e-10);
    }
}

fn table_impedances(x_q_prime: &[f64; 3]) -> Vec<SourceImpedance<f64>> {
    (0..3)
        .map(|i| SourceImpedance::new(0.0, wscc9::X_D_PRIME[i], x_q_prime[i]).unwrap())
        .collect()
}

#[test]
fn pre_fault_internal_matrix_from_terminal_matrix() {
    let net = TerminalNetwork::from_terminal(&wscc9::terminal_admittance()).unwrap();
    let t2 = build_t2(&table_impedances(&wscc9::X_D_PRIME));
    let reference = wscc9::block_matrix(&wscc9::INTERNAL_PRE);
    let constant = constant_internal_admittance(&net, &t2).unwrap();
    assert!(constant.max_abs_diff(&reference) < 5e-4);
    let mut rng = rng(1);
    for _ in 0..5 {
        let t1 = build_t1(&random_angles(&mut rng, 3));
        let y = internal_bus_admittance(&net, &t1, &t2).unwrap();
        assert!(y.max_abs_diff(&reference) < 5e-4);
    }
}

#[test]
fn isotropic_two_axis_variant_gives_same_matrix() {
    let net = TerminalNetwork::from_terminal(&wscc9::terminal_admittance()).unwrap();
    let t2 = build_t2(&table_impedances(&wscc9::fourth_order::X_Q_PRIME_ISOTROPIC));
    let t1 = build_t1(&wscc9::fourth_order::DELTA0);
    let y = internal_bus_admittance(&net, &t1, &t2).unwrap();
    assert!(y.max_abs_diff(&wscc9::block_matrix(&wscc9::INTERNAL_PRE)) < 5e-4);
}

#[test]
fn random_two_machine_constant_path_agrees_with_general_path() {
    let mut rng = rng(2024);
    let (branches, shunts) = random_network(&mut rng, 5);
    let y_t = kron_reduce(&build_y_bus(&branches, &shunts, 5).unwrap(), &[2, 5]).unwrap();
    let net = TerminalNetwork::from_terminal(&y_t).unwrap();
    let z: Vec<_> = (0..2)
        .map(|_| {
            let x = rng.gen_range(0.05..0.4);
            SourceImpedance::new(rng.gen_range(0.0..0.01), x, x).unwrap()
        })
        .collect();
    let t2 = build_t2(&z);
    let constant = constant_internal_admittance(&net, &t2).unwrap();
    for _ in 0..20 {
        let y = internal_bus_admittance(&net, &build_t1(&random_angles(&mut rng, 2)), &t2).unwrap();
        assert!(y.max_abs_diff(&constant) < 1e-10);
    }
}

#[test]
fn anisotropic_machines_make_the_matrix_angle_dependent() {
    let net = TerminalNetwork::from_terminal(&wscc9::terminal_admittance()).unwrap();
    let t2 = build_t2(&table_impedances(&wscc9::fourth_order::X_Q_PRIME));
    let mut rng = rng(3);
    let a = internal_bus_admittance(&net, &build_t1(&random_angles(&mut rng, 3)), &t2).unwrap();
    let b = internal_bus_admittance(&net, &build_t1(&random_angles(&mut rng, 3)), &t2).unwrap();
    assert!(a.max_abs_diff(&b) > 1e-6);
}

fn mat2_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

fn max_abs2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (a[i][j] - b[i][j]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn anisotropic_impedance_does_not_commute_with_rotation() {
    let z = SourceImpedance::new(0.0, 0.0608, 0.0969).unwrap().block();
    let rot = rotation_block(0.7);
    assert!(max_abs2(mat2_mul(z, rot), mat2_mul(rot, z)) > 1e-3);
}

proptest! {
    #[test]
    fn rotation_blocks_are_orthogonal(deltas in prop::collection::vec(-10.0f64..10.0, 1..8)) {
        let t1 = build_t1(&deltas);
        prop_assert!(t1.diagonal_blocks_orthogonal(1e-14));
    }

    #[test]
    fn isotropic_impedance_commutes_with_rotation(r in 0.0f64..0.05, x in 0.01f64..1.0, delta in -7.0f64..7.0) {
        let z = SourceImpedance::classical(r, x).block();
        let rot = rotation_block(delta);
        prop_assert!(max_abs2(mat2_mul(z, rot), mat2_mul(rot, z)) < 1e-14);
    }

    #[test]
    fn expansion_has_complex_block_structure(entries in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..26)) {
        let m = (entries.len() as f64).sqrt().floor() as usize;
        let rows: Vec<Vec<Complex64>> = (0..m)
            .map(|i| (0..m).map(|j| { let (g, b) = entries[i * m + j]; Complex64::new(g, b) }).collect())
            .collect();
        let y = ComplexAdmittanceMatrix::from_rows(&rows).unwrap();
        let yr = expand_real_blocks(&y);
        prop_assert!(yr.has_complex_block_structure());
        for i in 0..m {
            for j in 0..m {
                let blk = yr.block(i, j);
                prop_assert_eq!(blk[0][0], y.get(i, j).re);
                prop_assert_eq!(blk[1][0], y.get(i, j).im);
            }
        }
    }

    #[test]
    fn internal_matrix_is_constant_for_isotropic_machines(seed in 0u64..1000) {
        let mut rng = rng(seed);
        let net = TerminalNetwork::from_terminal(&wscc9::terminal_admittance()).unwrap();
        let t2 = build_t2(&table_impedances(&wscc9::X_D_PRIME));
        let constant = constant_internal_admittance(&net, &t2).unwrap();
        let y = internal_bus_admittance(&net, &build_t1(&random_angles(&mut rng, 3)), &t2).unwrap();
        prop_assert!(y.max_abs_diff(&constant) < 1e-10);
    }

    #[test]
    fn kron_reduction_matches_full_solve(seed in 0u64..10_000, n in 2usize..=10) {
        let mut rng = rng(seed);
        let (branches, shunts) = random_network(&mut rng, n);
        let y = build_y_bus(&branches, &shunts, n).unwrap();
        let k = rng.gen_range(1..=n);
        let mut nodes: Vec<usize> = (1..=n).collect();
        rand::seq::SliceRandom::shuffle(nodes.as_mut_slice(), &mut rng);
        let retained = &nodes[..k];
        let y_t = kron_reduce(&y, retained).unwrap();
        let v = random_voltages(&mut rng, k);
        let oracle = full_solve_currents(&to_nalgebra(&y), retained, &v);
        prop_assert!(max_abs_diff(&y_t.currents(&v).unwrap(), &oracle) < 1e-10);
    }
}

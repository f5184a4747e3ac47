//! The generic core instantiated at `f32`, checked against `f64`.

use transtab::netred::{build_t1, build_t2, internal_bus_admittance, TerminalNetwork};
use transtab::sim::simulate;
use transtab::wscc9;

#[test]
fn single_precision_internal_matrix() {
    let net = TerminalNetwork::<f32>::from_terminal(&wscc9::terminal_admittance()).unwrap();
    let params = wscc9::classical_params::<f32>();
    let z: Vec<_> = params.iter().map(|p| p.impedance()).collect();
    let deltas = wscc9::classical::DELTA0.map(|d| d as f32);
    let y = internal_bus_admittance(&net, &build_t1(&deltas), &build_t2(&z)).unwrap();
    let reference = wscc9::block_matrix::<f32>(&wscc9::INTERNAL_PRE);
    assert!(y.max_abs_diff(&reference) < 5e-4);
}

#[test]
fn single_precision_fault_run_tracks_double() {
    let single = simulate(&wscc9::classical_fault_scenario::<f32>(0.083, 1.0 / 600.0, 1.0)).unwrap();
    let double = simulate(&wscc9::classical_fault_scenario::<f64>(0.083, 1.0 / 600.0, 1.0)).unwrap();
    assert_eq!(single.len(), double.len());
    let worst = single
        .states
        .iter()
        .zip(&double.states)
        .flat_map(|(a, b)| (0..3).map(move |i| (a.delta(i) as f64 - b.delta(i)).abs()))
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

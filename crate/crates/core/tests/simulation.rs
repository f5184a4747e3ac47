use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use transtab::genmodel::{classical_derivatives, fourth_order_network_solution, DynamicState, FourthOrderGenParams};
use transtab::netred::{build_t1, build_t2, internal_bus_admittance, TerminalNetwork};
use transtab::sim::{
    rk4_step, simulate, stability_summary, synchronous_speed, InitialCondition, Machines, NetworkStage, Scenario,
    StageLabel, StageNetwork, Trajectory,
};
use transtab::wscc9;

const H600: f64 = 1.0 / 600.0;

fn max_pairwise_separation(traj: &Trajectory<f64>) -> f64 {
    traj.states
        .iter()
        .map(|s| {
            let d = s.deltas();
            let mut best: f64 = 0.0;
            for i in 0..d.len() {
                for j in i + 1..d.len() {
                    best = best.max((d[i] - d[j]).abs());
                }
            }
            best
        })
        .fold(0.0, f64::max)
}

#[test]
fn undisturbed_system_holds_equilibrium() {
    let traj = simulate(&wscc9::classical_steady_scenario(H600, 2.0)).unwrap();
    let d0 = traj.states[0].deltas();
    for s in &traj.states {
        for (a, b) in s.deltas().iter().zip(&d0) {
            assert!((a - b).abs() < 5e-3);
        }
    }
}

#[test]
fn five_cycle_clearing_is_first_swing_stable() {
    let traj = simulate(&wscc9::classical_fault_scenario(0.083, H600, 3.0)).unwrap();
    assert!(max_pairwise_separation(&traj) < PI);
    let report = stability_summary(&traj).unwrap();
    assert!(report.stable, "{report}");
    assert!(report.time_of_max > 0.0 && report.time_of_max < 3.0);
}

#[test]
fn late_clearing_loses_synchronism() {
    let traj = simulate(&wscc9::classical_fault_scenario(1.0, H600, 3.0)).unwrap();
    assert!(max_pairwise_separation(&traj) > 2.0 * PI);
    assert!(!stability_summary(&traj).unwrap().stable);
}

#[test]
fn fault_on_stage_starts_immediately() {
    let traj = simulate(&wscc9::classical_fault_scenario(0.083, H600, 0.1)).unwrap();
    // During the fault generator 2 has no resistive path and delivers no power.
    assert!(traj.p_e[0][1].abs() < 1e-12);
    assert!(traj.p_e[1][1].abs() < 1e-12);
    let after = traj.times.iter().position(|&t| t > 0.0834).unwrap();
    assert!(traj.p_e[after][1] > 0.5);
}

#[test]
fn halving_the_step_changes_little() {
    let coarse = simulate(&wscc9::classical_fault_scenario(0.083, H600, 1.0)).unwrap();
    let fine = simulate(&wscc9::classical_fault_scenario(0.083, H600 / 2.0, 1.0)).unwrap();
    let (a, b) = (coarse.last_state().unwrap(), fine.last_state().unwrap());
    for i in 0..3 {
        assert!((a.delta(i) - b.delta(i)).abs() < 1e-5, "generator {i}");
    }
}

#[test]
fn runs_are_deterministic() {
    let s = wscc9::classical_fault_scenario(0.083, H600, 0.5);
    let a = simulate(&s).unwrap();
    let b = simulate(&s).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rk4_converges_at_fourth_order() {
    let endpoint_error = |h: f64| {
        let n = (1.0 / h).round() as usize;
        let mut x = vec![1.0];
        for k in 0..n {
            x = rk4_step(|_, v: &[f64]| Ok(vec![-v[0]]), &x, k as f64 * h, h).unwrap();
        }
        (x[0] - (-1.0f64).exp()).abs()
    };
    let ratio = endpoint_error(0.1) / endpoint_error(0.05);
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

fn two_axis_scenario(initial: DynamicState<f64>, params: Vec<FourthOrderGenParams<f64>>, t_end: f64) -> Scenario<f64> {
    Scenario {
        machines: Machines::FourthOrder(params),
        initial: InitialCondition::State(initial),
        stages: vec![NetworkStage {
            label: StageLabel::Pre,
            network: StageNetwork::Terminal(wscc9::terminal_admittance()),
            t_start: 0.0,
        }],
        t_end,
        step: H600,
        omega_s: synchronous_speed(60.0),
        stride: 1,
    }
}

fn kicked_two_axis_state() -> DynamicState<f64> {
    use wscc9::fourth_order::*;
    DynamicState::fourth_order(&DELTA0, &[0.0, 0.004, -0.002], &E_Q_PRIME0, &E_D_PRIME0).unwrap()
}

#[test]
fn common_angle_shift_is_a_symmetry() {
    let shift = 0.37;
    let base = simulate(&two_axis_scenario(
        kicked_two_axis_state(),
        wscc9::fourth_order_params(),
        1.0,
    ))
    .unwrap();
    let shifted = simulate(&two_axis_scenario(
        kicked_two_axis_state().shifted(shift),
        wscc9::fourth_order_params(),
        1.0,
    ))
    .unwrap();
    for (k, (a, b)) in base.states.iter().zip(&shifted.states).enumerate() {
        for i in 0..3 {
            assert!((b.delta(i) - shift - a.delta(i)).abs() < 1e-9);
            assert!((b.omega(i) - a.omega(i)).abs() < 1e-9);
            assert!((base.p_e[k][i] - shifted.p_e[k][i]).abs() < 1e-9);
        }
    }
}

#[test]
fn frozen_internal_matrix_is_wrong_for_anisotropic_machines() {
    let params = wscc9::fourth_order_params::<f64>();
    let z: Vec<_> = params.iter().map(FourthOrderGenParams::impedance).collect();
    let state = wscc9::fourth_order_state::<f64>();
    let net = TerminalNetwork::from_terminal(&wscc9::terminal_admittance()).unwrap();
    let t2 = build_t2(&z);
    let frozen = internal_bus_admittance(&net, &build_t1(&state.deltas()), &t2).unwrap();

    let mut values = state.values().to_vec();
    values[4] += 0.5;
    let moved = DynamicState::new(state.kind(), values).unwrap();
    let fresh = internal_bus_admittance(&net, &build_t1(&moved.deltas()), &t2).unwrap();

    let stale = fourth_order_network_solution(&moved, &frozen, &z).unwrap();
    let right = fourth_order_network_solution(&moved, &fresh, &z).unwrap();
    let diff = stale
        .p_e()
        .iter()
        .zip(right.p_e())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff > 1e-4, "diff {diff}");
}

/// Two-axis machines with no transient saliency and no flux dynamics behave
/// exactly like classical machines.
pub fn degenerate_pair(t_end: f64) -> (Trajectory<f64>, Trajectory<f64>) {
    let classical = wscc9::classical_params::<f64>();
    let two_axis: Vec<_> = classical
        .iter()
        .map(|p| FourthOrderGenParams {
            h: p.h,
            d: p.d,
            r_a: p.r_a,
            x_d: p.x_d_prime,
            x_q: p.x_d_prime,
            x_d_prime: p.x_d_prime,
            x_q_prime: p.x_d_prime,
            t_d0_prime: 5.0,
            t_q0_prime: 0.5,
            p_m: p.p_m,
            e_fq: p.e_q_prime,
        })
        .collect();
    let deltas = [0.0396, 0.6444, 0.2298];
    let omegas = [0.0, 0.003, 0.0];
    let e_q: Vec<f64> = classical.iter().map(|p| p.e_q_prime).collect();
    let stage = NetworkStage {
        label: StageLabel::Pre,
        network: StageNetwork::Terminal(wscc9::terminal_admittance()),
        t_start: 0.0,
    };
    let base = Scenario {
        machines: Machines::Classical(classical),
        initial: InitialCondition::State(DynamicState::classical(&deltas, &omegas).unwrap()),
        stages: vec![stage],
        t_end,
        step: H600,
        omega_s: synchronous_speed(60.0),
        stride: 1,
    };
    let mut fourth = base.clone();
    fourth.machines = Machines::FourthOrder(two_axis);
    fourth.initial = InitialCondition::State(DynamicState::fourth_order(&deltas, &omegas, &e_q, &[0.0; 3]).unwrap());
    (simulate(&base).unwrap(), simulate(&fourth).unwrap())
}

#[test]
fn degenerate_two_axis_model_matches_classical() {
    let (a, b) = degenerate_pair(1.0);
    assert_eq!(a.len(), b.len());
    for (sa, sb) in a.states.iter().zip(&b.states) {
        for i in 0..3 {
            assert!((sa.delta(i) - sb.delta(i)).abs() < 1e-9);
            assert!((sa.omega(i) - sb.omega(i)).abs() < 1e-9);
        }
    }
}

fn undamped_rates(deltas: &[f64]) -> Vec<f64> {
    let mut params = wscc9::classical_params::<f64>();
    params.iter_mut().for_each(|g| g.d = 0.0);
    let state = DynamicState::classical(deltas, &[0.0; 3]).unwrap();
    let y = wscc9::block_matrix(&wscc9::INTERNAL_PRE);
    let rates = classical_derivatives(&state, &params, &y, synchronous_speed(60.0)).unwrap();
    rates.iter().skip(1).step_by(2).copied().collect()
}

fn jacobian(deltas: &[f64]) -> DMatrix<f64> {
    let eps = 1e-7;
    DMatrix::from_fn(3, 3, |i, j| {
        let mut up = deltas.to_vec();
        let mut dn = deltas.to_vec();
        up[j] += eps;
        dn[j] -= eps;
        (undamped_rates(&up)[i] - undamped_rates(&dn)[i]) / (2.0 * eps)
    })
}

/// Angles at which all machines accelerate equally (relative equilibrium of
/// the lossy undamped system), by Newton iteration on `delta_2, delta_3, a`.
fn relative_equilibrium() -> Vec<f64> {
    let mut d = wscc9::classical::DELTA0.to_vec();
    for _ in 0..20 {
        let j = jacobian(&d);
        let mut jac = DMatrix::zeros(3, 3);
        for i in 0..3 {
            jac[(i, 0)] = j[(i, 1)];
            jac[(i, 1)] = j[(i, 2)];
            jac[(i, 2)] = -1.0;
        }
        // rate_i(d) + J dd - a = 0
        let rhs = DVector::from_iterator(3, undamped_rates(&d).iter().map(|v| -v));
        let sol = jac.lu().solve(&rhs).unwrap();
        d[1] += sol[0];
        d[2] += sol[1];
    }
    d
}

/// Rotor-angle shape of the slower inter-machine mode.
fn mode_shape(deltas: &[f64]) -> DVector<f64> {
    let j = jacobian(deltas);
    let mut eig: Vec<f64> = j.complex_eigenvalues().iter().map(|z| z.re).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Most negative is the fast local mode, the one nearest zero is the
    // common mode; take the middle one.
    let lambda = eig[1];
    let shifted = &j - DMatrix::identity(3, 3) * (lambda + 1e-9);
    let lu = shifted.lu();
    let mut v = DVector::from_element(3, 1.0);
    for _ in 0..50 {
        v = lu.solve(&v).unwrap();
        v /= v.norm();
    }
    v
}

#[test]
fn undamped_oscillation_does_not_decay() {
    let eq = relative_equilibrium();
    let r = undamped_rates(&eq);
    assert!((r[0] - r[1]).abs() < 1e-10 && (r[0] - r[2]).abs() < 1e-10);
    let shape = mode_shape(&eq);

    let mut s = wscc9::classical_steady_scenario(1.0 / 1200.0, 5.0);
    if let Machines::Classical(p) = &mut s.machines {
        p.iter_mut().for_each(|g| g.d = 0.0);
    }
    let amplitude = 0.05 / (shape[1] - shape[0]).abs();
    let d: Vec<f64> = (0..3).map(|i| eq[i] + amplitude * shape[i]).collect();
    s.initial = InitialCondition::State(DynamicState::classical(&d, &[0.0; 3]).unwrap());
    let traj = simulate(&s).unwrap();
    let sep: Vec<f64> = traj.states.iter().map(|st| st.delta(1) - st.delta(0)).collect();

    let mut extrema = vec![];
    for k in 1..sep.len() - 1 {
        let is_max = sep[k] > sep[k - 1] && sep[k] >= sep[k + 1];
        let is_min = sep[k] < sep[k - 1] && sep[k] <= sep[k + 1];
        if is_max || is_min {
            extrema.push(sep[k]);
        }
    }
    let swings: Vec<f64> = extrema.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    assert!(swings.len() >= 4, "only {} swings", swings.len());
    let (first, last) = (swings[0], *swings.last().unwrap());
    assert!(((last - first) / first).abs() < 0.01, "first {first}, last {last}");
}

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transtab::netred::{Branch, Shunt};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected random network: a random spanning tree plus a few extra lines,
/// inductive series admittances and small shunts at some nodes.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Branch<f64>>, Vec<Shunt<f64>>) {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let series = |rng: &mut ChaCha8Rng| {
        let r = rng.gen_range(0.005..0.1);
        let x = rng.gen_range(0.03..0.5);
        Complex64::new(1.0, 0.0) / Complex64::new(r, x)
    };
    let mut branches = Vec::new();
    for k in 1..n {
        let to = order[rng.gen_range(0..k)];
        branches.push(Branch {
            from: order[k],
            to,
            admittance: series(rng),
        });
    }
    for _ in 0..n / 2 {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b {
            branches.push(Branch {
                from: a,
                to: b,
                admittance: series(rng),
            });
        }
    }
    let mut shunts = Vec::new();
    for node in 1..=n {
        if rng.gen_bool(0.5) {
            shunts.push(Shunt {
                node,
                admittance: Complex64::new(rng.gen_range(0.0..0.8), rng.gen_range(-0.3..0.3)),
            });
        }
    }
    (branches, shunts)
}

pub fn random_voltages(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(rng.gen_range(0.9..1.1), rng.gen_range(-0.6..0.6)))
        .collect()
}

pub fn to_nalgebra(y: &transtab::ComplexAdmittanceMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(y.dim(), y.dim(), |i, j| y.get(i, j))
}

/// Injected currents at the retained nodes when only those nodes carry
/// injections: solve `Y_nn V_n = -Y_nm V_m`, then `I_m = Y_mm V_m + Y_mn V_n`.
pub fn full_solve_currents(y_bus: &DMatrix<Complex64>, retained: &[usize], v_m: &[Complex64]) -> Vec<Complex64> {
    let n = y_bus.nrows();
    let keep: Vec<usize> = retained.iter().map(|i| i - 1).collect();
    let elim: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let pick =
        |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| y_bus[(rows[i], cols[j])]);
    let vm = nalgebra::DVector::from_column_slice(v_m);
    let i_direct = pick(&keep, &keep) * &vm;
    if elim.is_empty() {
        return i_direct.iter().copied().collect();
    }
    let rhs = -(pick(&elim, &keep) * &vm);
    let vn = pick(&elim, &elim).lu().solve(&rhs).expect("eliminated block solvable");
    (i_direct + pick(&keep, &elim) * vn).iter().copied().collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn random_angles(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

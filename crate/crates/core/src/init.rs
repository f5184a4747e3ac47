//! Steady-state initialization from a solved operating point.
//!
//! Each machine is given its terminal voltage and current phasors in the
//! synchronous network frame; the initializers place the rotor and the
//! internal voltages so that the model's differential equations are at rest.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::genmodel::{dq_from_xy, xy_from_dq, FourthOrderGenParams};
use crate::netred::SourceImpedance;
use crate::scalar::Real;

/// Terminal phasors of one machine, per-unit, network frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<T> {
    pub v_t: Complex<T>,
    pub i_t: Complex<T>,
}

impl<T: Real> OperatingPoint<T> {
    pub fn new(v_t: Complex<T>, i_t: Complex<T>) -> Result<Self> {
        let op = Self { v_t, i_t };
        op.validate(0)?;
        Ok(op)
    }

    pub fn from_polar(v_mag: T, v_angle: T, i_t: Complex<T>) -> Result<Self> {
        Self::new(Complex::from_polar(v_mag, v_angle), i_t)
    }

    pub fn validate(&self, generator: usize) -> Result<()> {
        let finite = [self.v_t.re, self.v_t.im, self.i_t.re, self.i_t.im]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter {
                generator,
                field: "operating point",
                reason: "must be finite",
            });
        }
        if self.v_t.norm() <= T::zero() {
            return Err(Error::ZeroPhasor {
                generator,
                which: "terminal voltage",
            });
        }
        Ok(())
    }

    /// Electrical output `Re(V I*)`.
    pub fn terminal_power(&self) -> T {
        (self.v_t * self.i_t.conj()).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalInit<T> {
    pub delta0: T,
    pub e_q_prime: T,
    pub p_m: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourthOrderInit<T> {
    pub delta0: T,
    pub e_q_prime0: T,
    pub e_d_prime0: T,
    pub e_fq: T,
    pub p_m: T,
}

/// Voltage behind the transient reactance: `E = V + (R_a + jX'_d) I`.
pub fn init_classical<T: Real>(op: &OperatingPoint<T>, r_a: T, x_d_prime: T) -> Result<ClassicalInit<T>> {
    op.validate(0)?;
    let e = op.v_t + Complex::new(r_a, x_d_prime) * op.i_t;
    let magnitude = e.norm();
    if magnitude <= T::zero() {
        return Err(Error::ZeroPhasor {
            generator: 0,
            which: "internal voltage",
        });
    }
    Ok(ClassicalInit {
        delta0: e.arg(),
        e_q_prime: magnitude,
        p_m: op.terminal_power(),
    })
}

/// Two-axis initialization. The rotor q axis lies along
/// `E_Q = V + (R_a + jX_q) I`; the transient voltages and field voltage
/// follow from the dq components of `V` and `I`. `p_m` and `e_fq` in
/// `params` are ignored.
pub fn init_fourth_order<T: Real>(
    op: &OperatingPoint<T>,
    params: &FourthOrderGenParams<T>,
) -> Result<FourthOrderInit<T>> {
    op.validate(0)?;
    let locating = op.v_t + Complex::new(params.r_a, params.x_q) * op.i_t;
    if locating.norm() <= T::zero() {
        return Err(Error::ZeroPhasor {
            generator: 0,
            which: "q-axis locating",
        });
    }
    let delta0 = locating.arg();
    let (v_d, v_q) = dq_from_xy(delta0, op.v_t.re, op.v_t.im);
    let (i_d, i_q) = dq_from_xy(delta0, op.i_t.re, op.i_t.im);
    let e_d_prime0 = v_d + params.r_a * i_d - params.x_q_prime * i_q;
    let e_q_prime0 = v_q + params.r_a * i_q + params.x_d_prime * i_d;
    let e_fq = e_q_prime0 + (params.x_d - params.x_d_prime) * i_d;
    Ok(FourthOrderInit {
        delta0,
        e_q_prime0,
        e_d_prime0,
        e_fq,
        p_m: v_d * i_d + v_q * i_q,
    })
}

/// Terminal voltage of a classical machine carrying current `i_t`.
pub fn classical_terminal_voltage<T: Real>(
    delta: T,
    e_q_prime: T,
    i_t: Complex<T>,
    z: &SourceImpedance<T>,
) -> Complex<T> {
    let internal = Complex::from_polar(e_q_prime, delta);
    internal - Complex::new(z.r_a, z.x_d_prime) * i_t
}

/// Terminal voltage of a two-axis machine carrying current `i_t`, computed
/// with the dq-frame impedance drop.
pub fn fourth_order_terminal_voltage<T: Real>(
    delta: T,
    e_q_prime: T,
    e_d_prime: T,
    i_t: Complex<T>,
    z: &SourceImpedance<T>,
) -> Complex<T> {
    let (i_d, i_q) = dq_from_xy(delta, i_t.re, i_t.im);
    let e_d = e_d_prime - (z.r_a * i_d - z.x_q_prime * i_q);
    let e_q = e_q_prime - (z.x_d_prime * i_d + z.r_a * i_q);
    let (x, y) = xy_from_dq(delta, e_d, e_q);
    Complex::new(x, y)
}

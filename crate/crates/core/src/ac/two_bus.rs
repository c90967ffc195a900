//! Two-bus comparison of the LBF and AC voltage drops.
//!
//! Substation bus 0 at `|V₀|` (angle zero) feeds a load `S₁` through `Z`.
//! With `|V₁| ≈ 1` the branch current is `|S₁| ∠(δ - θ)` and
//!
//! ```text
//! V₁ ≈ (|V₀| - a) - j b,   a = |S₁||Z| cos γ,   b = |S₁||Z| sin γ,   γ = φ - θ + δ
//! ΔV_AC ≈ |V₀| - sqrt((|V₀| - a)² + b²)
//! ΔV_LBF = |S₁||Z|
//! ```
//!
//! Since `a ≤ |S₁||Z|`, `ΔV_LBF ≥ ΔV_AC` whenever `|V₀| > |S₁||Z|`.
//!
//! The exact two-bus solution has `u = |V₁|²` solving
//! `u² + (2(P r + Q x) - |V₀|²) u + |S₁|²|Z|² = 0`, and then
//! `V₁ = (u + Z* S₁) / |V₀|`; its angle is the `δ` used above.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoBusError {
    #[error("proof condition |V0| > |S1||Z| fails: |V0| = {v0}, |S1||Z| = {sz}")]
    Condition { v0: f64, sz: f64 },
    #[error("no physical two-bus solution (discriminant {0:e} < 0)")]
    NoSolution(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoBusAnalysis {
    pub v0: f64,
    pub s1_mag: f64,
    pub z_abs: f64,
    /// Impedance angle φ.
    pub phi: f64,
    /// Load power-factor angle θ.
    pub theta: f64,
    /// Bus-1 voltage angle δ of the exact solution.
    pub delta: f64,
    pub gamma: f64,
    pub a_term: f64,
    pub b_term: f64,
    pub dv_ac_approx: f64,
    pub dv_ac_exact: f64,
    pub dv_lbf: f64,
    pub v1_exact: Complex64,
}

pub fn two_bus_closed_form(v0: f64, s1: Complex64, z: Complex64) -> Result<TwoBusAnalysis, TwoBusError> {
    let v0 = v0.abs();
    let s1_mag = s1.norm();
    let z_abs = z.norm();
    let sz = s1_mag * z_abs;
    if !(v0 > sz) {
        return Err(TwoBusError::Condition { v0, sz });
    }

    let linear = 2.0 * (s1.re * z.re + s1.im * z.im) - v0 * v0;
    let disc = linear * linear - 4.0 * sz * sz;
    if disc < 0.0 {
        return Err(TwoBusError::NoSolution(disc));
    }
    let u = (-linear + disc.sqrt()) / 2.0;
    let v1_exact = (u + z.conj() * s1) / v0;

    let phi = z.arg();
    let theta = s1.arg();
    let delta = v1_exact.arg();
    let gamma = phi - theta + delta;
    let a_term = sz * gamma.cos();
    let b_term = sz * gamma.sin();
    let dv_ac_approx = v0 - ((v0 - a_term).powi(2) + b_term * b_term).sqrt();

    Ok(TwoBusAnalysis {
        v0,
        s1_mag,
        z_abs,
        phi,
        theta,
        delta,
        gamma,
        a_term,
        b_term,
        dv_ac_approx,
        dv_ac_exact: v0 - u.sqrt(),
        dv_lbf: sz,
        v1_exact,
    })
}

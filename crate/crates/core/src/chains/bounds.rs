//! Closed-form upper bounds on the total mixing time known from the
//! literature for the matching and switch chains.

use num_traits::Float;

/// `16² |E|² (N/M)⁴ ln(|Ω| / ε)` for the edge-choice matching chain, with
/// `N` near-perfect and `M` perfect matchings.
pub fn broder_bound(edges: u64, near_perfect: u64, perfect: u64, omega: u64, epsilon: f64) -> f64 {
    let e = edges as f64;
    let ratio = near_perfect as f64 / perfect as f64;
    256.0 * e * e * ratio.powi(4) * Float::ln(omega as f64 / epsilon)
}

/// `d¹⁴ |E|⁹ (|E| ln|E| + ln ε⁻¹) / 10` for the switch chain, or `None`
/// outside its range of validity `3 ≤ d ≤ √|E| / 4`.
pub fn greenhill_bound(d_max: u32, edges: u64, epsilon: f64) -> Option<f64> {
    let e = edges as f64;
    let d = f64::from(d_max);
    if d_max < 3 || d > Float::sqrt(e) / 4.0 {
        return None;
    }
    Some(0.1 * d.powi(14) * e.powi(9) * (e * Float::ln(e) + Float::ln(1.0 / epsilon)))
}

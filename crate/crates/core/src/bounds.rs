//! Constants of the high-probability bounds on the new spectral radius.

/// `lambda* < SPECTRAL_CONSTANT sqrt(d)` with high probability.
pub const SPECTRAL_CONSTANT: f64 = 430_656.0;

/// `lambda* <= SUBGRAPH_CONSTANT lambda(G')` for an induced subgraph on at
/// most `h d` vertices, with high probability.
pub const SUBGRAPH_CONSTANT: f64 = 1_189_248.0;

/// Threshold `K = M / 192 - 3` attached to a constant `M`.
pub fn threshold_of(constant: f64) -> f64 {
    constant / 192.0 - 3.0
}

/// Reduction strength for the spectral bound: `K / 112`.
pub fn spectral_strength() -> f64 {
    threshold_of(SPECTRAL_CONSTANT) / 112.0
}

/// Reduction strength for the subgraph bound: `floor(K / 151)`.
pub fn subgraph_strength() -> f64 {
    (threshold_of(SUBGRAPH_CONSTANT) / 151.0).floor()
}

/// `lambda* / (2 sqrt(d - 1))`.
pub fn ramanujan_ratio(lambda_star: f64, d: usize) -> f64 {
    lambda_star / (2.0 * ((d - 1) as f64).sqrt())
}

/// `lambda* / (SPECTRAL_CONSTANT sqrt(d))`.
pub fn spectral_ratio(lambda_star: f64, d: usize) -> f64 {
    lambda_star / (SPECTRAL_CONSTANT * (d as f64).sqrt())
}

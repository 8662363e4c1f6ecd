use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{basis_size, binomial};
use crate::poly::Flavor;

pub use crate::linalg::strict_cap;

/// ⌈√n⌉ in exact integer arithmetic.
pub fn ceil_sqrt(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u128;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |sq| sq <= n) {
        r += 1;
    }
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// Counting bounds for squares over a basis, with the approximate bound
/// for a given ε and sos-norm value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub flavor: Flavor,
    pub n: usize,
    pub d: usize,
    pub dim_v: u128,
    pub dim_vv: u128,
    /// dim V squares always suffice.
    pub general_bound: u128,
    /// ⌈√dim V*V⌉.
    pub pythagoras_bound: u128,
    pub epsilon: f64,
    pub sos_norm: f64,
    /// sos/ε for monomials on the sphere, (sos/ε)² for words.
    pub approximate_bound: f64,
    /// Largest count strictly below `approximate_bound`.
    pub approximate_cap: u128,
}

pub fn bound_report(flavor: Flavor, n: usize, d: usize, eps: f64, sos_norm: f64) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one variable".into()));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive and finite, got {eps}")));
    }
    if !(sos_norm >= 0.0) {
        return Err(Error::InvalidArgument(format!("sos-norm must be nonnegative, got {sos_norm}")));
    }
    let overflow = || Error::InvalidArgument(format!("dimension counts overflow for n = {n}, d = {d}"));
    let dim_v = basis_size(flavor, n, d).ok_or_else(overflow)?;
    let dim_vv = match flavor {
        Flavor::Commutative => binomial((2 * d + n - 1) as u128, (n - 1) as u128),
        Flavor::Free => (n as u128).checked_pow(2 * d as u32),
    }
    .ok_or_else(overflow)?;
    let ratio = sos_norm / eps;
    let approximate_bound = match flavor {
        Flavor::Commutative => ratio,
        Flavor::Free => ratio * ratio,
    };
    let cap = strict_cap(approximate_bound);
    Ok(BoundReport {
        flavor,
        n,
        d,
        dim_v,
        dim_vv,
        general_bound: dim_v,
        pythagoras_bound: ceil_sqrt(dim_vv),
        epsilon: eps,
        sos_norm,
        approximate_bound,
        approximate_cap: if cap == usize::MAX { u128::MAX } else { cap as u128 },
    })
}

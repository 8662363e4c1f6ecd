//! Points on the real unit sphere and the sampled sup-norm estimate.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Flavor, Polynomial};

/// Upper limit on the number of points produced by the cube-face subdivision.
const MAX_SAMPLE: usize = 200_000;
const ASCENT_STARTS: usize = 8;
const ASCENT_STEPS: usize = 200;

/// A point of S^{n−1} ⊆ ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint<T: Real>(Vec<T>);

impl<T: Real> SpherePoint<T> {
    /// Accepts coordinates whose squared norm is 1 within 1e−12 (or a few
    /// ulps in lower precision).
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("sphere point needs at least one coordinate".into()));
        }
        let sq: T = coords.iter().map(|&c| c * c).sum();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        if (sq - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "sphere point has squared norm {sq}, expected 1"
            )));
        }
        Ok(Self(coords))
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(mut coords: Vec<T>) -> Result<Self> {
        let norm = coords.iter().map(|&c| c * c).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

/// Deterministic quasi-uniform sample of S^{n−1}.
///
/// * n = 1: the two points ±1.
/// * n = 2: `8·resolution` equally spaced angles.
/// * n = 3: a Fibonacci spiral with `20·resolution²` points.
/// * n ≥ 4: the boundary of the cube [−1,1]ⁿ subdivided with step
///   1/`level`, projected radially; `level` starts at `resolution` and is
///   lowered until the sample has at most 200 000 points.
///
/// The ±e_i coordinate points are always included.
pub fn sphere_sample(n: usize, resolution: usize) -> Result<Vec<Vec<f64>>> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("sphere resolution must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sphere dimension must be positive".into()));
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            pts.push(e);
        }
    }
    match n {
        1 => {}
        2 => {
            let m = 8 * resolution;
            for j in 0..m {
                let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                pts.push(vec![th.cos(), th.sin()]);
            }
        }
        3 => {
            let m = 20 * resolution * resolution;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for j in 0..m {
                let z = 1.0 - (2.0 * j as f64 + 1.0) / m as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let th = golden * j as f64;
                pts.push(vec![r * th.cos(), r * th.sin(), z]);
            }
        }
        _ => {
            let mut level = resolution;
            while level > 1 && cube_surface_count(n, level) > MAX_SAMPLE {
                level -= 1;
            }
            cube_surface_points(n, level, &mut pts);
        }
    }
    Ok(pts)
}

fn cube_surface_count(n: usize, level: usize) -> usize {
    let side = 2 * level + 1;
    let inner = 2 * level - 1;
    side.saturating_pow(n as u32).saturating_sub(inner.saturating_pow(n as u32))
}

fn cube_surface_points(n: usize, level: usize, out: &mut Vec<Vec<f64>>) {
    let side = 2 * level + 1;
    let total = side.pow(n as u32);
    let step = 1.0 / level as f64;
    for mut idx in 0..total {
        let mut v = vec![0.0; n];
        let mut on_face = false;
        for c in v.iter_mut() {
            let k = idx % side;
            idx /= side;
            if k == 0 || k == side - 1 {
                on_face = true;
            }
            *c = -1.0 + step * k as f64;
        }
        if on_face {
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.iter_mut().for_each(|c| *c /= norm);
            out.push(v);
        }
    }
}

impl<T: Real> Polynomial<T> {
    /// Lower estimate of max_{s ∈ S^{n−1}} |p(s)|.
    ///
    /// Evaluates `p` on [`sphere_sample`] and then runs projected gradient
    /// ascent on |p|² from the best few samples. Every candidate value is
    /// attained at an actual sphere point, so the result never exceeds the
    /// true sup-norm (up to rounding in the evaluation).
    pub fn sup_norm_sphere(&self, resolution: usize) -> Result<T> {
        if self.flavor != Flavor::Commutative {
            return Err(Error::FlavorMismatch { expected: Flavor::Commutative, found: self.flavor });
        }
        let n = self.n_vars;
        let sample = sphere_sample(n, resolution)?;
        if self.is_zero() {
            return Ok(T::zero());
        }
        let mut scored: Vec<(T, Vec<T>)> = sample
            .into_iter()
            .map(|s| {
                let s: Vec<T> = s.into_iter().map(T::lit).collect();
                let v = self.evaluate_at(&s).expect("commutative").norm();
                (v, s)
            })
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut best = scored[0].0;
        if n > 1 {
            for (v0, s0) in scored.into_iter().take(ASCENT_STARTS) {
                best = best.max(self.ascend(s0, v0));
            }
        }
        Ok(best)
    }

    fn ascend(&self, mut s: Vec<T>, start: T) -> T {
        let mut f = start * start;
        let mut step = T::lit(0.1);
        let tiny = T::epsilon();
        for _ in 0..ASCENT_STEPS {
            let (val, grad) = self.value_and_gradient(&s);
            // d|p|²/ds_i = 2 Re(conj(p) ∂_i p)
            let mut g: Vec<T> = grad.iter().map(|gi| (val.conj() * gi).re * T::lit(2.0)).collect();
            let radial: T = g.iter().zip(&s).map(|(&a, &b)| a * b).sum();
            g.iter_mut().zip(&s).for_each(|(gi, &si)| *gi -= radial * si);
            let gnorm = g.iter().map(|&x| x * x).sum::<T>().sqrt();
            if gnorm <= tiny * (T::one() + f) {
                break;
            }
            let mut improved = false;
            while step > tiny {
                let trial: Vec<T> = s.iter().zip(&g).map(|(&a, &b)| a + step * b / gnorm).collect();
                let Ok(p) = SpherePoint::normalized(trial) else { break };
                let ft = self.evaluate_at(p.coords()).expect("commutative").norm_sqr();
                if ft > f {
                    s = p.into_inner();
                    f = ft;
                    step = step * T::lit(1.5);
                    improved = true;
                    break;
                }
                step = step * T::lit(0.5);
            }
            if !improved {
                break;
            }
        }
        f.sqrt()
    }
}

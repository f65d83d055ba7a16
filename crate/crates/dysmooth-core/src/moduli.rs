//! The discrete modulus `Psi_r(f, n)`, sampling estimators of the
//! continuous moduli `omega^r(f, t)` and `omega^r_{e_i}(f, u)`, and
//! assembly of the right-hand sides of the comparison bounds.

use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std; shadowed by inherent f64 methods with it
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fdiff::{binomial_row, continuous_diff, DiffRequest, Direction};
use crate::mesh::{sample, DyadicGrid, FunctionSource, SampleField};
use crate::{Error, Result};

/// Location attaining the discrete modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct Argmax {
    pub axis: usize,
    pub index: Vec<u64>,
}

/// Result of one exhaustive `Psi_r` scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModulus {
    pub value: f64,
    pub per_axis: Vec<f64>,
    pub argmax: Argmax,
}

/// `Psi_r(f, n)` across a contiguous range of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusProfile {
    pub r: u32,
    pub d: usize,
    pub n_min: u32,
    pub n_max: u32,
    pub psi: Vec<f64>,
    pub per_axis: Vec<Vec<f64>>,
    pub argmax: Vec<Argmax>,
    /// Max absolute sample value seen; the scale for zero thresholds.
    pub scale: f64,
}

impl ModulusProfile {
    pub fn psi_at(&self, n: u32) -> Option<f64> {
        if n < self.n_min || n > self.n_max {
            None
        } else {
            Some(self.psi[(n - self.n_min) as usize])
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = u32> {
        self.n_min..=self.n_max
    }
}

/// Middle-sum weighting of the omega bound. The theorem statement weights
/// `Psi_r(n-k)` by `2^(kr)`; the final display of its proof weights it by
/// `2^(-kr)`. The statement's weighting dominates termwise and is the
/// default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    TheoremStatement,
    ProofFinalLine,
}

/// Assembled right-hand sides of the comparison bounds at one (n, t).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: u32,
    pub t: f64,
    pub n0: u32,
    /// `sum_{k>=0} Psi_r(n+k)`, tail-estimated when the decay is geometric.
    pub axis_rhs: f64,
    /// Bracketed omega bound: axis sum + weighted coarse sum + `t^r ||f||`.
    pub omega_rhs: f64,
    /// The sharper first-order bound; present only for r = 1.
    pub omega1_rhs: Option<f64>,
    pub sup_norm: f64,
    pub tail_truncated: bool,
    /// Set when `Psi_r(n-k)` terms below the profile range were substituted
    /// by `Psi_r(n_min)`.
    pub coverage_warning: bool,
    pub weighting: Weighting,
}

/// Signed difference over mesh values starting at flat index `base` with
/// flat step `step`; arithmetic identical to `forward_diff`.
#[inline]
fn diff_at(values: &[f64], base: u64, step: u64, signed_row: &[f64], kahan: bool) -> f64 {
    if !kahan {
        let mut acc = 0.0;
        for (k, &c) in signed_row.iter().enumerate() {
            acc += c * values[(base + k as u64 * step) as usize];
        }
        acc
    } else {
        let mut acc = 0.0;
        let mut comp = 0.0;
        for (k, &c) in signed_row.iter().enumerate() {
            let term = c * values[(base + k as u64 * step) as usize] - comp;
            let next = acc + term;
            comp = (next - acc) - term;
            acc = next;
        }
        acc
    }
}

fn signed_row(r: u32) -> Result<Vec<f64>> {
    let row = binomial_row(r)?;
    Ok(row
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let sign = if (r as usize - k) % 2 == 0 { 1.0 } else { -1.0 };
            sign * c as f64
        })
        .collect())
}

/// Exhaustive max of `|Delta^r|` over all axes and admissible mesh points,
/// stepping `stride` mesh cells per difference step.
pub fn discrete_modulus_strided(
    field: &SampleField,
    r: u32,
    stride: u64,
) -> Result<DiscreteModulus> {
    let grid = field.grid();
    let d = grid.dimension();
    let n = grid.level();
    if (r as u64) * stride > grid.max_index() {
        return Err(Error::LevelTooCoarse { n, r });
    }
    let row = signed_row(r)?;
    let kahan = r >= 8;
    let values = field.values();
    let ppa = grid.points_per_axis();
    let count = grid.point_count();
    let reach = r as u64 * stride;
    let mut per_axis = alloc::vec![0.0f64; d];
    let mut best = -1.0f64;
    let mut best_at = (0usize, 0u64);
    for i in 0..d {
        let axis_stride = grid.stride(i);
        let mut axis_best = 0.0f64;
        for idx in 0..count {
            let ki = (idx / axis_stride) % ppa;
            if ki + reach > grid.max_index() {
                continue;
            }
            let v = diff_at(values, idx, axis_stride * stride, &row, kahan).abs();
            if v > axis_best {
                axis_best = v;
            }
            if v > best {
                best = v;
                best_at = (i, idx);
            }
        }
        per_axis[i] = axis_best;
    }
    Ok(DiscreteModulus {
        value: best.max(0.0),
        per_axis,
        argmax: Argmax {
            axis: best_at.0,
            index: grid.unflat(best_at.1),
        },
    })
}

/// `Psi_r(f, n)` with per-axis breakdown and argmax.
pub fn discrete_modulus(field: &SampleField, r: u32) -> Result<DiscreteModulus> {
    discrete_modulus_strided(field, r, 1)
}

/// One `discrete_modulus` per level of `n_min..=n_max`.
pub fn modulus_profile(
    source: &FunctionSource,
    r: u32,
    n_min: u32,
    n_max: u32,
) -> Result<ModulusProfile> {
    if n_min > n_max {
        return Err(Error::Validation {
            detail: alloc::format!("empty level range {}..{}", n_min, n_max),
        });
    }
    if (1u64 << n_min) < r as u64 {
        return Err(Error::LevelTooCoarse { n: n_min, r });
    }
    if let FunctionSource::Sampled(f) = source {
        if n_max > f.grid().level() {
            return Err(Error::Resolution {
                detail: alloc::format!(
                    "profile up to level {} requested from a level-{} field",
                    n_max,
                    f.grid().level()
                ),
            });
        }
    }
    let d = source.dimension();
    let mut psi = Vec::new();
    let mut per_axis = Vec::new();
    let mut argmax = Vec::new();
    let mut scale = 0.0f64;
    for n in n_min..=n_max {
        let field = sample(source, DyadicGrid::new(d, n)?)?;
        scale = scale.max(field.scale());
        let m = discrete_modulus(&field, r)?;
        psi.push(m.value);
        per_axis.push(m.per_axis);
        argmax.push(m.argmax);
    }
    Ok(ModulusProfile {
        r,
        d,
        n_min,
        n_max,
        psi,
        per_axis,
        argmax,
        scale,
    })
}

/// Largest integer `m >= 0` with `r * 2^(m - n - 1) <= 1`, i.e.
/// `r * 2^m <= 2^(n+1)`; clamped to 0 when no such m exists.
pub fn n_zero(r: u32, n: u32) -> u32 {
    let bound = 1u128 << (n + 1);
    let mut m = 0u32;
    while (r as u128) << (m + 1) <= bound {
        m += 1;
    }
    m
}

/// Truncated `sum_{k>=0} Psi_r(n+k)` with optional geometric tail.
///
/// When the last three level-to-level ratios are all at most some
/// `rho < 0.95`, the tail beyond `n_max` is estimated as
/// `psi[n_max] * rho / (1 - rho)` and the truncation flag is cleared.
pub fn axis_bound_rhs(profile: &ModulusProfile, n: u32) -> Result<(f64, bool)> {
    if n < profile.n_min || n > profile.n_max {
        return Err(Error::Range {
            n,
            n_min: profile.n_min,
            n_max: profile.n_max,
        });
    }
    let mut sum = 0.0;
    for m in n..=profile.n_max {
        sum += profile.psi_at(m).unwrap();
    }
    let last = profile.psi_at(profile.n_max).unwrap();
    if last == 0.0 {
        // exact tail of zeros, nothing truncated
        return Ok((sum, false));
    }
    if profile.n_max >= profile.n_min + 3 {
        let mut rho = 0.0f64;
        let mut ok = true;
        for m in profile.n_max - 3..profile.n_max {
            let a = profile.psi_at(m).unwrap();
            let b = profile.psi_at(m + 1).unwrap();
            if a <= 0.0 {
                ok = false;
                break;
            }
            rho = rho.max(b / a);
        }
        if ok && rho < 0.95 {
            return Ok((sum + last * rho / (1.0 - rho), false));
        }
    }
    Ok((sum, true))
}

/// Bracketed right-hand side of the omega bound at `(n, t)`.
pub fn omega_bound_rhs(
    profile: &ModulusProfile,
    n: u32,
    t: f64,
    sup_norm: f64,
    weighting: Weighting,
) -> Result<BoundReport> {
    let half = 0.5 / (1u64 << n) as f64;
    let full = 1.0 / (1u64 << n) as f64;
    if !(t > half && t <= full) {
        return Err(Error::StepMismatch { t, n });
    }
    let r = profile.r;
    let (axis_rhs, tail_truncated) = axis_bound_rhs(profile, n.max(profile.n_min))?;
    let n0 = n_zero(r, n);
    let mut middle = 0.0;
    let mut coverage_warning = false;
    for k in 1..=n0 {
        let level = n as i64 - k as i64;
        let psi = if level < profile.n_min as i64 {
            coverage_warning = true;
            profile.psi_at(profile.n_min).unwrap()
        } else if level > profile.n_max as i64 {
            return Err(Error::Range {
                n: level as u32,
                n_min: profile.n_min,
                n_max: profile.n_max,
            });
        } else {
            profile.psi_at(level as u32).unwrap()
        };
        let w = match weighting {
            Weighting::TheoremStatement => (2.0f64).powi((k * r) as i32),
            Weighting::ProofFinalLine => (2.0f64).powi(-((k * r) as i32)),
        };
        middle += w * psi;
    }
    let omega_rhs = axis_rhs + middle + t.powi(r as i32) * sup_norm;
    let omega1_rhs = if r == 1 { Some(axis_rhs) } else { None };
    Ok(BoundReport {
        n,
        t,
        n0,
        axis_rhs,
        omega_rhs,
        omega1_rhs,
        sup_norm,
        tail_truncated,
        coverage_warning,
        weighting,
    })
}

/// Lattice of `(res + 1)^d` base points `j / res`; nests under doubling of
/// `res`, which makes the estimators monotone under refinement.
fn base_lattice(d: usize, res: u32) -> crate::mesh::IndexIter {
    crate::mesh::IndexIter::new(alloc::vec![res as u64 + 1; d])
}

/// Lower-bound estimate of the axis modulus `omega^r_{e_i}(f, u)` by
/// exhaustive evaluation over a base lattice and a nested step grid.
pub fn directional_modulus_estimate(
    source: &FunctionSource,
    r: u32,
    i: usize,
    u: f64,
    base_res: u32,
) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::Validation {
            detail: alloc::format!("step bound must be positive, got {}", u),
        });
    }
    if base_res < 16 {
        return Err(Error::Validation {
            detail: alloc::format!("base_res must be at least 16, got {}", base_res),
        });
    }
    let d = source.dimension();
    if i >= d {
        return Err(Error::Validation {
            detail: alloc::format!("axis {} out of range for d = {}", i, d),
        });
    }
    let mut best = 0.0f64;
    let inv = 1.0 / base_res as f64;
    for k in base_lattice(d, base_res) {
        let base: Vec<f64> = k.iter().map(|&kj| kj as f64 * inv).collect();
        for j in 1..=base_res {
            let h = u * j as f64 * inv;
            if base[i] + r as f64 * h > 1.0 + crate::mesh::POINT_TOL {
                break;
            }
            let req = DiffRequest {
                r,
                direction: Direction::Axis(i),
                step: h,
                base: base.clone(),
            };
            let v = continuous_diff(source, &req)?.abs();
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The d axes followed by `count - d` seeded quasi-random unit directions.
pub fn unit_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count);
    for i in 0..d.min(count) {
        let mut e = alloc::vec![0.0; d];
        e[i] = 1.0;
        dirs.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < count {
        // Gaussian components via Box-Muller, then normalize
        let mut e = alloc::vec![0.0f64; d];
        for c in e.iter_mut() {
            let u1 = uniform01(&mut rng).max(1e-300);
            let u2 = uniform01(&mut rng);
            *c = (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos();
        }
        let norm: f64 = e.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for c in e.iter_mut() {
            *c /= norm;
        }
        // renormalize exactly enough for the unit-vector invariant
        let norm: f64 = e.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in e.iter_mut() {
            *c /= norm;
        }
        dirs.push(e);
    }
    dirs
}

/// Lower-bound estimate of `omega^r(f, t)`: max over the axis directions
/// plus seeded quasi-random directions, nested step magnitudes up to `t`,
/// and base-lattice points. Deterministic for fixed (seed, dir_count,
/// base_res).
pub fn omega_estimate(
    source: &FunctionSource,
    r: u32,
    t: f64,
    dir_count: usize,
    base_res: u32,
    seed: u64,
) -> Result<f64> {
    let d = source.dimension();
    if dir_count < 2 * d {
        return Err(Error::Validation {
            detail: alloc::format!("dir_count {} must be at least 2d = {}", dir_count, 2 * d),
        });
    }
    if !(t > 0.0) {
        return Err(Error::Validation {
            detail: alloc::format!("t must be positive, got {}", t),
        });
    }
    let dirs = unit_directions(d, dir_count, seed);
    let inv = 1.0 / base_res as f64;
    let mut best = 0.0f64;
    for e in &dirs {
        for k in base_lattice(d, base_res) {
            let base: Vec<f64> = k.iter().map(|&kj| kj as f64 * inv).collect();
            for j in 1..=base_res {
                let h = t * j as f64 * inv;
                let end: Vec<f64> = base
                    .iter()
                    .zip(e.iter())
                    .map(|(b, ej)| b + r as f64 * h * ej)
                    .collect();
                if !crate::mesh::in_unit_cube(&end) {
                    continue;
                }
                let req = DiffRequest {
                    r,
                    direction: Direction::Vector(e.clone()),
                    step: h,
                    base: base.clone(),
                };
                let v = continuous_diff(source, &req)?.abs();
                if v > best {
                    best = v;
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{sample_catalog, Catalog};

    fn abs_kink() -> Catalog {
        Catalog::AbsPower {
            axis: 0,
            center: 0.5,
            alpha: 1.0,
        }
    }

    #[test]
    fn bilinear_psi2_zero() {
        for n in 1..=4 {
            let field = sample_catalog(2, n, &Catalog::DiagBilinear).unwrap();
            let m = discrete_modulus(&field, 2).unwrap();
            assert!(m.value < 1e-15);
        }
    }

    #[test]
    fn kink_psi2_closed_form() {
        for n in 1..=8u32 {
            let field = sample_catalog(1, n, &abs_kink()).unwrap();
            let m = discrete_modulus(&field, 2).unwrap();
            let want = 2.0 / (1u64 << n) as f64;
            assert!((m.value - want).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn square_psi2_closed_form() {
        for n in 1..=8u32 {
            let field = sample_catalog(1, n, &Catalog::monomial(1, 0, 2)).unwrap();
            let m = discrete_modulus(&field, 2).unwrap();
            let h = 1.0 / (1u64 << n) as f64;
            assert!((m.value - 2.0 * h * h).abs() < 1e-14);
        }
    }

    #[test]
    fn level_too_coarse() {
        let field = sample_catalog(1, 1, &Catalog::monomial(1, 0, 2)).unwrap();
        assert!(matches!(
            discrete_modulus(&field, 3),
            Err(Error::LevelTooCoarse { .. })
        ));
    }

    #[test]
    fn argmax_recheckable() {
        let field = sample_catalog(1, 4, &abs_kink()).unwrap();
        let m = discrete_modulus(&field, 2).unwrap();
        let v = crate::fdiff::grid_diff(&field, &m.argmax.index, m.argmax.axis, 2, 1)
            .unwrap()
            .abs();
        assert_eq!(v, m.value);
    }

    #[test]
    fn sqrt_profile() {
        let f = Catalog::AbsPower {
            axis: 0,
            center: 0.0,
            alpha: 0.5,
        };
        let src = FunctionSource::analytic(1, f).unwrap();
        let p = modulus_profile(&src, 1, 2, 6).unwrap();
        for n in 2..=6u32 {
            let want = (2.0f64).powf(-(n as f64) / 2.0);
            assert!((p.psi_at(n).unwrap() - want).abs() < 1e-12, "n={n}");
            // attained at the origin
            assert_eq!(p.argmax[(n - 2) as usize].index, alloc::vec![0]);
        }
    }

    #[test]
    fn poly_profile_all_zero() {
        let f = Catalog::poly(alloc::vec![
            (alloc::vec![1, 1], 2.0),
            (alloc::vec![0, 1], -0.5)
        ]);
        let src = FunctionSource::analytic(2, f).unwrap();
        let p = modulus_profile(&src, 2, 1, 5).unwrap();
        assert!(p.psi.iter().all(|&v| v < 1e-14));
    }

    #[test]
    fn n_zero_examples() {
        assert_eq!(n_zero(1, 3), 4);
        assert_eq!(n_zero(2, 3), 3);
        assert_eq!(n_zero(4, 5), 4);
        assert_eq!(n_zero(3, 3), 2);
        // r too large for any m: clamp at 0
        assert_eq!(n_zero(100, 2), 0);
    }

    #[test]
    fn n_zero_is_largest_exhaustively() {
        for r in 1..=8u32 {
            for n in 0..=10u32 {
                let m = n_zero(r, n);
                let holds = |m: u32| (r as f64) * (2.0f64).powi(m as i32 - n as i32 - 1) <= 1.0;
                if m > 0 || holds(0) {
                    assert!(holds(m), "r={r} n={n} m={m}");
                }
                assert!(!holds(m + 1), "r={r} n={n} m={m}");
            }
        }
    }

    #[test]
    fn axis_bound_geometric_tail() {
        // psi[m] = 2^(-m+1): sum from n = 3 is 2^-1
        let f = abs_kink();
        let src = FunctionSource::analytic(1, f).unwrap();
        let p = modulus_profile(&src, 2, 2, 12).unwrap();
        let (v, truncated) = axis_bound_rhs(&p, 3).unwrap();
        assert!(!truncated);
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn axis_bound_zero_profile() {
        let src = FunctionSource::analytic(1, Catalog::monomial(1, 0, 1)).unwrap();
        let p = modulus_profile(&src, 2, 2, 6).unwrap();
        let (v, truncated) = axis_bound_rhs(&p, 2).unwrap();
        assert_eq!(v, 0.0);
        assert!(!truncated);
    }

    #[test]
    fn axis_bound_increasing_profile_truncates() {
        let p = ModulusProfile {
            r: 1,
            d: 1,
            n_min: 2,
            n_max: 6,
            psi: alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0],
            per_axis: alloc::vec![alloc::vec![0.0]; 5],
            argmax: alloc::vec![
                Argmax {
                    axis: 0,
                    index: alloc::vec![0]
                };
                5
            ],
            scale: 1.0,
        };
        let (_, truncated) = axis_bound_rhs(&p, 2).unwrap();
        assert!(truncated);
    }

    #[test]
    fn omega_bound_poly_reduces_to_sup_term() {
        let src = FunctionSource::analytic(1, Catalog::monomial(1, 0, 1)).unwrap();
        let p = modulus_profile(&src, 2, 2, 8).unwrap();
        let t = (2.0f64).powi(-4);
        let rep = omega_bound_rhs(&p, 4, t, 1.0, Weighting::TheoremStatement).unwrap();
        assert!((rep.omega_rhs - t * t).abs() < 1e-15);
    }

    #[test]
    fn omega_bound_weighting_comparison() {
        let src = FunctionSource::analytic(1, abs_kink()).unwrap();
        let p = modulus_profile(&src, 2, 1, 10).unwrap();
        let t = (2.0f64).powi(-4);
        let a = omega_bound_rhs(&p, 4, t, 0.5, Weighting::TheoremStatement).unwrap();
        let b = omega_bound_rhs(&p, 4, t, 0.5, Weighting::ProofFinalLine).unwrap();
        assert!(b.omega_rhs <= a.omega_rhs);
        assert!(a.omega_rhs >= t * t * 0.5);
    }

    #[test]
    fn omega_bound_kink_hand_value() {
        // synthetic profile psi[m] = 2^(-m+1) over m = 0..12, r = 2, n = 4,
        // t = 2^-4, theorem weighting:
        //   axis sum  = sum_{k>=0} 2^(-3-k) = 2^-2
        //   middle    = sum_{k=1}^{4} 2^(2k) 2^(-3+k) = sum 2^(3k-3)
        //             = 1 + 8 + 64 + 512 = 585
        //   sup term  = t^2 * 0.5
        let levels = 13usize;
        let p = ModulusProfile {
            r: 2,
            d: 1,
            n_min: 0,
            n_max: 12,
            psi: (0..levels)
                .map(|m| (2.0f64).powi(-(m as i32) + 1))
                .collect(),
            per_axis: alloc::vec![alloc::vec![0.0]; levels],
            argmax: alloc::vec![
                Argmax {
                    axis: 0,
                    index: alloc::vec![0]
                };
                levels
            ],
            scale: 0.5,
        };
        let t = (2.0f64).powi(-4);
        let rep = omega_bound_rhs(&p, 4, t, 0.5, Weighting::TheoremStatement).unwrap();
        assert_eq!(rep.n0, 4);
        assert!(!rep.coverage_warning);
        let middle: f64 = (1..=4).map(|k| (2.0f64).powi(3 * k - 3)).sum();
        let want = 0.25 + middle + t * t * 0.5;
        assert!(
            (rep.omega_rhs - want).abs() < 1e-6,
            "got {} want {want}",
            rep.omega_rhs
        );
        // sampled profiles cannot reach level 0 for r = 2; the k = 4 term is
        // then taken at psi(n_min) and flagged
        let src = FunctionSource::analytic(1, abs_kink()).unwrap();
        let sampled = modulus_profile(&src, 2, 1, 12).unwrap();
        let rep2 = omega_bound_rhs(&sampled, 4, t, 0.5, Weighting::TheoremStatement).unwrap();
        assert!(rep2.coverage_warning);
        let want2 = want - (2.0f64).powi(8) * (2.0 - 1.0);
        assert!(
            (rep2.omega_rhs - want2).abs() < 1e-6,
            "got {} want {want2}",
            rep2.omega_rhs
        );
    }

    #[test]
    fn step_mismatch_rejected() {
        let src = FunctionSource::analytic(1, abs_kink()).unwrap();
        let p = modulus_profile(&src, 2, 1, 8).unwrap();
        assert!(matches!(
            omega_bound_rhs(&p, 4, 0.2, 0.5, Weighting::TheoremStatement),
            Err(Error::StepMismatch { .. })
        ));
    }

    #[test]
    fn directional_estimate_linear() {
        let src = FunctionSource::analytic(1, Catalog::monomial(1, 0, 1)).unwrap();
        let v = directional_modulus_estimate(&src, 1, 0, 0.3, 20).unwrap();
        assert!((v - 0.3).abs() < 1e-12);
    }

    #[test]
    fn directional_estimate_square() {
        let src = FunctionSource::analytic(1, Catalog::monomial(1, 0, 2)).unwrap();
        let v = directional_modulus_estimate(&src, 2, 0, 0.1, 32).unwrap();
        assert!((v - 0.02).abs() < 1e-9);
    }

    #[test]
    fn directional_estimate_bilinear_axis_zero() {
        let src = FunctionSource::analytic(2, Catalog::DiagBilinear).unwrap();
        let v = directional_modulus_estimate(&src, 2, 0, 0.2, 16).unwrap();
        assert!(v < 1e-14);
    }

    #[test]
    fn omega_estimate_linear() {
        let src = FunctionSource::analytic(1, Catalog::monomial(1, 0, 1)).unwrap();
        let v = omega_estimate(&src, 1, 0.25, 4, 16, 7).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn omega_estimate_constant_zero() {
        let src =
            FunctionSource::analytic(2, Catalog::poly(alloc::vec![(alloc::vec![0, 0], 3.0)]))
                .unwrap();
        for r in 1..=3 {
            let v = omega_estimate(&src, r, 0.2, 8, 16, 1).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn omega_estimate_bilinear_diagonal() {
        let src = FunctionSource::analytic(2, Catalog::DiagBilinear).unwrap();
        let t = 0.1;
        let v = omega_estimate(&src, 2, t, 64, 16, 0).unwrap();
        assert!(v >= 0.99 * t * t, "got {v}");
        assert!(v <= t * t + 1e-12);
    }

    #[test]
    fn omega_estimate_monotone_under_doubling() {
        let src = FunctionSource::analytic(2, Catalog::RadialPower {
            center: alloc::vec![0.3, 0.6],
            alpha: 1.3,
        })
        .unwrap();
        let coarse = omega_estimate(&src, 2, 0.1, 8, 16, 3).unwrap();
        let fine = omega_estimate(&src, 2, 0.1, 8, 32, 3).unwrap();
        assert!(fine >= coarse);
        let small_t = omega_estimate(&src, 2, 0.05, 8, 16, 3).unwrap();
        assert!(small_t <= coarse + 1e-15);
    }

    #[test]
    fn scaling_scales_psi_exactly() {
        let field = sample_catalog(1, 5, &abs_kink()).unwrap();
        let scaled = SampleField::new(
            *field.grid(),
            field.values().iter().map(|v| 4.0 * v).collect(),
        )
        .unwrap();
        let a = discrete_modulus(&field, 2).unwrap();
        let b = discrete_modulus(&scaled, 2).unwrap();
        assert_eq!(b.value, 4.0 * a.value);
    }

    #[test]
    fn subdivision_inequality() {
        // |Delta^r_{2h}| <= 2^r max |Delta^r_h| on the same field
        let field = sample_catalog(1, 5, &abs_kink()).unwrap();
        let fine = discrete_modulus_strided(&field, 2, 1).unwrap();
        let coarse = discrete_modulus_strided(&field, 2, 2).unwrap();
        assert!(coarse.value <= 4.0 * fine.value + 1e-15);
    }
}

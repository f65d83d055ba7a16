//! Basic-cube selection and the nested tensor-product Lagrange spline
//! cascade that reconstructs a function from its dyadic mesh values.
//!
//! Stage k partitions the basic cube into `2^(dk)` dyadic subcells, each
//! carrying the tensor Lagrange interpolant of f at its `r^d` uniform
//! nodes (a single constant per cell for r = 1). All stage nodes lie on
//! dyadic meshes, so the cascade only ever reads dyadic-mesh data.

use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std; shadowed by inherent f64 methods with it
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificates::lagrange_basis_uniform;
use crate::fdiff::forward_diff;
use crate::mesh::{FunctionSource, IndexIter, POINT_TOL};
use crate::{Error, Result};

/// An axis-aligned dyadic cube `k 2^-n + s I^d` with side
/// `s = 2(r-1) 2^-n` for r >= 2, or `2 * 2^-n` (half-open) for r = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    anchor_index: Vec<u64>,
    n: u32,
    r: u32,
    half_open: bool,
}

impl Cube {
    pub fn anchor_index(&self) -> &[u64] {
        &self.anchor_index
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.r
    }

    pub fn dimension(&self) -> usize {
        self.anchor_index.len()
    }

    pub fn is_half_open(&self) -> bool {
        self.half_open
    }

    /// Side length in mesh cells of level n: `2(r-1)` for r >= 2, else 2.
    pub fn side_cells(&self) -> u64 {
        if self.r >= 2 {
            2 * (self.r as u64 - 1)
        } else {
            2
        }
    }

    pub fn side(&self) -> f64 {
        self.side_cells() as f64 / (1u64 << self.n) as f64
    }

    pub fn anchor(&self) -> Vec<f64> {
        let h = 1.0 / (1u64 << self.n) as f64;
        self.anchor_index.iter().map(|&k| k as f64 * h).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let a = self.anchor();
        let s = self.side();
        x.iter()
            .zip(a.iter())
            .all(|(&xi, &ai)| xi >= ai - POINT_TOL && xi <= ai + s + POINT_TOL)
    }
}

fn floor_u64(x: f64) -> i64 {
    x.floor() as i64
}

/// Select the basic cube containing both `u` and `u + r t e_i`.
///
/// Axis rule for r >= 2: on the left half `k_j = min(floor(2^n u_j),
/// 2^n - 2(r-1))`; on the right half the mirrored rule is applied to
/// `u_j + r t`. For r = 1 the anchor is `floor(2^n u_j)` and the cube is
/// the half-open double cell.
pub fn select_basic_cube(
    u: &[f64],
    i: usize,
    t: f64,
    r: u32,
    n: u32,
) -> Result<Cube> {
    let d = u.len();
    if i >= d {
        return Err(Error::Validation {
            detail: alloc::format!("axis {} out of range for d = {}", i, d),
        });
    }
    if n < 1 {
        return Err(Error::Constraint {
            detail: alloc::format!("level n must be at least 1"),
        });
    }
    let half_step = 0.5 / (1u64 << n) as f64;
    if !(t > 0.0 && t <= half_step + POINT_TOL) {
        return Err(Error::Constraint {
            detail: alloc::format!("needs 0 < t <= 2^-n-1: t = {t}, n = {n}"),
        });
    }
    if r >= 2 && (r as u64 - 1) > 1u64 << (n - 1) {
        return Err(Error::Constraint {
            detail: alloc::format!("needs r - 1 <= 2^(n-1): r = {r}, n = {n}"),
        });
    }
    let mut end = u.to_vec();
    end[i] += r as f64 * t;
    if !crate::mesh::in_unit_cube(u) || !crate::mesh::in_unit_cube(&end) {
        return Err(Error::Constraint {
            detail: alloc::format!("segment must stay in I^d: u = {u:?}, t = {t}"),
        });
    }
    let pow = 1u64 << n;
    let mut anchor_index = Vec::with_capacity(d);
    if r >= 2 {
        let span = 2 * (r as u64 - 1);
        let cap = (pow - span) as i64;
        for j in 0..d {
            let kj = if u[j] <= 0.5 {
                floor_u64(pow as f64 * u[j]).min(cap)
            } else {
                // mirrored rule at the advanced point u_j + r t
                let shifted = u[j] + r as f64 * t;
                let ktilde = floor_u64(pow as f64 * (1.0 - shifted)).min(cap).max(0);
                pow as i64 - ktilde - span as i64
            };
            anchor_index.push(kj.max(0) as u64);
        }
    } else {
        let cap = (pow - 2) as i64;
        for &uj in u {
            anchor_index.push(floor_u64(pow as f64 * uj).min(cap).max(0) as u64);
        }
    }
    let cube = Cube {
        anchor_index,
        n,
        r,
        half_open: r == 1,
    };
    if !cube.contains(u) || !cube.contains(&end) {
        return Err(Error::Internal {
            detail: alloc::format!("basic cube {:?} misses its segment", cube.anchor_index),
        });
    }
    if cube
        .anchor_index
        .iter()
        .any(|&k| k + cube.side_cells() > pow)
    {
        return Err(Error::Internal {
            detail: alloc::format!("basic cube {:?} leaves I^d", cube.anchor_index),
        });
    }
    Ok(cube)
}

/// A stage of the cascade: the cube partitioned into `2^(dk)` cells, each
/// carrying its tensor-product interpolant in node-value form.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSpline {
    cube: Cube,
    stage: u32,
    /// Per cell (flat lex order, last axis fastest): `r^d` node values.
    node_values: Vec<Vec<f64>>,
}

impl PiecewiseSpline {
    pub fn cube(&self) -> &Cube {
        &self.cube
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn cells_per_axis(&self) -> u64 {
        1u64 << self.stage
    }

    pub fn cell_side(&self) -> f64 {
        self.cube.side() / self.cells_per_axis() as f64
    }

    pub fn node_values(&self) -> &[Vec<f64>] {
        &self.node_values
    }

    fn d(&self) -> usize {
        self.cube.dimension()
    }

    fn r(&self) -> u32 {
        self.cube.order()
    }

    fn cell_flat(&self, c: &[u64]) -> usize {
        let cpa = self.cells_per_axis();
        let mut idx = 0u64;
        for &cj in c {
            idx = idx * cpa + cj;
        }
        idx as usize
    }

    /// Coordinates of node `w` of cell `c`.
    pub fn node_point(&self, c: &[u64], w: &[u64]) -> Vec<f64> {
        let a = self.cube.anchor();
        let delta = self.node_spacing();
        let r = self.r();
        a.iter()
            .enumerate()
            .map(|(j, &aj)| {
                let steps = if r >= 2 {
                    c[j] * (r as u64 - 1) + w[j]
                } else {
                    c[j]
                };
                aj + steps as f64 * delta
            })
            .collect()
    }

    /// Spacing between interpolation nodes, `2^-(n+k-1)`.
    pub fn node_spacing(&self) -> f64 {
        let r = self.r();
        if r >= 2 {
            self.cell_side() / (r as f64 - 1.0)
        } else {
            self.cell_side()
        }
    }

    /// Evaluate at a point of the cube. Cell-boundary ties resolve to the
    /// lexicographically smallest containing cell.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d() {
            return Err(Error::Arity {
                expected: self.d(),
                actual: x.len(),
            });
        }
        if !self.cube.contains(x) {
            return Err(Error::Domain { point: x.to_vec() });
        }
        let a = self.cube.anchor();
        let cs = self.cell_side();
        let cpa = self.cells_per_axis();
        let r = self.r();
        let mut cell = Vec::with_capacity(self.d());
        let mut local = Vec::with_capacity(self.d());
        for (j, &xj) in x.iter().enumerate() {
            let t = (xj - a[j]) / cs;
            let mut c = t.floor();
            if c == t && c > 0.0 {
                c -= 1.0; // boundary tie: smaller cell
            }
            let c = (c.max(0.0) as u64).min(cpa - 1);
            cell.push(c);
            let s = if r >= 2 {
                (xj - (a[j] + c as f64 * cs)) / self.node_spacing()
            } else {
                0.0
            };
            local.push(s);
        }
        let vals = &self.node_values[self.cell_flat(&cell)];
        if r == 1 {
            return Ok(vals[0]);
        }
        let rn = r as usize;
        let mut acc = 0.0;
        for (flat, w) in IndexIter::new(alloc::vec![rn as u64; self.d()]).enumerate() {
            let mut basis = 1.0;
            for (j, &wj) in w.iter().enumerate() {
                basis *= lagrange_basis_uniform(rn, wj as usize, local[j]);
            }
            acc += vals[flat] * basis;
        }
        Ok(acc)
    }
}

/// Interpolate `source` on the stage-k subdivision of the cube.
pub fn build_stage(
    source: &FunctionSource,
    cube: &Cube,
    stage: u32,
) -> Result<PiecewiseSpline> {
    let d = cube.dimension();
    if source.dimension() != d {
        return Err(Error::Validation {
            detail: alloc::format!(
                "source dimension {} != cube dimension {}",
                source.dimension(),
                d
            ),
        });
    }
    let r = cube.order();
    let cpa = 1u64 << stage;
    let mut spline = PiecewiseSpline {
        cube: cube.clone(),
        stage,
        node_values: Vec::with_capacity((cpa.pow(d as u32)) as usize),
    };
    let nodes_per_cell = if r >= 2 { r as u64 } else { 1 };
    for c in IndexIter::new(alloc::vec![cpa; d]) {
        let mut vals = Vec::with_capacity((nodes_per_cell.pow(d as u32)) as usize);
        for w in IndexIter::new(alloc::vec![nodes_per_cell; d]) {
            let x = spline.node_point(&c, &w);
            let v = source.eval(&x).map_err(|e| match e {
                Error::Resolution { .. } => Error::Resolution {
                    detail: alloc::format!("stage-{stage} node {x:?} is off the available mesh"),
                },
                other => other,
            })?;
            vals.push(v);
        }
        spline.node_values.push(vals);
    }
    Ok(spline)
}

/// Sampling density per axis per cell used by the sup-norm estimators.
fn samples_per_cell(r: u32) -> u64 {
    4 * r as u64
}

/// Per-axis Lagrange weights at the dense sample fractions.  The sample
/// positions are identical in every cell, so the basis values can be
/// tabulated once: entry `[m][w]` is the value of node `w`'s basis
/// polynomial at local coordinate `(offset + m/(per_axis - 1)) * span`
/// in node-spacing units, with span `r - 1` for a whole cell and
/// `(r - 1)/2` when the sample grid covers half a parent cell.
fn lagrange_table(r: u32, per_axis: u64, offset: f64, half: bool) -> Vec<Vec<f64>> {
    let rn = r as usize;
    (0..per_axis)
        .map(|m| {
            let frac = m as f64 / (per_axis - 1) as f64;
            let pos = if half { (offset + frac) * 0.5 } else { frac };
            let s = pos * (r as f64 - 1.0);
            (0..rn)
                .map(|w| lagrange_basis_uniform(rn, w, s))
                .collect()
        })
        .collect()
}

impl PiecewiseSpline {
    /// Tensor contraction of cell `c`'s node values with per-axis basis
    /// weights; the allocation-free core of the dense estimators.
    fn contract(&self, c: &[u64], weights: &[&[f64]]) -> f64 {
        let vals = &self.node_values[self.cell_flat(c)];
        let rn = self.r() as usize;
        if rn == 1 {
            return vals[0];
        }
        let mut acc = 0.0;
        // node values are stored lex, last axis fastest
        for (flat, v) in vals.iter().enumerate() {
            let mut rem = flat;
            let mut basis = 1.0;
            for wj in weights.iter().rev() {
                basis *= wj[rem % rn];
                rem /= rn;
            }
            acc += v * basis;
        }
        acc
    }
}

/// Sup-norm estimate of `next - prev` for consecutive stages on the same
/// cube, by dense per-cell sampling of the finer stage (4r points per
/// axis per cell).
pub fn stage_diff_norm(next: &PiecewiseSpline, prev: &PiecewiseSpline) -> Result<f64> {
    if next.cube != prev.cube || next.stage != prev.stage + 1 {
        return Err(Error::Validation {
            detail: alloc::format!(
                "stage pairing: expected consecutive stages on one cube, got {} and {}",
                prev.stage,
                next.stage
            ),
        });
    }
    let d = next.d();
    let r = next.r();
    let mut best = 0.0f64;
    if r == 1 {
        // both stages are piecewise constant: compare cell values directly
        for c in IndexIter::new(alloc::vec![next.cells_per_axis(); d]) {
            let pc: Vec<u64> = c.iter().map(|&cj| cj / 2).collect();
            let v = (next.node_values[next.cell_flat(&c)][0]
                - prev.node_values[prev.cell_flat(&pc)][0])
                .abs();
            if v > best {
                best = v;
            }
        }
        return Ok(best);
    }
    let per_axis = samples_per_cell(r);
    let fine = lagrange_table(r, per_axis, 0.0, false);
    // a fine cell covers the lower or upper half of its parent cell
    let coarse = [
        lagrange_table(r, per_axis, 0.0, true),
        lagrange_table(r, per_axis, 1.0, true),
    ];
    let total_m = per_axis.pow(d as u32);
    let mut wn: Vec<&[f64]> = alloc::vec![&fine[0]; d];
    let mut wp: Vec<&[f64]> = alloc::vec![&fine[0]; d];
    for c in IndexIter::new(alloc::vec![next.cells_per_axis(); d]) {
        let pc: Vec<u64> = c.iter().map(|&cj| cj / 2).collect();
        for mf in 0..total_m {
            let mut rem = mf;
            for j in (0..d).rev() {
                let mj = (rem % per_axis) as usize;
                rem /= per_axis;
                wn[j] = &fine[mj];
                wp[j] = &coarse[(c[j] & 1) as usize][mj];
            }
            let v = (next.contract(&c, &wn) - prev.contract(&pc, &wp)).abs();
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// Sup-norm estimate of `spline - source` by the same dense sampling.
pub fn sup_error(spline: &PiecewiseSpline, source: &FunctionSource) -> Result<f64> {
    let d = spline.d();
    let r = spline.r();
    let per_axis = samples_per_cell(r);
    let cs = spline.cell_side();
    let a = spline.cube.anchor();
    let table = lagrange_table(r, per_axis, 0.0, false);
    let total_m = per_axis.pow(d as u32);
    let mut w: Vec<&[f64]> = alloc::vec![&table[0]; d];
    let mut x = alloc::vec![0.0f64; d];
    let mut best = 0.0f64;
    for c in IndexIter::new(alloc::vec![spline.cells_per_axis(); d]) {
        for mf in 0..total_m {
            let mut rem = mf;
            for j in (0..d).rev() {
                let mj = (rem % per_axis) as usize;
                rem /= per_axis;
                w[j] = &table[mj];
                let frac = mj as f64 / (per_axis - 1) as f64;
                x[j] = (a[j] + (c[j] as f64 + frac) * cs).min(1.0);
            }
            let v = (spline.contract(&c, &w) - source.eval(&x)?).abs();
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// Everything the telescoping reconstruction produces for one
/// `(u, i, t, n)` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeReport {
    pub cube: Cube,
    pub r: u32,
    pub n: u32,
    pub axis: usize,
    pub t: f64,
    pub u: Vec<f64>,
    /// `||S_{n+k} - S_{n+k-1}||` for k = 1..=K.
    pub stage_diff_norms: Vec<f64>,
    /// `||S_{n+k} - f||` for k = 0..=K.
    pub reconstruction_errors: Vec<f64>,
    /// `Delta^r_{t e_i} S_n(u)`; zero up to roundoff, stage 0 being a
    /// single polynomial on the cube.
    pub stage0_diff: f64,
    /// `|Delta^r_{t e_i} f(u)|`.
    pub lhs: f64,
    /// `2^r (sum_k ||S_{n+k} - S_{n+k-1}|| + ||S_{n+K} - f||)`.
    pub telescope_bound: f64,
    pub bound_ok: bool,
}

/// Run the cascade to stage K and realize the telescoping bound.
pub fn cascade_reconstruct(
    source: &FunctionSource,
    u: &[f64],
    i: usize,
    t: f64,
    r: u32,
    n: u32,
    max_stage: u32,
) -> Result<CascadeReport> {
    let cube = select_basic_cube(u, i, t, r, n)?;
    let mut stages = Vec::with_capacity(max_stage as usize + 1);
    for k in 0..=max_stage {
        stages.push(build_stage(source, &cube, k)?);
    }
    let mut stage_diff_norms = Vec::with_capacity(max_stage as usize);
    for k in 1..=max_stage as usize {
        stage_diff_norms.push(stage_diff_norm(&stages[k], &stages[k - 1])?);
    }
    let mut reconstruction_errors = Vec::with_capacity(max_stage as usize + 1);
    for s in &stages {
        reconstruction_errors.push(sup_error(s, source)?);
    }
    // Delta^r of stage 0 and of f at u along axis i
    let mut s0_vals = Vec::with_capacity(r as usize + 1);
    let mut f_vals = Vec::with_capacity(r as usize + 1);
    for j in 0..=r as u64 {
        let mut x = u.to_vec();
        x[i] += j as f64 * t;
        s0_vals.push(stages[0].evaluate(&x)?);
        f_vals.push(source.eval(&x)?);
    }
    let stage0_diff = forward_diff(&s0_vals, r)?;
    let lhs = forward_diff(&f_vals, r)?.abs();
    let pow = (2.0f64).powi(r as i32);
    let telescope_bound = pow
        * (stage_diff_norms.iter().sum::<f64>() + reconstruction_errors.last().unwrap());
    let scale = f_vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let bound_ok = lhs <= telescope_bound + 1e-9 * scale;
    Ok(CascadeReport {
        cube,
        r,
        n,
        axis: i,
        t,
        u: u.to_vec(),
        stage_diff_norms,
        reconstruction_errors,
        stage0_diff,
        lhs,
        telescope_bound,
        bound_ok,
    })
}

/// A two-cell piecewise polynomial hypothesis set for the d-dimensional
/// lemma: values on the `(2r-1)^d` integer-offset grid with zeros forced
/// at all-even multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaInstance {
    pub r: u32,
    pub d: usize,
    pub h: f64,
    pub anchor: Vec<f64>,
    /// Lattice values, flat lex order, last axis fastest, `(2r-1)^d` long.
    pub node_values: Vec<f64>,
}

impl LemmaInstance {
    /// Points per axis of the value lattice, `2r - 1`.
    pub fn lattice_per_axis(&self) -> u64 {
        2 * self.r as u64 - 1
    }

    fn lattice_flat(&self, k: &[u64]) -> usize {
        let ppa = self.lattice_per_axis();
        let mut idx = 0u64;
        for &kj in k {
            idx = idx * ppa + kj;
        }
        idx as usize
    }

    pub fn node_value(&self, k: &[u64]) -> f64 {
        self.node_values[self.lattice_flat(k)]
    }

    /// Evaluate the induced g at lattice coordinates `y` in `[0, 2(r-1)]^d`
    /// (units of h from the anchor).
    pub fn eval_lattice(&self, y: &[f64]) -> f64 {
        let r = self.r as usize;
        let span = (self.r - 1) as f64;
        let mut cell = Vec::with_capacity(self.d);
        let mut local = Vec::with_capacity(self.d);
        for &yj in y {
            let v = if yj <= span { 0u64 } else { 1u64 };
            cell.push(v);
            local.push(yj - v as f64 * span);
        }
        let mut acc = 0.0;
        for w in IndexIter::new(alloc::vec![r as u64; self.d]) {
            let mut basis = 1.0;
            for (j, &wj) in w.iter().enumerate() {
                basis *= lagrange_basis_uniform(r, wj as usize, local[j]);
            }
            let node: Vec<u64> = w
                .iter()
                .zip(cell.iter())
                .map(|(&wj, &vj)| vj * (self.r as u64 - 1) + wj)
                .collect();
            acc += self.node_value(&node) * basis;
        }
        acc
    }

    /// Dense sup-norm of g over the instance cube, `density` points per
    /// axis per cell.
    pub fn dense_sup_norm(&self, density: u32) -> f64 {
        let span = (self.r - 1) as f64;
        let mut best = 0.0f64;
        for v in IndexIter::new(alloc::vec![2u64; self.d]) {
            for m in IndexIter::new(alloc::vec![density as u64; self.d]) {
                let y: Vec<f64> = (0..self.d)
                    .map(|j| {
                        let frac = m[j] as f64 / (density - 1) as f64;
                        (v[j] as f64 + frac) * span
                    })
                    .collect();
                let g = self.eval_lattice(&y).abs();
                if g > best {
                    best = g;
                }
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        let expected = self.lattice_per_axis().pow(self.d as u32);
        if self.node_values.len() as u64 != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: self.node_values.len() as u64,
            });
        }
        for (flat, k) in IndexIter::new(alloc::vec![self.lattice_per_axis(); self.d]).enumerate()
        {
            if k.iter().all(|&c| c % 2 == 0) && self.node_values[flat] != 0.0 {
                return Err(Error::Validation {
                    detail: alloc::format!(
                        "nonzero value {} at all-even node {:?}",
                        self.node_values[flat],
                        k
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Build a valid lemma instance: zeros at all-even offsets, caller values
/// or seeded uniform [-1, 1] elsewhere.
pub fn make_lemma_instance(
    r: u32,
    d: usize,
    h: f64,
    anchor: Vec<f64>,
    values: Option<Vec<f64>>,
    seed: u64,
) -> Result<LemmaInstance> {
    if r < 2 {
        return Err(Error::Validation {
            detail: alloc::format!("lemma instances need r >= 2 (r = 1 is the trivial path)"),
        });
    }
    if anchor.len() != d {
        return Err(Error::Arity {
            expected: d,
            actual: anchor.len(),
        });
    }
    let ppa = 2 * r as u64 - 1;
    let count = ppa.pow(d as u32) as usize;
    let node_values = match values {
        Some(v) => v,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut vals = Vec::with_capacity(count);
            for k in IndexIter::new(alloc::vec![ppa; d]) {
                if k.iter().all(|&c| c % 2 == 0) {
                    vals.push(0.0);
                } else {
                    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                    vals.push(2.0 * u - 1.0);
                }
            }
            vals
        }
    };
    let instance = LemmaInstance {
        r,
        d,
        h,
        anchor,
        node_values,
    };
    instance.validate()?;
    Ok(instance)
}

//! Dyadic grids on the unit cube, multi-index iteration, sample fields and
//! the built-in function catalog.
//!
//! Mesh points of the level-n grid in dimension d are `2^-n * k` for integer
//! multi-indices `0 <= k_j <= 2^n`. Values are stored flat in lexicographic
//! order with the last axis varying fastest.

mod catalog;

pub use catalog::Catalog;

use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std; shadowed by inherent f64 methods with it
use num_traits::Float;

use crate::{Error, Result};

/// Coordinate tolerance for membership checks on `[0,1]^d`.
pub const POINT_TOL: f64 = 1e-12;

/// Maximum dimension handled at desk scale.
pub const MAX_DIM: usize = 4;

/// Per-dimension level cap: `n <= 24 / d` keeps fields within memory.
pub fn max_level(d: usize) -> u32 {
    (24 / d) as u32
}

/// The dyadic grid of level `n` on `I^d`, with `(2^n + 1)^d` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicGrid {
    d: usize,
    n: u32,
}

impl DyadicGrid {
    pub fn new(d: usize, n: u32) -> Result<Self> {
        if d < 1 || d > MAX_DIM {
            return Err(Error::Capacity {
                what: "dimension d",
                value: d as u64,
                limit: MAX_DIM as u64,
            });
        }
        if n > max_level(d) {
            return Err(Error::Capacity {
                what: "level n",
                value: n as u64,
                limit: max_level(d) as u64,
            });
        }
        Ok(DyadicGrid { d, n })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    /// Number of mesh points per axis, `2^n + 1`.
    pub fn points_per_axis(&self) -> u64 {
        (1u64 << self.n) + 1
    }

    /// Largest admissible index per axis, `2^n`.
    pub fn max_index(&self) -> u64 {
        1u64 << self.n
    }

    /// Total number of mesh points, `(2^n + 1)^d`.
    pub fn point_count(&self) -> u64 {
        self.points_per_axis().pow(self.d as u32)
    }

    /// Mesh spacing `2^-n`.
    pub fn spacing(&self) -> f64 {
        1.0 / (1u64 << self.n) as f64
    }

    /// Coordinates of the mesh point with multi-index `k`.
    pub fn point(&self, k: &[u64]) -> Vec<f64> {
        debug_assert_eq!(k.len(), self.d);
        let h = self.spacing();
        k.iter().map(|&kj| kj as f64 * h).collect()
    }

    /// Stride of axis `i` in the flat layout (last axis fastest).
    pub fn stride(&self, i: usize) -> u64 {
        self.points_per_axis().pow((self.d - 1 - i) as u32)
    }

    /// Flat index of multi-index `k` (lexicographic, last axis fastest).
    pub fn flat(&self, k: &[u64]) -> u64 {
        let ppa = self.points_per_axis();
        let mut idx = 0u64;
        for &kj in k {
            debug_assert!(kj < ppa);
            idx = idx * ppa + kj;
        }
        idx
    }

    /// Multi-index of flat index `idx`.
    pub fn unflat(&self, mut idx: u64) -> Vec<u64> {
        let ppa = self.points_per_axis();
        let mut k = alloc::vec![0u64; self.d];
        for j in (0..self.d).rev() {
            k[j] = idx % ppa;
            idx /= ppa;
        }
        k
    }

    /// Iterate all multi-indices in flat order.
    pub fn indices(&self) -> IndexIter {
        IndexIter::new(alloc::vec![self.points_per_axis(); self.d])
    }
}

/// Iterator over multi-indices of a rectangular lattice, last axis fastest.
pub struct IndexIter {
    dims: Vec<u64>,
    cur: Vec<u64>,
    done: bool,
}

impl IndexIter {
    pub fn new(dims: Vec<u64>) -> Self {
        let done = dims.iter().any(|&m| m == 0);
        let cur = alloc::vec![0u64; dims.len()];
        IndexIter { dims, cur, done }
    }
}

impl Iterator for IndexIter {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        // odometer increment, last axis fastest
        let mut j = self.dims.len();
        loop {
            if j == 0 {
                self.done = true;
                break;
            }
            j -= 1;
            self.cur[j] += 1;
            if self.cur[j] < self.dims[j] {
                break;
            }
            self.cur[j] = 0;
        }
        Some(out)
    }
}

/// Values of a function on a dyadic mesh, flat lex order, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleField {
    grid: DyadicGrid,
    values: Vec<f64>,
}

impl SampleField {
    pub fn new(grid: DyadicGrid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.point_count();
        if values.len() as u64 != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len() as u64,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i as u64 });
        }
        Ok(SampleField { grid, values })
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, k: &[u64]) -> f64 {
        self.values[self.grid.flat(k) as usize]
    }

    /// Max absolute sample value; the natural scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// A function on `I^d`: either a catalog entry evaluable anywhere, or a
/// sampled field evaluable only at its mesh points.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSource {
    Analytic { d: usize, f: Catalog },
    Sampled(SampleField),
}

impl FunctionSource {
    pub fn analytic(d: usize, f: Catalog) -> Result<Self> {
        if d < 1 || d > MAX_DIM {
            return Err(Error::Capacity {
                what: "dimension d",
                value: d as u64,
                limit: MAX_DIM as u64,
            });
        }
        f.validate(d)?;
        Ok(FunctionSource::Analytic { d, f })
    }

    pub fn dimension(&self) -> usize {
        match self {
            FunctionSource::Analytic { d, .. } => *d,
            FunctionSource::Sampled(field) => field.grid().dimension(),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, FunctionSource::Analytic { .. })
    }

    /// Evaluate at an arbitrary point of `I^d`. Sampled sources accept only
    /// their own mesh points (within `POINT_TOL`).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::Arity {
                expected: self.dimension(),
                actual: x.len(),
            });
        }
        if x.iter().any(|&c| c < -POINT_TOL || c > 1.0 + POINT_TOL) {
            return Err(Error::Domain { point: x.to_vec() });
        }
        match self {
            FunctionSource::Analytic { f, .. } => {
                let clamped: Vec<f64> = x.iter().map(|&c| c.max(0.0).min(1.0)).collect();
                Ok(f.eval(&clamped))
            }
            FunctionSource::Sampled(field) => {
                let scale = (1u64 << field.grid().level()) as f64;
                let mut k = Vec::with_capacity(x.len());
                for (j, &c) in x.iter().enumerate() {
                    let t = c * scale;
                    let kj = t.round();
                    if (t - kj).abs() > 1e-9 {
                        return Err(Error::Resolution {
                            detail: alloc::format!(
                                "coordinate {} of {:?} is off the level-{} mesh",
                                j,
                                x,
                                field.grid().level()
                            ),
                        });
                    }
                    k.push(kj as u64);
                }
                Ok(field.value_at(&k))
            }
        }
    }
}

/// Restrict a source to the given grid.
///
/// Sampled sources of a finer level are sub-sampled by index stride
/// `2^(n_src - n)`; a coarser sampled source is a resolution error.
pub fn sample(source: &FunctionSource, grid: DyadicGrid) -> Result<SampleField> {
    if source.dimension() != grid.dimension() {
        return Err(Error::Validation {
            detail: alloc::format!(
                "source dimension {} != grid dimension {}",
                source.dimension(),
                grid.dimension()
            ),
        });
    }
    match source {
        FunctionSource::Analytic { f, .. } => {
            let mut values = Vec::with_capacity(grid.point_count() as usize);
            for k in grid.indices() {
                values.push(f.eval(&grid.point(&k)));
            }
            SampleField::new(grid, values)
        }
        FunctionSource::Sampled(field) => {
            let n_src = field.grid().level();
            if n_src < grid.level() {
                return Err(Error::Resolution {
                    detail: alloc::format!(
                        "sampled source of level {} cannot supply level {}",
                        n_src,
                        grid.level()
                    ),
                });
            }
            let stride = 1u64 << (n_src - grid.level());
            let mut values = Vec::with_capacity(grid.point_count() as usize);
            for k in grid.indices() {
                let src_k: Vec<u64> = k.iter().map(|&kj| kj * stride).collect();
                values.push(field.value_at(&src_k));
            }
            SampleField::new(grid, values)
        }
    }
}

/// Convenience: `make_grid` + `sample` for an analytic catalog entry.
pub fn sample_catalog(d: usize, n: u32, f: &Catalog) -> Result<SampleField> {
    let source = FunctionSource::analytic(d, f.clone())?;
    sample(&source, DyadicGrid::new(d, n)?)
}

/// Check that a point lies in `I^d` within `POINT_TOL`.
pub fn in_unit_cube(x: &[f64]) -> bool {
    x.iter().all(|&c| c >= -POINT_TOL && c <= 1.0 + POINT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_d1_n0_endpoints() {
        let g = DyadicGrid::new(1, 0).unwrap();
        assert_eq!(g.point_count(), 2);
        assert_eq!(g.point(&[0]), alloc::vec![0.0]);
        assert_eq!(g.point(&[1]), alloc::vec![1.0]);
    }

    #[test]
    fn grid_d2_n1_nine_points() {
        let g = DyadicGrid::new(2, 1).unwrap();
        assert_eq!(g.point_count(), 9);
        assert_eq!(g.point(&[1, 1]), alloc::vec![0.5, 0.5]);
    }

    #[test]
    fn grid_d3_n5_count() {
        let g = DyadicGrid::new(3, 5).unwrap();
        assert_eq!(g.point_count(), 33u64.pow(3));
        assert_eq!(g.point_count(), 35937);
    }

    #[test]
    fn grid_caps() {
        assert!(matches!(
            DyadicGrid::new(5, 1),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            DyadicGrid::new(2, 13),
            Err(Error::Capacity { .. })
        ));
        assert!(DyadicGrid::new(2, 12).is_ok());
    }

    #[test]
    fn flat_unflat_bijection() {
        for d in 1..=3 {
            for n in 0..=4u32 {
                let g = DyadicGrid::new(d, n).unwrap();
                for (i, k) in g.indices().enumerate() {
                    assert_eq!(g.flat(&k), i as u64);
                    assert_eq!(g.unflat(i as u64), k);
                }
            }
        }
    }

    #[test]
    fn sample_identity_function() {
        let f = Catalog::poly(alloc::vec![(alloc::vec![1], 1.0)]);
        let field = sample_catalog(1, 1, &f).unwrap();
        assert_eq!(field.values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn sample_corner_product() {
        let f = Catalog::DiagBilinear;
        let field = sample_catalog(2, 1, &f).unwrap();
        let g = field.grid();
        assert_eq!(field.values()[g.flat(&[2, 2]) as usize], 1.0);
    }

    #[test]
    fn sample_abs_kink() {
        let f = Catalog::AbsPower {
            axis: 0,
            center: 0.5,
            alpha: 1.0,
        };
        let field = sample_catalog(1, 2, &f).unwrap();
        assert_eq!(field.values(), &[0.5, 0.25, 0.0, 0.25, 0.5]);
    }

    #[test]
    fn subsampling_consistency() {
        let f = Catalog::RadialPower {
            center: alloc::vec![0.25, 0.75],
            alpha: 1.5,
        };
        let fine = sample_catalog(2, 4, &f).unwrap();
        let coarse_direct = sample_catalog(2, 3, &f).unwrap();
        let coarse_sub = sample(
            &FunctionSource::Sampled(fine),
            DyadicGrid::new(2, 3).unwrap(),
        )
        .unwrap();
        assert_eq!(coarse_direct.values(), coarse_sub.values());
    }

    #[test]
    fn coarser_sampled_source_rejected() {
        let f = Catalog::DiagBilinear;
        let coarse = sample_catalog(2, 2, &f).unwrap();
        let err = sample(
            &FunctionSource::Sampled(coarse),
            DyadicGrid::new(2, 3).unwrap(),
        );
        assert!(matches!(err, Err(Error::Resolution { .. })));
    }

    #[test]
    fn field_rejects_bad_length_and_nonfinite() {
        let g = DyadicGrid::new(1, 2).unwrap();
        assert_eq!(
            SampleField::new(g, alloc::vec![0.0; 4]),
            Err(Error::LengthMismatch {
                expected: 5,
                actual: 4
            })
        );
        let mut v = alloc::vec![0.0; 5];
        v[3] = f64::NAN;
        assert_eq!(SampleField::new(g, v), Err(Error::NonFinite { index: 3 }));
    }

    #[test]
    fn sampled_source_rejects_off_mesh() {
        let f = Catalog::DiagBilinear;
        let field = sample_catalog(2, 2, &f).unwrap();
        let src = FunctionSource::Sampled(field);
        assert!(src.eval(&[0.25, 0.5]).is_ok());
        assert!(matches!(
            src.eval(&[0.3, 0.5]),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn catalog_determinism() {
        let f = Catalog::WeierstrassTruncated {
            a: 0.5,
            b: 3.0,
            terms: 12,
        };
        let pts: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
        let first: Vec<f64> = pts.iter().map(|&x| f.eval(&[x])).collect();
        for _ in 0..3 {
            let again: Vec<f64> = pts.iter().map(|&x| f.eval(&[x])).collect();
            assert_eq!(first, again);
        }
    }
}

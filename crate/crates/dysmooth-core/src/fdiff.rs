//! Forward finite differences `Delta^r_h` in one direction.
//!
//! `Delta^r_h f(x) = sum_{k=0}^r (-1)^(r-k) C(r,k) f(x + k h)`. The operator
//! annihilates polynomials of degree `< r` along the step direction.

use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std; shadowed by inherent f64 methods with it
use num_traits::Float;

use crate::mesh::{FunctionSource, SampleField, POINT_TOL};
use crate::{Error, Result};

/// Largest difference order; keeps all binomials exact in 64-bit integers.
pub const MAX_ORDER: u32 = 30;

/// Binomial row `C(r, 0..=r)` as exact 64-bit integers, `r <= 30`.
pub fn binomial_row(r: u32) -> Result<Vec<i64>> {
    if r > MAX_ORDER {
        return Err(Error::Capacity {
            what: "difference order r",
            value: r as u64,
            limit: MAX_ORDER as u64,
        });
    }
    let mut row = alloc::vec![0i64; r as usize + 1];
    row[0] = 1;
    for i in 1..=r as usize {
        for j in (1..=i).rev() {
            row[j] += row[j - 1];
        }
    }
    Ok(row)
}

/// Step direction of a difference request: a coordinate axis or an
/// arbitrary unit vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Axis(usize),
    Vector(Vec<f64>),
}

/// An order-r difference along `direction` with step `step`, based at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffRequest {
    pub r: u32,
    pub direction: Direction,
    pub step: f64,
    pub base: Vec<f64>,
}

impl DiffRequest {
    /// Unit vector of the direction in dimension `d`.
    pub fn unit(&self, d: usize) -> Result<Vec<f64>> {
        match &self.direction {
            Direction::Axis(i) => {
                if *i >= d {
                    return Err(Error::Validation {
                        detail: alloc::format!("axis {} out of range for d = {}", i, d),
                    });
                }
                let mut e = alloc::vec![0.0; d];
                e[*i] = 1.0;
                Ok(e)
            }
            Direction::Vector(e) => {
                if e.len() != d {
                    return Err(Error::Arity {
                        expected: d,
                        actual: e.len(),
                    });
                }
                let norm: f64 = e.iter().map(|c| c * c).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > POINT_TOL {
                    return Err(Error::Validation {
                        detail: alloc::format!("direction norm {} is not 1", norm),
                    });
                }
                Ok(e.clone())
            }
        }
    }
}

/// `sum_{k=0}^r (-1)^(r-k) C(r,k) values[k]` over exactly `r + 1` values.
///
/// Alternating-sign cancellation grows with r, so Kahan-compensated
/// summation is used from r = 8 up.
pub fn forward_diff(values: &[f64], r: u32) -> Result<f64> {
    let row = binomial_row(r)?;
    if values.len() != r as usize + 1 {
        return Err(Error::Arity {
            expected: r as usize + 1,
            actual: values.len(),
        });
    }
    if r < 8 {
        let mut acc = 0.0;
        for (k, &v) in values.iter().enumerate() {
            let sign = if (r as usize - k) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * row[k] as f64 * v;
        }
        Ok(acc)
    } else {
        let mut acc = 0.0;
        let mut comp = 0.0;
        for (k, &v) in values.iter().enumerate() {
            let sign = if (r as usize - k) % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * row[k] as f64 * v - comp;
            let next = acc + term;
            comp = (next - acc) - term;
            acc = next;
        }
        Ok(acc)
    }
}

/// Order-r difference of mesh values along axis `i`, stepping `stride`
/// mesh cells per difference step (step `h = stride * 2^-n`).
pub fn grid_diff(
    field: &SampleField,
    k: &[u64],
    i: usize,
    r: u32,
    stride: u64,
) -> Result<f64> {
    let grid = field.grid();
    let d = grid.dimension();
    if i >= d || k.len() != d {
        return Err(Error::Validation {
            detail: alloc::format!("axis {} / index arity invalid for d = {}", i, d),
        });
    }
    let max = grid.max_index();
    for (j, &kj) in k.iter().enumerate() {
        let reach = if j == i { r as u64 * stride } else { 0 };
        if kj + reach > max {
            return Err(Error::Bounds {
                axis: j,
                index: kj,
                offset: reach,
                max,
            });
        }
    }
    let base = grid.flat(k);
    let step = grid.stride(i) * stride;
    let vals: Vec<f64> = (0..=r as u64)
        .map(|j| field.values()[(base + j * step) as usize])
        .collect();
    forward_diff(&vals, r)
}

/// Order-r difference of an analytic source at arbitrary base, step and
/// direction. The whole segment must stay inside `I^d`.
pub fn continuous_diff(source: &FunctionSource, req: &DiffRequest) -> Result<f64> {
    if !source.is_analytic() {
        return Err(Error::Validation {
            detail: alloc::format!("continuous_diff needs an analytic source"),
        });
    }
    let d = source.dimension();
    let e = req.unit(d)?;
    if req.step <= 0.0 {
        return Err(Error::Validation {
            detail: alloc::format!("step must be positive, got {}", req.step),
        });
    }
    let mut vals = Vec::with_capacity(req.r as usize + 1);
    for j in 0..=req.r {
        let x: Vec<f64> = req
            .base
            .iter()
            .zip(e.iter())
            .map(|(b, ej)| b + j as f64 * req.step * ej)
            .collect();
        if !crate::mesh::in_unit_cube(&x) {
            return Err(Error::Domain { point: x });
        }
        vals.push(source.eval(&x)?);
    }
    forward_diff(&vals, req.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{sample_catalog, Catalog, FunctionSource};

    #[test]
    fn binomials_exact() {
        assert_eq!(binomial_row(4).unwrap(), alloc::vec![1, 4, 6, 4, 1]);
        assert_eq!(binomial_row(30).unwrap()[15], 155117520);
        assert!(binomial_row(31).is_err());
    }

    #[test]
    fn constant_annihilated() {
        assert_eq!(forward_diff(&[3.0, 3.0], 1).unwrap(), 0.0);
    }

    #[test]
    fn second_diff_of_square_values() {
        // values of x^2 at 0, 1, 2
        assert_eq!(forward_diff(&[0.0, 1.0, 4.0], 2).unwrap(), 2.0);
    }

    #[test]
    fn xr_gives_r_factorial_h_r() {
        // Delta^r_h x^r = r! h^r, checked for r <= 5 and a few (a, h)
        for r in 1..=5u32 {
            for &(a, h) in &[(0.0, 0.1), (0.3, 0.05), (0.1, 0.125)] {
                let vals: Vec<f64> = (0..=r)
                    .map(|k| {
                        let x: f64 = a + k as f64 * h;
                        x.powi(r as i32)
                    })
                    .collect();
                let got = forward_diff(&vals, r).unwrap();
                let fact: f64 = (1..=r).map(|k| k as f64).product();
                let want = fact * h.powi(r as i32);
                assert!((got - want).abs() < 1e-12, "r={r} got={got} want={want}");
            }
        }
    }

    #[test]
    fn wrong_arity_rejected() {
        assert!(matches!(
            forward_diff(&[1.0, 2.0, 3.0], 1),
            Err(Error::Arity {
                expected: 2,
                actual: 3
            })
        ));
    }

    #[test]
    fn grid_diff_square() {
        // f(x) = x^2, n = 2, k = 0, r = 2 -> 2 (1/4)^2 = 0.125
        let f = Catalog::monomial(1, 0, 2);
        let field = sample_catalog(1, 2, &f).unwrap();
        let v = grid_diff(&field, &[0], 0, 2, 1).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
    }

    #[test]
    fn grid_diff_out_of_range() {
        let f = Catalog::monomial(1, 0, 1);
        let field = sample_catalog(1, 2, &f).unwrap();
        assert!(matches!(
            grid_diff(&field, &[4], 0, 1, 1),
            Err(Error::Bounds { axis: 0, .. })
        ));
    }

    #[test]
    fn grid_diff_bilinear_zero() {
        let f = Catalog::DiagBilinear;
        let field = sample_catalog(2, 3, &f).unwrap();
        for i in 0..2 {
            for k in field.grid().indices() {
                if k[i] + 2 <= field.grid().max_index() {
                    assert!(grid_diff(&field, &k, i, 2, 1).unwrap().abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn continuous_diff_bilinear_diagonal() {
        // Delta^2 along the diagonal of xy with per-axis increment s is 2 s^2
        let src = FunctionSource::analytic(2, Catalog::DiagBilinear).unwrap();
        let s = 0.05;
        let inv = 1.0 / core::f64::consts::SQRT_2;
        let req = DiffRequest {
            r: 2,
            direction: Direction::Vector(alloc::vec![inv, inv]),
            step: s * core::f64::consts::SQRT_2,
            base: alloc::vec![0.1, 0.2],
        };
        let got = continuous_diff(&src, &req).unwrap();
        assert!((got - 2.0 * s * s).abs() < 1e-14);
    }

    #[test]
    fn continuous_diff_slope_one() {
        let src = FunctionSource::analytic(1, Catalog::monomial(1, 0, 1)).unwrap();
        let req = DiffRequest {
            r: 1,
            direction: Direction::Axis(0),
            step: 0.25,
            base: alloc::vec![0.5],
        };
        assert!((continuous_diff(&src, &req).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn continuous_diff_leaving_domain() {
        let src = FunctionSource::analytic(1, Catalog::monomial(1, 0, 1)).unwrap();
        let req = DiffRequest {
            r: 2,
            direction: Direction::Axis(0),
            step: 0.4,
            base: alloc::vec![0.5],
        };
        match continuous_diff(&src, &req) {
            Err(Error::Domain { point }) => assert!(point[0] > 1.0),
            other => panic!("expected domain error, got {other:?}"),
        }
    }
}

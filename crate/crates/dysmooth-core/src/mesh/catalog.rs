use alloc::vec::Vec;
#[allow(unused_imports)] // needed without std; shadowed by inherent f64 methods with it
use num_traits::Float;

use crate::{Error, Result};

/// Built-in test functions on `I^d`.
///
/// The catalog spans polynomial, axis-kink, off-axis and fractal-like
/// regularity so every decay regime of the moduli is reachable.
#[derive(Debug, Clone, PartialEq)]
pub enum Catalog {
    /// `sum c * x_1^e1 * ... * x_d^ed`; one `(exponents, coefficient)` pair
    /// per monomial.
    Poly { terms: Vec<(Vec<u32>, f64)> },
    /// `|x_axis - center|^alpha` (axis is 0-based).
    AbsPower {
        axis: usize,
        center: f64,
        alpha: f64,
    },
    /// `||x - center||_2^alpha`.
    RadialPower { center: Vec<f64>, alpha: f64 },
    /// `x_1 * x_2`; the witness that the `t^r ||f||` term is not redundant.
    DiagBilinear,
    /// Truncated Weierstrass series
    /// `sum_{m=0}^{terms} a^m cos(b^m pi x_1)`, `a in (0,1)`, `a*b >= 1`.
    WeierstrassTruncated { a: f64, b: f64, terms: u32 },
}

impl Catalog {
    pub fn poly(terms: Vec<(Vec<u32>, f64)>) -> Self {
        Catalog::Poly { terms }
    }

    /// The monomial `x_axis^p` in dimension `d` (axis 0-based).
    pub fn monomial(d: usize, axis: usize, p: u32) -> Self {
        let mut e = alloc::vec![0u32; d];
        e[axis] = p;
        Catalog::Poly {
            terms: alloc::vec![(e, 1.0)],
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            Catalog::Poly { terms } => {
                for (exps, c) in terms {
                    if exps.len() != d {
                        return Err(Error::Validation {
                            detail: alloc::format!(
                                "poly term has {} exponents, dimension is {}",
                                exps.len(),
                                d
                            ),
                        });
                    }
                    if !c.is_finite() {
                        return Err(Error::Validation {
                            detail: alloc::format!("non-finite poly coefficient"),
                        });
                    }
                }
                Ok(())
            }
            Catalog::AbsPower { axis, center, alpha } => {
                if *axis >= d {
                    return Err(Error::Validation {
                        detail: alloc::format!("abs-power axis {} out of range for d = {}", axis, d),
                    });
                }
                if !(*alpha > 0.0) || !center.is_finite() {
                    return Err(Error::Validation {
                        detail: alloc::format!("abs-power needs alpha > 0 and finite center"),
                    });
                }
                Ok(())
            }
            Catalog::RadialPower { center, alpha } => {
                if center.len() != d {
                    return Err(Error::Validation {
                        detail: alloc::format!(
                            "radial-power center has {} coordinates, dimension is {}",
                            center.len(),
                            d
                        ),
                    });
                }
                if !(*alpha > 0.0) {
                    return Err(Error::Validation {
                        detail: alloc::format!("radial-power needs alpha > 0"),
                    });
                }
                Ok(())
            }
            Catalog::DiagBilinear => {
                if d < 2 {
                    return Err(Error::Validation {
                        detail: alloc::format!("diag-bilinear needs d >= 2"),
                    });
                }
                Ok(())
            }
            Catalog::WeierstrassTruncated { a, b, terms } => {
                if !(*a > 0.0 && *a < 1.0) || !(*a * *b >= 1.0) || *terms > 30 {
                    return Err(Error::Validation {
                        detail: alloc::format!(
                            "weierstrass-truncated needs a in (0,1), a*b >= 1, terms <= 30"
                        ),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Catalog::Poly { terms } => {
                let mut acc = 0.0;
                for (exps, c) in terms {
                    let mut t = *c;
                    for (xj, &e) in x.iter().zip(exps.iter()) {
                        t *= xj.powi(e as i32);
                    }
                    acc += t;
                }
                acc
            }
            Catalog::AbsPower { axis, center, alpha } => {
                let u = (x[*axis] - center).abs();
                if *alpha == 1.0 {
                    u
                } else {
                    u.powf(*alpha)
                }
            }
            Catalog::RadialPower { center, alpha } => {
                let mut s = 0.0;
                for (xj, cj) in x.iter().zip(center.iter()) {
                    s += (xj - cj) * (xj - cj);
                }
                s.sqrt().powf(*alpha)
            }
            Catalog::DiagBilinear => x[0] * x[1],
            Catalog::WeierstrassTruncated { a, b, terms } => {
                let mut acc = 0.0;
                let mut am = 1.0;
                let mut bm = 1.0;
                for _ in 0..=*terms {
                    acc += am * (bm * core::f64::consts::PI * x[0]).cos();
                    am *= a;
                    bm *= b;
                }
                acc
            }
        }
    }

    /// Designed Hölder exponent where one is known in closed form.
    pub fn designed_alpha(&self) -> Option<f64> {
        match self {
            Catalog::AbsPower { alpha, .. } | Catalog::RadialPower { alpha, .. } => Some(*alpha),
            Catalog::WeierstrassTruncated { a, b, .. } => Some(-(a.ln()) / b.ln()),
            _ => None,
        }
    }

    /// True when every monomial has coordinate degree `< r` in each
    /// variable, i.e. the function lies in `P_{r,d}`.
    pub fn in_poly_class(&self, r: u32) -> bool {
        match self {
            Catalog::Poly { terms } => terms
                .iter()
                .all(|(exps, _)| exps.iter().all(|&e| e < r)),
            Catalog::DiagBilinear => r >= 2,
            _ => false,
        }
    }
}

//! Sample files, profile CSV and the decay chart.
//!
//! Sample files are JSON: `{"dimension": d, "level": n, "order":
//! "lex-last-fastest", "values": [...]}` with exactly `(2^n + 1)^d` values.
//! Values are written with 17 significant digits so a store/load round
//! trip is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dysmooth_core::analysis::DecayFit;
use dysmooth_core::mesh::{DyadicGrid, SampleField};
use dysmooth_core::moduli::ModulusProfile;
use dysmooth_core::{Error, Result};
use serde::Deserialize;

pub const SAMPLE_ORDER: &str = "lex-last-fastest";

#[derive(Deserialize)]
struct SampleFile {
    dimension: usize,
    level: u32,
    order: String,
    values: Vec<serde_json::Value>,
}

/// Write a field to `path` in the sample JSON format.
pub fn store_samples(field: &SampleField, path: &Path) -> Result<()> {
    let mut out = String::new();
    write!(
        out,
        "{{\n  \"dimension\": {},\n  \"level\": {},\n  \"order\": \"{}\",\n  \"values\": [",
        field.grid().dimension(),
        field.grid().level(),
        SAMPLE_ORDER
    )
    .unwrap();
    for (i, v) in field.values().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // 17 significant digits: enough for a bit-exact f64 round trip
        write!(out, "\n    {:.16e}", v).unwrap();
    }
    out.push_str("\n  ]\n}\n");
    fs::write(path, out).map_err(|e| Error::Validation {
        detail: format!("cannot write {}: {e}", path.display()),
    })
}

/// Read a field from a sample JSON file, validating shape and finiteness.
pub fn load_samples(path: &Path) -> Result<SampleField> {
    let text = fs::read_to_string(path).map_err(|e| Error::Validation {
        detail: format!("cannot read {}: {e}", path.display()),
    })?;
    let file: SampleFile = serde_json::from_str(&text).map_err(|e| Error::Validation {
        detail: format!("{}: not a valid sample file: {e}", path.display()),
    })?;
    if file.order != SAMPLE_ORDER {
        return Err(Error::Validation {
            detail: format!(
                "{}: unsupported value order {:?}, expected {:?}",
                path.display(),
                file.order,
                SAMPLE_ORDER
            ),
        });
    }
    let grid = DyadicGrid::new(file.dimension, file.level)?;
    let mut values = Vec::with_capacity(file.values.len());
    for (i, v) in file.values.iter().enumerate() {
        match v.as_f64() {
            Some(x) if x.is_finite() => values.push(x),
            _ => return Err(Error::NonFinite { index: i as u64 }),
        }
    }
    SampleField::new(grid, values)
}

/// Profile rows as CSV: `n, psi, psi_axis_1..d`.
pub fn profile_csv(profile: &ModulusProfile) -> String {
    let mut out = String::from("n,psi");
    for i in 1..=profile.d {
        write!(out, ",psi_axis_{i}").unwrap();
    }
    out.push('\n');
    for n in profile.levels() {
        let idx = (n - profile.n_min) as usize;
        write!(out, "{n},{:.17e}", profile.psi[idx]).unwrap();
        for v in &profile.per_axis[idx] {
            write!(out, ",{:.17e}", v).unwrap();
        }
        out.push('\n');
    }
    out
}

/// A log2-log2 decay chart: points (n, log2 psi), an optional fitted line
/// `log2 M - alpha n`, and axis labels. Self-contained static SVG.
pub fn decay_svg(profile: &ModulusProfile, fit: Option<&DecayFit>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 55.0;
    let pts: Vec<(f64, f64)> = profile
        .levels()
        .filter_map(|n| {
            let psi = profile.psi_at(n)?;
            (psi > 0.0).then(|| (n as f64, psi.log2()))
        })
        .collect();
    let x0 = profile.n_min as f64;
    let x1 = (profile.n_max as f64).max(x0 + 1.0);
    let (mut y0, mut y1) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    if pts.is_empty() {
        y0 = -1.0;
        y1 = 1.0;
    } else if y1 - y0 < 1.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);
    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    )
    .unwrap();
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    )
    .unwrap();
    write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    )
    .unwrap();
    // tick labels at integer levels
    for n in profile.levels() {
        let x = sx(n as f64);
        write!(
            svg,
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{n}</text>\n",
            H - MB + 18.0
        )
        .unwrap();
    }
    for k in 0..=4 {
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{y:.1}</text>\n",
            ML - 8.0,
            sy(y) + 4.0
        )
        .unwrap();
    }
    write!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">n  (step 2^-n)</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0
    )
    .unwrap();
    write!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">log2 psi</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    )
    .unwrap();
    // data polyline and markers
    if pts.len() > 1 {
        let path: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
            .collect();
        write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        )
        .unwrap();
    }
    for p in &pts {
        write!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n",
            sx(p.0),
            sy(p.1)
        )
        .unwrap();
    }
    // fitted envelope log2(M) - alpha n
    if let Some(f) = fit {
        if f.m > 0.0 {
            let line = |x: f64| f.m.log2() - f.alpha * x;
            write!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"firebrick\" stroke-dasharray=\"6 3\"/>\n",
                sx(x0),
                sy(line(x0)),
                sx(x1),
                sy(line(x1))
            )
            .unwrap();
            write!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"firebrick\">alpha = {:.4}</text>\n",
                ML + 10.0,
                MT + 16.0,
                f.alpha
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use dysmooth_core::mesh::{sample_catalog, Catalog};
    use dysmooth_core::moduli::modulus_profile;
    use dysmooth_core::mesh::FunctionSource;

    #[test]
    fn sample_round_trip_bit_exact() {
        let f = Catalog::AbsPower {
            axis: 0,
            center: 0.5,
            alpha: 1.0,
        };
        let field = sample_catalog(1, 2, &f).unwrap();
        assert_eq!(field.values(), &[0.5, 0.25, 0.0, 0.25, 0.5]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.json");
        store_samples(&field, &path).unwrap();
        let loaded = load_samples(&path).unwrap();
        assert_eq!(loaded.values(), field.values());
        assert_eq!(loaded.grid(), field.grid());
    }

    #[test]
    fn round_trip_awkward_values() {
        let values = vec![1.0 / 3.0, f64::MIN_POSITIVE, -1e300, 0.1 + 0.2, -0.0];
        let field = SampleField::new(DyadicGrid::new(1, 2).unwrap(), values.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        store_samples(&field, &path).unwrap();
        let loaded = load_samples(&path).unwrap();
        for (a, b) in loaded.values().iter().zip(&values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn wrong_length_names_expected_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"dimension": 1, "level": 2, "order": "lex-last-fastest", "values": [0, 1, 2, 3]}"#,
        )
        .unwrap();
        match load_samples(&path) {
            Err(Error::LengthMismatch { expected, actual }) => {
                assert_eq!(expected, 5);
                assert_eq!(actual, 4);
            }
            other => panic!("expected length mismatch, got {other:?}"),
        }
    }

    #[test]
    fn nan_rejected_with_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.json");
        std::fs::write(
            &path,
            r#"{"dimension": 1, "level": 1, "order": "lex-last-fastest", "values": [0, "NaN", 1]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_samples(&path),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn csv_shape() {
        let src = FunctionSource::analytic(
            1,
            Catalog::AbsPower {
                axis: 0,
                center: 0.5,
                alpha: 1.0,
            },
        )
        .unwrap();
        let p = modulus_profile(&src, 2, 2, 4).unwrap();
        let csv = profile_csv(&p);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,psi,psi_axis_1");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("2,"));
    }

    #[test]
    fn svg_contains_chart_parts() {
        let src = FunctionSource::analytic(
            1,
            Catalog::AbsPower {
                axis: 0,
                center: 0.5,
                alpha: 1.0,
            },
        )
        .unwrap();
        let p = modulus_profile(&src, 2, 2, 8).unwrap();
        let fit = dysmooth_core::analysis::fit_exponent(&p).unwrap();
        let svg = decay_svg(&p, Some(&fit));
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("alpha = 1.0000"));
        assert!(svg.contains("log2 psi"));
    }
}

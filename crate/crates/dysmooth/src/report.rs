//! JSON report shapes. Field order is fixed by the struct declarations and
//! every report opens with the artifact version and a config echo, so a
//! rerun with the same config is byte-identical.

use dysmooth_core::analysis::{
    DecayFit, GeometricDecay, SaturationClass, SaturationVerdict, VerificationReport,
};
use dysmooth_core::cascade::CascadeReport;
use dysmooth_core::certificates::ConstantLedger;
use dysmooth_core::moduli::{ModulusProfile, Weighting};
use serde::Serialize;

pub const ARTIFACT_NAME: &str = "dysmooth";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
pub struct Artifact {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Artifact {
    fn default() -> Self {
        Artifact {
            name: ARTIFACT_NAME,
            version: ARTIFACT_VERSION,
        }
    }
}

/// Echo of everything that determined the run.
#[derive(Serialize, Default)]
pub struct ConfigEcho {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_res: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub along: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stages: Option<u32>,
    pub threads: usize,
}

pub fn weighting_name(w: Weighting) -> &'static str {
    match w {
        Weighting::TheoremStatement => "theorem-statement",
        Weighting::ProofFinalLine => "proof-final-line",
    }
}

#[derive(Serialize)]
pub struct ArgmaxJson {
    pub axis: usize,
    pub index: Vec<u64>,
}

#[derive(Serialize)]
pub struct ProfileLevelJson {
    pub n: u32,
    pub psi: f64,
    pub per_axis: Vec<f64>,
    pub argmax: ArgmaxJson,
}

#[derive(Serialize)]
pub struct ProfileJson {
    pub r: u32,
    pub d: usize,
    pub n_min: u32,
    pub n_max: u32,
    pub scale: f64,
    pub levels: Vec<ProfileLevelJson>,
}

impl ProfileJson {
    pub fn from_core(p: &ModulusProfile) -> Self {
        let levels = p
            .levels()
            .map(|n| {
                let i = (n - p.n_min) as usize;
                ProfileLevelJson {
                    n,
                    psi: p.psi[i],
                    per_axis: p.per_axis[i].clone(),
                    argmax: ArgmaxJson {
                        axis: p.argmax[i].axis + 1,
                        index: p.argmax[i].index.clone(),
                    },
                }
            })
            .collect();
        ProfileJson {
            r: p.r,
            d: p.d,
            n_min: p.n_min,
            n_max: p.n_max,
            scale: p.scale,
            levels,
        }
    }
}

#[derive(Serialize)]
pub struct FitJson {
    pub alpha: f64,
    pub m: f64,
    pub residual: f64,
    pub window: [u32; 2],
}

impl FitJson {
    pub fn from_core(f: &DecayFit) -> Self {
        FitJson {
            alpha: f.alpha,
            m: f.m,
            residual: f.residual,
            window: [f.window.0, f.window.1],
        }
    }
}

pub fn saturation_class_name(c: SaturationClass) -> &'static str {
    match c {
        SaturationClass::PolynomialClass => "polynomial-class",
        SaturationClass::Saturated => "saturated",
        SaturationClass::BelowSaturation => "below-saturation",
        SaturationClass::Inconclusive => "inconclusive",
    }
}

#[derive(Serialize)]
pub struct SaturationJson {
    pub class: &'static str,
    pub evidence: Vec<f64>,
}

impl SaturationJson {
    pub fn from_core(v: &SaturationVerdict) -> Self {
        SaturationJson {
            class: saturation_class_name(v.class),
            evidence: v.evidence.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct GeometricJson {
    pub lambda: f64,
    pub mu: f64,
    pub equivalence: bool,
}

impl GeometricJson {
    pub fn from_core(g: &GeometricDecay) -> Self {
        GeometricJson {
            lambda: g.lambda,
            mu: g.mu,
            equivalence: g.equivalence,
        }
    }
}

#[derive(Serialize)]
pub struct AnalyzeReport {
    pub artifact: Artifact,
    pub config: ConfigEcho,
    pub profile: ProfileJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub saturation: SaturationJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric_decay: Option<GeometricJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric_decay_error: Option<String>,
}

#[derive(Serialize)]
pub struct CertifyRow {
    pub r: u32,
    /// Exact determinant magnitude, decimal string.
    pub det_abs: String,
    pub expected_pow2: String,
    /// Exact rational `p/q`.
    pub inv_inf_norm: String,
    pub lebesgue: f64,
    pub c_1d: f64,
    pub c_dd: Vec<f64>,
    pub status: &'static str,
}

impl CertifyRow {
    pub fn from_core(l: &ConstantLedger) -> Self {
        CertifyRow {
            r: l.r,
            det_abs: l.det_abs.to_string(),
            expected_pow2: l.expected_pow2.to_string(),
            inv_inf_norm: l.inv_inf_norm.to_string(),
            lebesgue: l.lebesgue,
            c_1d: l.c_1d,
            c_dd: l.c_dd.clone(),
            status: if l.status_pass { "pass" } else { "fail" },
        }
    }
}

#[derive(Serialize)]
pub struct CertifyReport {
    pub artifact: Artifact,
    pub config: ConfigEcho,
    pub rows: Vec<CertifyRow>,
}

#[derive(Serialize)]
pub struct CubeJson {
    pub anchor_index: Vec<u64>,
    pub anchor: Vec<f64>,
    pub level: u32,
    pub order: u32,
    pub side: f64,
    pub half_open: bool,
}

#[derive(Serialize)]
pub struct CascadeStageJson {
    pub k: u32,
    pub diff_norm: f64,
    /// `c(r, d) * psi(n + k - 1)`, the stage bound.
    pub bound: f64,
    pub margin: f64,
    pub reconstruction_error: f64,
}

#[derive(Serialize)]
pub struct CascadeJson {
    pub cube: CubeJson,
    pub r: u32,
    pub n: u32,
    pub along: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub lemma_constant: f64,
    pub stage0_reconstruction_error: f64,
    pub stages: Vec<CascadeStageJson>,
    pub stage0_diff: f64,
    pub lhs: f64,
    pub telescope_bound: f64,
    pub bound_ok: bool,
}

impl CascadeJson {
    /// `psi` must hold `Psi_r(n + k - 1)` for stage k = 1..=K.
    pub fn from_core(rep: &CascadeReport, constant: f64, psi: &[f64]) -> Self {
        assert_eq!(psi.len(), rep.stage_diff_norms.len());
        let stages = rep
            .stage_diff_norms
            .iter()
            .enumerate()
            .map(|(idx, &norm)| {
                let bound = constant * psi[idx];
                CascadeStageJson {
                    k: idx as u32 + 1,
                    diff_norm: norm,
                    bound,
                    margin: bound - norm,
                    reconstruction_error: rep.reconstruction_errors[idx + 1],
                }
            })
            .collect();
        CascadeJson {
            cube: CubeJson {
                anchor_index: rep.cube.anchor_index().to_vec(),
                anchor: rep.cube.anchor(),
                level: rep.cube.level(),
                order: rep.cube.order(),
                side: rep.cube.side(),
                half_open: rep.cube.is_half_open(),
            },
            r: rep.r,
            n: rep.n,
            along: rep.axis + 1,
            t: rep.t,
            u: rep.u.clone(),
            lemma_constant: constant,
            stage0_reconstruction_error: rep.reconstruction_errors[0],
            stages,
            stage0_diff: rep.stage0_diff,
            lhs: rep.lhs,
            telescope_bound: rep.telescope_bound,
            bound_ok: rep.bound_ok,
        }
    }

    pub fn stage_csv(&self) -> String {
        let mut out =
            String::from("k,diff_norm,bound,margin,reconstruction_error\n");
        for s in &self.stages {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                s.k, s.diff_norm, s.bound, s.margin, s.reconstruction_error
            ));
        }
        out
    }
}

#[derive(Serialize)]
pub struct CascadeReportJson {
    pub artifact: Artifact,
    pub config: ConfigEcho,
    pub cascade: CascadeJson,
}

#[derive(Serialize)]
pub struct VerifyLevelJson {
    pub n: u32,
    pub t: f64,
    pub omega_estimate: f64,
    pub axis_estimate: f64,
    pub axis_rhs: f64,
    pub omega_rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1_rhs: Option<f64>,
    pub tail_truncated: bool,
    pub coverage_warning: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_axis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_omega: Option<f64>,
}

#[derive(Serialize)]
pub struct XyWitnessJson {
    pub levels: [u32; 2],
    pub psi_max: f64,
    pub omega_over_t2: Vec<f64>,
}

#[derive(Serialize)]
pub struct VerifyJson {
    pub weighting: &'static str,
    pub sup_norm: f64,
    pub levels: Vec<VerifyLevelJson>,
    /// Measured lower bounds on what the theorem constants must absorb.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_m1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_slope: Option<f64>,
    pub xy_witness: XyWitnessJson,
}

impl VerifyJson {
    pub fn from_core(rep: &VerificationReport) -> Self {
        VerifyJson {
            weighting: weighting_name(rep.weighting),
            sup_norm: rep.sup_norm,
            levels: rep
                .levels
                .iter()
                .map(|l| VerifyLevelJson {
                    n: l.n,
                    t: l.t,
                    omega_estimate: l.omega_estimate,
                    axis_estimate: l.axis_estimate,
                    axis_rhs: l.axis_rhs,
                    omega_rhs: l.omega_rhs,
                    omega1_rhs: l.omega1_rhs,
                    tail_truncated: l.tail_truncated,
                    coverage_warning: l.coverage_warning,
                    ratio_axis: l.ratio_axis,
                    ratio_omega: l.ratio_omega,
                })
                .collect(),
            empirical_m1: rep.empirical_m1,
            empirical_m2: rep.empirical_m2,
            empirical_m: rep.empirical_m,
            ratio_slope: rep.ratio_slope,
            xy_witness: XyWitnessJson {
                levels: [rep.xy_witness.levels.0, rep.xy_witness.levels.1],
                psi_max: rep.xy_witness.psi_max,
                omega_over_t2: rep.xy_witness.omega_over_t2.clone(),
            },
        }
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "n,t,omega_estimate,axis_estimate,axis_rhs,omega_rhs,ratio_axis,ratio_omega\n",
        );
        for l in &self.levels {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{}\n",
                l.n,
                l.t,
                l.omega_estimate,
                l.axis_estimate,
                l.axis_rhs,
                l.omega_rhs,
                l.ratio_axis.map_or(String::new(), |v| format!("{v:.17e}")),
                l.ratio_omega.map_or(String::new(), |v| format!("{v:.17e}")),
            ));
        }
        out
    }
}

#[derive(Serialize)]
pub struct VerifyReportJson {
    pub artifact: Artifact,
    pub config: ConfigEcho,
    pub verification: VerifyJson,
}

/// Single-line JSON error for the error stream.
pub fn error_line(err: &dysmooth_core::Error) -> String {
    serde_json::to_string(&serde_json::json!({
        "error": err.to_string(),
        "exit_code": err.exit_code(),
    }))
    .unwrap()
}

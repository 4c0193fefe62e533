//! Closed-form security arithmetic, parameter planning, sweep experiments,
//! and the identity suite that ties the simulation back to the closed forms.

use serde::Serialize;
use thiserror::Error;

use crate::adversary::{
    steering_attack, AdversaryError, DeviceModel, EntangledSteering, SteeringMeasurement,
};
use crate::protocol::{Bit, ProtocolError, ProtocolParams};
use crate::states::{self, StateFamilyError};
use crate::substrate::{Party, QuantumWorld, SubstrateError};
use crate::tensor::{StateVector, SubsystemShape, TensorError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("cheating probability target must lie strictly between 0 and 1 (got {p})")]
    BadBound { p: f64 },
    #[error("dimension must be at least {min} (got {n})")]
    BadDimension { n: u32, min: u32 },
    #[error("device with delta {delta} resolves no attack dimension ≥ 3 (max {n_a_max})")]
    DeviceTooCoarse { delta: f64, n_a_max: u32 },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    States(#[from] StateFamilyError),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// The binding bound `p = (1 − 2/n_A)^s` on Alice's chance of unveiling the
/// bit she did not effectively commit.
pub fn cheat_bound(n_a: u32, s: u32) -> Result<f64, AnalysisError> {
    if n_a < 3 {
        return Err(AnalysisError::BadDimension { n: n_a, min: 3 });
    }
    Ok((1.0 - 2.0 / n_a as f64).powi(s as i32))
}

/// Smallest register count `s` with `cheat_bound(n_a_max, s) ≤ p_a_max`.
/// The real-valued ratio `ln p / ln(1 − 2/n)` is taken as the starting
/// point and the integer boundary settled by direct bound evaluation, so
/// exact-equality cases land on the smaller `s`.
pub fn required_s(p_a_max: f64, n_a_max: u32) -> Result<u32, AnalysisError> {
    if !(p_a_max > 0.0 && p_a_max < 1.0) || !p_a_max.is_finite() {
        return Err(AnalysisError::BadBound { p: p_a_max });
    }
    if n_a_max < 3 {
        return Err(AnalysisError::BadDimension { n: n_a_max, min: 3 });
    }
    let ratio = p_a_max.ln() / (1.0 - 2.0 / n_a_max as f64).ln();
    let mut s = ratio.ceil().max(1.0) as u32;
    while cheat_bound(n_a_max, s)? > p_a_max {
        s += 1;
    }
    while s > 1 && cheat_bound(n_a_max, s - 1)? <= p_a_max {
        s -= 1;
    }
    Ok(s)
}

/// A binding-security plan: how many registers are needed to push Alice's
/// cheating probability below `p_a_max`, given the largest attack dimension
/// her devices could resolve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityPlan {
    pub p_a_max: f64,
    pub n_a_max: u32,
    pub s_required: u32,
    /// The device precision that produced `n_a_max`, when planning started
    /// from a device model.
    pub delta: Option<f64>,
}

impl SecurityPlan {
    pub fn from_n_a_max(p_a_max: f64, n_a_max: u32) -> Result<Self, AnalysisError> {
        let s_required = required_s(p_a_max, n_a_max)?;
        Ok(Self {
            p_a_max,
            n_a_max,
            s_required,
            delta: None,
        })
    }

    pub fn from_device(p_a_max: f64, device: &DeviceModel) -> Result<Self, AnalysisError> {
        let n_a_max = device.n_a_max();
        if n_a_max < 3 {
            return Err(AnalysisError::DeviceTooCoarse {
                delta: device.delta(),
                n_a_max,
            });
        }
        let mut plan = Self::from_n_a_max(p_a_max, n_a_max)?;
        plan.delta = Some(device.delta());
        Ok(plan)
    }

    /// `bound(s_required) ≤ p_a_max < bound(s_required − 1)`.
    pub fn invariant_holds(&self) -> bool {
        let at = cheat_bound(self.n_a_max, self.s_required).unwrap_or(f64::NAN);
        let below = if self.s_required > 1 {
            cheat_bound(self.n_a_max, self.s_required - 1).unwrap_or(f64::NAN)
        } else {
            1.0
        };
        at <= self.p_a_max && self.p_a_max < below
    }
}

/// One row of the concealing curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcealingPoint {
    pub n: u32,
    /// `D(ρ_+, ρ_−) = 1/√(n−1)`.
    pub trace_distance: f64,
    /// Optimal per-register guess probability, `1/2 + D/2`.
    pub helstrom_success: f64,
}

/// Closed-form concealing quantities along a dimension ladder.
pub fn concealing_curve(ns: &[u32]) -> Result<Vec<ConcealingPoint>, AnalysisError> {
    ns.iter()
        .map(|&n| {
            if n < 2 {
                return Err(AnalysisError::BadDimension { n, min: 2 });
            }
            let d = 1.0 / ((n - 1) as f64).sqrt();
            Ok(ConcealingPoint {
                n,
                trace_distance: d,
                helstrom_success: 0.5 + d / 2.0,
            })
        })
        .collect()
}

/// Configuration of a sweep over the `(n_A, s)` grid. Every cell runs the
/// steering attack with the unveil bit fixed to one — the experiment the
/// binding bound speaks about — against its own derived seed.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub n_a_values: Vec<u32>,
    pub s_values: Vec<u32>,
    pub trials: u64,
    pub n_sim: u32,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n_a: u32,
    pub s: u32,
    pub bound: f64,
    pub empirical_rate: f64,
    pub trials: u64,
    pub ci_half_width: f64,
    pub seed: u64,
}

/// A grid cell whose experiment could not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub n_a: u32,
    pub s: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub schema_version: u32,
    pub master_seed: u64,
    pub n_sim: u32,
    pub trials_per_cell: u64,
    pub strategy: String,
    pub target_b: u8,
}

/// Sweep results: metadata, one row per completed grid cell, and any cells
/// that failed (partial results are preserved).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub meta: SweepMeta,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

pub const SWEEP_SCHEMA_VERSION: u32 = 1;
pub const SWEEP_CSV_HEADER: &str = "n_a,s,bound,empirical_rate,trials,ci_half_width,seed";

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n_a, r.s, r.bound, r.empirical_rate, r.trials, r.ci_half_width, r.seed
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "meta": self.meta,
            "rows": self.rows,
            "failures": self.failures,
        })
    }

    /// Every empirical rate within its bound plus confidence half-width.
    pub fn within_bounds(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.empirical_rate <= r.bound + r.ci_half_width)
    }
}

fn cell_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Run the steering experiment on every grid cell.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepTable, AnalysisError> {
    let mut rows = Vec::with_capacity(cfg.n_a_values.len() * cfg.s_values.len());
    let mut failures = Vec::new();
    let device = DeviceModel::new(f64::MIN_POSITIVE.max(1e-300))
        .unwrap_or_else(|_| unreachable!("minimal positive delta is valid"));
    let mut cell = 0u64;
    for &n_a in &cfg.n_a_values {
        for &s in &cfg.s_values {
            let seed = cell_seed(cfg.master_seed, cell);
            cell += 1;
            let run = || -> Result<SweepRow, AnalysisError> {
                let params = ProtocolParams::new(s, cfg.n_sim, seed)?;
                let attack = EntangledSteering {
                    n_a,
                    target_b: Bit::One,
                    measurement: SteeringMeasurement::Pgm,
                    device,
                };
                let report = steering_attack(&params, &attack, cfg.trials)?;
                Ok(SweepRow {
                    n_a,
                    s,
                    bound: report.bound,
                    empirical_rate: report.acceptance_rate,
                    trials: report.trials,
                    ci_half_width: report.ci_half_width,
                    seed,
                })
            };
            match run() {
                Ok(row) => rows.push(row),
                Err(e) => failures.push(SweepFailure {
                    n_a,
                    s,
                    error: e.to_string(),
                }),
            }
        }
    }
    Ok(SweepTable {
        meta: SweepMeta {
            schema_version: SWEEP_SCHEMA_VERSION,
            master_seed: cfg.master_seed,
            n_sim: cfg.n_sim,
            trials_per_cell: cfg.trials,
            strategy: "steering".to_string(),
            target_b: 1,
        },
        rows,
        failures,
    })
}

/// One verified identity group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// Tolerance used for the strict-orthogonality group when no override is
/// given; everything else defaults to `1e-10`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const IDENTITY_TOL: f64 = 1e-10;

/// Evaluate the eight identity groups over a dimension ladder, reporting
/// the worst error per group. `tolerance_override` replaces every group's
/// default acceptance threshold when set.
pub fn identity_suite(
    ns: &[u32],
    tolerance_override: Option<f64>,
) -> Result<Vec<IdentityReport>, AnalysisError> {
    let tol = |default: f64| tolerance_override.unwrap_or(default);
    let mut reports = Vec::with_capacity(8);

    // 1. Trace-distance law, including the orthogonal pair at n = 2.
    let mut err = law_error(2)?;
    for &n in ns {
        err = err.max(law_error(n)?);
    }
    reports.push(IdentityReport {
        name: "trace-distance-law",
        max_error: err,
        tolerance: tol(IDENTITY_TOL),
    });

    // 2. The minus-family decomposition rebuilds the purification.
    let mut err = 0.0f64;
    for &n in ns {
        let direct = states::omega(n)?;
        let rebuilt = states::omega_reconstruction_minus(n)?;
        err = err.max(direct.max_abs_diff(&rebuilt)?);
    }
    reports.push(IdentityReport {
        name: "purification-decomposition",
        max_error: err,
        tolerance: tol(IDENTITY_TOL),
    });

    // 3. Overlap of the minus state with its steering residual.
    let mut err = 0.0f64;
    for &n in ns {
        let expect = states::closed_forms(n)?.overlap_phi;
        for i in 1..n as u64 {
            let ov = states::phi_minus(n, i)?.inner(&states::phi_tilde_minus(n, i)?)?;
            err = err.max((ov.re - expect).abs().max(ov.im.abs()));
        }
    }
    reports.push(IdentityReport {
        name: "steering-residual-overlap",
        max_error: err,
        tolerance: tol(IDENTITY_TOL),
    });

    // 4. Squared overlap of the honest and skewed bases.
    let mut err = 0.0f64;
    for &n in ns {
        let expect = states::closed_forms(n)?.overlap_alpha_sq;
        for i in 1..n as u64 {
            let basis = StateVector::basis_state(n as u64, i)?;
            let ov = basis.inner(&states::alpha_tilde_minus(n, i)?)?;
            err = err.max((ov.norm_sqr() - expect).abs());
        }
    }
    reports.push(IdentityReport {
        name: "basis-overlap",
        max_error: err,
        tolerance: tol(IDENTITY_TOL),
    });

    // 5. Strict orthogonality of φ_{i+} and the steering residual.
    let mut err = 0.0f64;
    for &n in ns {
        for i in 1..n as u64 {
            let ov = states::phi_plus(n, i)?.inner(&states::phi_tilde_minus(n, i)?)?;
            err = err.max(ov.norm());
        }
    }
    reports.push(IdentityReport {
        name: "plus-residual-orthogonality",
        max_error: err,
        tolerance: tol(ORTHOGONALITY_TOL),
    });

    // 6. The uniform state: orthogonal to every legitimate minus state, and
    //    carrying exactly weight 2/n on the purification's β side.
    let mut err = 0.0f64;
    for &n in ns {
        let uniform = states::phi_n_minus(n)?;
        for i in 1..n as u64 {
            err = err.max(uniform.inner(&states::phi_minus(n, i)?)?.norm());
        }
        let weight = crate::adversary::phi_n_exact_weight(n)?;
        err = err.max((weight - 2.0 / n as f64).abs());
    }
    reports.push(IdentityReport {
        name: "uniform-state-weight",
        max_error: err,
        tolerance: tol(IDENTITY_TOL),
    });

    // 7. Steering collapse: conditioning α on either basis leaves β on the
    //    predicted ray.
    let mut err = 0.0f64;
    for &n in ns {
        let shape = SubsystemShape::new(vec![n as u64, n as u64])?;
        let mut world = QuantumWorld::new(0, 0);
        let ids = world.create_joint(&[Party::Alice, Party::Bob], &shape, states::omega(n)?)?;
        for i in 1..n as u64 {
            let basis = StateVector::basis_state(n as u64, i)?;
            let (_, post) = world.conditional_collapse_oracle(ids[0], &basis)?;
            let post = post.expect("plus branch has weight");
            err = err.max(post.ray_defect(&states::phi_plus(n, i)?)?.abs());
            let skew = states::alpha_tilde_minus(n, i)?;
            let (_, post) = world.conditional_collapse_oracle(ids[0], &skew)?;
            let post = post.expect("skew branch has weight");
            err = err.max(post.ray_defect(&states::phi_tilde_minus(n, i)?)?.abs());
        }
    }
    reports.push(IdentityReport {
        name: "steering-collapse",
        max_error: err,
        tolerance: tol(IDENTITY_TOL),
    });

    // 8. The mismatch rule: flipped-bit overlaps are 0 on the committed
    //    index and 1/4 elsewhere.
    let mut err = 0.0f64;
    for &n in ns {
        let dim = n as u64;
        for i in 1..dim {
            for ip in 1..dim {
                let committed = states::committed_state(dim, 0, i)?;
                let announced = states::committed_state(dim, 1, ip)?;
                let p = announced.inner(&committed)?.norm_sqr();
                let expect = if i == ip { 0.0 } else { 0.25 };
                err = err.max((p - expect).abs());
            }
        }
    }
    reports.push(IdentityReport {
        name: "mismatch-rule",
        max_error: err,
        tolerance: tol(IDENTITY_TOL),
    });

    Ok(reports)
}

fn law_error(n: u32) -> Result<f64, AnalysisError> {
    let d = states::rho_plus(n)?.trace_distance(&states::rho_minus(n)?)?;
    Ok((d - 1.0 / ((n - 1) as f64).sqrt()).abs())
}

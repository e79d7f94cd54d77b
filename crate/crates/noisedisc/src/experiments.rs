//! Deterministic experiment drivers. Each driver renders a CSV string (or a
//! pass/fail report) from a typed config; the CLI binary is a thin wrapper
//! around these functions. Grid points are evaluated in parallel and results
//! are assembled in a fixed order, so identical configs produce byte-identical
//! output.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channels::{self, EnvironmentParams, NoiseKind};
use crate::discrimination::{self, QuadraturePair};
use crate::fock;
use crate::gaussian::{self, CovarianceMatrix};
use crate::states::{self, StsParams, SvParams};
use crate::stochastic;
use crate::{Error, Result};

/// Probe preparation selected for an experiment.
#[derive(Debug, Clone, Copy)]
pub enum ProbeSpec {
    Sts {
        mean_photons: f64,
        squeezing_fraction: f64,
    },
    Sv {
        thermal_photons: f64,
        squeeze: f64,
    },
    Ssv {
        thermal_photons: f64,
        squeeze: f64,
    },
}

impl ProbeSpec {
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        match *self {
            ProbeSpec::Sts {
                mean_photons,
                squeezing_fraction,
            } => states::sts_covariance(&StsParams {
                mean_photons,
                squeezing_fraction,
            }),
            ProbeSpec::Sv {
                thermal_photons,
                squeeze,
            } => states::sv_covariance(&SvParams {
                thermal_photons,
                squeeze,
            }),
            ProbeSpec::Ssv {
                thermal_photons,
                squeeze,
            } => states::ssv_covariance(&SvParams {
                thermal_photons,
                squeeze,
            }),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            ProbeSpec::Sts {
                mean_photons,
                squeezing_fraction,
            } => format!("sts(epsilon={mean_photons}, gamma={squeezing_fraction})"),
            ProbeSpec::Sv {
                thermal_photons,
                squeeze,
            } => format!("sv(nbar={thermal_photons}, r={squeeze})"),
            ProbeSpec::Ssv {
                thermal_photons,
                squeeze,
            } => format!("ssv(nbar={thermal_photons}, r={squeeze})"),
        }
    }
}

/// All emitted numbers carry 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// Uniform time grid, inclusive of both ends (a single step collapses to
/// the start point).
pub fn time_grid(tmin: f64, tmax: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Config("tsteps must be at least 1".into()));
    }
    if !(tmin >= 0.0) || !(tmax >= tmin) {
        return Err(Error::Config(format!(
            "invalid time grid [{tmin}, {tmax}]"
        )));
    }
    if steps == 1 {
        return Ok(vec![tmin]);
    }
    let h = (tmax - tmin) / (steps - 1) as f64;
    Ok((0..steps).map(|k| tmin + k as f64 * h).collect())
}

#[derive(Debug, Clone)]
pub struct SweepTimeConfig {
    pub probe: ProbeSpec,
    pub coupling: f64,
    pub tmin: f64,
    pub tmax: f64,
    pub tsteps: usize,
}

/// Optimal strip half-width and error probability for every quadrature pair
/// over the time grid. Columns `t,pair,t_star,p_star`, rows sorted by
/// (pair, t); an undefined half-width renders as `nan`.
pub fn sweep_time(cfg: &SweepTimeConfig) -> Result<String> {
    let sigma = cfg.probe.covariance()?;
    let times = time_grid(cfg.tmin, cfg.tmax, cfg.tsteps)?;
    let results: Vec<_> = times
        .par_iter()
        .map(|&t| -> Result<Vec<(usize, &'static str, f64, f64, f64)>> {
            let env = EnvironmentParams::resonant(cfg.coupling, t);
            let (local, common) = channels::channel_outputs(&sigma, &env)?;
            Ok(QuadraturePair::ALL
                .iter()
                .map(|&pair| {
                    let opt = discrimination::optimize_strip(&local, &common, pair);
                    (
                        0usize,
                        pair.label(),
                        t,
                        opt.half_width.unwrap_or(f64::NAN),
                        opt.error_probability,
                    )
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<(&'static str, usize, String)> = Vec::new();
    for (ti, per_time) in results.iter().enumerate() {
        for &(_, label, t, t_star, p_star) in per_time {
            rows.push((
                label,
                ti,
                format!(
                    "{},{},{},{}",
                    fmt_num(t),
                    label,
                    fmt_num(t_star),
                    fmt_num(p_star)
                ),
            ));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)));
    let mut out = String::from("t,pair,t_star,p_star\n");
    for (_, _, row) in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ScatterRandomConfig {
    pub purity: f64,
    pub coupling: f64,
    pub time: f64,
    pub n_states: usize,
    pub seed: u64,
    /// Upper end of the squeeze grid tracing the family curves.
    pub family_squeeze_max: f64,
    pub family_points: usize,
}

impl Default for ScatterRandomConfig {
    fn default() -> Self {
        Self {
            purity: 0.6,
            coupling: 1.0,
            time: 1.0,
            n_states: 200,
            seed: 1,
            family_squeeze_max: 2.5,
            family_points: 60,
        }
    }
}

fn p_star_for(sigma: &CovarianceMatrix, coupling: f64, time: f64) -> Result<f64> {
    let env = EnvironmentParams::resonant(coupling, time);
    let (local, common) = channels::channel_outputs(sigma, &env)?;
    Ok(discrimination::optimize_strip(&local, &common, QuadraturePair::X1X2).error_probability)
}

fn scatter_row(id: String, sigma: &CovarianceMatrix, cfg: &ScatterRandomConfig) -> Result<String> {
    let ent = gaussian::entanglement(sigma)?;
    let p = p_star_for(sigma, cfg.coupling, cfg.time)?;
    Ok(format!(
        "{id},{},{},{}",
        fmt_num(ent.d_min),
        fmt_num(gaussian::energy(sigma)),
        fmt_num(p)
    ))
}

/// Random standard-form states at fixed purity, shown against the probe
/// family curves at the same purity. Columns `state_id,d1_tilde,energy,p_star`.
/// With zero requested states the file is header-only.
pub fn scatter_random(cfg: &ScatterRandomConfig) -> Result<String> {
    let mut out = String::from("state_id,d1_tilde,energy,p_star\n");
    if cfg.n_states == 0 {
        return Ok(out);
    }
    let random_rows: Vec<String> = (0..cfg.n_states)
        .into_par_iter()
        .map(|i| -> Result<String> {
            let sigma = states::random_standard_form(
                cfg.purity,
                states::DEFAULT_A_RANGE,
                cfg.seed.wrapping_add(i as u64),
            )?;
            scatter_row(format!("random_{i:03}"), &sigma, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    for row in random_rows {
        out.push_str(&row);
        out.push('\n');
    }

    // family curves at matched purity
    let grid = time_grid(0.0, cfg.family_squeeze_max, cfg.family_points)?;
    let sts_nbar = 0.5 * (1.0 / cfg.purity.sqrt() - 1.0);
    let sv_nbar = 0.5 * (1.0 / cfg.purity - 1.0);
    for (family, build) in [
        (
            "sts",
            Box::new(move |r: f64| {
                states::sts_covariance_general(r, sts_nbar, sts_nbar)
            }) as Box<dyn Fn(f64) -> Result<CovarianceMatrix>>,
        ),
        (
            "sv",
            Box::new(move |r: f64| {
                states::sv_covariance(&SvParams {
                    thermal_photons: sv_nbar,
                    squeeze: r,
                })
            }),
        ),
        (
            "ssv",
            Box::new(move |r: f64| {
                states::ssv_covariance(&SvParams {
                    thermal_photons: sv_nbar,
                    squeeze: r,
                })
            }),
        ),
    ] {
        for (k, &r) in grid.iter().enumerate() {
            let sigma = build(r)?;
            let row = scatter_row(format!("{family}_{k:03}"), &sigma, cfg)?;
            out.push_str(&row);
            out.push('\n');
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BoundsCompareConfig {
    pub probe: ProbeSpec,
    pub coupling: f64,
    pub tmin: f64,
    pub tmax: f64,
    pub tsteps: usize,
}

/// Strip optimum against the fidelity and Chernoff bounds over time.
/// Columns `t,p_star,F_m,F_M,Q_half`; every row is checked for the bound
/// ordering `F_m <= Q_half <= F_M` and `F_m <= p_star`.
pub fn bounds_compare(cfg: &BoundsCompareConfig) -> Result<String> {
    let sigma = cfg.probe.covariance()?;
    let times = time_grid(cfg.tmin, cfg.tmax, cfg.tsteps)?;
    let rows: Vec<String> = times
        .par_iter()
        .map(|&t| -> Result<String> {
            let env = EnvironmentParams::resonant(cfg.coupling, t);
            let (local, common) = channels::channel_outputs(&sigma, &env)?;
            let p_star = discrimination::optimize_strip(&local, &common, QuadraturePair::X1X2)
                .error_probability;
            let bounds = discrimination::bound_set(&local, &common)?;
            let q_half = 0.5 * bounds.chernoff;
            if bounds.lower > q_half + 1e-9 || q_half > bounds.upper + 1e-9 {
                return Err(Error::AssertionFailed(format!(
                    "bound ordering violated at t={t}: F_m={}, Q/2={q_half}, F_M={}",
                    bounds.lower, bounds.upper
                )));
            }
            if bounds.lower > p_star + 1e-9 {
                return Err(Error::AssertionFailed(format!(
                    "strip optimum beats the Helstrom lower bound at t={t}"
                )));
            }
            Ok(format!(
                "{},{},{},{},{}",
                fmt_num(t),
                fmt_num(p_star),
                fmt_num(bounds.lower),
                fmt_num(bounds.upper),
                fmt_num(q_half)
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::from("t,p_star,F_m,F_M,Q_half\n");
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct OracleVerifyConfig {
    pub probe: ProbeSpec,
    pub coupling: f64,
    pub time: f64,
    pub cutoff: usize,
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for OracleVerifyConfig {
    fn default() -> Self {
        Self {
            probe: ProbeSpec::Sts {
                mean_photons: 0.5,
                squeezing_fraction: 0.6,
            },
            coupling: 1.0,
            time: 0.3,
            cutoff: 20,
            n_traj: 10_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {} ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        let _ = writeln!(
            out,
            "{}",
            if self.all_passed() {
                "all oracle checks passed"
            } else {
                "oracle checks FAILED"
            }
        );
        out
    }
}

/// Cross-validate the Gaussian formulas against the Fock and trajectory
/// oracles on one small instance. The small-noise regime (noise variance at
/// most 0.5, probe energy at most 4) is enforced up front.
pub fn oracle_verify(cfg: &OracleVerifyConfig) -> Result<OracleReport> {
    let sigma = cfg.probe.covariance()?;
    let env = EnvironmentParams::resonant(cfg.coupling, cfg.time);
    let beta = channels::beta_resonant(cfg.coupling, cfg.time);
    let energy = gaussian::energy(&sigma);
    if beta > 0.5 {
        return Err(Error::Config(format!(
            "outside the oracle regime: noise variance beta = {beta:.3} exceeds 0.5"
        )));
    }
    if energy > 4.0 {
        return Err(Error::Config(format!(
            "outside the oracle regime: probe energy {energy:.3} exceeds 4"
        )));
    }

    let (local, common) = channels::channel_outputs(&sigma, &env)?;
    let gauss = discrimination::bound_set(&local, &common)?;
    let p_star =
        discrimination::optimize_strip(&local, &common, QuadraturePair::X1X2).error_probability;

    let rho_local = fock::gaussian_to_fock(&local, cfg.cutoff)?;
    let rho_common = fock::gaussian_to_fock(&common, cfg.cutoff)?;
    let oracle = fock::oracle_bounds(&rho_local, &rho_common)?;
    let hel = fock::helstrom(&rho_local, &rho_common)?;

    let mut checks = Vec::new();
    let df = (oracle.fidelity - gauss.fidelity).abs();
    checks.push(OracleCheck {
        name: "fidelity agreement",
        passed: df <= 1e-4,
        detail: format!("|F_gauss - F_fock| = {df:.3e}"),
    });
    let dq = (oracle.chernoff_min - gauss.chernoff).abs();
    checks.push(OracleCheck {
        name: "chernoff agreement",
        passed: dq <= 1e-4,
        detail: format!("|Q_gauss - Q_fock| = {dq:.3e}"),
    });
    let sandwich_ok = gauss.lower <= hel.error_probability + 1e-4
        && hel.error_probability <= 0.5 * gauss.chernoff + 1e-4
        && hel.error_probability <= p_star + 1e-4;
    checks.push(OracleCheck {
        name: "helstrom sandwich",
        passed: sandwich_ok,
        detail: format!(
            "F_m = {:.5}, Pe = {:.5}, Q/2 = {:.5}, p_star = {p_star:.5}",
            gauss.lower,
            hel.error_probability,
            0.5 * gauss.chernoff
        ),
    });
    checks.push(OracleCheck {
        name: "trace deficits",
        passed: true,
        detail: format!(
            "eta_local = {:.2e}, eta_common = {:.2e}, clipped = {}",
            rho_local.trace_deficit(),
            rho_common.trace_deficit(),
            oracle.clipped_eigenvalues
        ),
    });

    let ints = channels::noise_integrals(&env)?;
    for kind in [NoiseKind::Local, NoiseKind::Common] {
        let analytic = channels::noise_matrix(kind, &ints)?;
        let est =
            stochastic::empirical_channel(&sigma, kind, &env, cfg.n_traj, cfg.seed, None)?;
        let mut worst = 0.0_f64;
        let mut ok = true;
        for i in 0..4 {
            for j in 0..4 {
                let dev = (est.noise[(i, j)] - analytic.as_array()[(i, j)]).abs();
                let scale = est.standard_errors[(i, j)].max(1e-9);
                worst = worst.max(dev / scale);
                if dev > 3.5 * scale {
                    ok = false;
                }
            }
        }
        checks.push(OracleCheck {
            name: match kind {
                NoiseKind::Local => "trajectory oracle (local)",
                NoiseKind::Common => "trajectory oracle (common)",
            },
            passed: ok,
            detail: format!("worst deviation {worst:.2} standard errors"),
        });
    }
    Ok(OracleReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sts_cfg() -> SweepTimeConfig {
        SweepTimeConfig {
            probe: ProbeSpec::Sts {
                mean_photons: 1.0,
                squeezing_fraction: 0.7,
            },
            coupling: 1.0,
            tmin: 0.1,
            tmax: 5.0,
            tsteps: 8,
        }
    }

    #[test]
    fn sweep_time_shape_and_cross_pairs() {
        let csv = sweep_time(&sts_cfg()).unwrap();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "t,pair,t_star,p_star");
        assert_eq!(lines.len(), 1 + 8 * 4);
        // rows sorted by (pair, t); cross pairs pinned at one half
        let half = fmt_num(0.5);
        for line in &lines[1..] {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 4);
            if cols[1] == "x1p2" || cols[1] == "p1x2" {
                assert_eq!(cols[3], half);
                assert_eq!(cols[2], "nan");
            }
        }
        let mut keys: Vec<(String, f64)> = lines[1..]
            .iter()
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                (c[1].to_string(), c[0].parse::<f64>().unwrap())
            })
            .collect();
        let sorted = {
            let mut k = keys.clone();
            k.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));
            k
        };
        assert_eq!(keys, sorted);
        keys.clear();
    }

    #[test]
    fn sweep_time_is_deterministic() {
        let a = sweep_time(&sts_cfg()).unwrap();
        let b = sweep_time(&sts_cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_time_position_dominates_momentum() {
        let csv = sweep_time(&sts_cfg()).unwrap();
        let mut by_pair: std::collections::HashMap<String, Vec<f64>> = Default::default();
        for line in csv.trim_end().lines().skip(1) {
            let c: Vec<&str> = line.split(',').collect();
            by_pair
                .entry(c[1].to_string())
                .or_default()
                .push(c[3].parse().unwrap());
        }
        let xx = &by_pair["x1x2"];
        let pp = &by_pair["p1p2"];
        for (a, b) in xx.iter().zip(pp) {
            assert!(a <= b);
        }
    }

    #[test]
    fn scatter_header_only_when_empty() {
        let cfg = ScatterRandomConfig {
            n_states: 0,
            ..Default::default()
        };
        assert_eq!(scatter_random(&cfg).unwrap(), "state_id,d1_tilde,energy,p_star\n");
    }

    #[test]
    fn scatter_rows_and_determinism() {
        let cfg = ScatterRandomConfig {
            n_states: 12,
            family_points: 10,
            ..Default::default()
        };
        let a = scatter_random(&cfg).unwrap();
        let b = scatter_random(&cfg).unwrap();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + 12 + 3 * 10);
        for line in &lines[1..] {
            let c: Vec<&str> = line.split(',').collect();
            let p: f64 = c[3].parse().unwrap();
            assert!((0.0..=0.5).contains(&p));
        }
    }

    #[test]
    fn bounds_compare_rows_sandwiched() {
        let cfg = BoundsCompareConfig {
            probe: ProbeSpec::Sts {
                mean_photons: 1.956,
                squeezing_fraction: 0.6593,
            },
            coupling: 1.0,
            tmin: 0.1,
            tmax: 3.0,
            tsteps: 12,
        };
        let csv = bounds_compare(&cfg).unwrap();
        let mut beats = false;
        for line in csv.trim_end().lines().skip(1) {
            let c: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            let (p, fm, _fm_up, qh) = (c[1], c[2], c[3], c[4]);
            assert!(fm <= p + 1e-9);
            if p < qh {
                beats = true;
            }
        }
        assert!(beats, "expected the strip to beat the Chernoff bound somewhere");
    }

    #[test]
    fn oracle_verify_default_passes() {
        let report = oracle_verify(&OracleVerifyConfig {
            n_traj: 2_000,
            ..Default::default()
        })
        .unwrap();
        assert!(report.all_passed(), "{}", report.render());
    }

    #[test]
    fn oracle_verify_enforces_small_noise() {
        let cfg = OracleVerifyConfig {
            time: 3.0,
            ..Default::default()
        };
        assert!(matches!(oracle_verify(&cfg), Err(Error::Config(_))));
    }
}

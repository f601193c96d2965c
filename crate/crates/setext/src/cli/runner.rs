//! Builds the space, functional and sampler for a config and runs it.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_rational::BigRational;

use super::config::{default_strategy, CheckKind, Experiment, ExperimentConfig, Functional, PropertyCheck, SeriesSpace};
use crate::error::{Error, Result};
use crate::ext_engine::{cross_check, estimate_ext, ExtensionEstimate, SetFunction, Status, TraceRow};
use crate::metric_core::FiniteSet;
use crate::properties::{
    check_d_continuous, check_d_increasing, check_increasing, check_l_continuous, check_left_continuous, DContParams,
    DIncParams, LContParams, LeftContParams, PredicateReport, Verdict,
};
use crate::set_functions::{
    mean_eds_limit, mean_iso_limit, sf_constant, sf_darboux_upper, sf_diam, sf_finite_mean, sf_finite_sum,
    sf_inner_jordan, sf_measure_integral, sf_midpoint, sf_parity_dyadic, sf_polygon_length, sf_riemann,
    sf_sequence_limit, sf_series_dyadic, sf_series_harmonic, sf_subset_indicator, sf_two_dense_indicator,
    sf_unordered_mean, sf_unordered_sum, MeanSpec, SeriesSpec, SupOracle,
};
use crate::spaces::{CantorLadder, SamplerSpec, Schedule, SpaceDescriptor};

/// What a run produced.
#[derive(Clone, Debug)]
pub enum RunBody {
    Estimate(ExtensionEstimate),
    Report { check: String, functional: String, report: PredicateReport },
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub experiment: &'static str,
    pub status: String,
    pub value: Option<f64>,
    pub levels: usize,
    pub body: RunBody,
    /// Extra lines printed before the summary.
    pub notes: Vec<String>,
    pub exit: i32,
    pub wall_ms: u128,
}

impl Outcome {
    /// `RESULT <status> <value|-> <levels> <wall_ms>`.
    pub fn summary_line(&self) -> String {
        let v = self.value.map_or_else(|| "-".to_string(), fmt_num);
        format!("RESULT {} {} {} {}", self.status, v, self.levels, self.wall_ms)
    }
}

/// `.` decimals, `inf`/`-inf`, exponent form for very small or large values.
pub fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e16) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn with_default(spec: &Option<SamplerSpec>, e: &Experiment, schedule: Schedule) -> SamplerSpec {
    spec.clone().unwrap_or_else(|| SamplerSpec::new(default_strategy(e), schedule))
}

fn run_ladder(cfg: &ExperimentConfig, s: &SetFunction, space: &SpaceDescriptor, schedule: Schedule) -> Result<ExtensionEstimate> {
    let spec = with_default(&cfg.sampler, &cfg.experiment, schedule);
    match &cfg.cross {
        Some(cross) => cross_check(s, space, &spec, cross, &cfg.tol),
        None => estimate_ext(s, space, &spec, &cfg.tol),
    }
}

fn rational_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn run_cantor(cfg: &ExperimentConfig, n_max: u32, notes: &mut Vec<String>) -> Result<ExtensionEstimate> {
    let half = BigRational::new(1.into(), 2.into());
    let eleven_18 = BigRational::new(11.into(), 18.into());
    let mut last = None;
    for n in 3..=n_max {
        let ladder = CantorLadder::new(n)?;
        let (mk, ml) = (ladder.mean_k(), ladder.mean_l());
        if mk != half || ml != eleven_18 {
            return Err(Error::Evaluation {
                level: n as usize,
                msg: format!("exact means {} and {}", rational_str(&mk), rational_str(&ml)),
            });
        }
        last = Some((mk, ml));
    }
    if let Some((mk, ml)) = last {
        notes.push(format!("EXACT n=3..{n_max} mean_k={} mean_l={}", rational_str(&mk), rational_str(&ml)));
    }
    // Ladder level j samples the level j + 1 set.
    let tol = cfg.tol.with_max_level(cfg.tol.max_level.min(n_max as usize - 1));
    let k = cfg.sampler.clone().unwrap_or_else(SamplerSpec::cantor_k);
    let l = cfg.cross.clone().unwrap_or_else(SamplerSpec::cantor_l);
    cross_check(&sf_finite_mean(), &SpaceDescriptor::Cantor, &k, &l, &tol)
}

fn build_functional(p: &PropertyCheck) -> Result<SetFunction> {
    Ok(match &p.functional {
        Functional::Midpoint => sf_midpoint(),
        Functional::Diam => sf_diam(),
        Functional::FiniteSum => sf_finite_sum(),
        Functional::FiniteMean => sf_finite_mean(),
        Functional::Constant(c) => sf_constant(*c),
        Functional::TwoDenseIndicator => sf_two_dense_indicator(),
        Functional::SubsetIndicator => {
            sf_subset_indicator(p.subspace.clone().ok_or_else(|| Error::config("subspace", "missing"))?)
        }
        Functional::InnerJordan => sf_inner_jordan(&p.space)?,
        Functional::ParityDyadic => sf_parity_dyadic(),
        Functional::Series(seq) => sf_series_harmonic(&SeriesSpec::new(seq.clone())),
        Functional::LayerSum { oracle, m, variant } => sf_measure_integral(Arc::new(oracle.clone()), *m, *variant)?,
        Functional::Riemann { f, a, b } => sf_riemann(f.clone(), *a, *b),
        Functional::Darboux { f, a, b } => sf_darboux_upper(f.clone(), *a, *b, SupOracle::PiecewiseMonotone),
    })
}

fn run_properties(p: &PropertyCheck, seed: u64) -> Result<(String, String, PredicateReport)> {
    let s = build_functional(p)?;
    let fixed: Vec<FiniteSet> = p.fixed.iter().map(|v| FiniteSet::from_reals(v)).collect();
    let eps = p.eps[0];
    let (check, report) = match p.check {
        CheckKind::Increasing => ("increasing", check_increasing(&s, &p.space, p.trials, seed)),
        CheckKind::DIncreasing => {
            let params = DIncParams {
                eps: p.eps.clone(),
                k_samples: p.samples,
                fixed_k: fixed,
                trials: p.trials,
                seed,
                direction: p.direction,
                strict: p.space != SpaceDescriptor::HalfLine,
                ..DIncParams::default()
            };
            ("d-increasing", check_d_increasing(&s, &p.space, &params))
        }
        CheckKind::DContinuous => {
            let params = DContParams {
                h_samples: p.samples,
                fixed_h: fixed,
                trials: p.trials,
                seed,
                mode: p.cardinality,
                ..DContParams::new(p.n, eps)
            };
            ("d-continuous", check_d_continuous(&s, &p.space, &params))
        }
        CheckKind::LeftContinuous => {
            let params = LeftContParams { h_samples: p.samples, fixed_h: fixed, trials: p.trials, seed, side: p.side, ..LeftContParams::new(eps) };
            ("left-continuous", check_left_continuous(&s, &p.space, &params))
        }
        CheckKind::LContinuous => {
            let j = p.subspace.as_ref().ok_or_else(|| Error::config("subspace", "missing"))?;
            let params = LContParams { k_samples: p.samples, fixed_k: fixed, trials: p.trials, seed, ..LContParams::new(eps) };
            ("l-continuous", check_l_continuous(&s, j, &p.space, &params))
        }
    };
    Ok((check.to_string(), s.name.clone(), report))
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::HoldsOnSamples => "holds_on_samples",
        Verdict::Counterexample(_) => "counterexample",
        Verdict::Unresolved(_) => "unresolved",
    }
}

fn witness_note(e: &ExtensionEstimate) -> Option<String> {
    match &e.status {
        Status::NoExtensionEvidence(w) => Some(format!(
            "WITNESS value_a={} value_b={} gap_a={} gap_b={}",
            fmt_num(w.value_a),
            fmt_num(w.value_b),
            fmt_num(w.gap_a),
            fmt_num(w.gap_b)
        )),
        _ => None,
    }
}

/// Runs a validated config. The exit code is `0` when the expected verdict
/// is reached (and the value matches `expect_value`, if given), `2` when
/// the run is inconclusive or unresolved, `1` otherwise.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let body = match &cfg.experiment {
        Experiment::Series { seq, space: SeriesSpace::Harmonic } => RunBody::Estimate(run_ladder(
            cfg,
            &sf_series_harmonic(&SeriesSpec::new(seq.clone())),
            &SpaceDescriptor::harmonic(),
            Schedule::linear(1, 1),
        )?),
        Experiment::Series { seq, space: SeriesSpace::Dyadic } => RunBody::Estimate(run_ladder(
            cfg,
            &sf_series_dyadic(&SeriesSpec::new(seq.clone())),
            &SpaceDescriptor::dyadic(),
            Schedule::linear(1, 1),
        )?),
        Experiment::UnorderedSum { seq } => {
            let (space, s) = sf_unordered_sum(seq.clone());
            RunBody::Estimate(run_ladder(cfg, &s, &space, Schedule::linear(1, 1))?)
        }
        Experiment::UnorderedMean { seq } => {
            let (space, s) = sf_unordered_mean(seq.clone(), MeanSpec::arithmetic());
            RunBody::Estimate(run_ladder(cfg, &s, &space, Schedule::linear(1, 1))?)
        }
        Experiment::SequenceLimit { seq } => {
            RunBody::Estimate(run_ladder(cfg, &sf_sequence_limit(seq.clone()), &SpaceDescriptor::harmonic(), Schedule::linear(1, 1))?)
        }
        Experiment::Riemann { f, a, b } => {
            RunBody::Estimate(run_ladder(cfg, &sf_riemann(f.clone(), *a, *b), &SpaceDescriptor::interval(*a, *b), Schedule::geometric(8, 2))?)
        }
        Experiment::Darboux { f, a, b, sup } => RunBody::Estimate(run_ladder(
            cfg,
            &sf_darboux_upper(f.clone(), *a, *b, sup.clone()),
            &SpaceDescriptor::interval(*a, *b),
            Schedule::geometric(8, 2),
        )?),
        Experiment::Arclength { curve } => {
            RunBody::Estimate(run_ladder(cfg, &sf_polygon_length(curve.clone()), &SpaceDescriptor::unit_interval(), Schedule::geometric(8, 2))?)
        }
        Experiment::Jordan { space } => RunBody::Estimate(run_ladder(cfg, &sf_inner_jordan(space)?, space, Schedule::geometric(8, 2))?),
        Experiment::Measure { oracle, m, variant } => {
            let s = sf_measure_integral(Arc::new(oracle.clone()), *m, *variant)?;
            RunBody::Estimate(run_ladder(cfg, &s, &variant.space(*m), Schedule::geometric(8, 2))?)
        }
        Experiment::IsoMean { set } => RunBody::Estimate(mean_iso_limit(set, &cfg.tol)?),
        Experiment::EdsMean { space, rules } => {
            let schedule = cfg.sampler.as_ref().map_or(Schedule::geometric(4, 2), |s| s.schedule);
            RunBody::Estimate(mean_eds_limit(space, rules, schedule, &cfg.tol)?)
        }
        Experiment::Cantor { n_max } => RunBody::Estimate(run_cantor(cfg, *n_max, &mut notes)?),
        Experiment::Properties(p) => {
            let (check, functional, report) = run_properties(p, cfg.seed)?;
            RunBody::Report { check, functional, report }
        }
    };
    let (status, value, levels) = match &body {
        RunBody::Estimate(e) => {
            notes.extend(witness_note(e));
            (e.status.name().to_string(), e.status.value(), e.levels())
        }
        RunBody::Report { report, .. } => {
            if let Some(c) = report.counterexample() {
                notes.push(format!("COUNTEREXAMPLE s(K)={} s(L)={} param={} stream={}", fmt_num(c.value_k), fmt_num(c.value_l), fmt_num(c.param), c.stream));
            }
            if let Verdict::Unresolved(msg) = &report.verdict {
                notes.push(format!("UNRESOLVED {msg}"));
            }
            (verdict_name(&report.verdict).to_string(), None, report.trials)
        }
    };
    let value_ok = match (cfg.expect_value, value) {
        (Some(want), Some(got)) => (want - got).abs() <= cfg.expect_tol || want == got,
        (Some(_), None) => false,
        (None, _) => true,
    };
    if !value_ok {
        notes.push(format!("MISMATCH expected value {} within {}", fmt_num(cfg.expect_value.unwrap_or(f64::NAN)), fmt_num(cfg.expect_tol)));
    }
    let exit = if status == cfg.expect.status_name() && value_ok {
        0
    } else if status == "inconclusive" || status == "unresolved" {
        2
    } else {
        1
    };
    Ok(Outcome { experiment: cfg.experiment.name(), status, value, levels, body, notes, exit, wall_ms: start.elapsed().as_millis() })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn set_str(k: &FiniteSet) -> String {
    k.iter().map(|p| fmt_num(p.x)).collect::<Vec<_>>().join(" ")
}

/// Trace rows: every row before the last carries `inconclusive`, the last
/// the final status.
pub fn write_csv<W: Write>(out: W, outcome: &Outcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match &outcome.body {
        RunBody::Estimate(e) => {
            w.write_record(["level", "gap_hi", "s_value", "running_estimate", "status"]).map_err(csv_err)?;
            let n = e.trace.len();
            for (i, r) in e.trace.iter().enumerate() {
                let TraceRow { level, gap_hi, s_value, running_estimate } = *r;
                let status = if i + 1 == n { outcome.status.as_str() } else { "inconclusive" };
                w.write_record([level.to_string(), fmt_num(gap_hi), fmt_num(s_value), fmt_num(running_estimate), status.to_string()])
                    .map_err(csv_err)?;
            }
        }
        RunBody::Report { check, functional, report } => {
            w.write_record(["check", "functional", "verdict", "trials", "seed", "value_k", "value_l", "param", "stream", "k", "l"])
                .map_err(csv_err)?;
            let c = report.counterexample();
            let opt = |f: &dyn Fn(&crate::properties::Counterexample) -> String| c.map_or_else(String::new, f);
            w.write_record([
                check.clone(),
                functional.clone(),
                outcome.status.clone(),
                report.trials.to_string(),
                report.seed.to_string(),
                opt(&|c| fmt_num(c.value_k)),
                opt(&|c| fmt_num(c.value_l)),
                opt(&|c| fmt_num(c.param)),
                opt(&|c| c.stream.to_string()),
                opt(&|c| set_str(&c.k)),
                opt(&|c| set_str(&c.l)),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut std::fs::File) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::config::{parse_config, ExperimentConfig};
    use super::*;

    fn run(text: &str) -> Outcome {
        run_experiment(&ExperimentConfig::from_raw(&parse_config(text).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1e-9), "1e-9");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn riemann_square() {
        let o = run("experiment = riemann\nfunction = x^2\nschedule = geometric:16:2\ntol.abs = 1e-3\ntol.max_level = 12\n");
        assert_eq!(o.status, "converged");
        assert!((o.value.unwrap() - 1.0 / 3.0).abs() < 1e-3);
        assert_eq!(o.exit, 0);
        let mut buf = Vec::new();
        write_csv(&mut buf, &o).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("level,gap_hi,s_value,running_estimate,status\n1,"));
        assert!(text.trim_end().ends_with(",converged"));
    }

    #[test]
    fn cantor_reports_nonexistence() {
        let o = run("experiment = cantor\nn_max = 12\n");
        assert_eq!(o.status, "no_extension_evidence");
        assert_eq!(o.exit, 0);
        assert!(o.notes.iter().any(|n| n.contains("mean_k=1/2 mean_l=11/18")));
        assert!(o.notes.iter().any(|n| n.starts_with("WITNESS value_a=0.5 value_b=0.6111")));
    }

    #[test]
    fn unexpected_and_inconclusive_exit_codes() {
        let o = run("experiment = riemann\nfunction = x^2\nexpect_value = 0.5\ntol.abs = 1e-3\ntol.max_level = 10\n");
        assert_eq!(o.exit, 1);
        let o = run("experiment = series\nsequence = harmonic\ntol.max_level = 6\n");
        assert_eq!(o.status, "inconclusive");
        assert_eq!(o.exit, 2);
    }

    #[test]
    fn properties_run() {
        let o = run("experiment = properties\ncheck = increasing\nfunctional = series\nsequence = alternating-harmonic\nspace = harmonic\nexpect = counterexample\n");
        assert_eq!(o.status, "counterexample");
        assert_eq!(o.exit, 0);
    }
}

//! Flat `key = value` experiment configs and the builtin catalogs.
//!
//! ```text
//! # Riemann sums of x^2 on [0, 1]
//! experiment = riemann
//! function = x^2
//! a = 0
//! b = 1
//! schedule = geometric:16:2
//! tol.abs = 1e-4
//! tol.max_level = 10
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::ext_engine::Tolerances;
use crate::properties::{Cardinality, Direction, Side};
use crate::set_functions::{Curve, IsoSetSpec, LayerOracle, MeasureVariant, RealFn, SupOracle};
use crate::spaces::{EdsRule, SamplerSpec, Schedule, Segment, Sequence, SpaceDescriptor, Strategy};

/// Parsed but untyped config: keys with their values and line numbers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sets or replaces a key, as the command-line overrides do.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), (value.to_string(), 0));
    }
}

/// One `key = value` per line; `#` starts a comment; keys are lowercase
/// `[a-z0-9._-]`; a repeated key is an error.
pub fn parse_config(text: &str) -> Result<RawConfig> {
    let mut entries = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {lineno}"), "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b"._-".contains(&b)) {
            return Err(Error::config(format!("line {lineno}"), format!("bad key `{k}`")));
        }
        if v.is_empty() {
            return Err(Error::config(k, "empty value"));
        }
        if entries.insert(k.to_string(), (v.to_string(), lineno)).is_some() {
            return Err(Error::config(k, format!("repeated on line {lineno}")));
        }
    }
    Ok(RawConfig { entries })
}

/// The verdict a run is expected to reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Converged,
    NoExtension,
    DivergesPlus,
    DivergesMinus,
    Holds,
    Counterexample,
}

impl Expect {
    pub fn status_name(self) -> &'static str {
        match self {
            Expect::Converged => "converged",
            Expect::NoExtension => "no_extension_evidence",
            Expect::DivergesPlus => "diverges_plus",
            Expect::DivergesMinus => "diverges_minus",
            Expect::Holds => "holds_on_samples",
            Expect::Counterexample => "counterexample",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesSpace {
    Harmonic,
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Increasing,
    DIncreasing,
    DContinuous,
    LeftContinuous,
    LContinuous,
}

/// Named functionals for the `properties` experiment.
#[derive(Clone, Debug)]
pub enum Functional {
    Midpoint,
    Diam,
    FiniteSum,
    FiniteMean,
    Constant(f64),
    TwoDenseIndicator,
    SubsetIndicator,
    InnerJordan,
    ParityDyadic,
    Series(Sequence),
    LayerSum { oracle: LayerOracle, m: f64, variant: MeasureVariant },
    Riemann { f: RealFn, a: f64, b: f64 },
    Darboux { f: RealFn, a: f64, b: f64 },
}

#[derive(Clone, Debug)]
pub struct PropertyCheck {
    pub check: CheckKind,
    pub functional: Functional,
    pub space: SpaceDescriptor,
    /// Dense subspace for `l-continuous` and the subset indicator.
    pub subspace: Option<SpaceDescriptor>,
    pub eps: Vec<f64>,
    pub trials: usize,
    pub samples: usize,
    pub n: usize,
    pub direction: Direction,
    pub side: Side,
    pub cardinality: Cardinality,
    pub fixed: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub enum Experiment {
    Series { seq: Sequence, space: SeriesSpace },
    UnorderedSum { seq: Sequence },
    UnorderedMean { seq: Sequence },
    Riemann { f: RealFn, a: f64, b: f64 },
    Darboux { f: RealFn, a: f64, b: f64, sup: SupOracle },
    Arclength { curve: Curve },
    Jordan { space: SpaceDescriptor },
    Measure { oracle: LayerOracle, m: f64, variant: MeasureVariant },
    IsoMean { set: IsoSetSpec },
    EdsMean { space: SpaceDescriptor, rules: Vec<EdsRule> },
    Cantor { n_max: u32 },
    SequenceLimit { seq: Sequence },
    Properties(Box<PropertyCheck>),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Series { .. } => "series",
            Experiment::UnorderedSum { .. } => "unordered-sum",
            Experiment::UnorderedMean { .. } => "unordered-mean",
            Experiment::Riemann { .. } => "riemann",
            Experiment::Darboux { .. } => "darboux",
            Experiment::Arclength { .. } => "arclength",
            Experiment::Jordan { .. } => "jordan",
            Experiment::Measure { .. } => "measure",
            Experiment::IsoMean { .. } => "iso-mean",
            Experiment::EdsMean { .. } => "eds-mean",
            Experiment::Cantor { .. } => "cantor",
            Experiment::SequenceLimit { .. } => "sequence",
            Experiment::Properties(_) => "properties",
        }
    }
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub sampler: Option<SamplerSpec>,
    /// Second ladder: the run becomes a cross-check.
    pub cross: Option<SamplerSpec>,
    pub tol: Tolerances,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub expect: Expect,
    pub expect_value: Option<f64>,
    pub expect_tol: f64,
}

const COMMON_KEYS: &[&str] = &[
    "experiment",
    "sampler",
    "schedule",
    "cross_sampler",
    "cross_schedule",
    "tol.abs",
    "tol.window",
    "tol.threshold",
    "tol.separation",
    "tol.max_level",
    "seed",
    "output",
    "expect",
    "expect_value",
    "expect_tol",
];

fn experiment_keys(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "series" => &["sequence", "space"],
        "unordered-sum" | "unordered-mean" | "sequence" => &["sequence"],
        "riemann" => &["function", "a", "b"],
        "darboux" => &["function", "a", "b", "sup"],
        "arclength" => &["curve"],
        "jordan" | "eds-mean" => &["space", "rules"],
        "measure" => &["oracle", "m", "variant"],
        "iso-mean" => &["set"],
        "cantor" => &["n_max"],
        "properties" => &[
            "check", "functional", "space", "subspace", "eps", "trials", "samples", "n", "direction", "side",
            "cardinality", "fixed", "sequence", "oracle", "m", "variant", "function", "a", "b",
        ],
        _ => return None,
    })
}

fn num(field: &str, s: &str) -> Result<f64> {
    let v: f64 = match s {
        "inf" | "+inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => s.parse().map_err(|_| Error::config(field, format!("`{s}` is not a number")))?,
    };
    if v.is_nan() {
        return Err(Error::config(field, "NaN is not allowed"));
    }
    Ok(v)
}

fn finite(field: &str, s: &str) -> Result<f64> {
    let v = num(field, s)?;
    if !v.is_finite() {
        return Err(Error::config(field, "must be finite"));
    }
    Ok(v)
}

fn uint(field: &str, s: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::config(field, format!("`{s}` is not a nonnegative integer")))
}

/// `name:arg:arg` into the name and its arguments.
fn split_args(s: &str) -> (&str, Vec<&str>) {
    let mut it = s.split(':').map(str::trim);
    let head = it.next().unwrap_or("");
    (head, it.collect())
}

fn arity(field: &str, name: &str, args: &[&str], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::config(field, format!("`{name}` takes {n} argument(s), got {}", args.len())));
    }
    Ok(())
}

pub fn parse_sequence(field: &str, s: &str) -> Result<Sequence> {
    let (name, args) = split_args(s);
    let fixed = |seq: Sequence| arity(field, name, &args, 0).map(|_| seq);
    match name {
        "geometric" => {
            arity(field, name, &args, 2)?;
            let ratio = finite(field, args[1])?;
            if ratio.abs() >= 1.0 {
                return Err(Error::config(field, "geometric ratio must satisfy |r| < 1"));
            }
            Ok(Sequence::Geometric { scale: finite(field, args[0])?, ratio })
        }
        "power" => {
            arity(field, name, &args, 1)?;
            let p = finite(field, args[0])?;
            if p <= 0.0 {
                return Err(Error::config(field, "power exponent must be positive"));
            }
            Ok(Sequence::Power { p })
        }
        "constant" => {
            arity(field, name, &args, 1)?;
            Ok(Sequence::Constant { c: finite(field, args[0])? })
        }
        "shifted-harmonic" => {
            arity(field, name, &args, 1)?;
            Ok(Sequence::ShiftedHarmonic { c: finite(field, args[0])? })
        }
        "alternating-harmonic" => fixed(Sequence::AlternatingHarmonic),
        "harmonic" => fixed(Sequence::Harmonic),
        "alternating-sign" => fixed(Sequence::AlternatingSign),
        "indicator-at-one" => fixed(Sequence::IndicatorAtOne),
        "odd-one-even-geometric" => fixed(Sequence::OddOneEvenGeometric),
        "two-cluster" => fixed(Sequence::TwoCluster),
        _ => Err(Error::config(field, format!("unknown sequence `{name}`"))),
    }
}

pub fn parse_function(field: &str, s: &str) -> Result<RealFn> {
    let (name, args) = split_args(s);
    match name {
        "x" => arity(field, name, &args, 0).map(|_| RealFn::Identity),
        "x^2" => arity(field, name, &args, 0).map(|_| RealFn::Square),
        "tent" => arity(field, name, &args, 0).map(|_| RealFn::Tent),
        "sin-pi" => arity(field, name, &args, 0).map(|_| RealFn::SinPi),
        "const" => {
            arity(field, name, &args, 1)?;
            Ok(RealFn::Constant(finite(field, args[0])?))
        }
        "affine" => {
            arity(field, name, &args, 2)?;
            Ok(RealFn::Affine { slope: finite(field, args[0])?, intercept: finite(field, args[1])? })
        }
        "indicator" => {
            arity(field, name, &args, 1)?;
            Ok(RealFn::IndicatorAt(finite(field, args[0])?))
        }
        "scaled" => {
            arity(field, name, &args, 1)?;
            let n = uint(field, args[0])?;
            if n == 0 {
                return Err(Error::config(field, "scaled:n needs n >= 1"));
            }
            Ok(RealFn::ScaledIdentity { n })
        }
        _ => Err(Error::config(field, format!("unknown function `{name}`"))),
    }
}

pub fn parse_curve(field: &str, s: &str) -> Result<Curve> {
    let (name, args) = split_args(s);
    match name {
        "quarter-circle" => arity(field, name, &args, 0).map(|_| Curve::QuarterCircle),
        "parabola" => arity(field, name, &args, 0).map(|_| Curve::Parabola),
        "segment" => {
            arity(field, name, &args, 4)?;
            let v: Vec<f64> = args.iter().map(|a| finite(field, a)).collect::<Result<_>>()?;
            Ok(Curve::Segment { from: [v[0], v[1], 0.0], to: [v[2], v[3], 0.0] })
        }
        "helix" => {
            arity(field, name, &args, 3)?;
            Ok(Curve::Helix { radius: finite(field, args[0])?, pitch: finite(field, args[1])?, turns: finite(field, args[2])? })
        }
        _ => Err(Error::config(field, format!("unknown curve `{name}`"))),
    }
}

pub fn parse_oracle(field: &str, s: &str) -> Result<LayerOracle> {
    let (name, args) = split_args(s);
    match name {
        "identity" => arity(field, name, &args, 0).map(|_| LayerOracle::lebesgue_identity()),
        "one-except-at-one" => arity(field, name, &args, 0).map(|_| LayerOracle::OneExceptAtOne),
        "inv-sqrt" => arity(field, name, &args, 0).map(|_| LayerOracle::InvSqrt),
        "exp-halfline" => arity(field, name, &args, 0).map(|_| LayerOracle::ExpHalfLine),
        "affine" => {
            arity(field, name, &args, 2)?;
            let slope = finite(field, args[0])?;
            if slope <= 0.0 {
                return Err(Error::config(field, "affine oracle needs a positive slope"));
            }
            Ok(LayerOracle::Affine { slope, intercept: finite(field, args[1])? })
        }
        "power" => {
            arity(field, name, &args, 1)?;
            let p = finite(field, args[0])?;
            if p <= 0.0 {
                return Err(Error::config(field, "power oracle needs p > 0"));
            }
            Ok(LayerOracle::Power { p })
        }
        _ => Err(Error::config(field, format!("unknown oracle `{name}`"))),
    }
}

fn parse_segment(field: &str, tok: &str) -> Result<Segment> {
    let (body, rational_only) = match tok.strip_suffix('q') {
        Some(b) => (b, true),
        None => (tok, false),
    };
    let bad = || Error::config(field, format!("bad segment `{tok}`; use [a,b], (a,b], ... with optional q suffix"));
    let lo_open = match body.chars().next() {
        Some('[') => false,
        Some('(') => true,
        _ => return Err(bad()),
    };
    let hi_open = match body.chars().last() {
        Some(']') => false,
        Some(')') => true,
        _ => return Err(bad()),
    };
    if body.len() < 2 {
        return Err(bad());
    }
    let (lo, hi) = body[1..body.len() - 1].split_once(',').ok_or_else(bad)?;
    let (lo, hi) = (finite(field, lo.trim())?, finite(field, hi.trim())?);
    if !(lo < hi) {
        return Err(Error::config(field, format!("segment `{tok}` needs lo < hi")));
    }
    Ok(Segment { lo, hi, lo_open, hi_open, rational_only })
}

/// `harmonic`, `harmonic0` (with `0`), `dyadic`, `dyadic0` (from `1`),
/// `cantor`, `halfline`, or whitespace-separated segments such as
/// `[0,1] [1,2]q`.
pub fn parse_space(field: &str, s: &str) -> Result<SpaceDescriptor> {
    match s {
        "harmonic" => return Ok(SpaceDescriptor::harmonic()),
        "harmonic0" => return Ok(SpaceDescriptor::Harmonic { extras: vec![0.0] }),
        "dyadic" => return Ok(SpaceDescriptor::dyadic()),
        "dyadic0" => return Ok(SpaceDescriptor::Dyadic { first: 0 }),
        "cantor" => return Ok(SpaceDescriptor::Cantor),
        "halfline" => return Ok(SpaceDescriptor::HalfLine),
        _ => {}
    }
    let mut segs: Vec<Segment> = s.split_whitespace().map(|t| parse_segment(field, t)).collect::<Result<_>>()?;
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    if segs.windows(2).any(|w| w[1].lo < w[0].hi) {
        return Err(Error::config(field, "segments overlap"));
    }
    match segs.len() {
        0 => Err(Error::config(field, "no segments")),
        1 => Ok(SpaceDescriptor::Interval(segs[0])),
        _ => Ok(SpaceDescriptor::Union(segs)),
    }
}

pub fn parse_schedule(field: &str, s: &str) -> Result<Schedule> {
    let (name, args) = split_args(s);
    arity(field, name, &args, 2)?;
    let (a, b) = (uint(field, args[0])?, uint(field, args[1])?);
    match name {
        "linear" if a >= 1 => Ok(Schedule::linear(a, b)),
        "geometric" if a >= 1 && b >= 1 => Ok(Schedule::geometric(a, b)),
        "linear" | "geometric" => Err(Error::config(field, "start must be at least 1")),
        _ => Err(Error::config(field, format!("unknown schedule `{name}`"))),
    }
}

fn parse_rule(field: &str, s: &str, seed: u64) -> Result<EdsRule> {
    let (name, args) = split_args(s);
    match name {
        "midpoint" => arity(field, name, &args, 0).map(|_| EdsRule::Midpoint),
        "infimum" => arity(field, name, &args, 0).map(|_| EdsRule::Infimum),
        "random" if args.is_empty() => Ok(EdsRule::Random(seed)),
        "random" => {
            arity(field, name, &args, 1)?;
            Ok(EdsRule::Random(uint(field, args[0])?))
        }
        _ => Err(Error::config(field, format!("unknown rule `{name}`"))),
    }
}

/// Strategies by name. `adversarial-tail` needs the experiment's sequence.
fn parse_strategy(field: &str, s: &str, seed: u64, seq: Option<&Sequence>) -> Result<Strategy> {
    let (name, args) = split_args(s);
    let none = |st: Strategy| arity(field, name, &args, 0).map(|_| st);
    match name {
        "grid" => none(Strategy::UniformGrid),
        "irrational-grid" => none(Strategy::IrrationalGrid),
        "prefix" => none(Strategy::Prefix),
        "stretched-dyadic" => none(Strategy::StretchedDyadic),
        "randomized" => none(Strategy::RandomizedSdense { seed }),
        "cantor-k" => none(Strategy::CantorK),
        "cantor-l" => none(Strategy::CantorL),
        "offset-grid" => {
            arity(field, name, &args, 1)?;
            let theta = finite(field, args[0])?;
            if !(0.0..1.0).contains(&theta) {
                return Err(Error::config(field, "offset must lie in [0, 1)"));
            }
            Ok(Strategy::OffsetGrid { theta })
        }
        "label-stride" => {
            arity(field, name, &args, 2)?;
            let (offset, stride) = (uint(field, args[0])?, uint(field, args[1])?);
            if offset == 0 || stride == 0 {
                return Err(Error::config(field, "offset and stride must be at least 1"));
            }
            Ok(Strategy::LabelStride { offset, stride, extras: Vec::new() })
        }
        "eds" => {
            let rule = parse_rule(field, &args.join(":"), seed)?;
            Ok(Strategy::EdsBins { rule, convention: crate::spaces::BinConvention::ClosedLast })
        }
        "adversarial-tail" => {
            arity(field, name, &args, 1)?;
            let k_factor = finite(field, args[0])?;
            if k_factor < 0.0 {
                return Err(Error::config(field, "tail factor must be nonnegative"));
            }
            let seq = seq.ok_or_else(|| Error::config(field, "adversarial-tail needs a sequence experiment"))?;
            Ok(Strategy::AdversarialTail { seq: seq.clone(), k_factor })
        }
        _ => Err(Error::config(field, format!("unknown sampler `{name}`"))),
    }
}

fn parse_expect(field: &str, s: &str) -> Result<Expect> {
    Ok(match s {
        "converged" => Expect::Converged,
        "no_extension_evidence" | "nonexistence" => Expect::NoExtension,
        "diverges_plus" => Expect::DivergesPlus,
        "diverges_minus" => Expect::DivergesMinus,
        "holds_on_samples" | "holds" => Expect::Holds,
        "counterexample" => Expect::Counterexample,
        _ => return Err(Error::config(field, format!("unknown expectation `{s}`"))),
    })
}

fn parse_variant(field: &str, s: &str) -> Result<MeasureVariant> {
    match s {
        "nonneg" => Ok(MeasureVariant::Nonneg),
        "signed" => Ok(MeasureVariant::Signed),
        "halfline" => Ok(MeasureVariant::HalfLine),
        _ => Err(Error::config(field, format!("unknown variant `{s}`"))),
    }
}

/// `0.1 0.5, 0.9 1.1`: comma-separated sets of whitespace-separated reals.
fn parse_fixed(field: &str, s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(',')
        .map(|set| set.split_whitespace().map(|x| finite(field, x)).collect::<Result<Vec<f64>>>())
        .filter(|r| r.as_ref().map_or(true, |v| !v.is_empty()))
        .collect()
}

struct Fields<'a> {
    raw: &'a RawConfig,
}

impl<'a> Fields<'a> {
    fn req(&self, key: &str) -> Result<&'a str> {
        self.raw.get(key).ok_or_else(|| Error::config(key, "missing"))
    }

    fn opt(&self, key: &str) -> Option<&'a str> {
        self.raw.get(key)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.opt(key).map_or(Ok(default), |v| finite(key, v))
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        self.opt(key).map_or(Ok(default), |v| uint(key, v))
    }
}

fn parse_functional(f: &Fields, name: &str) -> Result<Functional> {
    let (head, args) = split_args(name);
    let field = "functional";
    let plain = |v: Functional| arity(field, head, &args, 0).map(|_| v);
    match head {
        "midpoint" => plain(Functional::Midpoint),
        "diam" => plain(Functional::Diam),
        "finite-sum" => plain(Functional::FiniteSum),
        "finite-mean" => plain(Functional::FiniteMean),
        "two-dense-indicator" => plain(Functional::TwoDenseIndicator),
        "subset-indicator" => plain(Functional::SubsetIndicator),
        "inner-jordan" => plain(Functional::InnerJordan),
        "parity-dyadic" => plain(Functional::ParityDyadic),
        "constant" => {
            arity(field, head, &args, 1)?;
            Ok(Functional::Constant(finite(field, args[0])?))
        }
        "series" => plain(Functional::Series(parse_sequence("sequence", f.req("sequence")?)?)),
        "layer-sum" => plain(Functional::LayerSum {
            oracle: parse_oracle("oracle", f.req("oracle")?)?,
            m: f.f64_or("m", 2.0)?,
            variant: f.opt("variant").map_or(Ok(MeasureVariant::Nonneg), |v| parse_variant("variant", v))?,
        }),
        "riemann" | "darboux" => {
            let func = parse_function("function", f.req("function")?)?;
            let (a, b) = (f.f64_or("a", 0.0)?, f.f64_or("b", 1.0)?);
            if !(a < b) {
                return Err(Error::config("b", "need a < b"));
            }
            plain(if head == "riemann" { Functional::Riemann { f: func, a, b } } else { Functional::Darboux { f: func, a, b } })
        }
        _ => Err(Error::config(field, format!("unknown functional `{head}`"))),
    }
}

fn parse_properties(f: &Fields) -> Result<PropertyCheck> {
    let check = match f.req("check")? {
        "increasing" => CheckKind::Increasing,
        "d-increasing" => CheckKind::DIncreasing,
        "d-continuous" => CheckKind::DContinuous,
        "left-continuous" => CheckKind::LeftContinuous,
        "l-continuous" => CheckKind::LContinuous,
        other => return Err(Error::config("check", format!("unknown check `{other}`"))),
    };
    let functional = parse_functional(f, f.req("functional")?)?;
    let space = parse_space("space", f.req("space")?)?;
    let subspace = f.opt("subspace").map(|s| parse_space("subspace", s)).transpose()?;
    if (check == CheckKind::LContinuous || matches!(functional, Functional::SubsetIndicator)) && subspace.is_none() {
        return Err(Error::config("subspace", "missing"));
    }
    let eps = match f.opt("eps") {
        Some(s) => s.split(',').map(|e| finite("eps", e.trim())).collect::<Result<Vec<f64>>>()?,
        None => vec![1e-2],
    };
    if eps.is_empty() || eps.iter().any(|&e| e <= 0.0) {
        return Err(Error::config("eps", "must be positive"));
    }
    let direction = match f.opt("direction").unwrap_or("increasing") {
        "increasing" => Direction::Increasing,
        "decreasing" => Direction::Decreasing,
        other => return Err(Error::config("direction", format!("unknown direction `{other}`"))),
    };
    let side = match f.opt("side").unwrap_or("downward") {
        "downward" => Side::Downward,
        "upward" => Side::Upward,
        other => return Err(Error::config("side", format!("unknown side `{other}`"))),
    };
    let cardinality = match f.opt("cardinality").unwrap_or("fixed") {
        "fixed" => Cardinality::Fixed,
        "free" => Cardinality::Free,
        other => return Err(Error::config("cardinality", format!("unknown mode `{other}`"))),
    };
    let trials = f.u64_or("trials", 24)?;
    if trials == 0 || trials > 100_000 {
        return Err(Error::config("trials", "must be in 1..=100000"));
    }
    let samples = f.u64_or("samples", 6)?.min(10_000) as usize;
    let n = f.u64_or("n", 2)?;
    if n == 0 || n > 1000 {
        return Err(Error::config("n", "must be in 1..=1000"));
    }
    let fixed = f.opt("fixed").map_or(Ok(Vec::new()), |s| parse_fixed("fixed", s))?;
    Ok(PropertyCheck {
        check,
        functional,
        space,
        subspace,
        eps,
        trials: trials as usize,
        samples,
        n: n as usize,
        direction,
        side,
        cardinality,
        fixed,
    })
}

fn parse_tolerances(f: &Fields) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(v) = f.opt("tol.abs") {
        tol = tol.with_tol(finite("tol.abs", v)?);
    }
    if let Some(v) = f.opt("tol.separation") {
        tol.separation = finite("tol.separation", v)?;
    }
    if let Some(v) = f.opt("tol.threshold") {
        tol.threshold = finite("tol.threshold", v)?;
    }
    tol.window = f.u64_or("tol.window", tol.window as u64)?.min(1 << 20) as usize;
    tol.max_level = f.u64_or("tol.max_level", tol.max_level as u64)?.min(1 << 20) as usize;
    tol.validate()?;
    Ok(tol)
}

impl ExperimentConfig {
    /// Checks every field before anything runs. Unknown keys are errors.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::config("experiment", "empty config"));
        }
        let f = Fields { raw };
        let name = f.req("experiment")?;
        let allowed = experiment_keys(name).ok_or_else(|| Error::config("experiment", format!("unknown experiment `{name}`")))?;
        if let Some(k) = raw.keys().find(|k| !COMMON_KEYS.contains(k) && !allowed.contains(k)) {
            return Err(Error::config(k, format!("not a key of the `{name}` experiment")));
        }
        let seed = f.u64_or("seed", 0)?;
        let tol = parse_tolerances(&f)?;
        let interval = |f: &Fields| -> Result<(f64, f64)> {
            let (a, b) = (f.f64_or("a", 0.0)?, f.f64_or("b", 1.0)?);
            if !(a < b) {
                return Err(Error::config("b", "need a < b"));
            }
            Ok((a, b))
        };
        let experiment = match name {
            "series" => Experiment::Series {
                seq: parse_sequence("sequence", f.req("sequence")?)?,
                space: match f.opt("space").unwrap_or("harmonic") {
                    "harmonic" => SeriesSpace::Harmonic,
                    "dyadic" => SeriesSpace::Dyadic,
                    other => return Err(Error::config("space", format!("series run on harmonic or dyadic, not `{other}`"))),
                },
            },
            "unordered-sum" => Experiment::UnorderedSum { seq: parse_sequence("sequence", f.req("sequence")?)? },
            "unordered-mean" => Experiment::UnorderedMean { seq: parse_sequence("sequence", f.req("sequence")?)? },
            "sequence" => Experiment::SequenceLimit { seq: parse_sequence("sequence", f.req("sequence")?)? },
            "riemann" => {
                let (a, b) = interval(&f)?;
                Experiment::Riemann { f: parse_function("function", f.req("function")?)?, a, b }
            }
            "darboux" => {
                let (a, b) = interval(&f)?;
                let sup = match split_args(f.opt("sup").unwrap_or("monotone")) {
                    ("monotone", a) if a.is_empty() => SupOracle::PiecewiseMonotone,
                    ("probe", a) if a.len() == 1 => SupOracle::Probe(uint("sup", a[0])?.clamp(1, 1 << 16) as usize),
                    _ => return Err(Error::config("sup", "use `monotone` or `probe:N`")),
                };
                Experiment::Darboux { f: parse_function("function", f.req("function")?)?, a, b, sup }
            }
            "arclength" => Experiment::Arclength { curve: parse_curve("curve", f.req("curve")?)? },
            "jordan" => {
                if f.opt("rules").is_some() {
                    return Err(Error::config("rules", "not a key of the `jordan` experiment"));
                }
                let space = parse_space("space", f.req("space")?)?;
                if space.segments().is_none() {
                    return Err(Error::config("space", "jordan needs a union of intervals"));
                }
                Experiment::Jordan { space }
            }
            "eds-mean" => {
                let space = parse_space("space", f.req("space")?)?;
                if space.segments().is_none() {
                    return Err(Error::config("space", "eds-mean needs a union of intervals"));
                }
                let rules = f
                    .opt("rules")
                    .unwrap_or("midpoint")
                    .split(',')
                    .enumerate()
                    .map(|(i, r)| parse_rule("rules", r.trim(), seed.wrapping_add(i as u64)))
                    .collect::<Result<Vec<_>>>()?;
                Experiment::EdsMean { space, rules }
            }
            "measure" => {
                let variant = f.opt("variant").map_or(Ok(MeasureVariant::Nonneg), |v| parse_variant("variant", v))?;
                let m = f.f64_or("m", 2.0)?;
                if variant != MeasureVariant::HalfLine && m <= 0.0 {
                    return Err(Error::config("m", "must be positive"));
                }
                Experiment::Measure { oracle: parse_oracle("oracle", f.req("oracle")?)?, m, variant }
            }
            "iso-mean" => Experiment::IsoMean {
                set: match f.opt("set").unwrap_or("harmonic-with-zero") {
                    "harmonic-with-zero" => IsoSetSpec::harmonic_with_zero(),
                    "two-sided-harmonic" => IsoSetSpec::two_sided_harmonic(),
                    other => return Err(Error::config("set", format!("unknown set `{other}`"))),
                },
            },
            "cantor" => {
                let n_max = f.u64_or("n_max", 20)?;
                if !(3..=30).contains(&n_max) {
                    return Err(Error::config("n_max", "must be in 3..=30"));
                }
                Experiment::Cantor { n_max: n_max as u32 }
            }
            "properties" => Experiment::Properties(Box::new(parse_properties(&f)?)),
            _ => unreachable!("checked against the key table"),
        };
        let seq = match &experiment {
            Experiment::Series { seq, .. } => Some(seq),
            _ => None,
        };
        let spec = |skey: &str, sched_key: &str| -> Result<Option<SamplerSpec>> {
            let Some(s) = f.opt(skey) else {
                if f.opt(sched_key).is_some() && skey == "cross_sampler" {
                    return Err(Error::config(sched_key, "given without cross_sampler"));
                }
                return Ok(None);
            };
            let strategy = parse_strategy(skey, s, seed, seq)?;
            let schedule = f.opt(sched_key).map_or(Ok(Schedule::linear(1, 1)), |v| parse_schedule(sched_key, v))?;
            Ok(Some(SamplerSpec::new(strategy, schedule)))
        };
        let mut sampler = spec("sampler", "schedule")?;
        if sampler.is_none() {
            if let Some(v) = f.opt("schedule") {
                sampler = Some(SamplerSpec::new(default_strategy(&experiment), parse_schedule("schedule", v)?));
            }
        }
        let cross = spec("cross_sampler", "cross_schedule")?;
        let expect = match f.opt("expect") {
            Some(v) => parse_expect("expect", v)?,
            None => match &experiment {
                Experiment::Cantor { .. } => Expect::NoExtension,
                Experiment::Properties(_) => Expect::Holds,
                _ => Expect::Converged,
            },
        };
        let expect_value = f.opt("expect_value").map(|v| num("expect_value", v)).transpose()?;
        let expect_tol = f.f64_or("expect_tol", 1e-6)?;
        if expect_tol < 0.0 {
            return Err(Error::config("expect_tol", "must be nonnegative"));
        }
        Ok(ExperimentConfig {
            experiment,
            sampler,
            cross,
            tol,
            seed,
            output: f.opt("output").map(PathBuf::from),
            expect,
            expect_value,
            expect_tol,
        })
    }
}

/// Strategy used when only a schedule is given.
pub fn default_strategy(e: &Experiment) -> Strategy {
    match e {
        Experiment::Series { space: SeriesSpace::Dyadic, .. } => Strategy::StretchedDyadic,
        Experiment::Series { .. } | Experiment::UnorderedSum { .. } | Experiment::UnorderedMean { .. } | Experiment::SequenceLimit { .. } => {
            Strategy::Prefix
        }
        Experiment::Cantor { .. } => Strategy::CantorK,
        _ => Strategy::UniformGrid,
    }
}

//! Command dispatch behind the `selfaffine` binary.
//!
//! Every command writes a `#` preamble (version and resolved configuration)
//! followed by CSV, or a plain PBM for 2-D rasters. Exit codes: 0 success,
//! 1 domain error, 2 usage error.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::attractor::{classify_origin_at_level, osc_verdict, raster_attractor};
use crate::beurling::{lebesgue_from_density, lower_density_profile, upper_density_profile, WindowSchedule};
use crate::cantor::{cantor_hausdorff, cantor_sdensity_sequence, count_upto, translation_dominance_check, CantorPair};
use crate::error::Error;
use crate::expansion::{check_budget, expand_level, LevelIter};
use crate::format::{axis_columns, num, opt_num, preamble, row};
use crate::pair::{detect_similarity, SelfAffinePair};
use crate::sdensity::{
    check_renormalization, hausdorff_from_sdensity, natural_thresholds, sample_self_similar_measure,
    upper_s_density_profile, AxisBox,
};
use crate::spec_file::{parse_spec_file, PairSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Sizes for the natural schedules when none is given.
const NATURAL_COUNT: usize = 8;
/// Levels scanned for the cross-level s-density divergence rule.
const SDENSITY_LEVELS: u32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Domain(_) | Self::Io { .. } => EXIT_DOMAIN,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `geo:start,stop,count` or `lin:start,stop,count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleSpec {
    Geo(f64, f64, usize),
    Lin(f64, f64, usize),
}

impl ScheduleSpec {
    pub fn build(&self) -> crate::Result<WindowSchedule> {
        match *self {
            Self::Geo(a, b, c) => WindowSchedule::geometric(a, b, c),
            Self::Lin(a, b, c) => WindowSchedule::linear(a, b, c),
        }
    }
}

impl FromStr for ScheduleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("schedule {s:?} needs a geo: or lin: prefix"))?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("schedule {s:?} needs start,stop,count"));
        };
        let a: f64 = a.parse().map_err(|_| format!("bad start {a:?}"))?;
        let b: f64 = b.parse().map_err(|_| format!("bad stop {b:?}"))?;
        let c: usize = c.parse().map_err(|_| format!("bad count {c:?}"))?;
        if !(a > 0.0 && b >= a && a.is_finite() && b.is_finite() && c > 0) {
            return Err(format!("schedule {s:?} needs 0 < start <= stop and count >= 1"));
        }
        match kind {
            "geo" => Ok(Self::Geo(a, b, c)),
            "lin" => Ok(Self::Lin(a, b, c)),
            _ => Err(format!("unknown schedule kind {kind:?}")),
        }
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geo(a, b, c) => write!(f, "geo:{a},{b},{c}"),
            Self::Lin(a, b, c) => write!(f, "lin:{a},{b},{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CantorOp {
    /// Points of `D_∞` in `[0, b]`, `b = Σ N^j r_j`.
    Count {
        coeffs: Vec<f64>,
    },
    HMeasure,
    Sequence {
        m_max: u32,
    },
    Dominance {
        level: u32,
    },
}

impl CantorOp {
    fn name(&self) -> &'static str {
        match self {
            Self::Count { .. } => "count",
            Self::HMeasure => "hmeasure",
            Self::Sequence { .. } => "sequence",
            Self::Dominance { .. } => "dominance",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Expand { level: u32 },
    Check { level: u32 },
    Density { level: u32, windows: Option<ScheduleSpec>, lookahead: u32 },
    SDensity { level: u32, s: Option<f64>, thresholds: Option<ScheduleSpec> },
    Cantor { dilation: f64, digit: f64, op: CantorOp },
    Raster { resolution: usize, max_iters: usize },
    ClassifyOrigin { level: u32, lookahead: u32, windows: Option<ScheduleSpec> },
    RenormCheck { lo: Vec<f64>, hi: Vec<f64>, steps: u32, samples: usize, burn_in: usize, reps: u32, seed: u64 },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Expand { .. } => "expand",
            Self::Check { .. } => "check",
            Self::Density { .. } => "density",
            Self::SDensity { .. } => "sdensity",
            Self::Cantor { .. } => "cantor",
            Self::Raster { .. } => "raster",
            Self::ClassifyOrigin { .. } => "classify-origin",
            Self::RenormCheck { .. } => "renorm-check",
        }
    }

    fn needs_pair(&self) -> bool {
        !matches!(self, Self::Cantor { .. })
    }

    fn settings(&self) -> Vec<(String, String)> {
        let mut v: Vec<(&str, String)> = Vec::new();
        let sched = |s: &Option<ScheduleSpec>| s.map(|s| s.to_string()).unwrap_or_else(|| "natural".into());
        match self {
            Self::Expand { level } | Self::Check { level } => v.push(("level", level.to_string())),
            Self::Density { level, windows, lookahead } => {
                v.push(("level", level.to_string()));
                v.push(("windows", sched(windows)));
                v.push(("lookahead", lookahead.to_string()));
            }
            Self::SDensity { level, s, thresholds } => {
                v.push(("level", level.to_string()));
                v.push((
                    "s",
                    s.map(|s| format!("{} (user supplied)", num(s))).unwrap_or_else(|| "similarity dimension".into()),
                ));
                v.push(("thresholds", sched(thresholds)));
            }
            Self::Cantor { dilation, digit, op } => {
                v.push(("N", format!("{dilation}")));
                v.push(("d", format!("{digit}")));
                v.push(("op", op.name().into()));
                match op {
                    CantorOp::Count { coeffs } => {
                        v.push(("coeffs", coeffs.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",")))
                    }
                    CantorOp::Sequence { m_max } => v.push(("m_max", m_max.to_string())),
                    CantorOp::Dominance { level } => v.push(("level", level.to_string())),
                    CantorOp::HMeasure => {}
                }
            }
            Self::Raster { resolution, max_iters } => {
                v.push(("resolution", resolution.to_string()));
                v.push(("max_iters", max_iters.to_string()));
            }
            Self::ClassifyOrigin { level, lookahead, windows } => {
                v.push(("level", level.to_string()));
                v.push(("lookahead", lookahead.to_string()));
                v.push(("windows", sched(windows)));
            }
            Self::RenormCheck { lo, hi, steps, samples, burn_in, reps, seed } => {
                let join = |x: &[f64]| x.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",");
                v.push(("lo", join(lo)));
                v.push(("hi", join(hi)));
                v.push(("steps", steps.to_string()));
                v.push(("samples", samples.to_string()));
                v.push(("burn_in", burn_in.to_string()));
                v.push(("reps", reps.to_string()));
                v.push(("seed", seed.to_string()));
            }
        }
        v.into_iter().map(|(k, s)| (k.to_string(), s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Pair file; required by every command except `cantor`.
    pub pair: Option<PathBuf>,
    /// Expansion budget in units of total mass.
    pub cap: u64,
    /// Standard output when absent.
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Checks every numeric argument before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.command.needs_pair() && self.pair.is_none() {
            return Err(usage(format!("{} needs --pair", self.command.name())));
        }
        if self.cap == 0 {
            return Err(usage("--cap must be positive"));
        }
        match &self.command {
            Command::Expand { level }
            | Command::Check { level }
            | Command::Density { level, .. }
            | Command::SDensity { level, .. }
            | Command::ClassifyOrigin { level, .. }
                if *level == 0 =>
            {
                Err(usage("--level must be at least 1"))
            }
            Command::SDensity { s: Some(s), .. } if !(*s > 0.0 && s.is_finite()) => Err(usage("--s must be positive")),
            Command::Cantor { op: CantorOp::Sequence { m_max: 0 }, .. } => Err(usage("--m-max must be at least 1")),
            Command::Raster { max_iters: 0, .. } => Err(usage("--max-iters must be at least 1")),
            Command::RenormCheck { lo, hi, steps, samples, reps, .. } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    Err(usage("--lo and --hi need the same nonzero number of values"))
                } else if *steps == 0 || *samples == 0 || *reps == 0 {
                    Err(usage("--steps, --samples and --reps must be positive"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn settings(&self, spec: Option<&PairSpec>) -> Vec<(String, String)> {
        let mut v = Vec::new();
        if let Some(p) = &self.pair {
            v.push(("pair".to_string(), p.display().to_string()));
        }
        if let Some(spec) = spec {
            let pair = &spec.pair;
            let fmt_vec = |x: &[f64]| x.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(" ");
            v.push(("dim".into(), pair.dim().to_string()));
            v.push(("matrix".into(), fmt_vec(pair.matrix().entries())));
            let digits: Vec<String> = pair.digits().digits().iter().map(|d| fmt_vec(d)).collect();
            v.push(("digits".into(), digits.join("; ")));
            v.push(("regime".into(), pair.regime().as_str().into()));
        }
        v.extend(self.command.settings());
        v.push(("cap".into(), self.cap.to_string()));
        v
    }
}

fn load_pair(path: &PathBuf) -> Result<PairSpec, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(parse_spec_file(&text)?)
}

/// Runs the command and writes its output to `out`.
pub fn run_to(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    let spec = match &config.pair {
        Some(p) if config.command.needs_pair() => Some(load_pair(p)?),
        _ => None,
    };
    let text = match (&config.command, &spec) {
        (Command::Cantor { dilation, digit, op }, _) => cantor(config, *dilation, *digit, op)?,
        (cmd, Some(spec)) => {
            let head = preamble(cmd.name(), &config.settings(Some(spec)));
            with_pair(cmd, &spec.pair, config.cap, head)?
        }
        (cmd, None) => return Err(usage(format!("{} needs --pair", cmd.name()))),
    };
    let io_err = |source| CliError::Io { path: "output".into(), source };
    out.write_all(text.as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Runs the command against standard output or the configured file and
/// returns the exit code, reporting errors on standard error.
pub fn run(config: &RunConfig) -> i32 {
    let result = match &config.output {
        None => run_to(config, &mut io::stdout().lock()),
        Some(path) => {
            let mut buf = Vec::new();
            run_to(config, &mut buf).and_then(|()| {
                std::fs::write(path, buf).map_err(|source| CliError::Io { path: path.display().to_string(), source })
            })
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("selfaffine: {e}");
            e.exit_code()
        }
    }
}

fn with_pair(cmd: &Command, pair: &SelfAffinePair, cap: u64, mut out: String) -> Result<String, CliError> {
    let dim = pair.dim();
    match cmd {
        Command::Expand { level } => {
            let mu = expand_level(pair, *level, cap)?;
            let mut cols = axis_columns("x", dim);
            cols.push("weight".into());
            out += &row(&cols);
            for (p, w) in mu.iter() {
                let mut f: Vec<String> = p.iter().map(|&v| num(v)).collect();
                f.push(w.to_string());
                out += &row(&f);
            }
        }
        Command::Check { level } => {
            let report = osc_verdict(pair, *level, cap)?;
            for (r, d) in report.levels.iter().zip(&report.density_series) {
                out += &format!(
                    "# level {}: distinct {}, max multiplicity {}, min separation {}, density at window {} = {}\n",
                    r.level,
                    r.distinct_count,
                    r.max_multiplicity,
                    num(r.min_separation),
                    num(report.density_window),
                    num(*d)
                );
            }
            if let Some(c) = &report.collision {
                let check = match c.witness.check {
                    crate::expansion::WitnessCheck::Verified(v) => format!("verified multiplicity {v}"),
                    crate::expansion::WitnessCheck::Unverified => "unverified".into(),
                };
                out += &format!(
                    "# witness: point {} at level {}, multiplicity >= {}, {check}\n",
                    c.witness.point.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" "),
                    c.witness.level,
                    c.witness.lower_bound
                );
            }
            let bounded = match report.density_bounded {
                Some(b) => b.to_string(),
                None => "unknown".into(),
            };
            out += &format!("# density bounded: {bounded}\n");
            out += &format!("{report}\n");
        }
        Command::Density { level, windows, lookahead } => {
            check_budget(pair.m(), level + lookahead, cap)?;
            let mut it = LevelIter::new(pair);
            let mut profiles = Vec::new();
            let schedule = match windows {
                Some(s) => s.build()?,
                None => {
                    let top = expand_level(pair, *level, cap)?;
                    WindowSchedule::natural(top.extent().max(1.0), NATURAL_COUNT)?
                }
            };
            for l in 1..=*level {
                profiles.push(upper_density_profile(it.step(), &schedule)?.with_level(l));
            }
            let top = it.current().clone();
            let reference = if *lookahead > 0 {
                for _ in 0..*lookahead {
                    it.step();
                }
                Some(it.current())
            } else {
                None
            };
            let lower = lower_density_profile(&top, &schedule, reference)?.with_level(*level);
            let leb = lebesgue_from_density(&profiles)?;
            let mut cols = vec!["N".to_string(), "sup".into()];
            cols.extend(axis_columns("argmax", dim));
            cols.push("inf".into());
            cols.extend(axis_columns("argmin", dim));
            cols.push("trusted".into());
            out += &row(&cols);
            for e in &lower.per_size {
                let mut f = vec![num(e.size), num(e.sup_value)];
                f.extend(e.argmax.iter().map(|&v| num(v)));
                match &e.inf {
                    Some(i) => {
                        f.push(num(i.value));
                        f.extend(i.argmin.iter().map(|&v| num(v)));
                        f.push(i.trusted.to_string());
                    }
                    None => f.extend(std::iter::repeat_n(String::new(), dim + 2)),
                }
                out += &row(&f);
            }
            out += &format!("# lebesgue = {}\n# divergent = {}\n", num(leb.measure), leb.divergent);
        }
        Command::SDensity { level, s, thresholds } => {
            if dim != 1 {
                return Err(Error::UnsupportedDimension(dim).into());
            }
            let s = match s {
                Some(s) => *s,
                None => {
                    let info = detect_similarity(pair);
                    if !info.is_similarity {
                        return Err(usage("pair is not a similarity; pass --s"));
                    }
                    info.sim_dimension
                }
            };
            check_budget(pair.m(), *level, cap)?;
            let first = level.saturating_sub(SDENSITY_LEVELS - 1).max(1);
            let mut it = LevelIter::new(pair);
            for _ in 1..first {
                it.step();
            }
            let mut profiles = Vec::new();
            let mut rs = None;
            for l in first..=*level {
                let mu = it.step();
                if l == first {
                    let sizes = match thresholds {
                        Some(t) => t.build()?.sizes().to_vec(),
                        None => {
                            let top = expand_level(pair, *level, cap)?;
                            natural_thresholds(top.extent().max(1.0), NATURAL_COUNT)
                        }
                    };
                    rs = Some(sizes);
                }
                let r = rs.as_ref().expect("set on the first level");
                profiles.push(upper_s_density_profile(mu, s, r)?.with_level(l));
            }
            let h = hausdorff_from_sdensity(&profiles)?;
            out += &row(["r", "sup", "weight", "left", "right"]);
            for e in &profiles.last().expect("at least one level").per_threshold {
                let f = match &e.sup {
                    Some(x) => vec![num(e.threshold), num(x.value), x.weight.to_string(), num(x.left), num(x.right)],
                    None => vec![num(e.threshold), String::new(), String::new(), String::new(), String::new()],
                };
                out += &row(&f);
            }
            out += &format!("# s = {}\n# hausdorff = {}\n# divergent = {}\n", num(s), num(h.measure), h.divergent);
        }
        Command::Raster { resolution, max_iters } => {
            let (grid, est) = raster_attractor(pair, *resolution, *max_iters)?;
            let summary = format!(
                "# outer = {}\n# iterations = {}\n# converged = {}\n# bounds = {}\n",
                num(est.outer),
                est.iterations,
                est.converged,
                grid.lo
                    .iter()
                    .zip(&grid.hi)
                    .map(|(a, b)| format!("[{}, {}]", num(*a), num(*b)))
                    .collect::<Vec<_>>()
                    .join(" x ")
            );
            if dim == 2 {
                let pbm = grid.to_pbm()?;
                let (magic, body) = pbm.split_once('\n').expect("pbm header");
                return Ok(format!("{magic}\n{out}{summary}{body}"));
            }
            out += &summary;
            out += &row(["cell_index", "occupied"]);
            for (i, c) in grid.cells.iter().enumerate() {
                out += &row([i.to_string(), u8::from(*c).to_string()]);
            }
        }
        Command::ClassifyOrigin { level, lookahead, windows } => {
            let schedule = windows.map(|w| w.build()).transpose()?;
            let r = classify_origin_at_level(pair, *level, *lookahead, schedule.as_ref(), cap)?;
            out += &row(["class", "target", "N", "lower", "upper", "tolerance"]);
            out += &row([
                r.class.as_str().to_string(),
                num(r.target),
                opt_num(r.size),
                opt_num(r.lower_value),
                num(r.upper_value),
                num(r.tolerance),
            ]);
            out += &format!("# result = {r}\n");
        }
        Command::RenormCheck { lo, hi, steps, samples, burn_in, reps, seed } => {
            let window = AxisBox::new(lo.clone(), hi.clone())?;
            if window.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: window.dim() }.into());
            }
            check_budget(pair.m(), *steps, cap)?;
            out += &row(["rep", "seed", "lhs", "rhs", "stderr", "agrees"]);
            let mut agreeing = 0;
            for rep in 0..*reps {
                let s = seed.wrapping_add(rep as u64);
                let sample = sample_self_similar_measure(pair, *samples, s, *burn_in);
                let c = check_renormalization(pair, &window, *steps, &sample, cap)?;
                let ok = c.agrees(3.0);
                agreeing += u32::from(ok);
                out += &row([rep.to_string(), s.to_string(), num(c.lhs), num(c.rhs), num(c.stderr), ok.to_string()]);
            }
            out += &format!("# agreeing within 3 stderr = {agreeing}/{reps}\n");
        }
        Command::Cantor { .. } => unreachable!("handled without a pair"),
    }
    Ok(out)
}

fn cantor(config: &RunConfig, dilation: f64, digit: f64, op: &CantorOp) -> Result<String, CliError> {
    let cp = CantorPair::new(dilation, digit)?;
    let mut out = preamble("cantor", &config.settings(None));
    match op {
        CantorOp::Count { coeffs } => {
            let count = count_upto(&cp, coeffs)?;
            out += &row(["b", "count"]);
            out += &row([num(cp.value(coeffs)), count.to_string()]);
        }
        CantorOp::HMeasure => {
            out += &row(["s", "hmeasure"]);
            out += &row([num(cp.s()), num(cantor_hausdorff(&cp))]);
        }
        CantorOp::Sequence { m_max } => {
            let seq = cantor_sdensity_sequence(&cp, *m_max)?;
            out += &row(["m", "v_m"]);
            for (m, v) in &seq.values {
                out += &row([m.to_string(), num(*v)]);
            }
            out += &format!("# limit = {}\n", num(seq.limit));
        }
        CantorOp::Dominance { level } => {
            let v = translation_dominance_check(&cp, *level, config.cap)?;
            out += &row(["level", "holds", "a", "b", "count", "origin_count"]);
            out += &match v {
                None => {
                    row([level.to_string(), "true".into(), String::new(), String::new(), String::new(), String::new()])
                }
                Some(v) => row([
                    level.to_string(),
                    "false".into(),
                    num(v.a),
                    num(v.b),
                    v.count.to_string(),
                    v.origin_count.to_string(),
                ]),
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_parse() {
        assert_eq!("geo:16,4096,9".parse::<ScheduleSpec>().unwrap(), ScheduleSpec::Geo(16.0, 4096.0, 9));
        assert_eq!("lin:1.5,3,4".parse::<ScheduleSpec>().unwrap(), ScheduleSpec::Lin(1.5, 3.0, 4));
        assert_eq!(ScheduleSpec::Geo(16.0, 4096.0, 9).to_string(), "geo:16,4096,9");
        for bad in ["16,4096,9", "geo:16,4096", "exp:1,2,3", "geo:0,1,2", "geo:4,2,2", "geo:1,2,0"] {
            assert!(bad.parse::<ScheduleSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn hmeasure_output() {
        let config = RunConfig {
            command: Command::Cantor { dilation: 3.0, digit: 2.0, op: CantorOp::HMeasure },
            pair: None,
            cap: crate::DEFAULT_CAP,
            output: None,
        };
        let mut buf = Vec::new();
        run_to(&config, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().last().unwrap().ends_with(",1.000000000000"));
    }

    #[test]
    fn exit_codes() {
        let config = RunConfig { command: Command::Expand { level: 3 }, pair: None, cap: 10, output: None };
        assert_eq!(run_to(&config, &mut Vec::new()).unwrap_err().exit_code(), EXIT_USAGE);
        let config = RunConfig {
            command: Command::Cantor { dilation: 2.0, digit: 1.0, op: CantorOp::HMeasure },
            pair: None,
            cap: 10,
            output: None,
        };
        assert_eq!(run_to(&config, &mut Vec::new()).unwrap_err().exit_code(), EXIT_DOMAIN);
    }
}

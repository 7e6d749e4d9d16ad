use std::str::FromStr;

use rankone::cf::{approx_errors, certified_golden, classify, Beta, CFNumber, Classification};
use rankone::dynamics::{
    coprime_heights, eigenvalue_screen, partial_rigidity_scan, rigidity_scan, LevelSample, RigidityMode,
    RigidityReport, EXIT_INCONCLUSIVE, EXIT_OK,
};
use rankone::eigen::{default_depth, pushforward_histogram, tail_bound};
use rankone::gk::{bits_for_window, montecarlo, MonteCarloConfig};
use rankone::nonsingular::{ratio_set_witness, NsDump, NsTower, RatioSetWitness, Variant, PIECE_ORDER};
use rankone::rational::{self, Rational};
use rankone::tower::{Tower, SPACER_PLACEMENT, SUBCOLUMN_ORDER};
use rankone::Error;
use serde::Serialize;

use crate::config::{Command, Common, Format, RigidityModeArg, RunConfig, VariantArg};

pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(
                Error::DepthCapExceeded { .. }
                | Error::NeedsDeeperStage { .. }
                | Error::TieUnresolved { .. }
                | Error::InsufficientPrecision(_),
            ) => EXIT_INCONCLUSIVE,
            Failure::Core(_) | Failure::Io(_) => EXIT_ERROR,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// A rendered report and the exit code it implies.
pub struct Rendered {
    pub body: String,
    pub exit: i32,
    pub out: Option<std::path::PathBuf>,
}

#[derive(Serialize)]
struct Conventions {
    spacer_placement: &'static str,
    subcolumn_order: &'static str,
    piece_order: &'static str,
}

const CONVENTIONS: Conventions = Conventions {
    spacer_placement: SPACER_PLACEMENT,
    subcolumn_order: SUBCOLUMN_ORDER,
    piece_order: PIECE_ORDER,
};

#[derive(Serialize)]
struct Envelope<'a, T> {
    config: &'a RunConfig,
    conventions: &'a Conventions,
    report: &'a T,
}

fn json<T: Serialize>(cfg: &RunConfig, report: &T) -> Result<String, Failure> {
    let env = Envelope {
        config: cfg,
        conventions: &CONVENTIONS,
        report,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Io(e.to_string()))
}

fn render<T: Serialize>(cfg: RunConfig, report: &T, csv: impl FnOnce() -> Result<String, Failure>, exit: i32) -> Result<Rendered, Failure> {
    let body = match cfg.format {
        Format::Json => json(&cfg, report)?,
        Format::Csv => csv()?,
    };
    Ok(Rendered {
        body,
        exit,
        out: cfg.out,
    })
}

fn parse_alpha(common: &Common) -> Result<CFNumber, Failure> {
    Ok(CFNumber::parse(&common.alpha)?)
}

fn parse_fraction(name: &str, s: &str) -> Result<Rational, Failure> {
    rational::parse_fraction(s).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn check_cap(depth: usize, cap: usize) -> Result<(), Failure> {
    if depth > cap {
        return Err(Error::DepthCapExceeded { cap, required: depth }.into());
    }
    Ok(())
}

fn fraction(r: &Rational) -> String {
    rational::to_fraction_string(r)
}

pub fn run(command: Command, cap: usize) -> Result<Rendered, Failure> {
    match command {
        Command::Analyze { common } => analyze(&common, cap),
        Command::Tower { common } => tower(&common, cap),
        Command::Eigen { common, beta } => eigen(&common, &beta, cap),
        Command::Pushforward { common, samples, bins } => pushforward(&common, samples, bins, cap),
        Command::Rigidity {
            common,
            mode,
            p_max,
            k,
        } => rigidity(&common, mode, p_max.as_deref(), k, cap),
        Command::Typeiii {
            common,
            variant,
            lambda,
            beta,
            target,
            k,
        } => typeiii(&common, variant, &lambda, beta.as_deref(), target.as_deref(), k, cap),
        Command::Gk {
            common,
            samples,
            k,
            window,
        } => gk(&common, samples, k, window, cap),
    }
}

#[derive(Serialize)]
struct ConvergentRow {
    k: usize,
    a_k: String,
    p_k: String,
    q_k: String,
    /// `|q_k alpha - p_k|`, approximate.
    zeta_approx: Option<f64>,
    #[serde(with = "rational::serde_fraction_opt")]
    tail_bound: Option<Rational>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    alpha: String,
    convergents: Vec<ConvergentRow>,
    classification: Classification,
    coprime_heights: bool,
}

fn analyze(common: &Common, cap: usize) -> Result<Rendered, Failure> {
    let cf = parse_alpha(common)?;
    if certified_golden(&cf) {
        return Err(Error::GoldenTypeRejected.into());
    }
    let depth = common.depth.unwrap_or(30);
    let precision = common.precision.unwrap_or(64);
    let width = Rational::new(1.into(), pow2(precision));
    let avail = cf.available().map_or(depth, |a| a.min(depth));
    let conv = cf.convergents(avail)?;
    let mut rows = Vec::new();
    for k in 0..=avail {
        let zeta = (k >= 1 && k < avail)
            .then(|| approx_errors(&cf, k, &width).ok())
            .flatten()
            .map(|e| rational::to_f64(e.zeta.hi()));
        let tb = (k >= 1).then(|| tail_bound(&cf, k).ok()).flatten().map(|t| t.bound);
        rows.push(ConvergentRow {
            k,
            a_k: cf.coefficient(k).map(|a| a.to_string()).unwrap_or_default(),
            p_k: conv.p(k).to_string(),
            q_k: conv.q(k).to_string(),
            zeta_approx: zeta,
            tail_bound: tb,
        });
    }
    let report = AnalyzeReport {
        alpha: cf.to_literal(),
        classification: classify(&cf, avail.max(2))?,
        coprime_heights: coprime_heights(&cf, avail.saturating_sub(1))?,
        convergents: rows,
    };
    let mut cfg = RunConfig::base("analyze", common, cf.to_literal(), Format::Json, cap);
    cfg.depth = Some(avail);
    cfg.precision = Some(precision);
    let rows = &report.convergents;
    render(cfg, &report, || csv_rows(rows), EXIT_OK)
}

fn pow2(bits: u32) -> num_bigint::BigInt {
    num_bigint::BigInt::from(1) << bits as usize
}

#[derive(Serialize)]
struct StageRow {
    k: usize,
    height: u64,
    cuts: u64,
    spacers: u64,
    level_width: String,
}

fn tower(common: &Common, cap: usize) -> Result<Rendered, Failure> {
    let cf = parse_alpha(common)?;
    let depth = common.depth.unwrap_or(8);
    check_cap(depth, cap)?;
    let t = Tower::build(&cf, depth)?;
    let dump = t.dump();
    let mut cfg = RunConfig::base("tower", common, cf.to_literal(), Format::Json, cap);
    cfg.depth = Some(depth);
    let stages = &dump.stages;
    render(
        cfg,
        &dump,
        || {
            let rows: Vec<StageRow> = stages
                .iter()
                .map(|s| StageRow {
                    k: s.k,
                    height: s.height,
                    cuts: s.cuts,
                    spacers: s.spacers,
                    level_width: fraction(&s.level_width),
                })
                .collect();
            csv_rows(&rows)
        },
        EXIT_OK,
    )
}

#[derive(Serialize)]
struct EpsRow {
    k: usize,
    eps_upper: String,
}

fn eigen(common: &Common, beta: &str, cap: usize) -> Result<Rendered, Failure> {
    let cf = parse_alpha(common)?;
    let b = Beta::from_str(beta).map_err(|e| Failure::Usage(format!("--beta: {e}")))?;
    let depth = common.depth.unwrap_or(24);
    let report = eigenvalue_screen(&cf, &b, depth)?;
    let mut cfg = RunConfig::base("eigen", common, cf.to_literal(), Format::Json, cap);
    cfg.depth = Some(depth);
    cfg.beta = Some(b.to_string());
    let exit = report.exit_code();
    let eps = &report.eps_upper;
    render(
        cfg,
        &report,
        || {
            let rows: Vec<EpsRow> = eps
                .iter()
                .enumerate()
                .map(|(i, e)| EpsRow {
                    k: i + 1,
                    eps_upper: fraction(e),
                })
                .collect();
            csv_rows(&rows)
        },
        exit,
    )
}

fn pushforward(common: &Common, samples: u64, bins: usize, cap: usize) -> Result<Rendered, Failure> {
    let cf = parse_alpha(common)?;
    let depth = match common.depth {
        Some(d) => d,
        None => default_depth(&cf)?,
    };
    check_cap(depth, cap)?;
    let t = Tower::build(&cf, depth)?;
    let h = pushforward_histogram(&t, samples, depth, bins, common.seed)?;
    let mut cfg = RunConfig::base("pushforward", common, cf.to_literal(), Format::Json, cap);
    cfg.depth = Some(depth);
    cfg.samples = Some(samples);
    cfg.bins = Some(bins);
    let csv = h.to_csv();
    render(cfg, &h, || Ok(csv), EXIT_OK)
}

/// An integer, or `qK` for the height `q_K`.
fn parse_shift(cf: &CFNumber, s: &str) -> Result<u64, Failure> {
    let bad = || Failure::Usage(format!("--P expects an integer or qK, got {s:?}"));
    if let Some(k) = s.strip_prefix('q') {
        let k: usize = k.parse().map_err(|_| bad())?;
        let q = cf.fractional_part().convergents(k)?.q(k).clone();
        return u64::try_from(q).map_err(|_| bad());
    }
    s.parse().map_err(|_| bad())
}

#[derive(Serialize)]
struct RigidityRow {
    k: usize,
    a_k: u64,
    ratio: String,
    bound: String,
    deficiency: String,
    holds: bool,
}

#[derive(Serialize)]
struct EscapeRow {
    p: u64,
    escape: String,
}

fn rigidity(
    common: &Common,
    mode: Option<RigidityModeArg>,
    p_max: Option<&str>,
    k: Option<usize>,
    cap: usize,
) -> Result<Rendered, Failure> {
    let cf = parse_alpha(common)?;
    let mode = match mode {
        Some(m) => m,
        None if classify(&cf, 2)?.coefficient_bound.strict_bound.is_some() => RigidityModeArg::Nonrigid,
        None => RigidityModeArg::Rigid,
    };
    let mut cfg = RunConfig::base("rigidity", common, cf.to_literal(), Format::Json, cap);
    cfg.mode = Some(mode);
    let report: RigidityReport = match mode {
        RigidityModeArg::Partial => {
            let k = k.unwrap_or(8);
            check_cap(k, cap)?;
            cfg.k = Some(k);
            let t = Tower::build(&cf, k)?;
            partial_rigidity_scan(&t, 1..=k, LevelSample::Default, cap)?
        }
        RigidityModeArg::Rigid => {
            let k = k.unwrap_or(12);
            check_cap(k, cap)?;
            cfg.k = Some(k);
            let t = Tower::build(&cf, k)?;
            rigidity_scan(&t, RigidityMode::RigidSearch { max_k: k }, cap)?
        }
        RigidityModeArg::Nonrigid => {
            let p = parse_shift(&cf, p_max.unwrap_or("q7"))?;
            cfg.p_max = Some(p);
            let depth = common.depth.unwrap_or(4);
            check_cap(depth, cap)?;
            cfg.depth = Some(depth);
            let t = Tower::build(&cf, depth)?;
            rigidity_scan(&t, RigidityMode::NonrigidCertify { max_p: p }, cap)?
        }
    };
    let exit = report.exit_code();
    let r = &report;
    render(
        cfg,
        &report,
        || match &r.nonrigid {
            Some(cert) => {
                let rows: Vec<EscapeRow> = cert
                    .at_heights
                    .iter()
                    .map(|e| EscapeRow {
                        p: e.p,
                        escape: fraction(&e.escape),
                    })
                    .collect();
                csv_rows(&rows)
            }
            None => {
                let opt = |x: &Option<Rational>| x.as_ref().map(fraction).unwrap_or_default();
                let rows: Vec<RigidityRow> = r
                    .per_k
                    .iter()
                    .map(|x| RigidityRow {
                        k: x.k,
                        a_k: x.a_k,
                        ratio: opt(&x.ratio),
                        bound: fraction(&x.bound),
                        deficiency: opt(&x.deficiency),
                        holds: x.holds,
                    })
                    .collect();
                csv_rows(&rows)
            }
        },
        exit,
    )
}

#[derive(Serialize)]
struct TypeIiiReport {
    tower: NsDump,
    witness: Option<RatioSetWitness>,
    witness_error: Option<String>,
}

#[derive(Serialize)]
struct WitnessRow {
    variant: &'static str,
    lambda: String,
    beta: String,
    stage: usize,
    depth: usize,
    n: u64,
    exponent: String,
    omega: String,
    measure: String,
}

fn parse_target(s: &str) -> Result<Vec<i64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--target expects comma-separated integers, got {s:?}")))
}

#[allow(clippy::too_many_arguments)]
fn typeiii(
    common: &Common,
    variant: Option<VariantArg>,
    lambda: &str,
    beta: Option<&str>,
    target: Option<&str>,
    k: usize,
    cap: usize,
) -> Result<Rendered, Failure> {
    let cf = parse_alpha(common)?;
    let kind = variant.unwrap_or(if beta.is_some() { VariantArg::One } else { VariantArg::Lambda });
    let l = parse_fraction("lambda", lambda)?;
    let v = match kind {
        VariantArg::Lambda => Variant::IIILambda { lambda: l.clone() },
        VariantArg::Zero => Variant::III0,
        VariantArg::One => {
            let b = beta.ok_or_else(|| Failure::Usage("--variant one needs --beta".into()))?;
            Variant::III1 {
                lambda: l.clone(),
                beta: parse_fraction("beta", b)?,
            }
        }
    };
    let depth = common.depth.unwrap_or(6);
    check_cap(depth, cap)?;
    let ns = NsTower::build(&cf, v, depth)?;
    let target = match (target, kind) {
        (Some(t), _) => Some(parse_target(t)?),
        (None, VariantArg::Lambda) => Some(vec![1]),
        (None, VariantArg::One) => Some(vec![1, 0]),
        (None, VariantArg::Zero) => None,
    };
    let (witness, witness_error) = match &target {
        Some(t) => match ratio_set_witness(&ns, k, t, depth) {
            Ok(w) => (Some(w), None),
            Err(e @ Error::WitnessNotFound(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
        None => (None, None),
    };
    let exit = if target.is_some() && witness.is_none() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    let mut cfg = RunConfig::base("typeiii", common, cf.to_literal(), Format::Json, cap);
    cfg.depth = Some(depth);
    cfg.variant = Some(kind);
    cfg.lambda = (kind != VariantArg::Zero).then(|| fraction(&l));
    cfg.beta = beta.map(str::to_string);
    cfg.target = target;
    cfg.k = Some(k);
    let report = TypeIiiReport {
        tower: ns.dump(),
        witness,
        witness_error,
    };
    let w = &report.witness;
    render(
        cfg,
        &report,
        || {
            let rows: Vec<WitnessRow> = w
                .iter()
                .map(|w| WitnessRow {
                    variant: w.variant,
                    lambda: fraction(&w.lambda),
                    beta: w.beta.as_ref().map(fraction).unwrap_or_default(),
                    stage: w.stage,
                    depth: w.depth,
                    n: w.n,
                    exponent: w.exponent.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "),
                    omega: fraction(&w.omega),
                    measure: fraction(&w.measure),
                })
                .collect();
            csv_rows(&rows)
        },
        exit,
    )
}

fn gk(common: &Common, samples: u64, k: usize, window: Option<usize>, cap: usize) -> Result<Rendered, Failure> {
    let bits = common.precision.unwrap_or_else(|| bits_for_window(window.unwrap_or(0)));
    let mut mc = MonteCarloConfig::new(common.seed, samples, k);
    mc.bits = bits;
    mc.window = window;
    let report = montecarlo(&mc)?;
    let mut cfg = RunConfig::base("gk", common, "uniform random".into(), Format::Csv, cap);
    cfg.precision = Some(bits);
    cfg.samples = Some(samples);
    cfg.k = Some(k);
    cfg.window = window;
    let csv = report.to_csv();
    render(cfg, &report, || Ok(csv), EXIT_OK)
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const DEFAULT_DEPTH_CAP: usize = 40;
pub const DEPTH_CAP_ENV: &str = "RANKONE_DEPTH_CAP";

#[derive(Parser, Debug)]
#[command(name = "rankone", version, about = "Rank-one towers built from continued fractions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Continued-fraction literal, quadratic `(u+v*sqrt(d))/w`, or alias
    /// (`sqrt2`, `golden`, `bessel`).
    #[arg(long, default_value = "sqrt2")]
    pub alpha: String,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Enclosure width `2^-precision` (sample bits for `gk`).
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RigidityModeArg {
    Partial,
    Rigid,
    Nonrigid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Lambda,
    Zero,
    One,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convergents, classification, coprime heights and tail bounds.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Stage descriptors and support layout of the tower.
    Tower {
        #[command(flatten)]
        common: Common,
    },
    /// Screen a candidate eigenvalue phase beta.
    Eigen {
        #[command(flatten)]
        common: Common,
        /// `1/2`, `alpha`, `-3*alpha`, `[lo,hi]`.
        #[arg(long, default_value = "alpha", allow_hyphen_values = true)]
        beta: String,
    },
    /// Histogram of the eigenfunction's angles.
    Pushforward {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 100)]
        bins: usize,
    },
    /// Partial rigidity, rigidity evidence or a nonrigidity certificate.
    Rigidity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<RigidityModeArg>,
        /// Largest shift for the nonrigidity scan: an integer or `qK`.
        #[arg(long = "P")]
        p_max: Option<String>,
        /// Largest stage for the partial and rigid scans.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Weighted towers and ratio-set witnesses.
    Typeiii {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[arg(long)]
        beta: Option<String>,
        /// Exponent(s) of the target ratio, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        /// First stage searched.
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Gauss-Kuzmin limits against seeded samples.
    Gk {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Digit index examined.
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Window for the divergence proxy.
        #[arg(long)]
        window: Option<usize>,
    },
}

/// Every setting a run used, defaults filled in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub alpha: String,
    pub depth: Option<usize>,
    pub precision: Option<u32>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub depth_cap: usize,
    pub beta: Option<String>,
    pub lambda: Option<String>,
    pub variant: Option<VariantArg>,
    pub target: Option<Vec<i64>>,
    pub mode: Option<RigidityModeArg>,
    pub p_max: Option<u64>,
    pub k: Option<usize>,
    pub samples: Option<u64>,
    pub bins: Option<usize>,
    pub window: Option<usize>,
}

impl RunConfig {
    pub fn base(command: &str, common: &Common, alpha: String, default_format: Format, depth_cap: usize) -> Self {
        RunConfig {
            command: command.into(),
            alpha,
            depth: common.depth,
            precision: common.precision,
            seed: common.seed,
            format: common.format.unwrap_or(default_format),
            out: common.out.clone(),
            depth_cap,
            beta: None,
            lambda: None,
            variant: None,
            target: None,
            mode: None,
            p_max: None,
            k: None,
            samples: None,
            bins: None,
            window: None,
        }
    }
}

/// Reads the depth cap from the environment.
pub fn depth_cap_from_env() -> Result<usize, String> {
    match std::env::var(DEPTH_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{DEPTH_CAP_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_DEPTH_CAP),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let common = Common {
            alpha: "sqrt2".into(),
            depth: Some(9),
            precision: None,
            seed: 7,
            out: Some("r.json".into()),
            format: None,
        };
        let mut cfg = RunConfig::base("typeiii", &common, "[1; (const: 2)]".into(), Format::Json, 40);
        cfg.lambda = Some("1/2".into());
        cfg.target = Some(vec![1, 0]);
        cfg.variant = Some(VariantArg::One);
        cfg.mode = Some(RigidityModeArg::Nonrigid);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

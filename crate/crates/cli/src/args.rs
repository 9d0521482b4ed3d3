use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mzfid::linear_optics::{fock_input, noon_input, Outcome, StateKind, TwoModeState};
use mzfid::numerics::QuadratureConfig;
use mzfid::Prior;

use crate::CliError;

/// Default soft cap on the photon number.
pub const PHOTON_CAP: u32 = 40;

#[derive(Debug, Parser)]
#[command(
    name = "mzfid",
    version,
    about = "Phase sensing with a photon-counting Mach-Zehnder interferometer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outcome distribution P(n_c, n_d | phi) at one phase.
    Probs {
        #[command(flatten)]
        common: Common,
        /// Phase in radians, in (-pi, pi].
        #[arg(long, allow_negative_numbers = true)]
        phase: f64,
    },
    /// Posterior p(phi | n_c, n_d) on a phase grid.
    Posterior {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        prior: PriorArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Measured outcome as `n_c,n_d`.
        #[arg(long)]
        outcome: OutcomeArg,
        /// Number of grid points on (-pi, pi].
        #[arg(long, default_value_t = mzfid::inference::DEFAULT_GRID_POINTS)]
        grid: usize,
        /// Print a JSON peak and fit report; the grid is then only written with --out.
        #[arg(long)]
        peaks: bool,
        /// Fit this peak (phi-ordered, from 0) instead of the highest one.
        #[arg(long)]
        peak_index: Option<usize>,
    },
    /// Mutual information between phase and outcome, in bits.
    Fidelity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        prior: PriorArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Narrow-prior expansion of the fidelity about the prior mean.
    Approx {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        prior: PriorArgs,
    },
    /// Fidelity of Fock and N00N inputs over a photon range.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        prior: PriorArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Power-law fit of Fock posterior peak widths against photon number.
    FitScaling {
        #[command(flatten)]
        common: Common,
        /// Which outcome's posterior is fitted for each N.
        #[arg(long, value_enum, default_value_t = OutcomePolicy::AllD)]
        outcome_policy: OutcomePolicy,
        /// Fit this peak (phi-ordered, from 0) instead of the highest one.
        #[arg(long)]
        peak_index: Option<usize>,
        #[arg(long, default_value_t = mzfid::inference::DEFAULT_GRID_POINTS)]
        grid: usize,
        /// Fit an exact synthetic law instead of computed widths.
        #[arg(long)]
        self_test: bool,
    },
    /// Classical Fisher information of photon counting at one phase.
    Fisher {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        phase: f64,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Input state; sweep runs both when omitted.
    #[arg(long, value_enum)]
    pub state: Option<StateArg>,
    /// Photon number `N`, or an inclusive range `A..B` for sweep and fit-scaling.
    #[arg(long)]
    pub photons: Option<PhotonRange>,
    /// Permit photon numbers above the default cap.
    #[arg(long)]
    pub allow_large: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    /// `uniform`, `gaussian:<center>,<sigma>` or `file:<path>` (CSV `phi,density`).
    #[arg(long, default_value = "uniform", allow_hyphen_values = true)]
    pub prior: PriorSpec,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long)]
    pub panels: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub refinements: Option<u32>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl QuadArgs {
    pub fn config(&self) -> Result<QuadratureConfig, CliError> {
        let d = QuadratureConfig::default();
        let cfg = QuadratureConfig {
            base_panels: self.panels.unwrap_or(d.base_panels),
            nodes_per_panel: self.nodes.unwrap_or(d.nodes_per_panel),
            max_refinements: self.refinements.unwrap_or(d.max_refinements),
            abs_tol: self.tol.unwrap_or(d.abs_tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Fock,
    Noon,
}

impl StateArg {
    pub fn build(self, photons: u32) -> Result<TwoModeState, CliError> {
        Ok(match self {
            StateArg::Fock => fock_input(photons)?,
            StateArg::Noon => noon_input(photons)?,
        })
    }

    pub fn kind(self) -> StateKind {
        match self {
            StateArg::Fock => StateKind::Fock,
            StateArg::Noon => StateKind::Noon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutcomePolicy {
    /// All photons in port d: `(0, N)`.
    AllD,
    /// All photons in port c: `(N, 0)`.
    AllC,
    /// `(ceil(N/2), floor(N/2))`.
    Split,
}

impl OutcomePolicy {
    pub fn outcome(self, photons: u32) -> Outcome {
        match self {
            OutcomePolicy::AllD => Outcome::new(0, photons),
            OutcomePolicy::AllC => Outcome::new(photons, 0),
            OutcomePolicy::Split => Outcome::new(photons - photons / 2, photons / 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhotonRange {
    pub first: u32,
    pub last: u32,
}

impl FromStr for PhotonRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("invalid photon number `{t}`"))
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if first > last {
            return Err(format!("empty photon range {first}..{last}"));
        }
        Ok(Self { first, last })
    }
}

impl PhotonRange {
    /// Checks the range against the lower bound and the soft cap.
    pub fn checked(self, allow_large: bool) -> Result<Self, CliError> {
        if self.first == 0 {
            return Err(CliError::Usage("photon number must be at least 1".into()));
        }
        if self.last > PHOTON_CAP && !allow_large {
            return Err(CliError::Usage(format!(
                "photon number {} exceeds the cap of {PHOTON_CAP}; pass --allow-large to override",
                self.last
            )));
        }
        Ok(self)
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        self.first..=self.last
    }
}

impl Common {
    pub fn photons(&self) -> Result<PhotonRange, CliError> {
        self.photons
            .ok_or_else(|| CliError::Usage("--photons is required".into()))?
            .checked(self.allow_large)
    }

    /// The single photon number of a non-range command.
    pub fn single_photons(&self) -> Result<u32, CliError> {
        let range = self.photons()?;
        if range.first != range.last {
            return Err(CliError::Usage(
                "this command takes a single photon number".into(),
            ));
        }
        Ok(range.first)
    }

    pub fn single_state(&self) -> Result<TwoModeState, CliError> {
        let kind = self
            .state
            .ok_or_else(|| CliError::Usage("--state is required".into()))?;
        kind.build(self.single_photons()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeArg(pub Outcome);

impl FromStr for OutcomeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `n_c,n_d`, got `{s}`"))?;
        let n = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("invalid count `{t}`"))
        };
        Ok(Self(Outcome::new(n(a)?, n(b)?)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Uniform,
    Gaussian { center: f64, sigma: f64 },
    File(PathBuf),
}

impl FromStr for PriorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "uniform" {
            return Ok(Self::Uniform);
        }
        if let Some(rest) = s.strip_prefix("gaussian:") {
            let (c, w) = rest
                .split_once(',')
                .ok_or_else(|| format!("expected `gaussian:<center>,<sigma>`, got `{s}`"))?;
            let num = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("invalid number `{t}`"))
            };
            return Ok(Self::Gaussian {
                center: num(c)?,
                sigma: num(w)?,
            });
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(path)));
        }
        Err(format!(
            "unknown prior `{s}`; expected uniform, gaussian:<center>,<sigma> or file:<path>"
        ))
    }
}

impl PriorSpec {
    pub fn build(&self) -> Result<Prior, CliError> {
        Ok(match self {
            PriorSpec::Uniform => Prior::uniform(),
            PriorSpec::Gaussian { center, sigma } => Prior::gaussian(*center, *sigma)?,
            PriorSpec::File(path) => Prior::from_csv_path(path)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_ranges() {
        assert_eq!(
            "3".parse::<PhotonRange>().unwrap(),
            PhotonRange { first: 3, last: 3 }
        );
        assert_eq!(
            "1..40".parse::<PhotonRange>().unwrap(),
            PhotonRange { first: 1, last: 40 }
        );
        assert!("5..2".parse::<PhotonRange>().is_err());
        assert!("x".parse::<PhotonRange>().is_err());
        assert!(PhotonRange { first: 0, last: 0 }.checked(false).is_err());
        assert!(PhotonRange { first: 1, last: 41 }.checked(false).is_err());
        assert!(PhotonRange { first: 1, last: 41 }.checked(true).is_ok());
    }

    #[test]
    fn prior_specs() {
        assert_eq!("uniform".parse::<PriorSpec>().unwrap(), PriorSpec::Uniform);
        assert_eq!(
            "gaussian:-0.5,0.75".parse::<PriorSpec>().unwrap(),
            PriorSpec::Gaussian {
                center: -0.5,
                sigma: 0.75
            }
        );
        assert_eq!(
            "file:p.csv".parse::<PriorSpec>().unwrap(),
            PriorSpec::File(PathBuf::from("p.csv"))
        );
        assert!("gaussian:1".parse::<PriorSpec>().is_err());
        assert!("cauchy".parse::<PriorSpec>().is_err());
    }

    #[test]
    fn outcomes_and_policies() {
        assert_eq!("2,1".parse::<OutcomeArg>().unwrap().0, Outcome::new(2, 1));
        assert!("2".parse::<OutcomeArg>().is_err());
        assert_eq!(OutcomePolicy::AllD.outcome(5), Outcome::new(0, 5));
        assert_eq!(OutcomePolicy::AllC.outcome(5), Outcome::new(5, 0));
        assert_eq!(OutcomePolicy::Split.outcome(5), Outcome::new(3, 2));
    }
}

//! `tiling`: generate, reshape, derive, verify and render substitution
//! tilings.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on usage or
//! input errors. Errors go to stderr on one line starting with `error:`.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use tiling_core::derive::{derive, DeriveError};
use tiling_core::engine::{census, generate, predicted_census, EngineError};
use tiling_core::exact::{ExactError, Scalar};
use tiling_core::model::{read_patch, write_patch, ModelError, Patch};
use tiling_core::render::{default_palette, render_svg, RenderError, RenderOptions};
use tiling_core::reshape::{parse_reshape_map, reshape_patch, ReshapeError, ReshapeMap};
use tiling_core::ruledsl::{parse_ruleset, serialize_ruleset, validate_ruleset, DslError, RuleSet};
use tiling_core::verify::{self, Report, Status};

use config::{read, write, Config};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },
    #[error("{path}: {err}")]
    Dsl { path: String, err: DslError },
    #[error("{path}: {err}")]
    Map { path: String, err: ReshapeError },
    #[error("{path}: {err}")]
    Patch { path: String, err: ModelError },
    #[error("{flag}: {err}")]
    Scalar { flag: &'static str, err: ExactError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Reshape(#[from] ReshapeError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Parser)]
#[command(name = "tiling", version, about = "Exact substitution tilings: one triangle, aperiodic")]
struct Cli {
    /// Suppress non-error output.
    #[arg(long, global = true)]
    quiet: bool,
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Substitute a single seed tile repeatedly.
    Generate {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        seed: String,
        #[arg(long)]
        steps: usize,
        /// Patch file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite a square-triangle patch with the single triangle.
    Reshape {
        #[arg(long)]
        map: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Source rules; looked up by the patch's rule-set name otherwise.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Derive the one-triangle rule set from the square-triangle rules.
    Derive {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a patch.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated subset of planarity,edges,stars,arrows,periods,complexity.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Core disk for the period search, as a fraction of the patch radius.
        #[arg(long)]
        core_fraction: Option<String>,
        /// Neighbourhood radius for the complexity count.
        #[arg(long)]
        radius: Option<String>,
        /// Print one JSON object per check.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        rules: RulesArg,
    },
    /// Tile census, optionally compared with the substitution matrix.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        /// Seed variant the patch was generated from.
        #[arg(long, requires = "steps")]
        seed: Option<String>,
        #[arg(long, requires = "seed")]
        steps: Option<usize>,
        #[command(flatten)]
        rules: RulesArg,
    },
    /// Write an SVG picture of a patch.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        /// Outlines only: no fills, dots or arrows.
        #[arg(long)]
        strip_motifs: bool,
        /// TOML table of colour names and decorations to fills.
        #[arg(long)]
        palette: Option<PathBuf>,
        #[command(flatten)]
        rules: RulesArg,
    },
    /// Parse and check a rule set.
    Validate {
        #[arg(long)]
        rules: PathBuf,
        /// List every finding, not just failures.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Args)]
struct RulesArg {
    /// Rules for the patch; looked up by the patch's rule-set name otherwise.
    #[arg(long)]
    rules: Option<PathBuf>,
}

const ALL_CHECKS: [&str; 6] = ["planarity", "edges", "stars", "arrows", "periods", "complexity"];

struct Ctx {
    cfg: Config,
    quiet: bool,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn ruleset(&self, path: &Path) -> Result<RuleSet, CliError> {
        let path = self.cfg.locate(path);
        let text = read(&path)?;
        parse_ruleset(&text).map_err(|err| CliError::Dsl {
            path: path.display().to_string(),
            err,
        })
    }

    fn map(&self, path: &Path) -> Result<ReshapeMap, CliError> {
        let path = self.cfg.locate(path);
        let text = read(&path)?;
        parse_reshape_map(&text).map_err(|err| CliError::Map {
            path: path.display().to_string(),
            err,
        })
    }

    fn patch(&self, path: &Path) -> Result<Patch, CliError> {
        let text = read(path)?;
        read_patch(&text).map_err(|err| CliError::Patch {
            path: path.display().to_string(),
            err,
        })
    }

    /// The patch's rules: `--rules` if given, else by rule-set name.
    fn rules_of(&self, p: &Patch, given: &RulesArg) -> Result<RuleSet, CliError> {
        let path = match &given.rules {
            Some(r) => r.clone(),
            None => self.cfg.rules_for(&p.ruleset),
        };
        let rs = self.ruleset(&path)?;
        if rs.name != p.ruleset {
            return Err(CliError::Usage(format!(
                "patch uses rule set '{}' but {} defines '{}'",
                p.ruleset,
                path.display(),
                rs.name
            )));
        }
        Ok(rs)
    }
}

fn scalar(flag: &'static str, text: &str) -> Result<Scalar, CliError> {
    text.parse().map_err(|err| CliError::Scalar { flag, err })
}

fn emit(ctx: &Ctx, out: Option<&Path>, bytes: &[u8], what: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write(path, bytes)?;
            ctx.say(format!("{what} -> {}", path.display()));
        }
        None => print!("{}", String::from_utf8_lossy(bytes)),
    }
    Ok(())
}

fn show(ctx: &Ctx, r: &Report, json: bool) {
    if json {
        ctx.say(r.to_json());
    } else {
        ctx.say(r.to_string());
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    let ctx = Ctx { cfg, quiet: cli.quiet };
    match cli.cmd {
        Cmd::Generate { rules, seed, steps, out } => {
            let rs = ctx.ruleset(&rules)?;
            let p = generate(&seed, steps, &rs)?;
            let what = format!("{} tiles", p.len());
            emit(&ctx, out.as_deref(), write_patch(&p).as_bytes(), &what)?;
            Ok(true)
        }
        Cmd::Reshape { map, input, out, rules } => {
            let map = ctx.map(&map)?;
            let p = ctx.patch(&input)?;
            let src = ctx.rules_of(&p, &RulesArg { rules })?;
            let d = derive(&src, &map)?;
            let q = reshape_patch(&p, &d, &map, true)?;
            let what = format!("{} tiles become {} in {}", p.len(), q.len(), q.ruleset);
            emit(&ctx, out.as_deref(), write_patch(&q).as_bytes(), &what)?;
            Ok(true)
        }
        Cmd::Derive { rules, map, out } => {
            let src = ctx.ruleset(&rules)?;
            let map = ctx.map(&map)?;
            let d = derive(&src, &map)?;
            let target = &d.target.rules;
            let squares = d.cut.rules.len() - d.expansion.rules.rules.len();
            let what = format!(
                "{} source rules, {} expanded, {} after cutting {} squares, {} pairs",
                src.rules.len(),
                d.expansion.rules.rules.len(),
                target.rules.len(),
                squares,
                target.pairs.len()
            );
            emit(&ctx, out.as_deref(), serialize_ruleset(target).as_bytes(), &what)?;
            Ok(true)
        }
        Cmd::Verify { input, checks, core_fraction, radius, json, rules } => {
            let p = ctx.patch(&input)?;
            let rs = ctx.rules_of(&p, &rules)?;
            let reg = &rs.registry;
            let checks = checks.unwrap_or_else(|| ALL_CHECKS.iter().map(|s| s.to_string()).collect());
            if let Some(bad) = checks.iter().find(|c| !ALL_CHECKS.contains(&c.as_str())) {
                return Err(CliError::Usage(format!(
                    "unknown check '{bad}'; expected one of {}",
                    ALL_CHECKS.join(",")
                )));
            }
            let cf = core_fraction.or(ctx.cfg.core_fraction.clone()).unwrap_or("1/4".into());
            let cf = scalar("--core-fraction", &cf)?;
            if cf.signum() <= 0 || cf >= Scalar::one() {
                return Err(CliError::Usage("--core-fraction must lie strictly between 0 and 1".into()));
            }
            let radius = radius.or(ctx.cfg.radius.clone()).unwrap_or("2".into());
            let radius = scalar("--radius", &radius)?;
            if radius.signum() <= 0 {
                return Err(CliError::Usage("--radius must be positive".into()));
            }
            let mut ok = true;
            for c in ALL_CHECKS.iter().filter(|c| checks.iter().any(|x| x == *c)) {
                let report = match *c {
                    "planarity" => verify::check_planarity(&p, reg)?,
                    "edges" => verify::check_edge_to_edge(&p, reg)?,
                    "arrows" => verify::check_arrow_condition(&p, reg)?,
                    "periods" => {
                        let w = verify::find_periods(&p, reg, &cf)?;
                        Report {
                            check: "periods".into(),
                            status: if w.is_empty() { Status::Pass } else { Status::Fail },
                            witnesses: w.iter().map(|t| format!("period {t}")).collect(),
                        }
                    }
                    "stars" => {
                        let stars = verify::vertex_stars(&p, reg)?;
                        Report {
                            check: "stars".into(),
                            status: Status::Pass,
                            witnesses: stars.iter().map(|(s, n)| format!("{n} x [{s}]")).collect(),
                        }
                    }
                    _ => {
                        let n = verify::patch_complexity(&p, reg, &radius)?;
                        Report {
                            check: "complexity".into(),
                            status: Status::Pass,
                            witnesses: vec![format!("{n} classes at radius {radius}")],
                        }
                    }
                };
                ok &= report.status != Status::Fail;
                show(&ctx, &report, json);
            }
            Ok(ok)
        }
        Cmd::Stats { input, seed, steps, rules } => {
            let p = ctx.patch(&input)?;
            let rs = ctx.rules_of(&p, &rules)?;
            let have = census(&p, &rs)?;
            let want = match (&seed, steps) {
                (Some(s), Some(n)) => Some(
                    predicted_census(&rs, s, n)
                        .ok_or_else(|| CliError::Usage(format!("unknown seed variant '{s}'")))?,
                ),
                _ => None,
            };
            let c = verify::strip_and_census(&p, &rs.registry)?;
            ctx.say(format!("tiles: {}", c.tiles));
            ctx.say(format!("congruence classes: {}", c.congruence_classes));
            ctx.say(format!("orientation classes: {}", c.orientation_classes));
            let mut ok = true;
            for (i, v) in rs.registry.variants.iter().enumerate() {
                match &want {
                    Some(w) => {
                        let mark = if w[i] == have[i] { "" } else { "  MISMATCH" };
                        ok &= w[i] == have[i];
                        ctx.say(format!("{}: {} (predicted {}){mark}", v.id, have[i], w[i]));
                    }
                    None if have[i] > 0 => ctx.say(format!("{}: {}", v.id, have[i])),
                    None => {}
                }
            }
            if want.is_some() {
                ctx.say(if ok { "census matches prediction" } else { "census differs from prediction" });
            }
            Ok(ok)
        }
        Cmd::Render { input, svg, strip_motifs, palette, rules } => {
            let p = ctx.patch(&input)?;
            let rs = ctx.rules_of(&p, &rules)?;
            let mut pal = default_palette();
            pal.extend(ctx.cfg.palette.clone());
            if let Some(f) = palette {
                let text = read(&f)?;
                let extra: BTreeMap<String, String> = toml::from_str(&text).map_err(|e| CliError::Config {
                    path: f.display().to_string(),
                    msg: e.message().to_string(),
                })?;
                pal.extend(extra);
            }
            let opts = RenderOptions { strip_motifs, palette: pal, ..RenderOptions::default() };
            let bytes = render_svg(&p, &rs.registry, &opts)?;
            write(&svg, &bytes)?;
            ctx.say(format!("{} tiles -> {}", p.len(), svg.display()));
            Ok(true)
        }
        Cmd::Validate { rules, verbose } => {
            let rs = ctx.ruleset(&rules)?;
            let rep = validate_ruleset(&rs);
            for f in &rep.findings {
                if verbose || f.status == tiling_core::ruledsl::validate::Status::Fail {
                    ctx.say(f.to_string());
                }
            }
            ctx.say(rep.summary());
            Ok(rep.is_clean())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

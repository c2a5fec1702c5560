//! Command-line front end. `run` does all the work so tests can drive it
//! with an explicit argument list and environment.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use supercrit::channels::{
    classify, num_extension_params, z_critical, z_singular, Channel, ExtensionAngle, HalfInteger, Region, Zeta,
};
use supercrit::report::{
    default_nu_list, levels_dataset, make_table, nu_lower_curve, region_map, scan_nu, table_dataset,
    uniform_nu_grid, z_range, Dataset, Entry, ReportError, ScanSpec, Table,
};
use supercrit::spectra::{solve_levels, SolveError};

pub mod settings;

use settings::{FlagValues, Format, Settings};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations; exit status 2.
    Usage(String),
    /// The computation itself failed; exit status 1.
    Failure(String),
}

impl CliError {
    fn status(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Channel(_)
            | SolveError::ExtensionNotApplicable(_)
            | SolveError::ExtensionRequired(_)
            | SolveError::InvalidConfig(_)
            | SolveError::WrongRegion { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Solve(s) => s.into(),
            ReportError::Invalid(m) => CliError::Usage(m),
            other => CliError::Failure(other.to_string()),
        }
    }
}

const NU_FORMS: &str = "radians (e.g. 0.3) or a multiple of pi (pi/4, -pi/2, 3pi/4, 0)";

#[derive(Parser, Debug)]
#[command(
    name = "supercrit",
    version,
    about = "Discrete Dirac-Coulomb spectra for any nuclear charge, including Z > 137",
    after_help = "Energies are E/m (units m) unless --units keV is given. Tunables may also be set with \
                  SUPERCRIT_<KEY> environment variables or a --config file of `key = value` lines; \
                  flags take precedence over the environment, which takes precedence over the file."
)]
struct Cli {
    /// Config file with flat `key = value` lines (keys: alpha_inv, nmax, format, theta_variant,
    /// units, integer_z, electron_rest_kev, bisect_tol, scan_points)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ChargeArgs {
    /// Nuclear charge number Z (dimensionless, may be fractional)
    #[arg(long = "Z", value_name = "Z")]
    z: Option<f64>,
    /// Total angular momentum j as an exact fraction
    #[arg(long, value_name = "N/2", default_value = "1/2")]
    j: String,
    /// Put the channel exactly on the critical charge Z_c(j) = (j + 1/2)·alpha_inv; --Z may be
    /// omitted, and if given must lie within 1e-6 of Z_c in units of alpha_inv
    #[arg(long)]
    force_critical: bool,
}

#[derive(Args, Debug, Clone)]
struct AlphaArgs {
    /// Inverse fine-structure constant [default: 137.035999; env SUPERCRIT_ALPHA_INV]
    #[arg(long, value_name = "ALPHA_INV")]
    alpha_inv: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct IntegerZArgs {
    /// Reject non-integer Z [default: off; env SUPERCRIT_INTEGER_Z]
    #[arg(long = "integer-Z")]
    integer_z: bool,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Highest level index n to emit [default: 10 for levels, 4 for table and scan-nu;
    /// env SUPERCRIT_NMAX]
    #[arg(long, value_name = "N")]
    nmax: Option<u32>,
    /// Reading of the overcritical phase: bracket-outside-gamma or all-inside-gamma
    /// [default: bracket-outside-gamma; env SUPERCRIT_THETA_VARIANT]
    #[arg(long, value_name = "VARIANT")]
    theta_variant: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output format: csv or json (table also accepts text) [default: csv; env SUPERCRIT_FORMAT]
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Write the dataset to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Energy units: m (dimensionless E/m) or keV (E/m times the electron rest energy,
    /// 510.99895 keV unless electron_rest_kev is configured) [default: m; env SUPERCRIT_UNITS]
    #[arg(long, value_name = "UNITS")]
    units: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the region of a channel: nonsingular, subcritical, critical or overcritical
    Classify {
        #[command(flatten)]
        charge: ChargeArgs,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        integer: IntegerZArgs,
    },
    /// Solve the levels of one channel and extension
    Levels {
        #[command(flatten)]
        charge: ChargeArgs,
        /// Sign zeta: + or - [default: both]
        #[arg(long, value_name = "+|-", allow_hyphen_values = true)]
        zeta: Option<String>,
        /// Extension angle nu in radians or as a multiple of pi (pi/4, -pi/2); required in the
        /// singular regions and rejected in the nonsingular one
        #[arg(long, value_name = "NU", allow_hyphen_values = true)]
        nu: Option<String>,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        integer: IntegerZArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Table of E_0..E_nmax for both zeta at a list of nu values
    Table {
        #[command(flatten)]
        charge: ChargeArgs,
        /// Comma-separated nu rows, radians or multiples of pi
        /// [default: -pi/2,-pi/4,0,pi/4,pi/2]
        #[arg(long, value_name = "NU,...", value_delimiter = ',', allow_hyphen_values = true)]
        nu: Vec<String>,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        integer: IntegerZArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Levels on a grid of nu values, optionally for a range of charges
    ScanNu {
        #[command(flatten)]
        charge: ChargeArgs,
        /// Upper end of a charge range starting at --Z (real Z)
        #[arg(long = "Z-to", value_name = "Z")]
        z_to: Option<f64>,
        /// Number of charges in the range, endpoints included [default: 11 with --Z-to, else 1]
        #[arg(long, value_name = "COUNT")]
        steps: Option<usize>,
        /// Sign zeta: + or - [default: both]
        #[arg(long, value_name = "+|-", allow_hyphen_values = true)]
        zeta: Option<String>,
        /// Explicit comma-separated nu grid, radians or multiples of pi (instead of --points)
        #[arg(long, value_name = "NU,...", value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "points")]
        nu: Vec<String>,
        /// Size of the uniform nu grid from -pi/2 to pi/2 inclusive [default: 181]
        #[arg(long, value_name = "COUNT")]
        points: Option<usize>,
        /// Comma-separated level indices to emit [default: 0..=nmax]
        #[arg(long, value_name = "N,...", value_delimiter = ',')]
        n: Vec<u32>,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Diving angle nu_{-m} as a function of Z (real Z; segments split at region boundaries)
    NuLower {
        /// First charge of the range
        #[arg(long = "Z-from", value_name = "Z")]
        z_from: f64,
        /// Last charge of the range [default: --Z-from]
        #[arg(long = "Z-to", value_name = "Z")]
        z_to: Option<f64>,
        /// Number of charges, endpoints included [default: 1 for a single charge, 101 for a range]
        #[arg(long, value_name = "COUNT")]
        steps: Option<usize>,
        /// Total angular momentum j as an exact fraction
        #[arg(long, value_name = "N/2", default_value = "1/2")]
        j: String,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Singular and critical charges Z_s(j), Z_c(j) for j = 1/2 .. j-max
    RegionMap {
        /// Stop once Z_s(j) exceeds this charge
        #[arg(long = "Z-max", value_name = "Z", default_value_t = 600.0)]
        z_max: f64,
        /// Largest j, as an exact fraction
        #[arg(long, value_name = "N/2", default_value = "21/2")]
        j_max: String,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Number of extension parameters of the full Hamiltonian at charge Z
    Params {
        /// Nuclear charge number Z (dimensionless)
        #[arg(long = "Z", value_name = "Z")]
        z: f64,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[command(flatten)]
        integer: IntegerZArgs,
    },
}

/// Runs one invocation and returns its exit status. `args` includes the
/// program name; `env` is consulted only for `SUPERCRIT_*` keys.
pub fn run<I, T>(args: I, env: &HashMap<String, String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    match execute(cli, env, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) => format!("usage error: {m}"),
                CliError::Failure(m) => format!("error: {m}"),
            };
            let _ = writeln!(err, "{msg}");
            e.status()
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_j(s: &str, flag: &str) -> Result<HalfInteger, CliError> {
    s.parse().map_err(|e| usage(format!("--{flag}: {e}")))
}

fn parse_zetas(s: &Option<String>) -> Result<Vec<Zeta>, CliError> {
    match s {
        None => Ok(Zeta::BOTH.to_vec()),
        Some(v) => v
            .parse()
            .map(|z| vec![z])
            .map_err(|e| usage(format!("--zeta: {e}; expected + or -"))),
    }
}

/// Parses a ν literal. Multiples of π are exact, and `-pi/2` selects the
/// lower-edge labeling of the ±π/2 extension.
pub fn parse_nu(s: &str) -> Result<ExtensionAngle, CliError> {
    let bad = || usage(format!("invalid nu '{s}': expected {NU_FORMS}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(pos) = t.find("pi") else {
        let v: f64 = t.parse().map_err(|_| bad())?;
        return if v.is_finite() { Ok(ExtensionAngle::new(v)) } else { Err(bad()) };
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let (sign, coef) = match head.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, head.strip_prefix('+').unwrap_or(head)),
    };
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let num: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
    let den: i64 = match tail {
        "" => 1,
        _ => tail.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?,
    };
    if den <= 0 || num < 0 {
        return Err(bad());
    }
    Ok(ExtensionAngle::from_pi_fraction(sign * num, den))
}

fn parse_nu_list(items: &[String]) -> Result<Vec<ExtensionAngle>, CliError> {
    items.iter().map(|s| parse_nu(s)).collect()
}

fn flag_values(alpha: &AlphaArgs, solver: Option<&SolverArgs>, output: Option<&OutputArgs>, integer_z: bool) -> FlagValues {
    FlagValues {
        alpha_inv: alpha.alpha_inv,
        nmax: solver.and_then(|s| s.nmax),
        format: output.and_then(|o| o.format.clone()),
        theta_variant: solver.and_then(|s| s.theta_variant.clone()),
        units: output.and_then(|o| o.units.clone()),
        integer_z,
    }
}

fn check_integer_z(z: f64, settings: &Settings) -> Result<(), CliError> {
    if settings.integer_z && z.fract() != 0.0 {
        return Err(usage(format!("--integer-Z is set but Z = {z} is not an integer")));
    }
    Ok(())
}

fn build_channel(charge: &ChargeArgs, settings: &Settings, check_integer: bool) -> Result<Channel, CliError> {
    let j = parse_j(&charge.j, "j")?;
    let alpha_inv = settings.alpha_inv;
    let channel = if charge.force_critical {
        let zc = z_critical(j, alpha_inv);
        let z = charge.z.unwrap_or(zc);
        let ch = Channel::new(z, alpha_inv, j, Zeta::Plus).map_err(|e| usage(e.to_string()))?;
        ch.snap_critical().map_err(|_| {
            usage(format!(
                "--force-critical: Z = {z} is not the critical charge Z_c({j}) = {zc} for alpha_inv = {alpha_inv}"
            ))
        })?
    } else {
        let z = charge.z.ok_or_else(|| usage("--Z is required (or --force-critical)"))?;
        Channel::new(z, alpha_inv, j, Zeta::Plus).map_err(|e| usage(e.to_string()))?
    };
    if check_integer && !charge.force_critical {
        check_integer_z(channel.z(), settings)?;
    }
    if check_integer && charge.force_critical && settings.integer_z {
        return Err(usage("--integer-Z cannot be combined with --force-critical: Z_c(j) is not an integer"));
    }
    Ok(channel)
}

fn reject_text(settings: &Settings, sub: &str) -> Result<(), CliError> {
    if settings.format == Format::Text {
        return Err(usage(format!("--format text is only available for table, not {sub}")));
    }
    Ok(())
}

fn emit(ds: Dataset, settings: &Settings, output: Option<&OutputArgs>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    for note in &ds.metadata.notices {
        let _ = writeln!(err, "note: {note}");
    }
    let ds = ds.with_units(settings.units, settings.electron_rest_kev);
    let body = match settings.format {
        Format::Json => ds.to_json_string()?,
        _ => ds.to_csv_string()?,
    };
    write_body(&body, output, out)
}

fn write_body(body: &str, output: Option<&OutputArgs>, out: &mut dyn Write) -> Result<(), CliError> {
    match output.and_then(|o| o.output.as_ref()) {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Failure(format!("cannot write output: {e}"))),
    }
}

fn execute(cli: Cli, env: &HashMap<String, String>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => settings::load_config(path)?,
        None => HashMap::new(),
    };
    match cli.command {
        Command::Classify { charge, alpha, integer } => {
            let s = settings::resolve(&flag_values(&alpha, None, None, integer.integer_z), env, config)?;
            let ch = build_channel(&charge, &s, true)?;
            let region = classify(&ch, false).map_err(|e| usage(e.to_string()))?;
            writeln!(out, "{region}").map_err(|e| CliError::Failure(e.to_string()))
        }
        Command::Levels { charge, zeta, nu, alpha, integer, solver, output } => {
            let s = settings::resolve(&flag_values(&alpha, Some(&solver), Some(&output), integer.integer_z), env, config)?;
            reject_text(&s, "levels")?;
            let ch = build_channel(&charge, &s, true)?;
            let zetas = parse_zetas(&zeta)?;
            let nu = nu.as_deref().map(parse_nu).transpose()?;
            match (ch.region(), nu) {
                (Region::Nonsingular, Some(_)) => {
                    return Err(usage(format!(
                        "--nu does not apply: channel [{ch}] is nonsingular, where the Hamiltonian is defined uniquely \
                         and there is no extension parameter"
                    )))
                }
                (r, None) if r.is_singular() => {
                    return Err(usage(format!(
                        "--nu is required in the {r} region (it selects the self-adjoint extension); accepted forms: {NU_FORMS}"
                    )))
                }
                _ => {}
            }
            let n_max = s.nmax.unwrap_or(10);
            let cfg = s.solver.with_n_max(n_max);
            let sets = zetas
                .iter()
                .map(|&z| solve_levels(&ch.with_zeta(z), nu, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            emit(levels_dataset(&sets, n_max, cfg.theta_variant), &s, Some(&output), out, err)
        }
        Command::Table { charge, nu, alpha, integer, solver, output } => {
            let s = settings::resolve(&flag_values(&alpha, Some(&solver), Some(&output), integer.integer_z), env, config)?;
            let ch = build_channel(&charge, &s, true)?;
            let nu_list = if nu.is_empty() { default_nu_list() } else { parse_nu_list(&nu)? };
            let n_count = s.nmax.unwrap_or(4) + 1;
            let table = make_table(&ch, &nu_list, n_count, &s.solver)?;
            if s.format == Format::Text {
                if let Some(note) = &table.notice {
                    let _ = writeln!(err, "note: {note}");
                }
                let body = render_table_text(&table, &s);
                return write_body(&body, Some(&output), out);
            }
            emit(table_dataset(&table), &s, Some(&output), out, err)
        }
        Command::ScanNu { charge, z_to, steps, zeta, nu, points, n, alpha, solver, output } => {
            let s = settings::resolve(&flag_values(&alpha, Some(&solver), Some(&output), false), env, config)?;
            reject_text(&s, "scan-nu")?;
            let first = build_channel(&charge, &s, false)?;
            let channels = match z_to {
                None if steps.is_some_and(|k| k != 1) => return Err(usage("--steps needs --Z-to")),
                None => vec![first],
                Some(_) if charge.force_critical => {
                    return Err(usage("--Z-to cannot be combined with --force-critical"))
                }
                Some(to) => z_range(first.z(), to, steps.unwrap_or(11))?
                    .into_iter()
                    .map(|z| Channel::new(z, s.alpha_inv, first.j(), Zeta::Plus).map_err(|e| usage(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let nu_grid = if nu.is_empty() { uniform_nu_grid(points.unwrap_or(181))? } else { parse_nu_list(&nu)? };
            let n_list = if n.is_empty() { (0..=s.nmax.unwrap_or(4)).collect() } else { n };
            let spec = ScanSpec {
                channels,
                zetas: parse_zetas(&zeta)?,
                nu_grid,
                n_list,
                cfg: s.solver,
            };
            emit(scan_nu(&spec)?, &s, Some(&output), out, err)
        }
        Command::NuLower { z_from, z_to, steps, j, alpha, output } => {
            let s = settings::resolve(&flag_values(&alpha, None, Some(&output), false), env, config)?;
            reject_text(&s, "nu-lower")?;
            let j = parse_j(&j, "j")?;
            let z_to = z_to.unwrap_or(z_from);
            let steps = steps.unwrap_or(if z_to == z_from { 1 } else { 101 });
            emit(nu_lower_curve(z_from, z_to, steps, j, s.alpha_inv)?, &s, Some(&output), out, err)
        }
        Command::RegionMap { z_max, j_max, alpha, output } => {
            let s = settings::resolve(&flag_values(&alpha, None, Some(&output), false), env, config)?;
            reject_text(&s, "region-map")?;
            let j_max = parse_j(&j_max, "j-max")?;
            emit(region_map(z_max, j_max, s.alpha_inv)?, &s, Some(&output), out, err)
        }
        Command::Params { z, alpha, integer } => {
            let s = settings::resolve(&flag_values(&alpha, None, None, integer.integer_z), env, config)?;
            if !(z.is_finite() && z > 0.0) {
                return Err(usage(format!("Z must be positive, got {z}")));
            }
            check_integer_z(z, &s)?;
            let delta = num_extension_params(z, s.alpha_inv);
            let mut singular = Vec::new();
            let mut j = HalfInteger::ONE_HALF;
            while z > z_singular(j, s.alpha_inv) {
                singular.push(j.to_string());
                j = j.next();
            }
            let mut text = String::new();
            let _ = writeln!(text, "Z = {z}");
            let _ = writeln!(text, "alpha_inv = {}", s.alpha_inv);
            let _ = writeln!(text, "delta = {delta}");
            let _ = writeln!(text, "singular_j = {}", if singular.is_empty() { "none".into() } else { singular.join(", ") });
            write_body(&text, None, out)
        }
    }
}

fn nu_label(nu: Option<ExtensionAngle>) -> String {
    let Some(nu) = nu else {
        return "-".into();
    };
    let quarters = nu.radians() / std::f64::consts::FRAC_PI_4;
    if (quarters - quarters.round()).abs() < 1e-12 {
        match quarters.round() as i64 {
            -2 => "-pi/2".into(),
            -1 => "-pi/4".into(),
            0 => "0".into(),
            1 => "pi/4".into(),
            2 => "pi/2".into(),
            _ => format!("{:.6}", nu.radians()),
        }
    } else {
        format!("{:.6}", nu.radians())
    }
}

fn render_table_text(table: &Table, s: &Settings) -> String {
    let scale = match s.units {
        supercrit::report::Units::Rest => 1.0,
        supercrit::report::Units::KeV => s.electron_rest_kev,
    };
    let unit = match s.units {
        supercrit::report::Units::Rest => "E/m",
        supercrit::report::Units::KeV => "keV",
    };
    let mut text = String::new();
    let _ = writeln!(text, "# {}, region {}, energies in {unit}", table.channel, table.region);
    let _ = write!(text, "{:>8}", "nu");
    for n in 0..table.n_count {
        for z in Zeta::BOTH {
            let _ = write!(text, " {:>12}", format!("E{n}({z})"));
        }
    }
    text.push('\n');
    for row in &table.rows {
        let _ = write!(text, "{:>8}", nu_label(row.nu));
        for n in 0..table.n_count {
            for z in Zeta::BOTH {
                let cell = match row.entry(n, z) {
                    Some(Entry::Level(l)) => format!("{:.6}", l.energy * scale),
                    _ => String::new(),
                };
                let _ = write!(text, " {cell:>12}");
            }
        }
        text.push('\n');
    }
    text
}

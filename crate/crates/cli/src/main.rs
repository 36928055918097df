//! `l2ext`: extended L² homology of free Z^n-complexes from the command line.

mod input;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l2ext_core::battery::run_battery;
use l2ext_core::homology::{homology, homology_report, validate};
use l2ext_core::settings::LambdaGrid;
use l2ext_core::spectral::{density, json_real, ns_estimate};
use l2ext_core::topology::{morse_bounds, mu_bounds, preset_complex, tor, PRESET_NAMES};
use l2ext_core::{Error, FreeChainComplex, NSFit, Settings, SpectralDensity, VirtualModule};
use serde_json::{json, Value};

use input::{load, load_complex, load_rep, Input};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CHAIN: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(name = "l2ext", version, about = "Extended L2 homology in the commutative model L-infinity(T^n)")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Config {
    /// Grid points per torus axis (default depends on the number of variables).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Relative singular-value cut-off for ranks.
    #[arg(long, global = true, value_name = "EPS")]
    rank_tol: Option<f64>,
    /// Sampled λ values as `min:max:points_per_decade`.
    #[arg(long, global = true, value_name = "MIN:MAX:PPD", value_parser = parse_lambda)]
    lambda: Option<LambdaGrid>,
    /// Novikov–Shubin fit window as `lo:hi`.
    #[arg(long, global = true, value_name = "LO:HI", value_parser = parse_window)]
    fit_window: Option<(f64, f64)>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    output: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Von Neumann Betti numbers of every degree.
    Betti {
        /// Preset name or complex file.
        input: String,
    },
    /// Spectral density of a module, or of the torsion of `H_i` of a complex.
    Density {
        /// Preset name, complex file or module file.
        input: String,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Novikov–Shubin invariant and capacity.
    Ns {
        input: String,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Lower bounds on critical points of a Morse function.
    Morse {
        input: String,
        /// Unitary representation: `trivial<d>`, `sign` or a JSON file.
        #[arg(long, default_value = "trivial1")]
        rep: String,
    },
    /// Bounds on the minimal number of generators.
    Mu {
        input: String,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// `TOR_q` of the module resolved by a complex.
    Tor {
        input: String,
        /// Single degree; every degree of the resolution when omitted.
        #[arg(long)]
        q: Option<usize>,
    },
    /// Property battery on the presets, or on the given complexes.
    Check { inputs: Vec<String> },
}

fn parse_lambda(s: &str) -> Result<LambdaGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, ppd] = parts[..] else {
        return Err("expected min:max:points_per_decade".into());
    };
    let num = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let ppd = ppd.parse::<usize>().map_err(|e| format!("`{ppd}`: {e}"))?;
    LambdaGrid::new(num(min)?, num(max)?, ppd).map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.parse().map_err(|e| format!("`{lo}`: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("`{hi}`: {e}"))?;
    if !(lo > 0.0 && lo < hi) {
        return Err("need 0 < lo < hi".into());
    }
    Ok((lo, hi))
}

impl Config {
    fn settings(&self) -> l2ext_core::Result<Settings> {
        let mut s = Settings { points_per_dim: self.grid, fit_window: self.fit_window, ..Settings::default() };
        if let Some(t) = self.rank_tol {
            s.rank_tol = t;
        }
        if let Some(l) = &self.lambda {
            s.lambda = *l;
        }
        s.validate()?;
        Ok(s)
    }
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::ShapeMismatch { .. } | Error::DimensionMismatch { .. } => EXIT_PARSE,
            Error::ChainCondition { .. } => EXIT_CHAIN,
            Error::DegreeOutOfRange { .. } | Error::Domain(_) | Error::Fit(_) => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<Report, Failure>;

/// Rendered output plus whether the command's checks passed.
struct Report {
    text: String,
    passed: bool,
}

impl Report {
    fn ok(text: String) -> CmdResult {
        Ok(Report { text, passed: true })
    }
}

fn render(
    format: Format,
    text: impl FnOnce() -> String,
    json: impl FnOnce() -> Value,
    csv: impl FnOnce() -> String,
) -> String {
    match format {
        Format::Text => text(),
        Format::Json => format!("{:#}\n", json()),
        Format::Csv => csv(),
    }
}

fn checked(c: &FreeChainComplex) -> Result<(), Failure> {
    Ok(validate(c).into_result()?)
}

fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn fmt_betti(b: f64) -> String {
    if b.fract() == 0.0 {
        format!("{b:.0}")
    } else {
        format!("{b}")
    }
}

fn cmd_betti(arg: &str, s: &Settings, f: Format) -> CmdResult {
    let (_, c) = load_complex(arg)?;
    checked(&c)?;
    let r = homology_report(&c, s)?;
    Report::ok(render(
        f,
        || {
            let parts: Vec<String> =
                r.entries.iter().map(|e| format!("b{}={}", e.degree, fmt_betti(e.betti))).collect();
            format!("{}\n", parts.join(" "))
        },
        || json!({ "betti": r.bettis(), "degrees": r.to_json()["degrees"] }),
        || {
            let mut out = String::from("degree,betti\n");
            for e in &r.entries {
                out.push_str(&format!("{},{}\n", e.degree, e.betti));
            }
            out
        },
    ))
}

/// Density of a module input, or of the torsion of `H_degree` of a complex.
fn density_of(arg: &str, degree: usize, s: &Settings) -> Result<SpectralDensity, Failure> {
    match load(arg)? {
        Input::Module(module) => Ok(density(&module, s)?),
        Input::Complex { complex, .. } => {
            checked(&complex)?;
            Ok(homology(&complex, degree, s)?.torsion_density)
        }
    }
}

fn cmd_density(arg: &str, degree: usize, s: &Settings, f: Format) -> CmdResult {
    let d = density_of(arg, degree, s)?;
    Report::ok(render(f, || d.to_csv(), || d.to_json(), || d.to_csv()))
}

fn ns_text(fit: &NSFit) -> String {
    if fit.capacity == 0.0 {
        return "torsion trivial; capacity 0\n".into();
    }
    let mut s = format!(
        "ns={:.4} capacity={:.4} window=[{:.3e}, {:.3e}] stderr={:.2e} points={}\n",
        fit.ns, fit.capacity, fit.window.0, fit.window.1, fit.stderr, fit.n_points
    );
    if fit.nonpositive_slope {
        s.push_str("note: non-positive slope, ns clamped to 0\n");
    }
    s
}

fn cmd_ns(arg: &str, degree: usize, s: &Settings, f: Format) -> CmdResult {
    let d = density_of(arg, degree, s)?;
    let fit = ns_estimate(&d, s.fit_window)?;
    Report::ok(render(
        f,
        || ns_text(&fit),
        || json!({ "fit": fit.to_json(), "torsion_trivial": d.is_zero() }),
        || {
            format!(
                "ns,capacity,window_lo,window_hi,stderr\n{},{},{},{},{}\n",
                fmt_real(fit.ns),
                fmt_real(fit.capacity),
                fit.window.0,
                fit.window.1,
                fmt_real(fit.stderr)
            )
        },
    ))
}

fn cmd_morse(arg: &str, rep: &str, s: &Settings, f: Format) -> CmdResult {
    let (_, c) = load_complex(arg)?;
    checked(&c)?;
    let rho = load_rep(rep, c.num_vars())?;
    let r = morse_bounds(&c, &rho, s)?;
    Report::ok(render(
        f,
        || {
            let mut out = String::new();
            for e in &r.entries {
                out.push_str(&format!(
                    "m{} >= {} (mu_lower {}, rep dim {})\n",
                    e.index, e.bound, e.mu_lower, r.rep_dim
                ));
            }
            out
        },
        || r.to_json(),
        || {
            let mut out = String::from("index,mu_lower,rep_dim,bound\n");
            for e in &r.entries {
                out.push_str(&format!("{},{},{},{}\n", e.index, e.mu_lower, r.rep_dim, e.bound));
            }
            out
        },
    ))
}

fn cmd_mu(arg: &str, degree: usize, s: &Settings, f: Format) -> CmdResult {
    let module = match load(arg)? {
        Input::Module(module) => module,
        Input::Complex { complex, .. } => {
            checked(&complex)?;
            if degree > complex.top() {
                return Err(Error::DegreeOutOfRange { degree, top: complex.top() }.into());
            }
            // torsion of H_degree is presented by the incoming boundary
            VirtualModule::from_laurent(complex.boundary(degree + 1))
        }
    };
    let b = mu_bounds(&module, s)?;
    let upper = b.upper.map_or_else(|| "unknown".to_string(), |u| u.to_string());
    Report::ok(render(
        f,
        || {
            let cert = b.certificate.as_deref().unwrap_or("none");
            format!("mu_lower={} mu_upper={upper}\ncertificate: {cert}\n", b.lower)
        },
        || b.to_json(),
        || format!("lower,upper,certified\n{},{upper},{}\n", b.lower, b.certificate.is_some()),
    ))
}

fn cmd_tor(arg: &str, q: Option<usize>, s: &Settings, f: Format) -> CmdResult {
    let (_, c) = load_complex(arg)?;
    checked(&c)?;
    let qs: Vec<usize> = match q {
        Some(q) => vec![q],
        None => (0..=c.top()).collect(),
    };
    let mut rows = Vec::new();
    for q in qs {
        let t = tor(q, &c, s)?;
        let fit = if t.torsion_density.is_zero() { None } else { ns_estimate(&t.torsion_density, s.fit_window).ok() };
        rows.push((t, fit));
    }
    Report::ok(render(
        f,
        || {
            let mut out = String::new();
            for (t, fit) in &rows {
                if t.is_zero {
                    out.push_str(&format!("TOR_{} = 0\n", t.q));
                    continue;
                }
                out.push_str(&format!("TOR_{}: projective dim {}", t.q, fmt_betti(t.projective_dim)));
                match fit {
                    Some(fit) => out.push_str(&format!(", torsion ns {:.4} capacity {:.4}\n", fit.ns, fit.capacity)),
                    None if t.torsion_density.is_zero() => out.push_str(", torsion trivial\n"),
                    None => out.push_str(", torsion fit unavailable\n"),
                }
            }
            out
        },
        || {
            json!({ "tor": rows.iter().map(|(t, fit)| json!({
                "q": t.q,
                "projective_dim": t.projective_dim,
                "is_zero": t.is_zero,
                "torsion_trivial": t.torsion_density.is_zero(),
                "ns": fit.as_ref().map(|f| json_real(f.ns)),
                "capacity": fit.as_ref().map(|f| json_real(f.capacity)),
            })).collect::<Vec<_>>() })
        },
        || {
            let mut out = String::from("q,projective_dim,is_zero,ns,capacity\n");
            for (t, fit) in &rows {
                let (ns, cap) =
                    fit.as_ref().map_or((String::new(), String::new()), |f| (fmt_real(f.ns), fmt_real(f.capacity)));
                out.push_str(&format!("{},{},{},{ns},{cap}\n", t.q, t.projective_dim, t.is_zero));
            }
            out
        },
    ))
}

fn cmd_check(inputs: &[String], s: &Settings, f: Format) -> CmdResult {
    let complexes: Vec<(String, FreeChainComplex)> = if inputs.is_empty() {
        PRESET_NAMES
            .iter()
            .map(|n| preset_complex(n).map(|p| (p.name, p.complex)))
            .collect::<l2ext_core::Result<_>>()?
    } else {
        inputs.iter().map(|a| load_complex(a)).collect::<l2ext_core::Result<_>>()?
    };
    let labelled: Vec<(&str, &FreeChainComplex)> = complexes.iter().map(|(n, c)| (n.as_str(), c)).collect();
    let r = run_battery(&labelled, s)?;
    let text = render(
        f,
        || {
            let mut out = r.to_text();
            let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                out.push_str(&format!("all {} checks passed\n", r.checks.len()));
            } else {
                out.push_str(&format!("{} failed: {}\n", failed.len(), failed.join("; ")));
            }
            out
        },
        || r.to_json(),
        || {
            let mut out = String::from("check,passed,detail\n");
            for c in &r.checks {
                out.push_str(&format!("\"{}\",{},\"{}\"\n", c.name, c.passed, c.detail.replace('"', "'")));
            }
            out
        },
    );
    Ok(Report { text, passed: r.passed() })
}

fn run(cli: &Cli) -> CmdResult {
    let s = cli.config.settings()?;
    if let Some(n) = cli.config.threads {
        if n == 0 {
            return Err(Failure { code: EXIT_USAGE, message: "--threads must be at least 1".into() });
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let f = cli.config.output;
    match &cli.command {
        Command::Betti { input } => cmd_betti(input, &s, f),
        Command::Density { input, degree } => cmd_density(input, *degree, &s, f),
        Command::Ns { input, degree } => cmd_ns(input, *degree, &s, f),
        Command::Morse { input, rep } => cmd_morse(input, rep, &s, f),
        Command::Mu { input, degree } => cmd_mu(input, *degree, &s, f),
        Command::Tor { input, q } => cmd_tor(input, *q, &s, f),
        Command::Check { inputs } => cmd_check(inputs, &s, f),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(r) => {
            let _ = std::io::stdout().write_all(r.text.as_bytes());
            if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => {
            eprintln!("l2ext: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_and_window_parsing() {
        let g = parse_lambda("1e-3:2:32").unwrap();
        assert_eq!((g.min, g.max, g.per_decade), (1e-3, 2.0, 32));
        assert!(parse_lambda("1:2").is_err());
        assert!(parse_lambda("2:1:10").is_err());
        assert_eq!(parse_window("0.01:0.5").unwrap(), (0.01, 0.5));
        assert!(parse_window("0.5:0.1").is_err());
        assert!(parse_window("x:1").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::Parse("x".into())).code, EXIT_PARSE);
        assert_eq!(Failure::from(Error::ChainCondition { degree: 1, residual: 1.0 }).code, EXIT_CHAIN);
        assert_eq!(Failure::from(Error::DegreeOutOfRange { degree: 3, top: 1 }).code, EXIT_USAGE);
    }

    #[test]
    fn betti_formatting() {
        assert_eq!(fmt_betti(0.0), "0");
        assert_eq!(fmt_betti(3.0), "3");
        assert_eq!(fmt_real(f64::INFINITY), "inf");
    }
}

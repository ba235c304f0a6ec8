use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use lgradial::export::{write_csv, write_pgm};
use lgradial::fields::{
    count_dark_rings, eval_bg_closed, eval_hg_polar, eval_lg, eval_perelomov_closed, eval_state,
    max_relative_deviation, FieldMap, PolarGrid, DEFAULT_NPHI, DEFAULT_NR,
};
use lgradial::states::{
    barut_girardello, barut_girardello_with_tail, intelligent_eigenvalue, intelligent_residual, intelligent_state_auto,
    intelligent_truncation, lowering_residual, mean_rings, perelomov, uncertainty_report,
    perelomov_with_tail, wp_distribution, wp_tail,
};

/// Tail weight of the basis expansions the closed forms are compared with.
const ORACLE_TAIL: f64 = 1e-30;
use lgradial::su11::{dmatrix, IrrepLabel, Truncation};
use lgradial::verify::{self, Suite};

#[derive(Parser)]
#[command(name = "lgradial", version, about = "Radial-number algebra of Laguerre-Gauss modes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Laguerre-Gauss mode Ψ_{pℓ}
    Mode {
        #[arg(long)]
        p: usize,
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
        #[command(flatten)]
        out: FieldOut,
    },
    /// Hermite-Gauss mode sampled on the polar grid
    Hg {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[command(flatten)]
        out: FieldOut,
    },
    /// Perelomov radial coherent state (closed form)
    Coherent {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        zeta: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
        #[command(flatten)]
        out: FieldOut,
    },
    /// Barut-Girardello state (closed form)
    Bg {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        zeta: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
        #[command(flatten)]
        out: FieldOut,
    },
    /// Intelligent state exp(iτk_y) applied to the seed of order M
    Intelligent {
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
        #[arg(long = "M", alias = "m")]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[command(flatten)]
        out: FieldOut,
    },
    /// Ring-number distribution W_p of a Perelomov state
    Wp {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        zeta: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
        #[arg(long)]
        pmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wigner d-matrix ⟨p'|exp(iτk_y)|p⟩
    Dmat {
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long)]
        pmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of dark rings of Ψ_{pℓ}
    Rings {
        #[arg(long)]
        p: usize,
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
    },
    /// Run the self-check suites and print a JSON report
    Verify {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
}

#[derive(Args)]
struct FieldOut {
    /// Oscillator scale; √2 is the paraxial beam convention
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    alpha: f64,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_NR)]
    nr: usize,
    #[arg(long, default_value_t = DEFAULT_NPHI)]
    nphi: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Image side in pixels for PGM output
    #[arg(long, default_value_t = 512)]
    side: usize,
}

impl FieldOut {
    fn grid(&self, p_max: usize, ell: i32) -> lgradial::Result<PolarGrid> {
        let r_max = self
            .rmax
            .unwrap_or_else(|| PolarGrid::default_r_max(p_max, ell, self.alpha));
        PolarGrid::new(r_max, self.nr, self.nphi, self.alpha)
    }

    fn write(&self, field: &FieldMap) -> anyhow::Result<()> {
        let mut w = create(&self.out)?;
        match self.format {
            Format::Csv => write_csv(field, &mut w)?,
            Format::Pgm => write_pgm(field, self.side, &mut w)?,
        }
        w.flush()?;
        Ok(())
    }

    fn sidecar(&self, value: serde_json::Value) -> anyhow::Result<()> {
        let mut path = self.out.clone().into_os_string();
        path.push(".json");
        let mut w = create(Path::new(&path))?;
        serde_json::to_writer_pretty(&mut w, &value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM but got '{s}'"))?;
    let part = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{t}' is not a finite number"))
    };
    Ok(Complex64::new(part(re)?, part(im)?))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| {
        format!("unknown suite '{s}', expected one of specfun, algebra, states, fields, twomode, all")
    })
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

/// Exit code 1 when verification fails; errors map to 2.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Mode { p, ell, out } => {
            let grid = out.grid(p, ell)?;
            out.write(&eval_lg(p, ell, &grid)?)?;
        }
        Command::Hg { nx, ny, out } => {
            let grid = out.grid(nx + ny, 0)?;
            out.write(&eval_hg_polar(nx, ny, &grid)?)?;
        }
        Command::Coherent { zeta, ell, out } => {
            let irrep = IrrepLabel::new(ell);
            let state = perelomov(irrep, zeta, 16)?;
            let deep = perelomov_with_tail(irrep, zeta, state.p_max(), ORACLE_TAIL)?;
            let grid = out.grid(state.p_max(), ell)?;
            let field = eval_perelomov_closed(zeta, ell, &grid)?;
            let oracle = eval_state(&deep, &grid)?;
            out.write(&field)?;
            out.sidecar(json!({
                "kind": "perelomov",
                "ell": ell,
                "zeta": complex_json(zeta),
                "pbar": mean_rings(irrep, zeta)?,
                "expansion_p_max": state.p_max(),
                "expansion_tail": state.tail_mass(),
                "oracle_residual": max_relative_deviation(&oracle, &field)?,
                "quadrature_norm": field.norm2(),
            }))?;
        }
        Command::Bg { zeta, ell, out } => {
            let irrep = IrrepLabel::new(ell);
            let state = barut_girardello(irrep, zeta, 16)?;
            let deep = barut_girardello_with_tail(irrep, zeta, state.p_max(), ORACLE_TAIL)?;
            let grid = out.grid(state.p_max(), ell)?;
            let field = eval_bg_closed(zeta, ell, &grid)?;
            let oracle = eval_state(&deep, &grid)?;
            out.write(&field)?;
            out.sidecar(json!({
                "kind": "barut-girardello",
                "ell": ell,
                "zeta": complex_json(zeta),
                "expansion_p_max": state.p_max(),
                "expansion_tail": state.tail_mass(),
                "eigen_residual": lowering_residual(&deep, zeta),
                "oracle_residual": max_relative_deviation(&oracle, &field)?,
                "quadrature_norm": field.norm2(),
            }))?;
        }
        Command::Intelligent { ell, m, tau, out } => {
            let irrep = IrrepLabel::new(ell);
            let state = intelligent_state_auto(irrep, m, tau)?;
            let margin = intelligent_truncation(irrep, m, tau)?.margin();
            let trunc = Truncation::new(state.p_max(), margin)?;
            let grid = out.grid(trunc.p_max(), ell)?;
            let field = lgradial::fields::intelligent_field(ell, m, tau, &grid, trunc)?;
            out.write(&field)?;
            let lambda = tau.cosh();
            let eigenvalue = intelligent_eigenvalue(irrep, m, tau);
            out.sidecar(json!({
                "kind": "intelligent",
                "ell": ell,
                "M": m,
                "tau": tau,
                "p_max": state.p_max(),
                "tail": state.tail_mass(),
                "lambda": lambda,
                "eigenvalue": eigenvalue,
                "eigen_residual": intelligent_residual(&state, lambda, eigenvalue),
                "eigen_residual_opposite_sign": intelligent_residual(&state, lambda, -eigenvalue),
                "uncertainty": uncertainty_report(&state),
                "quadrature_norm": field.norm2(),
            }))?;
        }
        Command::Wp { zeta, ell, pmax, out } => {
            let irrep = IrrepLabel::new(ell);
            let w = wp_distribution(irrep, zeta, pmax)?;
            let mut o = output(&out)?;
            writeln!(
                o,
                "# pbar={:.16e} tail={:.16e}",
                mean_rings(irrep, zeta)?,
                wp_tail(irrep, zeta, pmax)?
            )?;
            writeln!(o, "p,W_p")?;
            for (p, v) in w.iter().enumerate() {
                writeln!(o, "{p},{v:.16e}")?;
            }
            o.flush()?;
        }
        Command::Dmat { ell, tau, pmax, out } => {
            let irrep = IrrepLabel::new(ell);
            let trunc = Truncation::for_dmatrix(irrep, tau, pmax)?;
            let d = dmatrix(irrep, tau, trunc)?;
            let last = trunc.interior();
            let mut o = output(&out)?;
            writeln!(o, "p_prime,p,d,interior")?;
            for r in 0..d.dim() {
                for s in 0..d.dim() {
                    let inside = u8::from(r <= last && s <= last);
                    writeln!(o, "{r},{s},{:.16e},{inside}", d.get(r, s).re)?;
                }
            }
            o.flush()?;
        }
        Command::Rings { p, ell } => {
            println!("{}", count_dark_rings(p, ell)?);
        }
        Command::Verify { suite, tol_scale, out } => {
            let report = verify::run(suite, tol_scale)?;
            let mut o = output(&out)?;
            serde_json::to_writer_pretty(&mut o, &report)?;
            writeln!(o)?;
            o.flush()?;
            for c in report.failures() {
                eprintln!("FAIL {}/{}: residual {:?} > {:e}", c.suite, c.check, c.residual, c.tolerance * tol_scale);
            }
            return Ok(report.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! Command-line driver: argument parsing, run orchestration and artifacts.

mod config;

pub use config::{parse_config_text, parse_schedule, FamilyChoice, Mode, NoiseChoice, RunConfig};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::galerkin::run_galerkin;
use crate::gpc::{convergence_table, moment_tensors, quadrature, PolynomialFamily};
use crate::inpaint::{run_inpaint, InpaintProblem, RunDiagnostics};
use crate::io::{load_image, load_mask, write_diagnostics, write_dump, write_image, write_text};
use crate::multiphase::{run_multiphase, uniform_gray_values, MultiphaseProblem};
use crate::perturbation::{perturbation_mean, perturbation_variance, run_perturbation};
use crate::uq::{mean_field, monte_carlo, variance_field, NoiseModel};
use crate::wavelet::{HaarBasis, HaarFunction};

pub const USAGE: &str = "\
usage: chinpaint <mode> [--config FILE] [--KEY VALUE ...]

modes: inpaint, inpaint-gray, galerkin, perturb, mc, gpc-diag, wavelet-diag

keys: input mask output eps lambda0 dt c1 c2 max_steps tol eps_schedule
      sigma delta order gray_levels samples seed family lower upper noise
      levels pgm16

Flags override the config file, which overrides the defaults.
Exit status: 0 success, 1 input error, 2 no convergence (artifacts written).
";

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub converged: bool,
    pub artifacts: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// Turns `[mode] [--config FILE] [--key value | --key=value]...` into
/// config entries, file entries first.
pub fn parse_args<I: IntoIterator<Item = String>>(args: I) -> Result<Vec<(String, String)>> {
    let mut mode = None;
    let mut config_file = None;
    let mut flags = Vec::new();
    let mut it = args.into_iter().peekable();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            if mode.is_some() {
                return Err(Error::config(arg, "unexpected positional argument"));
            }
            mode = Some(arg);
            continue;
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.replace('-', "_"), v.to_string()),
            None => {
                let key = flag.replace('-', "_");
                let value = match it.peek() {
                    Some(next) if !next.starts_with("--") => it.next().unwrap(),
                    _ if key == "pgm16" => "true".to_string(),
                    _ => return Err(Error::config(key, "missing value")),
                };
                (key, value)
            }
        };
        if key == "config" {
            config_file = Some(PathBuf::from(value));
        } else {
            flags.push((key, value));
        }
    }
    let mut entries = Vec::new();
    if let Some(path) = config_file {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        entries.extend(parse_config_text(&text, &path)?);
    }
    if let Some(m) = mode {
        entries.push(("mode".to_string(), m));
    }
    entries.extend(flags);
    Ok(entries)
}

/// Runs the CLI and returns the process exit status.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let args: Vec<String> = args.into_iter().collect();
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}");
        return if args.is_empty() { 1 } else { 0 };
    }
    let outcome = parse_args(args)
        .and_then(|entries| RunConfig::from_entries(&entries))
        .and_then(|cfg| run(&cfg));
    match outcome {
        Ok(out) => {
            for note in &out.notes {
                eprintln!("{note}");
            }
            if out.converged {
                0
            } else {
                eprintln!("warning: did not reach tol within the step budget");
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

struct Writer<'a> {
    dir: &'a Path,
    pgm16: bool,
    out: Outcome,
}

impl Writer<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.out.artifacts.push(p.clone());
        p
    }

    fn image(&mut self, name: &str, u: &ScalarField) -> Result<()> {
        let p = self.path(name);
        write_image(&p, u, self.pgm16)
    }

    fn dump(&mut self, name: &str, u: &ScalarField) -> Result<()> {
        let p = self.path(name);
        write_dump(&p, u)
    }

    fn modes(&mut self, modes: &[ScalarField]) -> Result<()> {
        for (k, m) in modes.iter().enumerate() {
            self.dump(&format!("mode_{k}.f64"), m)?;
        }
        Ok(())
    }

    fn variance(&mut self, var: &ScalarField) -> Result<()> {
        self.dump("variance.f64", var)?;
        self.image("stddev.pgm", &var.map(|v| v.max(0.0).sqrt()))
    }

    fn diagnostics(&mut self, diag: &RunDiagnostics) -> Result<()> {
        let p = self.path("diagnostics.csv");
        write_diagnostics(&p, diag)?;
        self.out.converged = diag.converged;
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        write_text(&p, body)
    }
}

fn load_problem(cfg: &RunConfig) -> Result<InpaintProblem> {
    // validated: both paths are present for image modes
    let input = cfg.input.as_deref().expect("input checked by validation");
    let mask = cfg.mask.as_deref().expect("mask checked by validation");
    let f = load_image(input)?;
    let chi = load_mask(mask, f.dims())?;
    InpaintProblem::new(f, chi, cfg.lambda0, cfg.eps)
}

fn family(cfg: &RunConfig) -> Result<PolynomialFamily> {
    match cfg.family {
        FamilyChoice::Hermite => PolynomialFamily::hermite(cfg.sigma, cfg.order),
        FamilyChoice::Legendre => PolynomialFamily::legendre(cfg.lower, cfg.upper, cfg.order),
    }
}

/// Executes one configured run and writes its artifacts into `cfg.output`.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    let mut w = Writer {
        dir: &cfg.output,
        pgm16: cfg.pgm16,
        out: Outcome {
            converged: true,
            ..Outcome::default()
        },
    };
    let solver = cfg.solver();
    match cfg.mode {
        Mode::Inpaint => {
            let problem = load_problem(cfg)?;
            let r = run_inpaint(&problem, &solver)?;
            w.image("result.pgm", &r.u)?;
            w.modes(std::slice::from_ref(&r.u))?;
            w.diagnostics(&r.diagnostics)?;
        }
        Mode::InpaintGray => {
            let problem = load_problem(cfg)?;
            let gray = uniform_gray_values(cfg.gray_levels)?;
            let problem = MultiphaseProblem::new(
                problem.f(),
                problem.mask().clone(),
                &gray,
                cfg.lambda0,
                cfg.eps,
            )?;
            let r = run_multiphase(&problem, &solver)?;
            w.image("result.pgm", &r.image())?;
            w.modes(r.stack.phases())?;
            w.diagnostics(&r.diagnostics)?;
        }
        Mode::Galerkin => {
            let problem = load_problem(cfg)?;
            let r = run_galerkin(&problem, &family(cfg)?, cfg.order, &solver)?;
            w.image("result.pgm", &mean_field(&r.stack))?;
            w.modes(r.stack.modes())?;
            w.variance(&variance_field(&r.stack))?;
            w.diagnostics(&r.diagnostics)?;
        }
        Mode::Perturb => {
            let problem = load_problem(cfg)?;
            let r = run_perturbation(&problem, cfg.delta, &solver)?;
            if let Some(warn) = r.state.delta_warning() {
                w.out.notes.push(format!("warning: {warn}"));
            }
            w.out.notes.push(format!(
                "ordering ratio delta*max|u1|/max|u0| = {:.6e}",
                r.ordering_ratio()
            ));
            w.image("result.pgm", &perturbation_mean(&r.state))?;
            w.modes(&[r.state.u0.clone(), r.state.u1.clone()])?;
            w.variance(&perturbation_variance(&r.state))?;
            w.diagnostics(&r.diagnostics)?;
        }
        Mode::Mc => {
            let problem = load_problem(cfg)?;
            let noise = match cfg.noise {
                NoiseChoice::Gaussian => NoiseModel::Gaussian { sigma: cfg.sigma },
                NoiseChoice::Uniform => NoiseModel::Uniform { delta: cfg.delta },
            };
            let r = monte_carlo(
                &problem,
                noise,
                cfg.samples,
                cfg.seed,
                &solver,
                cfg.max_steps,
            )?;
            w.image("result.pgm", &r.mean)?;
            w.dump("mode_0.f64", &r.mean)?;
            w.variance(&r.variance)?;
            w.dump("stderr.f64", &r.stderr)?;
        }
        Mode::GpcDiag => gpc_diag(cfg, &mut w)?,
        Mode::WaveletDiag => wavelet_diag(cfg, &mut w)?,
    }
    Ok(w.out)
}

fn gpc_diag(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<()> {
    let fam = family(cfg)?;
    let n = cfg.order;
    let rule = quadrature(&fam, 2 * n + 3)?;
    let mut s = String::from("index,node,weight\n");
    for (i, (z, wt)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        writeln!(s, "{i},{z:.16e},{wt:.16e}").unwrap();
    }
    w.text("quadrature.csv", &s)?;

    let t = moment_tensors(&fam, n)?;
    let mut s = String::from("n,gamma\n");
    for (i, g) in t.gamma().iter().enumerate() {
        writeln!(s, "{i},{g:.16e}").unwrap();
    }
    w.text("norms.csv", &s)?;
    let mut e3 = String::from("i,p,j,value\n");
    let mut e4 = String::from("i,p,q,j,value\n");
    for i in 0..=n {
        for p in 0..=n {
            for j in 0..=n {
                writeln!(e3, "{i},{p},{j},{:.16e}", t.e3(i, p, j)).unwrap();
                for q in 0..=n {
                    writeln!(e4, "{i},{p},{q},{j},{:.16e}", t.e4(i, p, q, j)).unwrap();
                }
            }
        }
    }
    w.text("e3.csv", &e3)?;
    w.text("e4.csv", &e4)?;

    let orders: Vec<usize> = (0..=n).collect();
    let rows = convergence_table(f64::exp, &fam, &orders, 64)?;
    let mut s = String::from("order,error\n");
    for r in rows {
        writeln!(s, "{},{:.16e}", r.order, r.error).unwrap();
    }
    w.text("convergence.csv", &s)
}

fn wavelet_diag(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<()> {
    let basis = HaarBasis::new(cfg.levels)?;
    let coeffs = basis.project(|z| z);
    let mut s = String::from("index,kind,j,k,coefficient\n");
    let mut m = String::from("kind,j,k,p,moment\n");
    for (i, (g, c)) in basis.functions().into_iter().zip(&coeffs).enumerate() {
        let (kind, j, k) = match g {
            HaarFunction::Scaling => ("scaling", 0, 0),
            HaarFunction::Wavelet { j, k } => ("wavelet", j, k),
        };
        writeln!(s, "{i},{kind},{j},{k},{c:.16e}").unwrap();
        for p in 0..4 {
            writeln!(m, "{kind},{j},{k},{p},{:.16e}", g.moment(p)).unwrap();
        }
    }
    w.text("wavelet_coefficients.csv", &s)?;
    w.text("wavelet_moments.csv", &m)
}

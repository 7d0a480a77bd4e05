use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qle_cli::commands;
use qle_cli::config::{Format, RunConfig};
use qle_cli::error::CliError;
use qle_cli::output::{write_table, Table};

#[derive(Parser)]
#[command(name = "qle", version, about = "Quantum Langevin oscillator: distributions, correlations, ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensionless kinetic/potential frequency distributions
    Dist(Opts),
    /// Position and velocity correlation functions versus lag
    Corr(Opts),
    /// Mean kinetic and potential energies across a damping sweep
    Energy(Opts),
    /// Markovian Langevin ensemble moments
    Sde(Opts),
    /// Rotating-wave Langevin ensemble moments
    Rwa(Opts),
    /// Finite-bath noise statistics and memory-equation moments
    Microbath(Opts),
    /// Write the dist, energy and corr tables into a directory
    Scan(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// key = value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Damping rate, or a comma-separated list
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    omega0: Option<String>,
    /// Temperature (kT = kb * temp)
    #[arg(long)]
    temp: Option<String>,
    #[arg(long)]
    hbar: Option<String>,
    #[arg(long)]
    kb: Option<String>,
    #[arg(long)]
    mass: Option<String>,
    /// Frequency cutoff for the correlation integrals
    #[arg(long = "omega-max")]
    omega_max: Option<String>,
    /// Bath cutoff frequency (cutoff Ohmic bath)
    #[arg(long)]
    cutoff: Option<String>,
    /// Bath modes (microbath)
    #[arg(long)]
    modes: Option<String>,
    /// Points in the Lambda or tau grid
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "lambda-max")]
    lambda_max: Option<String>,
    #[arg(long = "tau-max")]
    tau_max: Option<String>,
    /// Trajectories or realizations
    #[arg(long)]
    traj: Option<String>,
    /// Samples per trajectory (sde, rwa) or integration steps (microbath)
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// exact or euler
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output file (directory for scan); stdout when absent
    #[arg(long)]
    out: Option<String>,
    /// Trajectory CSV of the first microbath realization
    #[arg(long)]
    dump: Option<String>,
}

impl Opts {
    fn to_config(&self) -> Result<RunConfig, CliError> {
        let mut base = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                RunConfig::parse_text(&text)?
            }
            None => RunConfig::default(),
        };
        let mut flags = RunConfig::default();
        let pairs: [(&str, &Option<String>); 20] = [
            ("gamma", &self.gamma),
            ("omega0", &self.omega0),
            ("temp", &self.temp),
            ("hbar", &self.hbar),
            ("kb", &self.kb),
            ("mass", &self.mass),
            ("omega-max", &self.omega_max),
            ("cutoff", &self.cutoff),
            ("modes", &self.modes),
            ("grid", &self.grid),
            ("lambda-max", &self.lambda_max),
            ("tau-max", &self.tau_max),
            ("traj", &self.traj),
            ("steps", &self.steps),
            ("dt", &self.dt),
            ("scheme", &self.scheme),
            ("seed", &self.seed),
            ("format", &self.format),
            ("out", &self.out),
            ("dump", &self.dump),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, v)?;
            }
        }
        base = base.overlay(&flags);
        Ok(base)
    }
}

fn emit(table: &Table, cfg: &RunConfig, path: Option<&Path>) -> Result<(), CliError> {
    let format = cfg.format.unwrap_or(Format::Csv);
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(f);
            write_table(table, cfg, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_table(table, cfg, format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<(), CliError> {
    let (opts, f): (&Opts, fn(&mut RunConfig) -> Result<Table, CliError>) = match &command {
        Command::Dist(o) => (o, commands::dist),
        Command::Corr(o) => (o, commands::corr),
        Command::Energy(o) => (o, commands::energy),
        Command::Sde(o) => (o, commands::sde),
        Command::Rwa(o) => (o, commands::rwa),
        Command::Microbath(o) => (o, commands::microbath),
        Command::Scan(o) => return scan(o),
    };
    let mut cfg = opts.to_config()?;
    cfg.format.get_or_insert(Format::Csv);
    let table = f(&mut cfg)?;
    let out = cfg.out.clone();
    emit(&table, &cfg, out.as_deref())
}

fn scan(opts: &Opts) -> Result<(), CliError> {
    let base = opts.to_config()?;
    let dir = base.out.clone().unwrap_or_else(|| PathBuf::from("scan"));
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let format = base.format.unwrap_or(Format::Csv);
    let jobs: [(&str, fn(&mut RunConfig) -> Result<Table, CliError>); 3] =
        [("dist", commands::dist), ("energy", commands::energy), ("corr", commands::corr)];
    for (name, f) in jobs {
        let mut cfg = base.clone();
        cfg.format = Some(format);
        let path = dir.join(format!("{name}.{format}"));
        cfg.out = Some(path.clone());
        if name == "corr" {
            // the weak-coupling overlay is only meaningful at small damping
            cfg.gamma = Some(vec![1e-4]);
        }
        let table = f(&mut cfg)?;
        emit(&table, &cfg, Some(&path))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qle: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

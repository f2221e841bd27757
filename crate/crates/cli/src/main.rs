use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crd_cli::config::OUT_DIR_ENV;
use crd_cli::experiment::{outcome_exit_code, EXIT_COMPLETED, EXIT_CONFIG};
use crd_cli::{parse_config, presets, run_compare, run_experiment, CliError, ExperimentFile};

#[derive(Parser)]
#[command(name = "crdctl", about = "Run boundary-control experiments on reaction-convection-diffusion plants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run {
        /// Experiment file, or the name of a shipped preset.
        config: String,
        /// Output directory (overrides the file and the environment).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Force v = 0 at the boundary.
        #[arg(long)]
        open_loop: bool,
    },
    /// Run the open- and closed-loop legs and compare them.
    Compare {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
    },
    /// Shipped presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
    Version,
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Fd,
    Rbf,
}

impl BackendArg {
    fn name(self) -> &'static str {
        match self {
            BackendArg::Fd => "fd",
            BackendArg::Rbf => "rbf",
        }
    }
}

fn load(config: &str) -> Result<ExperimentFile, CliError> {
    let path = Path::new(config);
    if !path.exists() {
        if let Some(p) = presets::find(config) {
            return Ok(p.load()?);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    Ok(parse_config(&text)?)
}

fn out_dir(file: &ExperimentFile, out: Option<PathBuf>, root: Option<&Path>) -> PathBuf {
    out.unwrap_or_else(|| file.output_dir(root))
}

fn main() -> ExitCode {
    let root = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    ExitCode::from(run_cli(std::env::args_os(), root.as_deref()))
}

fn run_cli(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, root: Option<&Path>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_COMPLETED };
        }
    };
    match dispatch(cli.command, root) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, root: Option<&Path>) -> Result<u8, CliError> {
    match command {
        Command::Run { config, out, backend, open_loop } => {
            let mut file = load(&config)?;
            if let Some(b) = backend {
                file.set_backend(b.name());
            }
            if open_loop {
                file.set_open_loop();
            }
            let dir = out_dir(&file, out, root);
            let run = run_experiment(&file, &dir)?;
            print!("{}", run.summary.render());
            println!("output: {}", dir.display());
            Ok(outcome_exit_code(&run))
        }
        Command::Compare { config, out, backend } => {
            let mut file = load(&config)?;
            if let Some(b) = backend {
                file.set_backend(b.name());
            }
            let dir = out_dir(&file, out, root);
            let (cmp, _, _) = run_compare(&file, &dir)?;
            print!("{}", cmp.render());
            println!("output: {}", dir.display());
            Ok(EXIT_COMPLETED)
        }
        Command::Presets { action: PresetsAction::List } => {
            for p in presets::PRESETS {
                let desc = p.load().ok().and_then(|f| f.description).unwrap_or_default();
                println!("{:<16} {desc}", p.name);
            }
            Ok(EXIT_COMPLETED)
        }
        Command::Version => {
            println!("crdctl {}", env!("CARGO_PKG_VERSION"));
            Ok(EXIT_COMPLETED)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crd_cli::experiment::{EXIT_BLOW_UP, EXIT_NUMERIC};

    const HEAT: &str = r#"
[plant]
epsilon = 0.1

[grid]
n = 20

[time]
dt = 1e-3
t_final = 0.02

[ic]
expr = "sin(pi*x)"
"#;

    fn cli(args: &[&str]) -> u8 {
        run_cli(std::iter::once("crdctl").chain(args.iter().copied()), None)
    }

    fn write(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    #[test]
    fn runs_are_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "heat.toml", HEAT);
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        assert_eq!(cli(&["run", &cfg, "--out", a.to_str().unwrap()]), EXIT_COMPLETED);
        assert_eq!(cli(&["run", &cfg, "--out", b.to_str().unwrap()]), EXIT_COMPLETED);
        for f in ["series.csv", "snapshots.csv"] {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
        }
        let series = std::fs::read_to_string(a.join("series.csv")).unwrap();
        assert!(series.starts_with("t,V,v,max_abs_u,boundary_slope\n"));
        assert_eq!(series.lines().count(), 22);
        assert!(std::fs::read_to_string(a.join("snapshots.csv")).unwrap().starts_with("t,x,u\n"));
        for plot in ["lyapunov.svg", "control.svg", "state.svg"] {
            assert!(a.join("plots").join(plot).is_file());
        }
        let summary = std::fs::read_to_string(a.join("summary.txt")).unwrap();
        assert!(summary.contains("outcome: completed"));
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let out = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
        assert_eq!(cli(&["run", "blowup_s3", "--open-loop", "--out", &out("o")]), EXIT_BLOW_UP);

        let mismatch =
            HEAT.replace("epsilon = 0.1", "epsilon = 0.1\nconvection = \"+u\"") + "[control]\nkind = \"buckmaster\"\n";
        let cfg = write(dir.path(), "mismatch.toml", &mismatch);
        assert_eq!(cli(&["run", &cfg, "--out", &out("m")]), EXIT_CONFIG);
        let cfg = write(dir.path(), "syntax.toml", &HEAT.replace("n = 20", "n = "));
        assert_eq!(cli(&["run", &cfg, "--out", &out("s")]), EXIT_CONFIG);
        assert_eq!(cli(&["run", "/nonexistent/file.toml"]), EXIT_CONFIG);
        assert_eq!(cli(&["run", "x.toml", "--backend", "spectral"]), EXIT_CONFIG);
        assert_eq!(cli(&["frobnicate"]), EXIT_CONFIG);

        // A flat multiquadric on 41 nodes has a numerically singular collocation matrix.
        let flat = write(dir.path(), "flat.toml", &HEAT.replace("n = 20", "n = 40\nbackend = \"rbf\"\nshape = 1.0"));
        assert_eq!(cli(&["run", &flat, "--out", &out("f")]), EXIT_NUMERIC);
    }

    #[test]
    fn output_root() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "heat.toml", &format!("name = \"envtest\"\n{HEAT}"));
        let code = run_cli(["crdctl", "run", &cfg], Some(dir.path()));
        assert_eq!(code, EXIT_COMPLETED);
        assert!(dir.path().join("out/envtest/series.csv").is_file());
    }

    #[test]
    fn compare_presets_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let plant = "epsilon = 0.1\nconvection = \"-u\"\nreaction = [{ coefficient = 1.0, power = 1 }]";
        let cfg = write(dir.path(), "c.toml", &HEAT.replace("epsilon = 0.1", plant));
        let cmp = dir.path().join("cmp");
        assert_eq!(cli(&["compare", &cfg, "--out", cmp.to_str().unwrap()]), EXIT_COMPLETED);
        assert!(std::fs::read_to_string(cmp.join("comparison.txt")).unwrap().contains("blow_up_prevented: false"));
        assert!(cmp.join("closed/series.csv").is_file());
        assert_eq!(cli(&["presets", "list"]), EXIT_COMPLETED);
        assert_eq!(cli(&["version"]), EXIT_COMPLETED);
        assert_eq!(cli(&["--help"]), EXIT_COMPLETED);
    }
}

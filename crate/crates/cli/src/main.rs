use std::path::PathBuf;
use std::process::ExitCode;

use lamecouple::config::load_config;
use lamecouple::experiments::{run, RunError, RunFlags};

const USAGE: &str = "usage: lamecouple <config> [--out DIR] [--dump-matrices] [--verbose]

Runs the experiment described by the config file and writes results.csv /
verify.csv into the output directory (default: current directory).

Exit codes: 0 = all requested checks passed, 1 = solver failure or check
violation, 2 = bad configuration or usage.";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config_path: Option<PathBuf> = None;
    let mut flags = RunFlags {
        out_dir: PathBuf::from("."),
        dump_matrices: false,
        verbose: false,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => match it.next() {
                Some(dir) => flags.out_dir = PathBuf::from(dir),
                None => {
                    eprintln!("--out needs a directory\n{USAGE}");
                    return ExitCode::from(2);
                }
            },
            "--dump-matrices" => flags.dump_matrices = true,
            "--verbose" => flags.verbose = true,
            "--help" | "-h" => {
                println!("{USAGE}");
                return ExitCode::SUCCESS;
            }
            other if config_path.is_none() && !other.starts_with('-') => {
                config_path = Some(PathBuf::from(other));
            }
            other => {
                eprintln!("unknown argument `{other}`\n{USAGE}");
                return ExitCode::from(2);
            }
        }
    }
    let Some(config_path) = config_path else {
        eprintln!("{USAGE}");
        return ExitCode::from(2);
    };

    let cfg = match load_config(&config_path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if flags.verbose {
        println!(
            "experiment {:?} on {:?}, {} level(s), output to {}",
            cfg.experiment,
            cfg.geometry,
            cfg.levels,
            flags.out_dir.display()
        );
    }

    match run(&cfg, &flags) {
        Ok(summary) => {
            for line in &summary.messages {
                println!("{line}");
            }
            if summary.pass {
                println!("ok");
                ExitCode::SUCCESS
            } else {
                println!("FAILED");
                ExitCode::from(1)
            }
        }
        Err(RunError::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

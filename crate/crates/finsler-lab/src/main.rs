use finsler_lab::driver::{run_file, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

fn usage() -> ExitCode {
    eprintln!("usage: finsler-lab <subcommand> --config <path> [--out <dir>]");
    eprintln!("subcommands: {}", Subcommand::ALL_NAMES);
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(cmd) = args.first().and_then(|s| Subcommand::parse(s)) else {
        return usage();
    };
    let mut config: Option<PathBuf> = None;
    let mut out: Option<String> = None;
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        match flag.as_str() {
            "--config" => config = it.next().map(PathBuf::from),
            "--out" => out = it.next().cloned(),
            _ => return usage(),
        }
    }
    let Some(config) = config else {
        return usage();
    };
    ExitCode::from(run_file(&config, cmd, out.as_deref()) as u8)
}

//! Drive the whole pipeline through the config-file interface, exactly as the
//! `finsler-lab` binary does.
//!
//! Run with: cargo run --release --example pipeline_cli

use finsler_lab::config::parse_config;
use finsler_lab::driver::{run, Subcommand};

const CONFIG: &str = r#"
[domain]
l1 = 4.0
l2 = 4.0
n1 = 32
n2 = 32

[metric]
family = randers
b1 = 0.2 0.1 1 1
b2 = 0.0

[solver]
a = -0.5
b = 0.0
t_end = 0.4
snapshots = 0.05 0.2 0.4
u0 = fourier 2.0 0.5 1 1

[checks]
beta = 1.5
n_eff = 4.0
radius = 0.8
center = 2.0 2.0
harnack_pairs = 6

[output]
dir = out/pipeline_demo
"#;

fn main() {
    let cfg = parse_config(CONFIG).expect("config must validate");
    println!("config hash {:016x}", cfg.config_hash);
    for cmd in [Subcommand::Solve, Subcommand::CheckLiyau, Subcommand::CheckHarnack] {
        let code = run(&cfg, cmd, None);
        println!("-> exit code {code}\n");
    }
    println!("artifacts in out/pipeline_demo/");
}

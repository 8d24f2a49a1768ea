use clap::Parser;
use std::io::Write;
use superloc::cli::{run, Args};

fn main() {
    let args = Args::parse();
    let out = run(&args);
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}

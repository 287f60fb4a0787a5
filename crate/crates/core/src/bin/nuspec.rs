use std::io::Write;

use anyhow::Context;

fn main() -> anyhow::Result<()> {
    let code = nuspec::cli::run(std::env::args_os());
    std::io::stdout().flush().context("cannot flush stdout")?;
    std::process::exit(code);
}

use std::io;

use clap::Parser;

fn main() {
    let args = tql_cli::Args::parse();
    let code = tql_cli::run(args, &mut io::stdin().lock(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}

use clap::Parser;
use rickgen_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RICKGEN_LOG", "warn")).init();
    let code = run(Cli::parse());
    std::process::exit(code as i32);
}

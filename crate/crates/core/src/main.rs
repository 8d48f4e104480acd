use std::io::Write;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    joulebits::cli::init_threads();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = joulebits::cli::run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}

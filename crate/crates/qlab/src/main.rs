fn main() {
    let out = std::env::var(qlab::cli::OUT_ENV).ok();
    let code = qlab::cli::run(std::env::args_os(), out.as_deref(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}

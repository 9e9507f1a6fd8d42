fn main() {
    let code = cvent::cli::run(std::env::args_os());
    std::process::exit(code);
}

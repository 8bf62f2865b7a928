fn main() {
    std::process::exit(conformal::cli::run(std::env::args_os()));
}

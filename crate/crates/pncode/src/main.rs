fn main() {
    std::process::exit(pncode::cli::run(std::env::args_os()));
}

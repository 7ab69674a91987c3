fn main() {
    std::process::exit(mcf_cli::cli::main_with_args(std::env::args().collect()));
}

fn main() {
    std::process::exit(harmonic_trees::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(lattice_spectral::cli::main_with_args(std::env::args_os()));
}

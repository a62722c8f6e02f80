fn main() {
    std::process::exit(quench_krylov::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(orlicz_polytope::cli::main_with_args(std::env::args_os()));
}

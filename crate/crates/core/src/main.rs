fn main() {
    std::process::exit(seamcarve::cli::main_with_args(std::env::args_os()));
}

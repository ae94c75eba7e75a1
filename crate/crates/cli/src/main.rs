fn main() {
    std::process::exit(aavqe_cli::run_with_args(std::env::args_os()));
}

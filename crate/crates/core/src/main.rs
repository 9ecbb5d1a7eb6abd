fn main() {
    std::process::exit(acan::cli::run_from_args(std::env::args_os()));
}

fn main() {
    std::process::exit(periodic_nls::cli::run_cli(std::env::args_os()));
}

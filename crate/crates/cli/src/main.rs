fn main() {
    std::process::exit(bdry_fronts_cli::run_cli(std::env::args_os()));
}

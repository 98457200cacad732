fn main() {
    std::process::exit(iceemd_de::cli::run_cli(std::env::args_os()));
}

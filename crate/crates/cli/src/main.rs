fn main() {
    std::process::exit(dcx_cli::run(std::env::args_os()));
}

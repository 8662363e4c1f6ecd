fn main() {
    std::process::exit(sos_approx_cli::run(std::env::args_os()));
}

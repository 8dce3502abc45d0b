fn main() {
    std::process::exit(probeforge::cli::main_with_args(std::env::args_os()));
}

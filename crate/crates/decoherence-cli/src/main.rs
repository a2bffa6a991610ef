fn main() {
    std::process::exit(decoherence_cli::main_with_args(std::env::args_os()));
}

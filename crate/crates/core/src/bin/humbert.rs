fn main() {
    std::process::exit(humbert_core::cli::main_with_args(std::env::args_os()));
}

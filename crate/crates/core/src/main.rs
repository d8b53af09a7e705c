fn main() {
    std::process::exit(fpp_core::cli::main_with_args(std::env::args_os()));
}

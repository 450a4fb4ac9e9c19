fn main() {
    std::process::exit(schwarzian::cli::main_with_args(std::env::args_os()));
}

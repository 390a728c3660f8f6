fn main() {
    std::process::exit(nmqsd::cli::main_with_args(std::env::args_os()));
}

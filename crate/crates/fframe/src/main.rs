fn main() {
    std::process::exit(fframe::cli::main_with_args(std::env::args_os()));
}

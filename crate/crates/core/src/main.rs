fn main() {
    std::process::exit(charclass::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(lmrobust::cli::main_with_args(std::env::args_os()));
}

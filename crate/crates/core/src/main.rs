fn main() {
    std::process::exit(kstorus::cli::main_with_args(std::env::args_os().skip(1)));
}

fn main() {
    std::process::exit(chinpaint::cli::main_with_args(std::env::args().skip(1)));
}

fn main() {
    std::process::exit(hybrid_biot::cli::run(std::env::args_os()));
}

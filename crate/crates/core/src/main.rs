fn main() {
    std::process::exit(lsat_core::cli::run(std::env::args_os()));
}

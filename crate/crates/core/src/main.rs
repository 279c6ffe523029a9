fn main() {
    std::process::exit(fem_errbal::cli::run(std::env::args().collect()));
}

fn main() {
    std::process::exit(cmot::cli::cli_main(std::env::args().collect()));
}

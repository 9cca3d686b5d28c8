fn main() {
    std::process::exit(trapspan::cli::run());
}

fn main() {
    std::process::exit(xychain::cli::run());
}

fn main() {
    std::process::exit(distmm::cli::run());
}

fn main() {
    std::process::exit(sdmc::cli::run());
}

fn main() {
    std::process::exit(lcor::cli::run());
}

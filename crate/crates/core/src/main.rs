fn main() {
    std::process::exit(convbounds::cli::run());
}

fn main() {
    std::process::exit(droidscan::cli::run());
}

fn main() {
    std::process::exit(godunf::cli::run(std::env::args()));
}

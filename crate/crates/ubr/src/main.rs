fn main() {
    std::process::exit(ubr::cli::main());
}

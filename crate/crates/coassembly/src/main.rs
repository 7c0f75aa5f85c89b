fn main() {
    std::process::exit(coassembly::cli::dispatch(std::env::args()));
}

fn main() {
    std::process::exit(bclique::cli::run(std::env::args_os()));
}

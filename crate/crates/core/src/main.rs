fn main() {
    std::process::exit(edgeflow::cli::run(std::env::args_os()));
}

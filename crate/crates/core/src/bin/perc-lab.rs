fn main() {
    std::process::exit(perclab::cli::run(std::env::args_os()));
}

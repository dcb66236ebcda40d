fn main() {
    std::process::exit(signlab::cli::run(std::env::args_os()));
}

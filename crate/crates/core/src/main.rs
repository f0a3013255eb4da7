fn main() {
    std::process::exit(fingergeo::cli::run(std::env::args_os()));
}

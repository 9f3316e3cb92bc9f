fn main() {
    std::process::exit(seamcheck::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(cod::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(softforge::cli::run_from(std::env::args_os()));
}

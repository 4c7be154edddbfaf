fn main() {
    std::process::exit(zakharov::cli::run(std::env::args_os()));
}

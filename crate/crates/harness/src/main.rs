fn main() {
    std::process::exit(ritz_lab::cli::run(std::env::args_os()));
}

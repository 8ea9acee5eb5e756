fn main() {
    std::process::exit(pdit_core::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(sparsecomm_cli::run(std::env::args_os()));
}

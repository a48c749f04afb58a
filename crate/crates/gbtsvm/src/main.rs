fn main() {
    std::process::exit(gbtsvm::cli::run(std::env::args_os()));
}

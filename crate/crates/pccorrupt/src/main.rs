fn main() {
    std::process::exit(pccorrupt::cli::run(std::env::args_os()));
}

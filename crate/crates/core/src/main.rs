fn main() {
    std::process::exit(logitnets::cli::run(std::env::args_os()));
}

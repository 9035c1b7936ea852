fn main() {
    std::process::exit(substrate::cli::run(std::env::args_os()));
}

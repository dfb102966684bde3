fn main() {
    std::process::exit(contagion::cli::run(std::env::args_os()));
}

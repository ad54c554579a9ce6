fn main() {
    std::process::exit(vext::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(fishsim::cli::run(std::env::args_os()));
}

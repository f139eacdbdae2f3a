fn main() {
    std::process::exit(mrc::cli::run(std::env::args_os()));
}

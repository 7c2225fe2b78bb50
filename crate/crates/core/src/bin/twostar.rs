fn main() {
    std::process::exit(twostar::cli::run(std::env::args_os()));
}

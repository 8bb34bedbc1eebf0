fn main() {
    std::process::exit(sdcrk::cli::run(std::env::args_os()));
}

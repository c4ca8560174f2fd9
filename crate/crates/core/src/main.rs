fn main() {
    std::process::exit(coarsekit::cli::run(std::env::args_os()));
}

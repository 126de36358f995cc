fn main() {
    std::process::exit(segrange::bench::cli::run(std::env::args_os()));
}

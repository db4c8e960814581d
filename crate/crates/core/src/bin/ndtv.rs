fn main() {
    std::process::exit(ndtv::cli::run(std::env::args_os()));
}

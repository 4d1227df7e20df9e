fn main() {
    std::process::exit(csdim::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(fermicull::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(neckstack::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(rankscatter::cli::run(std::env::args_os()));
}

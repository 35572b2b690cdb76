fn main() {
    std::process::exit(revchain_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(vulnrank_cli::run(std::env::args_os()));
}

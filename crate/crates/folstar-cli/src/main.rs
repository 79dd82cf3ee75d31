fn main() {
    std::process::exit(folstar_cli::run(std::env::args_os()));
}

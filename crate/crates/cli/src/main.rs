fn main() {
    std::process::exit(ouvqa_cli::run(std::env::args_os()));
}

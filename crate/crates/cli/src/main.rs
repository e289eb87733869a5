fn main() {
    std::process::exit(repurpose_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(chaoscope_cli::run(std::env::args_os()));
}

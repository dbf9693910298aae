fn main() {
    std::process::exit(timecnn_cli::run(std::env::args_os()));
}

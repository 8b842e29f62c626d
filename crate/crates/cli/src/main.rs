fn main() {
    std::process::exit(spindle_cli::run(std::env::args_os()));
}

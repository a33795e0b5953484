fn main() {
    std::process::exit(radar_sg::cli::main_with_args(std::env::args_os()));
}

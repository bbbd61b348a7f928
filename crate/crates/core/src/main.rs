fn main() {
    std::process::exit(pirnn_uav::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(thermocast::cli::run(std::env::args_os()));
}

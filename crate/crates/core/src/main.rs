fn main() {
    env_logger::init();
    std::process::exit(vfa::cli::run());
}

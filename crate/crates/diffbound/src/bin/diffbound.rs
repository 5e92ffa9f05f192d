fn main() {
    std::process::exit(diffbound::cli::run(std::env::args_os()));
}

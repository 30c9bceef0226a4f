fn main() {
    std::process::exit(agrisynth::cli::run(std::env::args_os()));
}

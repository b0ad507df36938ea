fn main() {
    std::process::exit(deformsynth::cli::run(std::env::args_os()));
}

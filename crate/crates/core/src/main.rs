fn main() {
    std::process::exit(memsynth::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(squeezelink::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(namelink::cli::run(std::env::args_os()));
}

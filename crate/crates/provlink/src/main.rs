fn main() {
    std::process::exit(provlink::cli::main(std::env::args_os()));
}

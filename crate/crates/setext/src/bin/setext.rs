fn main() {
    std::process::exit(setext::cli::main_with(std::env::args_os()));
}

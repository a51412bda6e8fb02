fn main() {
    std::process::exit(adgrowth::cli::main_with(std::env::args_os()));
}

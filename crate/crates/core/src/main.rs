fn main() {
    std::process::exit(cutofflab::cli::main_entry(std::env::args_os()));
}

fn main() {
    std::process::exit(ghlab::cli::main_with(std::env::args_os()));
}

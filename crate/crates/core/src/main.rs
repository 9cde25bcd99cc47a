fn main() {
    std::process::exit(gridrisk::cli::main_with_args(std::env::args_os()));
}

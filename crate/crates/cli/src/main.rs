fn main() {
    std::process::exit(filesafe_cli::main_with_args(std::env::args_os()));
}

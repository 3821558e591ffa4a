fn main() {
    std::process::exit(branchsum_cli::main_with_args(std::env::args_os()));
}

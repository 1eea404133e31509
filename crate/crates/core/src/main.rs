fn main() {
    std::process::exit(condldp::cli::main_with_args(std::env::args_os()));
}

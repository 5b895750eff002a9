fn main() {
    let code = deepweight_cli::run_command(std::env::args_os());
    std::process::exit(code);
}

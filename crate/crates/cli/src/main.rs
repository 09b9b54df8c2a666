fn main() {
    std::process::exit(btdiv_cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(lspstego::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(wqisa::cli::cli_main(std::env::args_os()));
}

fn main() {
    std::process::exit(ncbandit::cli::cli_main(std::env::args_os()));
}

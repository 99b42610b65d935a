fn main() {
    std::process::exit(wsp_cli::run(std::env::args_os()));
}

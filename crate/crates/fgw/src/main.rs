fn main() {
    std::process::exit(fgw::cli::run(std::env::args_os()));
}

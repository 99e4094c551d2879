fn main() {
    std::process::exit(sizebias_lab::cli::parse_and_dispatch(std::env::args_os()));
}

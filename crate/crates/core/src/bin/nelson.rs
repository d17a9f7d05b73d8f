fn main() {
    std::process::exit(nelson_relax::cli::parse_and_dispatch(std::env::args_os()));
}

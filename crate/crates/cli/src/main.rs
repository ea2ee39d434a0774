fn main() {
    std::process::exit(spdc_cli::parse_and_dispatch(std::env::args_os()));
}

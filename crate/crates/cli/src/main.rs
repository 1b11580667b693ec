fn main() {
    std::process::exit(kscale_cli::dispatch(std::env::args_os()));
}

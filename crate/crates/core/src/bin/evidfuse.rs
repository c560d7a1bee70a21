fn main() {
    std::process::exit(evidfuse::cli::dispatch(std::env::args_os()));
}

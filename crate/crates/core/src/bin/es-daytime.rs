fn main() {
    std::process::exit(es_daytime::cli::main_with_args(std::env::args_os()));
}

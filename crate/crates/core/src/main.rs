fn main() {
    std::process::exit(mvnorm_pairs::cli::main_with_args(std::env::args_os()));
}

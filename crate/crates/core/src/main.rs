fn main() {
    std::process::exit(relangle::cli::main_with_args(std::env::args_os()));
}

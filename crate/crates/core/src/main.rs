fn main() {
    std::process::exit(sparseweak::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(adelic_baker::cli::run(std::env::args_os()));
}

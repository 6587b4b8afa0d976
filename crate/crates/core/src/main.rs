fn main() {
    std::process::exit(attrcons::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(freeconvex::cli::run(std::env::args_os()));
}

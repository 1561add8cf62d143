fn main() {
    std::process::exit(leoqnet::cli::run(std::env::args_os()));
}

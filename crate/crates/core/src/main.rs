fn main() {
    std::process::exit(nilseq::cli::run(std::env::args_os()));
}

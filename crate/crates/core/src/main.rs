fn main() {
    std::process::exit(sineprobe::cli::main(std::env::args_os()));
}

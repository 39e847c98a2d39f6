fn main() {
    std::process::exit(qdisc::cli::run(std::env::args_os()));
}

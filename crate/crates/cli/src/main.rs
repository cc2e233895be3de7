fn main() {
    std::process::exit(noma_lab_cli::run(std::env::args_os()));
}

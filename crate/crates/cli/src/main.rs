fn main() {
    std::process::exit(dtunnel::run(std::env::args_os()));
}

fn main() {
    std::process::exit(shiftsim::run(std::env::args_os()));
}

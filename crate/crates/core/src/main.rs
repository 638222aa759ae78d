fn main() {
    std::process::exit(laplace_kinetics::cli::run(std::env::args_os()));
}

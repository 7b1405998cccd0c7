fn main() {
    let args: Vec<String> = std::env::args().collect();
    let status = oval_lab::cli::run(&args);
    std::process::exit(status);
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = toag::cli::run(&args, &mut std::io::stdout().lock());
    std::process::exit(code);
}

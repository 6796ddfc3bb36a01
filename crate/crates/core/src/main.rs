use std::io::Write;

fn main() {
    let (code, out, err) = kneading::cli::main_with_args(std::env::args_os());
    print!("{out}");
    if !err.is_empty() {
        eprint!("{err}");
        if !err.ends_with('\n') {
            eprintln!();
        }
    }
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}

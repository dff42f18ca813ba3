fn main() -> std::process::ExitCode {
    mlfd::cli::main_with_args(std::env::args_os())
}

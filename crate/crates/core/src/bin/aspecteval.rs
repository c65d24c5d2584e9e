fn main() -> std::process::ExitCode {
    aspect_eval::cli::main_with_args(std::env::args_os())
}

fn main() -> std::process::ExitCode {
    ionherald::cli::main()
}

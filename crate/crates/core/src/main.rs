fn main() -> std::process::ExitCode {
    tdesign::cli::main()
}

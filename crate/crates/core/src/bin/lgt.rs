fn main() -> std::process::ExitCode {
    lgtables::cli::main()
}

fn main() -> std::process::ExitCode {
    dirac_cavity::cli::run()
}

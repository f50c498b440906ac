fn main() {
    // Rust starts with SIGPIPE ignored, which turns writes into EPIPE
    // errors that println! panics on; restore the conventional silent
    // exit so piping into `head` and friends behaves.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(synchrony_lab::cli::run());
}

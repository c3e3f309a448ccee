fn main() {
    // Dying quietly on a closed pipe beats a panic from println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(lattc::cli::run(std::env::args().collect()));
}

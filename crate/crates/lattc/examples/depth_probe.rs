fn main() {
    let handle = std::thread::Builder::new()
        .stack_size(2 * 1024 * 1024)
        .spawn(|| {
            for n in [1000usize, 100_000] {
                let deep = format!("def x : Nat := {}zero{}", "(".repeat(n), ")".repeat(n));
                let r = lattc::syntax::parse_module(&deep);
                println!("n={n}: {:?}", r.as_ref().map(|_| "ok").map_err(|e| e.to_string()));
            }
        })
        .unwrap();
    handle.join().unwrap();
}

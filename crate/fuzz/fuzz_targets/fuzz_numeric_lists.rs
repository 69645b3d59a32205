#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = gossip_mean_cli::config::parse_u64_list(text);
    let _ = gossip_mean_cli::config::parse_f64_list(text);
});

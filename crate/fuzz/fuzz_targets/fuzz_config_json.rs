#![no_main]

use libfuzzer_sys::fuzz_target;

// Config files are untrusted input; parsing must never panic, and a parsed
// config must survive a serialize/parse round trip.
fuzz_target!(|data: &[u8]| {
    if let Ok(config) = gossip_mean_cli::config::parse_config_file(data) {
        let text = serde_json::to_vec(&config).expect("valid configs serialize");
        let back = gossip_mean_cli::config::parse_config_file(&text)
            .expect("serialized config parses back");
        assert_eq!(back, config);
    }
});

// SPDX-License-Identifier: Apache-2.0

//! Embedded experiment documents for the published parameter sets.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig1b", include_str!("../presets/fig1b.json")),
    ("fig1c", include_str!("../presets/fig1c.json")),
    (
        "fig2-initial-states",
        include_str!("../presets/fig2-initial-states.json"),
    ),
    (
        "fig2-excitation-rates",
        include_str!("../presets/fig2-excitation-rates.json"),
    ),
    ("fig3", include_str!("../presets/fig3.json")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, doc)| *doc)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn every_preset_parses_and_resolves() {
        for (name, doc) in PRESETS {
            let cfg = parse_config(doc, name).unwrap();
            assert_eq!(cfg.name, *name);
            cfg.resolved().unwrap();
        }
    }
}

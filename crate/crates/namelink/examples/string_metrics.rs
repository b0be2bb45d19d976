//! Scores a few company-name pairs with every similarity measure.
//!
//! cargo run --example string_metrics -- "Intesa Sanpaolo S.p.A." "Intesa San Paolo bank"

use namelink::metrics::{feature_vector, MetricKind};
use namelink::text::{clean, CleanMode};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let pairs: Vec<(String, String)> = if args.len() == 2 {
        vec![(args[0].clone(), args[1].clone())]
    } else {
        [
            ("Intesa Sanpaolo S.p.A.", "Intesa San Paolo bank"),
            ("ACME SPA", "ACME SRL"),
            ("Renovare Energy Farm SRL", "REF SRL"),
            ("Fuzzy Wuzzy Bear", "Bear Fuzzy"),
            ("KITTEN", "SITTING"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
    };
    for (a, b) in pairs {
        let ca = clean(&a, CleanMode::Classic);
        let cb = clean(&b, CleanMode::Classic);
        println!("{a:?} vs {b:?}  (cleaned: {:?} / {:?})", ca.as_str(), cb.as_str());
        let f = feature_vector(&a, &b);
        for m in MetricKind::ALL {
            println!("  {:16} {:.4}", m.name(), f.score(m));
        }
        println!("  lengths: chars {}/{} words {}/{}\n", f.len_chars_a, f.len_chars_b, f.len_words_a, f.len_words_b);
    }
}

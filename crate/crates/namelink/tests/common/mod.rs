//! Naive reference implementations used as test oracles.
#![allow(dead_code)]

pub mod gradcheck;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Full `(m+1) x (n+1)` edit-distance table with a configurable substitution cost.
pub fn edit_table(a: &str, b: &str, sub_cost: usize) -> Vec<Vec<usize>> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = if a[i - 1] == b[j - 1] { 0 } else { sub_cost };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
        }
    }
    d
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    *edit_table(a, b, 1).last().unwrap().last().unwrap()
}

pub fn indel(a: &str, b: &str) -> usize {
    *edit_table(a, b, 2).last().unwrap().last().unwrap()
}

pub fn indel_ratio(a: &str, b: &str) -> f64 {
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        1.0
    } else {
        1.0 - indel(a, b) as f64 / total as f64
    }
}

/// Jaro by scanning all of `b` for every character of `a` and testing the window distance.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let w = (a.len().max(b.len()) / 2) as i64 - 1;
    let w = w.max(0);
    let mut used = vec![false; b.len()];
    let mut a_flags = vec![false; a.len()];
    for i in 0..a.len() {
        for j in 0..b.len() {
            if (i as i64 - j as i64).abs() <= w && !used[j] && a[i] == b[j] {
                used[j] = true;
                a_flags[i] = true;
                break;
            }
        }
    }
    let ma: Vec<char> = (0..a.len()).filter(|&i| a_flags[i]).map(|i| a[i]).collect();
    let mb: Vec<char> = (0..b.len()).filter(|&j| used[j]).map(|j| b[j]).collect();
    let m = ma.len();
    if m == 0 {
        return 0.0;
    }
    let half = ma.iter().zip(&mb).filter(|(x, y)| x != y).count();
    let t = half as f64 / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

pub fn jaro_winkler(a: &str, b: &str, p: f64, lmax: usize) -> f64 {
    let j = jaro(a, b);
    let mut l = 0;
    let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    while l < lmax && l < ac.len() && l < bc.len() && ac[l] == bc[l] {
        l += 1;
    }
    j + l as f64 * p * (1.0 - j)
}

fn words(s: &str) -> Vec<String> {
    let mut w: Vec<String> = s.split(' ').filter(|t| !t.is_empty()).map(String::from).collect();
    w.sort();
    w.dedup();
    w
}

pub fn jaccard(a: &str, b: &str) -> f64 {
    let (wa, wb) = (words(a), words(b));
    let inter = wa.iter().filter(|w| wb.contains(w)).count();
    let union = wa.len() + wb.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Token Set Ratio in five literal steps.
pub fn token_set_ratio(a: &str, b: &str) -> f64 {
    // 1. word sets
    let (wa, wb) = (words(a), words(b));
    if wa.is_empty() && wb.is_empty() {
        return 1.0;
    }
    if wa.is_empty() || wb.is_empty() {
        return 0.0;
    }
    // 2. sorted intersection
    let inter: Vec<String> = wa.iter().filter(|w| wb.contains(w)).cloned().collect();
    // 3. sorted differences
    let da: Vec<String> = wa.iter().filter(|w| !wb.contains(w)).cloned().collect();
    let db: Vec<String> = wb.iter().filter(|w| !wa.contains(w)).cloned().collect();
    // 4. the three strings
    let s_ab = inter.join(" ");
    let c_a = inter.iter().chain(&da).cloned().collect::<Vec<_>>().join(" ");
    let c_b = inter.iter().chain(&db).cloned().collect::<Vec<_>>().join(" ");
    // 5. best pairwise ratio
    indel_ratio(&s_ab, &c_a).max(indel_ratio(&s_ab, &c_b)).max(indel_ratio(&c_a, &c_b))
}

/// Random string of length `0..=max_len` over a small alphabet that includes spaces.
pub fn random_string(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    const CHARS: &[char] = &['A', 'B', 'C', 'D', 'E', ' ', ' ', 'X'];
    let n = rng.random_range(0..=max_len);
    (0..n).map(|_| CHARS[rng.random_range(0..CHARS.len())]).collect()
}

/// BA, F1, MCC by counting samples one at a time.
pub fn counting_metrics(yhat: &[f64], y: &[u8], threshold: f64) -> (u64, u64, u64, u64, f64, f64, f64) {
    let mut c = [[0u64; 2]; 2];
    for (p, t) in yhat.iter().zip(y) {
        let pred = usize::from(*p >= threshold);
        c[*t as usize][pred] += 1;
    }
    let (tn, fp, fn_, tp) = (c[0][0], c[0][1], c[1][0], c[1][1]);
    let tpr = tp as f64 / (tp + fn_) as f64;
    let tnr = tn as f64 / (tn + fp) as f64;
    let ba = match (tp + fn_ > 0, tn + fp > 0) {
        (true, true) => 0.5 * (tpr + tnr),
        (true, false) => tpr,
        (false, true) => tnr,
        _ => 0.0,
    };
    let f1 = if 2 * tp + fp + fn_ == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
    let d = ((tp + fp) * (tp + fn_)) as f64 * ((tn + fp) * (tn + fn_)) as f64;
    let mcc = if d == 0.0 { 0.0 } else { (tp as f64 * tn as f64 - fp as f64 * fn_ as f64) / d.sqrt() };
    (tp, tn, fp, fn_, ba, f1, mcc)
}

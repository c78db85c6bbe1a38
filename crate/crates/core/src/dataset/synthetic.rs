//! Schema-conformant synthetic stand-ins for the two student datasets.
//!
//! The tables have the same header, cell vocabularies and value ranges as
//! the UCI files, with a latent "ability" driving grades and outcomes so
//! that the classifiers have something to learn. They exist for tests,
//! examples and dry runs when the real files are not on disk. Their metric
//! values say nothing about the real datasets.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::schema::FeatureSchema;
use crate::dataset::table::RawTable;
use crate::seed;

/// Row count of the mathematics Student Performance file.
pub const STUDENT_PERFORMANCE_ROWS: usize = 395;
/// Row count of the dropout / academic success file.
pub const STUDENT_DROPOUT_ROWS: usize = 4424;

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, 1.0).unwrap().sample(rng)
}

fn clamp_round(v: f64, lo: i64, hi: i64) -> i64 {
    (v.round() as i64).clamp(lo, hi)
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[&'a str], weights: &[f64]) -> &'a str {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (opt, w) in options.iter().zip(weights) {
        if u < *w {
            return opt;
        }
        u -= w;
    }
    options[options.len() - 1]
}

fn yes_no(rng: &mut ChaCha8Rng, p_yes: f64) -> &'static str {
    if rng.random_bool(p_yes.clamp(0.0, 1.0)) {
        "yes"
    } else {
        "no"
    }
}

/// Raw table with the Student Performance header; G3 holds integer
/// grades 0..=20 (binarize before encoding).
pub fn student_performance_table(n_rows: usize, seed: u64) -> RawTable {
    let schema = FeatureSchema::student_performance();
    let header: Vec<String> = schema.column_names().into_iter().map(String::from).collect();
    let mut rng = seed::rng(seed);
    let jobs = ["at_home", "health", "other", "services", "teacher"];
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let ability = gauss(&mut rng);
        let g1 = clamp_round(10.9 + 3.2 * ability + 1.1 * gauss(&mut rng), 3, 19);
        let g2 = clamp_round(g1 as f64 + 0.2 + 1.3 * gauss(&mut rng), 0, 19);
        let mut g3 = clamp_round(g2 as f64 + 0.3 + 1.1 * gauss(&mut rng), 0, 20);
        // the real file has a cluster of zero final grades (students who left)
        if rng.random_bool(0.06) {
            g3 = 0;
        }
        let failures = clamp_round(0.2 - 0.7 * ability + 0.6 * gauss(&mut rng), 0, 3);
        let medu = clamp_round(2.7 + 0.4 * ability + 1.0 * gauss(&mut rng), 0, 4);
        let fedu = clamp_round(medu as f64 - 0.2 + 0.9 * gauss(&mut rng), 0, 4);
        let cells: Vec<String> = vec![
            pick(&mut rng, &["GP", "MS"], &[0.88, 0.12]).into(),
            pick(&mut rng, &["F", "M"], &[0.53, 0.47]).into(),
            clamp_round(16.7 - 0.5 * ability + 1.2 * gauss(&mut rng), 15, 22).to_string(),
            pick(&mut rng, &["R", "U"], &[0.22, 0.78]).into(),
            pick(&mut rng, &["GT3", "LE3"], &[0.71, 0.29]).into(),
            pick(&mut rng, &["A", "T"], &[0.1, 0.9]).into(),
            medu.to_string(),
            fedu.to_string(),
            pick(&mut rng, &jobs, &[0.15, 0.09, 0.36, 0.26, 0.14]).into(),
            pick(&mut rng, &jobs, &[0.05, 0.05, 0.55, 0.28, 0.07]).into(),
            pick(&mut rng, &["course", "home", "other", "reputation"], &[0.37, 0.28, 0.09, 0.26]).into(),
            pick(&mut rng, &["father", "mother", "other"], &[0.23, 0.69, 0.08]).into(),
            clamp_round(1.4 + 0.7 * gauss(&mut rng), 1, 4).to_string(),
            clamp_round(2.0 + 0.2 * ability + 0.8 * gauss(&mut rng), 1, 4).to_string(),
            failures.to_string(),
            yes_no(&mut rng, 0.13).into(),
            yes_no(&mut rng, 0.61).into(),
            yes_no(&mut rng, 0.46).into(),
            yes_no(&mut rng, 0.51).into(),
            yes_no(&mut rng, 0.79).into(),
            yes_no(&mut rng, 0.95 + 0.03 * ability).into(),
            yes_no(&mut rng, 0.83).into(),
            yes_no(&mut rng, 0.33).into(),
            clamp_round(3.9 + 0.9 * gauss(&mut rng), 1, 5).to_string(),
            clamp_round(3.2 + 1.0 * gauss(&mut rng), 1, 5).to_string(),
            clamp_round(3.1 + 1.1 * gauss(&mut rng), 1, 5).to_string(),
            clamp_round(1.5 + 0.9 * gauss(&mut rng), 1, 5).to_string(),
            clamp_round(2.3 + 1.3 * gauss(&mut rng), 1, 5).to_string(),
            clamp_round(3.6 + 1.4 * gauss(&mut rng), 1, 5).to_string(),
            clamp_round((5.7 * gauss(&mut rng).abs() + 8.0 * gauss(&mut rng).powi(2)) * 0.6, 0, 75)
                .to_string(),
            g1.to_string(),
            g2.to_string(),
            g3.to_string(),
        ];
        rows.push(cells);
    }
    RawTable::new(header, rows).expect("generator emits a full rectangle")
}

/// Raw table with the dropout dataset header and three outcome classes in
/// the file's proportions (1421 Dropout, 794 Enrolled, 2209 Graduate per
/// 4424 rows).
pub fn student_dropout_table(n_rows: usize, seed: u64) -> RawTable {
    let schema = FeatureSchema::student_dropout();
    let header: Vec<String> = schema.column_names().into_iter().map(String::from).collect();
    let mut rng = seed::rng(seed);

    let n_dropout = (n_rows as f64 * 1421.0 / 4424.0).round() as usize;
    let n_enrolled = (n_rows as f64 * 794.0 / 4424.0).round() as usize;
    let mut outcomes: Vec<usize> = std::iter::repeat_n(0, n_dropout)
        .chain(std::iter::repeat_n(1, n_enrolled))
        .chain(std::iter::repeat_n(2, n_rows.saturating_sub(n_dropout + n_enrolled)))
        .take(n_rows)
        .collect();
    outcomes.shuffle(&mut rng);
    let classes = ["Dropout", "Enrolled", "Graduate"];

    let mut rows = Vec::with_capacity(n_rows);
    for &outcome in &outcomes {
        // progress: low for dropouts, middling for enrolled, high for graduates
        let centre = [-0.9, 0.0, 0.75][outcome];
        let progress = centre + 0.85 * gauss(&mut rng);
        let engaged = progress + 0.5 * gauss(&mut rng);
        let finance = [0.55, 0.8, 0.92][outcome] + 0.1 * gauss(&mut rng);

        let enrolled1 = clamp_round(6.0 + 1.8 * gauss(&mut rng), 0, 26);
        let enrolled2 = clamp_round(enrolled1 as f64 + 0.8 * gauss(&mut rng), 0, 23);
        let approved = |enrolled: i64, p: f64, rng: &mut ChaCha8Rng| {
            let rate = 1.0 / (1.0 + (-(1.1 * p + 0.3 * gauss(rng))).exp());
            clamp_round(enrolled as f64 * rate * 1.05, 0, enrolled)
        };
        let approved1 = approved(enrolled1, progress + 0.6, &mut rng);
        let approved2 = approved(enrolled2, engaged + 0.6, &mut rng);
        let grade = |approved: i64, p: f64, rng: &mut ChaCha8Rng| {
            if approved == 0 {
                0.0
            } else {
                (11.5 + 1.2 * p + 1.2 * gauss(rng)).clamp(10.0, 18.9)
            }
        };
        let grade1 = grade(approved1, progress, &mut rng);
        let grade2 = grade(approved2, engaged, &mut rng);
        let evals1 = enrolled1 + clamp_round(2.0 + 2.5 * gauss(&mut rng).abs(), 0, 20);
        let evals2 = enrolled2 + clamp_round(2.0 + 2.5 * gauss(&mut rng).abs(), 0, 20);
        let age = clamp_round(19.5 + (4.5 * gauss(&mut rng)).abs() - 2.0 * progress.min(0.0), 17, 70);
        let admission = (127.0 + 7.0 * progress + 12.0 * gauss(&mut rng)).clamp(95.0, 190.0);

        let cells: Vec<String> = vec![
            pick(&mut rng, &["1", "2", "4", "3", "5", "6"], &[0.89, 0.09, 0.02, 0.01, 0.006, 0.004]).into(),
            pick(&mut rng, &["1", "17", "39", "43", "44", "18", "7", "42"], &[0.39, 0.19, 0.18, 0.07, 0.05, 0.05, 0.04, 0.03])
                .into(),
            clamp_round(1.7 + 1.3 * gauss(&mut rng).abs(), 0, 9).to_string(),
            pick(
                &mut rng,
                &["9500", "9147", "9238", "9085", "9773", "9670", "9991", "9254", "9070", "171", "9003", "33"],
                &[0.17, 0.08, 0.08, 0.08, 0.08, 0.06, 0.06, 0.06, 0.05, 0.05, 0.05, 0.02],
            )
            .into(),
            pick(&mut rng, &["1", "0"], &[0.89, 0.11]).into(),
            pick(&mut rng, &["1", "39", "19", "3", "12", "40"], &[0.84, 0.05, 0.04, 0.03, 0.02, 0.02]).into(),
            format!("{:.1}", (132.6 + 13.0 * gauss(&mut rng)).clamp(95.0, 190.0)),
            pick(&mut rng, &["1", "41", "26", "6", "22"], &[0.975, 0.007, 0.006, 0.006, 0.006]).into(),
            pick(&mut rng, &["1", "19", "37", "38", "3", "34"], &[0.24, 0.21, 0.24, 0.12, 0.10, 0.09]).into(),
            pick(&mut rng, &["37", "19", "1", "38", "3", "34"], &[0.28, 0.22, 0.2, 0.14, 0.09, 0.07]).into(),
            pick(&mut rng, &["9", "4", "5", "3", "2", "7", "0", "90"], &[0.36, 0.18, 0.12, 0.08, 0.07, 0.06, 0.08, 0.05]).into(),
            pick(&mut rng, &["9", "7", "5", "4", "3", "8", "10", "6"], &[0.3, 0.15, 0.12, 0.1, 0.1, 0.1, 0.06, 0.07]).into(),
            format!("{admission:.1}"),
            pick(&mut rng, &["1", "0"], &[0.55, 0.45]).into(),
            pick(&mut rng, &["0", "1"], &[0.99, 0.01]).into(),
            (if rng.random_bool((1.0 - finance).clamp(0.02, 0.6) * 0.4) { "1" } else { "0" }).into(),
            (if rng.random_bool(finance.clamp(0.3, 0.99)) { "1" } else { "0" }).into(),
            pick(&mut rng, &["0", "1"], &[0.65, 0.35]).into(),
            (if rng.random_bool((0.15 + 0.12 * progress).clamp(0.02, 0.6)) { "1" } else { "0" }).into(),
            age.to_string(),
            pick(&mut rng, &["0", "1"], &[0.975, 0.025]).into(),
            clamp_round(1.2 * gauss(&mut rng).abs() - 0.4, 0, 20).to_string(),
            enrolled1.to_string(),
            evals1.to_string(),
            approved1.to_string(),
            format!("{grade1:.6}"),
            clamp_round(0.6 * gauss(&mut rng).abs() - 0.3, 0, 12).to_string(),
            clamp_round(1.1 * gauss(&mut rng).abs() - 0.4, 0, 19).to_string(),
            enrolled2.to_string(),
            evals2.to_string(),
            approved2.to_string(),
            format!("{grade2:.6}"),
            clamp_round(0.6 * gauss(&mut rng).abs() - 0.3, 0, 12).to_string(),
            format!("{:.1}", (11.6 + 2.6 * gauss(&mut rng)).clamp(7.6, 16.2)),
            format!("{:.1}", (1.2 + 1.4 * gauss(&mut rng)).clamp(-0.8, 3.7)),
            format!("{:.2}", (0.0 + 2.3 * gauss(&mut rng)).clamp(-4.06, 3.51)),
            classes[outcome].to_string(),
        ];
        rows.push(cells);
    }
    RawTable::new(header, rows).expect("generator emits a full rectangle")
}

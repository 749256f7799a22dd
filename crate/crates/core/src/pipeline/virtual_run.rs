//! The in-silico experiment: augment the canonical shots into train and
//! test sets at each noise setting, train the SVM-ECOC model with tuned
//! hyperparameters, and aggregate metrics over seeded repeats.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Aggregate, PipelineConfig, PipelineError, SearchStrategyKind};
use crate::augment::{build_training_dictionary, AugmentSettings, PostureDictionary};
use crate::classifier::{
    ecoc_predict, train_ecoc, tune_hyperparameters, RandomSearch, SearchStrategy, SurrogateSearch,
};
use crate::metrics::{accuracy, macro_f1};
use crate::seeds;
use crate::synth::canonical_postures;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatMetrics {
    pub repeat: usize,
    pub train_seed: u64,
    pub test_seed: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualCellReport {
    pub sigma_phi_sq: f64,
    pub sigma_theta_sq: f64,
    pub tuned_c: f64,
    pub tuned_gamma: f64,
    pub repeats: Vec<RepeatMetrics>,
    pub macro_f1: Aggregate,
    pub accuracy: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualRunReport {
    pub config: PipelineConfig,
    pub cells: Vec<VirtualCellReport>,
    /// Wall-clock time; the only non-deterministic field.
    pub timing_seconds: f64,
}

pub(super) fn make_strategy(kind: SearchStrategyKind, seed: u64) -> Box<dyn SearchStrategy> {
    match kind {
        SearchStrategyKind::Random => Box::new(RandomSearch::new(seed)),
        SearchStrategyKind::Surrogate => Box::new(SurrogateSearch::new(seed)),
    }
}

/// Derived augmentation settings for one cell/repeat, tagged by role so
/// train and test draws never share a stream.
fn cell_settings(
    config: &PipelineConfig,
    role: &str,
    cell: usize,
    repeat: usize,
    sigma: (f64, f64),
    count: usize,
) -> AugmentSettings {
    let index = (cell * config.repeats + repeat) as u64;
    AugmentSettings::new(
        sigma.0,
        sigma.1,
        count,
        seeds::derive(config.seed, role, index),
    )
    .expect("validated by config")
}

pub(super) fn tune_on_dictionary(
    config: &PipelineConfig,
    dict: &PostureDictionary,
    sigma: (f64, f64),
    cell: usize,
    train_count: usize,
) -> Result<(f64, f64), PipelineError> {
    let tune_count = config
        .search
        .subsample_per_class
        .unwrap_or(train_count)
        .min(train_count);
    // Same stream as repeat 0's training set, so the search sees a prefix
    // of the data the first model trains on.
    let settings = cell_settings(config, "virtual-train", cell, 0, sigma, tune_count);
    let tune_set = build_training_dictionary(dict, &settings);
    let mut strategy = make_strategy(
        config.search.strategy,
        seeds::derive(config.seed, "search-strategy", cell as u64),
    );
    let result = tune_hyperparameters(
        &tune_set,
        config.search.budget,
        strategy.as_mut(),
        &config.solver,
        seeds::derive(config.seed, "tune-split", cell as u64),
    )?;
    Ok((result.c, result.gamma))
}

/// Runs the full virtual protocol over the configured noise cells.
pub fn run_virtual(config: &PipelineConfig) -> Result<VirtualRunReport, PipelineError> {
    config.validate()?;
    let started = std::time::Instant::now();
    let set = canonical_postures(config.seed);
    let dict = set.dictionary()?;
    let cells = config.augmentation.cells();

    let mut cell_reports = Vec::with_capacity(cells.len());
    for (cell, sigma) in cells.iter().enumerate() {
        let (c, gamma) = tune_on_dictionary(config, &dict, *sigma, cell, config.virtual_train_count)?;

        let repeats: Result<Vec<RepeatMetrics>, PipelineError> = (0..config.repeats)
            .into_par_iter()
            .map(|repeat| {
                let train_settings = cell_settings(
                    config,
                    "virtual-train",
                    cell,
                    repeat,
                    *sigma,
                    config.virtual_train_count,
                );
                let test_settings = cell_settings(
                    config,
                    "virtual-test",
                    cell,
                    repeat,
                    *sigma,
                    config.virtual_test_count,
                );
                let train = build_training_dictionary(&dict, &train_settings);
                let test = build_training_dictionary(&dict, &test_settings);
                let model = train_ecoc(&train, c, gamma, &config.solver)?;
                let preds: Vec<usize> = test
                    .features
                    .iter()
                    .map(|row| ecoc_predict(&model, row).0)
                    .collect();
                Ok(RepeatMetrics {
                    repeat,
                    train_seed: train_settings.seed,
                    test_seed: test_settings.seed,
                    accuracy: accuracy(&preds, &test.labels)?,
                    macro_f1: macro_f1(&preds, &test.labels, dict.class_count()),
                })
            })
            .collect();
        let repeats = repeats?;

        let f1_values: Vec<f64> = repeats.iter().map(|r| r.macro_f1).collect();
        let acc_values: Vec<f64> = repeats.iter().map(|r| r.accuracy).collect();
        cell_reports.push(VirtualCellReport {
            sigma_phi_sq: sigma.0,
            sigma_theta_sq: sigma.1,
            tuned_c: c,
            tuned_gamma: gamma,
            repeats,
            macro_f1: Aggregate::from_values(&f1_values),
            accuracy: Aggregate::from_values(&acc_values),
        });
    }

    Ok(VirtualRunReport {
        config: config.clone(),
        cells: cell_reports,
        timing_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Long-format heat-map export, one row per grid cell.
pub fn virtual_heatmap_csv(report: &VirtualRunReport) -> String {
    let mut out =
        String::from("sigma_phi_sq,sigma_theta_sq,mean_macro_f1,std_macro_f1,mean_accuracy,std_accuracy\n");
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.sigma_phi_sq,
            cell.sigma_theta_sq,
            cell.macro_f1.mean,
            cell.macro_f1.std,
            cell.accuracy.mean,
            cell.accuracy.std
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::AugmentationPlan;

    fn quick_config() -> PipelineConfig {
        PipelineConfig {
            repeats: 2,
            virtual_train_count: 60,
            virtual_test_count: 20,
            search: crate::pipeline::SearchConfig {
                budget: 4,
                subsample_per_class: Some(40),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn low_noise_cell_classifies_well() {
        let report = run_virtual(&quick_config()).unwrap();
        assert_eq!(report.cells.len(), 1);
        let cell = &report.cells[0];
        assert_eq!(cell.repeats.len(), 2);
        assert!(
            cell.macro_f1.mean > 0.9,
            "low-noise macro F1 {}",
            cell.macro_f1.mean
        );
    }

    #[test]
    fn run_is_deterministic_modulo_timing() {
        let config = quick_config();
        let mut a = run_virtual(&config).unwrap();
        let mut b = run_virtual(&config).unwrap();
        a.timing_seconds = 0.0;
        b.timing_seconds = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn heatmap_csv_has_one_row_per_cell() {
        let mut config = quick_config();
        config.augmentation = AugmentationPlan::Single {
            sigma_phi_sq: 200.0,
            sigma_theta_sq: 100.0,
        };
        let report = run_virtual(&config).unwrap();
        let csv = virtual_heatmap_csv(&report);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("200,100,"));
    }
}

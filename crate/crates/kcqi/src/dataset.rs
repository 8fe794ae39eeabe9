//! CQI dataset generation over the (K, SNR) grid, labeling, splitting and
//! CSV persistence.
//!
//! One sample is a length-N CQI vector observed from a channel with a fixed
//! K and average SNR: the LoS phases are drawn once per vector, then every
//! epoch redraws the diffuse component, maps it to an effective SNR and
//! quantizes to a CQI. Each (k, snr, rep) tuple owns a derived substream so
//! generation order cannot affect the data.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::channel::{draw_epoch, tap_params, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::link::{delay_to_sample_index, effective_snr, quantize_cqi, subcarrier_snrs, DftBasis, LinkMapConfig};
use crate::rng::{substream, tag};
use crate::{CQI_MAX, K_MAX};

/// One labeled observation: a CQI vector with its K label and the average
/// SNR it was generated at.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cqi: Vec<u8>,
    pub k_label: u8,
    pub snr_db: f64,
}

impl Sample {
    pub fn new(cqi: Vec<u8>, k_label: u8, snr_db: f64) -> Result<Self> {
        if k_label > K_MAX {
            return Err(Error::invalid(format!("K label {k_label} out of range 0..={K_MAX}")));
        }
        if let Some(&bad) = cqi.iter().find(|&&c| c > CQI_MAX) {
            return Err(Error::invalid(format!("CQI value {bad} out of range 0..={CQI_MAX}")));
        }
        Ok(Self { cqi, k_label, snr_db })
    }
}

/// The generation grid: which K values and SNRs to simulate, how many
/// repetitions per pair, and the CQI-vector length.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationGrid {
    pub k_values: Vec<u8>,
    pub snr_db_values: Vec<f64>,
    pub reps: usize,
    pub n: usize,
}

impl GenerationGrid {
    /// Default experiment grid: K = 0..=10, SNR = 1..=25 dB in 1 dB steps,
    /// 10 repetitions per pair.
    pub fn with_n(n: usize) -> Self {
        Self {
            k_values: (0..=K_MAX).collect(),
            snr_db_values: (1..=25).map(f64::from).collect(),
            reps: 10,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() {
            return Err(Error::config("k_values", "must be non-empty"));
        }
        if let Some(&bad) = self.k_values.iter().find(|&&k| k > K_MAX) {
            return Err(Error::config("k_values", format!("{bad} out of range 0..={K_MAX}")));
        }
        if self.snr_db_values.is_empty() {
            return Err(Error::config("snr_db_values", "must be non-empty"));
        }
        if self.reps == 0 {
            return Err(Error::config("reps", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for GenerationGrid {
    fn default() -> Self {
        Self::with_n(500)
    }
}

/// A labeled corpus of equal-length CQI vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    n: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, n: usize) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.cqi.len() != n {
                return Err(Error::invalid(format!(
                    "sample {i}: CQI length {} does not match dataset n {n}",
                    s.cqi.len()
                )));
            }
        }
        Ok(Self { samples, n })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Generates one CQI vector: draws the LoS phases once, then runs `n`
/// epochs of draw → frequency response → subcarrier SNRs → effective SNR →
/// CQI.
pub fn generate_cqi_vector<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    k: u8,
    snr_db: f64,
    n: usize,
    config: &LinkMapConfig,
    rng: &mut R,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::invalid("CQI vector length must be at least 1"));
    }
    let delay_samples: Vec<usize> = pdp
        .delays_us()
        .iter()
        .map(|&d| delay_to_sample_index(d, config.sample_rate_hz()))
        .collect::<Result<_>>()?;
    if delay_samples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "tap delays collide on the sample grid; increase the sample rate",
        ));
    }
    let phases: Vec<f64> = (0..pdp.num_taps()).map(|_| rng.gen::<f64>() * TAU).collect();
    let taps = tap_params(pdp, f64::from(k), &phases)?;
    let basis = DftBasis::new(&delay_samples, config)?;

    let mut cqi = Vec::with_capacity(n);
    for _ in 0..n {
        let realization = draw_epoch(&taps, &delay_samples, rng)?;
        let h = basis.response(realization.taps())?;
        let snrs = subcarrier_snrs(&h, snr_db);
        let eff = effective_snr(&snrs, config.beta())?;
        cqi.push(quantize_cqi(eff, config.cqi_thresholds_db()));
    }
    Sample::new(cqi, k, snr_db)
}

/// Generates the full labeled dataset over the grid in canonical
/// (k, snr, rep) order. Every tuple draws from its own substream of
/// `master_seed`, so the result is independent of evaluation order.
pub fn generate_dataset(
    grid: &GenerationGrid,
    pdp: &PowerDelayProfile,
    config: &LinkMapConfig,
    master_seed: u64,
) -> Result<Dataset> {
    grid.validate()?;
    let mut jobs = Vec::with_capacity(grid.k_values.len() * grid.snr_db_values.len() * grid.reps);
    for &k in &grid.k_values {
        for (snr_idx, &snr_db) in grid.snr_db_values.iter().enumerate() {
            for rep in 0..grid.reps {
                jobs.push((k, snr_idx, snr_db, rep));
            }
        }
    }
    let samples: Vec<Sample> = jobs
        .into_par_iter()
        .map(|(k, snr_idx, snr_db, rep)| {
            let mut rng = sample_substream(master_seed, k, snr_idx, rep);
            generate_cqi_vector(pdp, k, snr_db, grid.n, config, &mut rng)
        })
        .collect::<Result<_>>()?;
    Dataset::new(samples, grid.n)
}

/// The substream owned by one (k, snr index, repetition) tuple.
pub fn sample_substream(
    master_seed: u64,
    k: u8,
    snr_idx: usize,
    rep: usize,
) -> rand_chacha::ChaCha8Rng {
    substream(
        master_seed,
        [tag::SAMPLE, (u64::from(k) << 32) | snr_idx as u64, rep as u64],
    )
}

/// Random split into train and test: a uniform permutation, with the first
/// `round(train_fraction · M)` samples going to train.
pub fn split<R: Rng + ?Sized>(
    dataset: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let m = dataset.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let n_train = ((train_fraction * m as f64).round() as usize).min(m);
    let train = order[..n_train]
        .iter()
        .map(|&i| dataset.samples[i].clone())
        .collect();
    let test = order[n_train..]
        .iter()
        .map(|&i| dataset.samples[i].clone())
        .collect();
    Ok((
        Dataset::new(train, dataset.n)?,
        Dataset::new(test, dataset.n)?,
    ))
}

/// One-hot encoding of a K label: 1 at position k, 0 elsewhere.
pub fn one_hot(k: u8) -> Result<[f64; crate::NUM_CLASSES]> {
    if k > K_MAX {
        return Err(Error::invalid(format!("K label {k} out of range 0..={K_MAX}")));
    }
    let mut v = [0.0; crate::NUM_CLASSES];
    v[k as usize] = 1.0;
    Ok(v)
}

/// Maps CQI values to classifier inputs with fixed anchors:
/// `x/7.5 − 1` sends 0..=15 to [−1, 1].
pub fn normalize_inputs(cqi: &[u8]) -> Result<Vec<f64>> {
    if let Some(&bad) = cqi.iter().find(|&&c| c > CQI_MAX) {
        return Err(Error::invalid(format!("CQI value {bad} out of range 0..={CQI_MAX}")));
    }
    Ok(cqi.iter().map(|&c| f64::from(c) / 7.5 - 1.0).collect())
}

fn header_columns(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("cqi_{i}")).collect();
    cols.push("k_label".to_string());
    cols.push("snr_db".to_string());
    cols
}

/// Writes the dataset as CSV: header `cqi_1,...,cqi_N,k_label,snr_db`,
/// one sample per row, LF line endings.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header_columns(dataset.n))?;
    for s in &dataset.samples {
        let mut record: Vec<String> = s.cqi.iter().map(|c| c.to_string()).collect();
        record.push(s.k_label.to_string());
        record.push(format!("{:?}", s.snr_db));
        w.write_record(record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(dataset, File::create(path)?)
}

/// Reads a dataset written by [`write_csv`], validating the header shape
/// and every value range.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() < 3 {
        return Err(Error::DataFormat(format!(
            "expected at least 3 columns, got {}",
            header.len()
        )));
    }
    let n = header.len() - 2;
    let expected = header_columns(n);
    for (got, want) in header.iter().zip(&expected) {
        if got != want {
            return Err(Error::DataFormat(format!(
                "unexpected column {got:?}, expected {want:?}"
            )));
        }
    }

    let mut samples = Vec::new();
    for (row_idx, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != n + 2 {
            return Err(Error::DataFormat(format!(
                "row {}: expected {} fields, got {}",
                row_idx + 1,
                n + 2,
                record.len()
            )));
        }
        let parse_err = |field: &str, value: &str| {
            Error::DataFormat(format!("row {}: bad {field} value {value:?}", row_idx + 1))
        };
        let mut cqi = Vec::with_capacity(n);
        for value in record.iter().take(n) {
            let c: u8 = value.parse().map_err(|_| parse_err("cqi", value))?;
            if c > CQI_MAX {
                return Err(parse_err("cqi", value));
            }
            cqi.push(c);
        }
        let k_raw = record.get(n).unwrap();
        let k_label: u8 = k_raw.parse().map_err(|_| parse_err("k_label", k_raw))?;
        if k_label > K_MAX {
            return Err(parse_err("k_label", k_raw));
        }
        let snr_raw = record.get(n + 1).unwrap();
        let snr_db: f64 = snr_raw.parse().map_err(|_| parse_err("snr_db", snr_raw))?;
        if !snr_db.is_finite() {
            return Err(parse_err("snr_db", snr_raw));
        }
        samples.push(Sample { cqi, k_label, snr_db });
    }
    Dataset::new(samples, n)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    read_csv(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PowerDelayProfile;
    use std::collections::HashMap;

    fn small_link_config() -> LinkMapConfig {
        // 64-point grid keeps unit tests quick; defaults elsewhere.
        LinkMapConfig::new(
            64,
            15.36e6,
            LinkMapConfig::symmetric_subcarriers(64, 24),
            0.5,
            crate::link::DEFAULT_CQI_THRESHOLDS_DB.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_vector_for_los_only_channel() {
        // Single tap at delay 0 with K as large as the integer grid allows
        // still fluctuates; force the deterministic case via a profile with
        // one tap and a direct high-K draw where the diffuse part is zero.
        let pdp = PowerDelayProfile::from_linear(&[0.0], &[1.0]).unwrap();
        let config = small_link_config();
        // k=10 with a single tap at delay 0 gives |H| fluctuating around 1;
        // determinism of the pipeline itself is the property to check here.
        let mut a = sample_substream(7, 10, 0, 0);
        let mut b = sample_substream(7, 10, 0, 0);
        let sa = generate_cqi_vector(&pdp, 10, 10.0, 32, &config, &mut a).unwrap();
        let sb = generate_cqi_vector(&pdp, 10, 10.0, 32, &config, &mut b).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn zero_diffuse_gives_constant_cqi() {
        use crate::channel::{draw_epoch, RiceanTapParams};
        use crate::link::{quantize_cqi, subcarrier_snrs, DftBasis};

        // Direct tap injection: one pure-LoS tap, so every epoch repeats.
        let taps = [RiceanTapParams {
            power: 1.0,
            los_amplitude: 1.0,
            los_phase: 0.3,
            diffuse_variance: 0.0,
        }];
        let config = small_link_config();
        let basis = DftBasis::new(&[0], &config).unwrap();
        let mut rng = crate::rng::substream(1, [0, 0, 0]);
        let mut seen = Vec::new();
        for _ in 0..16 {
            let r = draw_epoch(&taps, &[0], &mut rng).unwrap();
            let h = basis.response(r.taps()).unwrap();
            let eff = effective_snr(&subcarrier_snrs(&h, 12.0), config.beta()).unwrap();
            seen.push(quantize_cqi(eff, config.cqi_thresholds_db()));
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn low_k_has_larger_within_vector_variance() {
        let pdp = PowerDelayProfile::pedestrian_b();
        let config = small_link_config();
        let var_of = |k: u8, seed_base: usize| -> f64 {
            let mut total = 0.0;
            for rep in 0..100 {
                let mut rng = sample_substream(11, k, seed_base, rep);
                let s = generate_cqi_vector(&pdp, k, 10.0, 64, &config, &mut rng).unwrap();
                let mean = s.cqi.iter().map(|&c| f64::from(c)).sum::<f64>() / 64.0;
                let var = s
                    .cqi
                    .iter()
                    .map(|&c| (f64::from(c) - mean).powi(2))
                    .sum::<f64>()
                    / 63.0;
                total += var;
            }
            total / 100.0
        };
        assert!(var_of(0, 0) > var_of(10, 1));
    }

    #[test]
    fn grid_counts_and_label_histogram() {
        let pdp = PowerDelayProfile::pedestrian_b();
        let config = small_link_config();
        let grid = GenerationGrid::with_n(4);
        let ds = generate_dataset(&grid, &pdp, &config, 3).unwrap();
        assert_eq!(ds.len(), 11 * 25 * 10);
        let mut hist: HashMap<u8, usize> = HashMap::new();
        for s in ds.samples() {
            *hist.entry(s.k_label).or_default() += 1;
        }
        assert_eq!(hist.len(), 11);
        assert!(hist.values().all(|&c| c == 250));
    }

    #[test]
    fn single_cell_grid() {
        let pdp = PowerDelayProfile::pedestrian_b();
        let config = small_link_config();
        let grid = GenerationGrid {
            k_values: vec![4],
            snr_db_values: vec![12.0],
            reps: 1,
            n: 8,
        };
        let ds = generate_dataset(&grid, &pdp, &config, 3).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.samples()[0].k_label, 4);
    }

    #[test]
    fn generation_is_order_independent() {
        let pdp = PowerDelayProfile::pedestrian_b();
        let config = small_link_config();
        let forward = GenerationGrid {
            k_values: vec![0, 3, 7],
            snr_db_values: vec![5.0, 15.0],
            reps: 2,
            n: 6,
        };
        let reversed = GenerationGrid {
            k_values: vec![7, 3, 0],
            ..forward.clone()
        };
        let a = generate_dataset(&forward, &pdp, &config, 9).unwrap();
        let b = generate_dataset(&reversed, &pdp, &config, 9).unwrap();
        for s in a.samples() {
            assert!(b.samples().contains(s));
        }
    }

    #[test]
    fn same_master_seed_same_bytes() {
        let pdp = PowerDelayProfile::pedestrian_b();
        let config = small_link_config();
        let grid = GenerationGrid {
            k_values: vec![0, 5],
            snr_db_values: vec![10.0, 20.0],
            reps: 2,
            n: 10,
        };
        let mut run = || -> Vec<u8> {
            let ds = generate_dataset(&grid, &pdp, &config, 77).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf).unwrap();
            buf
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn split_partitions_dataset() {
        let samples: Vec<Sample> = (0..10)
            .map(|i| Sample::new(vec![i as u8], (i % 11) as u8, f64::from(i)).unwrap())
            .collect();
        let ds = Dataset::new(samples, 1).unwrap();
        let mut rng = crate::rng::substream(5, [tag::SPLIT, 0, 0]);
        let (train, test) = split(&ds, 0.8, &mut rng).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 2);
        let mut all: Vec<&Sample> = train.samples().iter().chain(test.samples()).collect();
        all.sort_by(|a, b| a.snr_db.partial_cmp(&b.snr_db).unwrap());
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.cqi[0], i as u8);
        }
    }

    #[test]
    fn split_two_samples_in_half() {
        let ds = Dataset::new(
            vec![
                Sample::new(vec![0], 0, 0.0).unwrap(),
                Sample::new(vec![1], 1, 1.0).unwrap(),
            ],
            1,
        )
        .unwrap();
        let mut rng = crate::rng::substream(5, [tag::SPLIT, 0, 0]);
        let (train, test) = split(&ds, 0.5, &mut rng).unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
        assert!(split(&ds, 0.0, &mut rng).is_err());
        assert!(split(&ds, 1.0, &mut rng).is_err());
    }

    #[test]
    fn one_hot_encoding() {
        assert_eq!(one_hot(0).unwrap()[0], 1.0);
        assert_eq!(one_hot(0).unwrap()[1..], [0.0; 10]);
        assert_eq!(one_hot(10).unwrap()[10], 1.0);
        for k in 0..=10 {
            assert_eq!(one_hot(k).unwrap().iter().sum::<f64>(), 1.0);
        }
        assert!(one_hot(11).is_err());
    }

    #[test]
    fn input_normalization_anchors() {
        let x = normalize_inputs(&[0, 15, 7]).unwrap();
        assert_eq!(x[0], -1.0);
        assert_eq!(x[1], 1.0);
        assert!((x[2] - (7.0 / 7.5 - 1.0)).abs() < 1e-15);
        assert!(normalize_inputs(&[16]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = Dataset::new(
            vec![
                Sample::new(vec![0, 15, 7], 3, 12.5).unwrap(),
                Sample::new(vec![1, 2, 3], 10, 1.0).unwrap(),
            ],
            3,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("cqi_1,cqi_2,cqi_3,k_label,snr_db\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let bad_cqi = "cqi_1,cqi_2,k_label,snr_db\n16,0,3,10.0\n";
        assert!(read_csv(bad_cqi.as_bytes()).is_err());
        let bad_label = "cqi_1,cqi_2,k_label,snr_db\n1,0,11,10.0\n";
        assert!(read_csv(bad_label.as_bytes()).is_err());
        let short_row = "cqi_1,cqi_2,k_label,snr_db\n1,0,3\n";
        assert!(read_csv(short_row.as_bytes()).is_err());
        let bad_header = "cqi_1,foo,k_label,snr_db\n1,0,3,10.0\n";
        assert!(read_csv(bad_header.as_bytes()).is_err());
    }

    #[test]
    fn csv_header_only_is_empty_dataset() {
        let ds = read_csv("cqi_1,cqi_2,k_label,snr_db\n".as_bytes()).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.n(), 2);
    }
}

//! Causal channel simulation.
//!
//! A channel maps each input symbol to an output symbol using only causal
//! information: past inputs, past outputs, and a private randomness stream.
//! Whatever the channel does, the trace's *realized noise* is defined as
//! `Z_k = Y_k - X_k` (modulo), and the empirical capacity of the trace is
//! `log2|X| - H_emp(Z^n)`. The channel's private stream is seeded separately
//! from all protocol randomness, so an adversarial channel can never observe
//! shared randomness, only the I/O it is entitled to.

use crate::alphabet::{Alphabet, Symbol, SymbolSeq};
use crate::dist::empirical_entropy;
use crate::estimator::{KtEstimator, UpdateSchedule};
use crate::qutil::Q;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::sync::Arc;

/// Channel family tag; drives which structural audits apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelFamily {
    /// Deterministic noise sequence fixed before transmission.
    IndividualNoise,
    /// Noise generated independently of the channel's inputs/outputs.
    NoiseSequence,
    /// Noise may depend on past I/O but not on the current input.
    ModuloAdditive,
    /// Memoryless but input-dependent transition rows.
    Memoryless,
    /// Anything causal.
    GeneralCausal,
}

impl ChannelFamily {
    /// True when the realized-noise law is invariant to shifting the current
    /// input, which is what the modulo-additive model assumes.
    pub fn is_modulo_additive(self) -> bool {
        matches!(
            self,
            ChannelFamily::IndividualNoise
                | ChannelFamily::NoiseSequence
                | ChannelFamily::ModuloAdditive
        )
    }
}

/// One causal channel instance, owned by a single trial.
pub trait Channel {
    fn alphabet(&self) -> Alphabet;
    fn family(&self) -> ChannelFamily;

    /// Produces `y_k` for the next input. Implementations may consult their
    /// own recorded history and private randomness only.
    fn step(&mut self, x: Symbol) -> Symbol;

    /// Discloses the message point to channels flagged as informed
    /// adversaries; everyone else ignores it.
    fn inform_message_point(&mut self, _theta: &Q) {}
}

/// Recorded input/output sequences of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelTrace {
    pub x: SymbolSeq,
    pub y: SymbolSeq,
}

impl ChannelTrace {
    pub fn new(alphabet: Alphabet) -> Self {
        Self {
            x: SymbolSeq::empty(alphabet),
            y: SymbolSeq::empty(alphabet),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn record(&mut self, x: Symbol, y: Symbol) {
        self.x.push(x);
        self.y.push(y);
    }
}

/// Componentwise `z = y - x` (modulo) for the recorded trace.
pub fn realized_noise(trace: &ChannelTrace) -> Result<SymbolSeq> {
    trace.y.sub(&trace.x)
}

/// `log2|X| - H_emp(z)` in bits per channel use.
pub fn empirical_capacity(z: &SymbolSeq) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(z.alphabet().log2_size() - empirical_entropy(z))
}

// ---------------------------------------------------------------------------
// Built-in channels
// ---------------------------------------------------------------------------

/// Fixed noise sequence: `y_k = x_k + z_k`.
pub struct IndividualNoiseChannel {
    alphabet: Alphabet,
    noise: Arc<SymbolSeq>,
    pos: usize,
}

impl IndividualNoiseChannel {
    pub fn new(noise: Arc<SymbolSeq>) -> Self {
        Self {
            alphabet: noise.alphabet(),
            noise,
            pos: 0,
        }
    }
}

impl Channel for IndividualNoiseChannel {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn family(&self) -> ChannelFamily {
        ChannelFamily::IndividualNoise
    }
    fn step(&mut self, x: Symbol) -> Symbol {
        assert!(
            self.pos < self.noise.len(),
            "noise sequence exhausted at position {}",
            self.pos
        );
        let z = self.noise.get(self.pos);
        self.pos += 1;
        self.alphabet.add(x, z)
    }
}

/// I.i.d. noise with a fixed pmf, added modulo the alphabet.
pub struct MemorylessAdditiveChannel {
    alphabet: Alphabet,
    pmf: Vec<f64>,
    rng: ChaCha8Rng,
}

impl MemorylessAdditiveChannel {
    pub fn new(alphabet: Alphabet, pmf: Vec<f64>, rng: ChaCha8Rng) -> Self {
        assert_eq!(pmf.len(), alphabet.size());
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self { alphabet, pmf, rng }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64, rng: ChaCha8Rng) -> Self {
        Self::new(Alphabet::binary(), vec![1.0 - p, p], rng)
    }

    /// Uniform noise: capacity exactly zero.
    pub fn uniform(alphabet: Alphabet, rng: ChaCha8Rng) -> Self {
        Self::new(alphabet, vec![1.0 / alphabet.size() as f64; alphabet.size()], rng)
    }
}

fn sample_pmf(pmf: &[f64], rng: &mut ChaCha8Rng) -> Symbol {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    pmf.len() - 1
}

impl Channel for MemorylessAdditiveChannel {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn family(&self) -> ChannelFamily {
        ChannelFamily::NoiseSequence
    }
    fn step(&mut self, x: Symbol) -> Symbol {
        let z = sample_pmf(&self.pmf, &mut self.rng);
        self.alphabet.add(x, z)
    }
}

/// Budget-limited binary adversary. Inserts an error whenever its running
/// error fraction stays within the budget and its own estimate of the noise
/// distribution says an error lowers the message point's posterior weight
/// (i.e. errors are still the minority symbol). Deliberately deterministic:
/// the worst case needs no private coin flips.
pub struct StateConstrainedAdversary {
    alphabet: Alphabet,
    budget: f64,
    steps: u64,
    flips: u64,
    own_estimate: KtEstimator,
}

impl StateConstrainedAdversary {
    pub fn new(budget: f64) -> Self {
        let alphabet = Alphabet::binary();
        Self {
            alphabet,
            budget,
            steps: 0,
            flips: 0,
            own_estimate: KtEstimator::new(alphabet),
        }
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }
}

impl Channel for StateConstrainedAdversary {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn family(&self) -> ChannelFamily {
        ChannelFamily::ModuloAdditive
    }
    fn step(&mut self, x: Symbol) -> Symbol {
        self.steps += 1;
        let within_budget = ((self.flips + 1) as f64) <= self.budget * self.steps as f64;
        let hurts = self.own_estimate.estimate(1).unwrap() <= self.own_estimate.estimate(0).unwrap();
        let z = usize::from(within_budget && hurts);
        self.flips += z as u64;
        self.own_estimate.observe(z, &UpdateSchedule::EveryStep).unwrap();
        self.alphabet.add(x, z)
    }
    fn inform_message_point(&mut self, _theta: &Q) {
        // the greedy rule needs no more than the noise history it already has
    }
}

/// Modulo-additive adversary that picks whichever noise symbol is currently
/// least represented, driving the realized noise toward uniform (empirical
/// capacity toward zero) as fast as possible.
pub struct PushToUniformAdversary {
    alphabet: Alphabet,
    counts: Vec<u64>,
}

impl PushToUniformAdversary {
    pub fn new(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            counts: vec![0; alphabet.size()],
        }
    }
}

impl Channel for PushToUniformAdversary {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn family(&self) -> ChannelFamily {
        ChannelFamily::ModuloAdditive
    }
    fn step(&mut self, x: Symbol) -> Symbol {
        let z = (0..self.alphabet.size())
            .min_by_key(|&s| (self.counts[s], s))
            .unwrap();
        self.counts[z] += 1;
        self.alphabet.add(x, z)
    }
}

/// Binary channel whose output ignores the input entirely: `y ~ Ber(eps)`.
/// The standard example of a causal channel that is *not* modulo-additive.
pub struct OutputOnlyChannel {
    epsilon: f64,
    rng: ChaCha8Rng,
}

impl OutputOnlyChannel {
    pub fn new(epsilon: f64, rng: ChaCha8Rng) -> Self {
        Self { epsilon, rng }
    }
}

impl Channel for OutputOnlyChannel {
    fn alphabet(&self) -> Alphabet {
        Alphabet::binary()
    }
    fn family(&self) -> ChannelFamily {
        ChannelFamily::GeneralCausal
    }
    fn step(&mut self, _x: Symbol) -> Symbol {
        usize::from(self.rng.gen_bool(self.epsilon))
    }
}

/// General memoryless channel with per-input transition rows.
pub struct GeneralMemorylessChannel {
    alphabet: Alphabet,
    rows: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl GeneralMemorylessChannel {
    pub fn new(alphabet: Alphabet, rows: Vec<Vec<f64>>, rng: ChaCha8Rng) -> Self {
        assert_eq!(rows.len(), alphabet.size());
        for row in &rows {
            assert_eq!(row.len(), alphabet.size());
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        Self { alphabet, rows, rng }
    }

    /// Binary channel from the diagonal `(p00, p11)`.
    pub fn binary(p00: f64, p11: f64, rng: ChaCha8Rng) -> Self {
        Self::new(
            Alphabet::binary(),
            vec![vec![p00, 1.0 - p00], vec![1.0 - p11, p11]],
            rng,
        )
    }
}

impl Channel for GeneralMemorylessChannel {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn family(&self) -> ChannelFamily {
        ChannelFamily::Memoryless
    }
    fn step(&mut self, x: Symbol) -> Symbol {
        sample_pmf(&self.rows[x], &mut self.rng)
    }
}

/// Adds a shared uniform dither to the input and removes it from the output,
/// presenting the inner channel with a uniform input distribution.
pub struct DitherWrapper {
    inner: Box<dyn Channel>,
    rng: ChaCha8Rng,
    enabled: bool,
    inner_inputs: Option<SymbolSeq>,
}

impl DitherWrapper {
    pub fn new(inner: Box<dyn Channel>, rng: ChaCha8Rng, enabled: bool) -> Self {
        Self {
            inner,
            rng,
            enabled,
            inner_inputs: None,
        }
    }

    /// Records the dithered inputs actually fed to the inner channel, for
    /// input-distribution audits.
    pub fn with_recording(mut self) -> Self {
        self.inner_inputs = Some(SymbolSeq::empty(self.inner.alphabet()));
        self
    }

    pub fn inner_inputs(&self) -> Option<&SymbolSeq> {
        self.inner_inputs.as_ref()
    }
}

impl Channel for DitherWrapper {
    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }
    fn family(&self) -> ChannelFamily {
        ChannelFamily::GeneralCausal
    }
    fn step(&mut self, x: Symbol) -> Symbol {
        let a = self.alphabet();
        let phi = if self.enabled {
            self.rng.gen_range(0..a.size())
        } else {
            0
        };
        let x_dithered = a.add(x, phi);
        if let Some(rec) = &mut self.inner_inputs {
            rec.push(x_dithered);
        }
        let y_inner = self.inner.step(x_dithered);
        a.sub(y_inner, phi)
    }
    fn inform_message_point(&mut self, theta: &Q) {
        self.inner.inform_message_point(theta);
    }
}

// ---------------------------------------------------------------------------
// Noise files: one decimal symbol per line
// ---------------------------------------------------------------------------

pub fn read_noise_file(path: &Path, alphabet: Alphabet) -> Result<SymbolSeq> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadNoiseFile(format!("{}: {e}", path.display())))?;
    let mut seq = SymbolSeq::empty(alphabet);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let sym: usize = line
            .parse()
            .map_err(|_| Error::BadNoiseFile(format!("line {}: {:?}", lineno + 1, line)))?;
        alphabet.check(sym)?;
        seq.push(sym);
    }
    Ok(seq)
}

pub fn write_noise_file(path: &Path, seq: &SymbolSeq) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for s in seq.iter() {
        writeln!(out, "{s}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn trace_of(ch: &mut dyn Channel, inputs: &[Symbol]) -> ChannelTrace {
        let mut t = ChannelTrace::new(ch.alphabet());
        for &x in inputs {
            let y = ch.step(x);
            t.record(x, y);
        }
        t
    }

    #[test]
    fn individual_noise_is_deterministic_addition() {
        let a = Alphabet::binary();
        let noise = Arc::new(SymbolSeq::new(a, [1, 0, 1]).unwrap());
        let mut ch = IndividualNoiseChannel::new(noise);
        let t = trace_of(&mut ch, &[0, 1, 1]);
        assert_eq!(t.y.iter().collect::<Vec<_>>(), vec![1, 1, 0]);
        let z = realized_noise(&t).unwrap();
        assert_eq!(z.iter().collect::<Vec<_>>(), vec![1, 0, 1]);
    }

    #[test]
    fn realized_noise_examples() {
        let a = Alphabet::binary();
        let t = ChannelTrace {
            x: SymbolSeq::new(a, [0, 1, 1]).unwrap(),
            y: SymbolSeq::new(a, [0, 1, 1]).unwrap(),
        };
        assert_eq!(realized_noise(&t).unwrap().counts(), vec![3, 0]);

        let a4 = Alphabet::new(4).unwrap();
        let t = ChannelTrace {
            x: SymbolSeq::new(a4, [3, 2]).unwrap(),
            y: SymbolSeq::new(a4, [0, 0]).unwrap(),
        };
        assert_eq!(
            realized_noise(&t).unwrap().iter().collect::<Vec<_>>(),
            vec![1, 2]
        );
    }

    #[test]
    fn empirical_capacity_examples() {
        let a = Alphabet::binary();
        let z = SymbolSeq::new(a, [0, 0, 0, 0]).unwrap();
        assert_eq!(empirical_capacity(&z).unwrap(), 1.0);

        let z = SymbolSeq::new(a, [0, 1, 0, 1]).unwrap();
        assert_eq!(empirical_capacity(&z).unwrap(), 0.0);

        let z = SymbolSeq::new(a, [0, 0, 0, 1]).unwrap();
        let c = empirical_capacity(&z).unwrap();
        assert!((c - (1.0 - 0.8112781244591328)).abs() < 1e-12);

        assert!(empirical_capacity(&SymbolSeq::empty(a)).is_err());
    }

    #[test]
    fn output_only_ignores_input() {
        let mut ch = OutputOnlyChannel::new(0.1, stream(3, 2));
        let mut ones = 0;
        for k in 0..10_000 {
            ones += ch.step(k % 2);
        }
        let frac = ones as f64 / 10_000.0;
        assert!((frac - 0.1).abs() < 0.02);
    }

    #[test]
    fn adversary_budget_is_respected() {
        let mut ch = StateConstrainedAdversary::new(0.15);
        let mut t = ChannelTrace::new(ch.alphabet());
        for k in 0..5000usize {
            let x = k % 2;
            let y = ch.step(x);
            t.record(x, y);
            let z = realized_noise(&t).unwrap();
            let flips = z.counts()[1];
            assert!(flips as f64 <= 0.15 * t.len() as f64);
        }
        // it should actually spend most of the budget
        let z = realized_noise(&t).unwrap();
        assert!(z.counts()[1] as f64 >= 0.12 * t.len() as f64);
    }

    #[test]
    fn push_to_uniform_flattens_noise() {
        let a = Alphabet::new(4).unwrap();
        let mut ch = PushToUniformAdversary::new(a);
        let mut t = ChannelTrace::new(a);
        for k in 0..4000usize {
            let x = k % 4;
            let y = ch.step(x);
            t.record(x, y);
        }
        let z = realized_noise(&t).unwrap();
        let c = empirical_capacity(&z).unwrap();
        assert!(c.abs() < 1e-9);
    }

    /// Monte-Carlo audit of the modulo-additive tag: with history empty and
    /// the private stream fixed per seed, the realized noise `z = y - x` of a
    /// modulo-additive channel must not depend on the current input. The
    /// output-only channel is the negative control.
    #[test]
    fn modulo_additive_tag_audit() {
        let trials = 4000;
        let freq_z1 = |mk: &dyn Fn(u64) -> Box<dyn Channel>, x: Symbol| -> f64 {
            let mut ones = 0u32;
            for s in 0..trials {
                let mut ch = mk(s);
                let a = ch.alphabet();
                let y = ch.step(x);
                ones += a.sub(y, x) as u32;
            }
            f64::from(ones) / trials as f64
        };
        // four-sigma band for a difference of two Bernoulli frequencies
        let band = |p: f64| 4.0 * (2.0 * p * (1.0 - p) / trials as f64).sqrt();

        let additive: Vec<(&str, Box<dyn Fn(u64) -> Box<dyn Channel>>)> = vec![
            ("bsc", Box::new(|s| Box::new(MemorylessAdditiveChannel::bsc(0.3, stream(s, 7))))),
            ("adversary", Box::new(|s| {
                let _ = s;
                Box::new(StateConstrainedAdversary::new(0.2))
            })),
            ("push_to_uniform", Box::new(|_s| {
                Box::new(PushToUniformAdversary::new(Alphabet::binary()))
            })),
        ];
        for (name, mk) in &additive {
            let f0 = freq_z1(mk, 0);
            let f1 = freq_z1(mk, 1);
            assert!(
                (f0 - f1).abs() <= band(f0.max(0.01)) + 1e-12,
                "{name}: {f0} vs {f1}"
            );
        }

        // negative control: output-only channel fails the shift test
        let mk: Box<dyn Fn(u64) -> Box<dyn Channel>> =
            Box::new(|s| Box::new(OutputOnlyChannel::new(0.1, stream(s, 8))));
        let f0 = freq_z1(&mk, 0);
        let f1 = freq_z1(&mk, 1);
        assert!((f0 - f1).abs() > 0.5, "output-only should flunk: {f0} vs {f1}");
    }

    #[test]
    fn dithered_input_distribution_is_uniform() {
        use crate::dist::{empirical_distribution, linf_distance, EmpiricalDistribution};
        let inner = Box::new(GeneralMemorylessChannel::binary(0.9, 0.7, stream(5, 3)));
        let mut ch = DitherWrapper::new(inner, stream(5, 4), true).with_recording();
        let n = 100_000usize;
        for k in 0..n {
            // a deliberately lopsided fixed input policy
            let _ = ch.step(usize::from(k % 10 == 0));
        }
        let inner_inputs = ch.inner_inputs().unwrap();
        let d = empirical_distribution(inner_inputs);
        let u = EmpiricalDistribution::uniform(Alphabet::binary());
        let dev = crate::qutil::ratio_to_f64(&linf_distance(&d, &u).unwrap());
        assert!(dev < 3.0 * (2.0f64 / n as f64).sqrt(), "deviation {dev}");
    }

    #[test]
    fn dithered_induced_channel_statistics() {
        let inner = Box::new(GeneralMemorylessChannel::binary(0.9, 0.7, stream(15, 3)));
        let mut ch = DitherWrapper::new(inner, stream(15, 4), true);
        let n = 100_000;
        let mut t = ChannelTrace::new(ch.alphabet());
        for _ in 0..n {
            let y = ch.step(0);
            t.record(0, y);
        }
        let z = realized_noise(&t).unwrap();
        // crossover of the induced channel: (1/2)(p01 + p10) = 0.2
        let p1 = z.counts()[1] as f64 / n as f64;
        assert!((p1 - 0.2).abs() < 0.01, "induced crossover {p1}");
        let c = empirical_capacity(&z).unwrap();
        assert!((c - 0.2780719051126377).abs() < 0.02);
    }

    #[test]
    fn dithered_output_only_has_zero_empirical_capacity() {
        let inner = Box::new(OutputOnlyChannel::new(0.1, stream(6, 3)));
        let mut ch = DitherWrapper::new(inner, stream(6, 4), true);
        let n = 100_000;
        let mut t = ChannelTrace::new(ch.alphabet());
        for k in 0..n {
            let x = (k % 2) as usize;
            let y = ch.step(x);
            t.record(x, y);
        }
        let z = realized_noise(&t).unwrap();
        let c = empirical_capacity(&z).unwrap();
        assert!(c.abs() < 0.02, "dithered output-only capacity {c}");
    }

    #[test]
    fn noise_file_roundtrip() {
        let a = Alphabet::new(4).unwrap();
        let seq = SymbolSeq::new(a, [3, 3, 0, 1, 2]).unwrap();
        let dir = std::env::temp_dir().join("empcap-noise-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("noise.txt");
        write_noise_file(&path, &seq).unwrap();
        let back = read_noise_file(&path, a).unwrap();
        assert_eq!(seq, back);
        let bad = dir.join("bad.txt");
        std::fs::write(&bad, "0\n7\n").unwrap();
        assert!(read_noise_file(&bad, a).is_err());
    }
}

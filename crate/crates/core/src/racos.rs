//! Classification-based randomized coordinate shrinking.
//!
//! Each iteration draws `rho` uniform samples from the current box and stops
//! at the first one that violates the predicate. Otherwise the samples are
//! split into the `k` best (positive) and the rest (negative), and the box is
//! shrunk so that every negative sample falls outside it along one randomly
//! chosen coordinate, while a randomly chosen positive sample stays inside.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::{Direction, Objective};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::property::{uniform_closed, DomainBox, Interval, SafetyProperty};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Physical-unit input.
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    /// Projection of `output` on the active objective.
    pub objective: f64,
}

impl Sample {
    pub fn evaluate(net: &Network, input: Vec<f64>, obj: &Objective) -> Result<Self> {
        let output = net.forward(&input)?;
        if output.iter().any(|v| v.is_nan()) {
            return Err(Error::Config(format!(
                "network produced NaN output at input {input:?}"
            )));
        }
        let objective = obj.value(&output)?;
        Ok(Self {
            input,
            output,
            objective,
        })
    }
}

pub const DEFAULT_RHO_MULTIPLIER: usize = 30;
pub const DEFAULT_THETA: f64 = 1e-6;
pub const DEFAULT_K: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    /// Samples drawn per iteration.
    pub rho: usize,
    /// Number of positive samples.
    pub k: usize,
    /// Box width at which a search counts as converged.
    pub theta: f64,
    pub rho_multiplier: usize,
}

impl OptimizerParams {
    /// Defaults for a network with `input_dim` inputs: `rho = 30 * input_dim`,
    /// `k = 1`, `theta = 1e-6`.
    pub fn for_input_dim(input_dim: usize) -> Self {
        Self::with_multiplier(input_dim, DEFAULT_RHO_MULTIPLIER)
    }

    pub fn with_multiplier(input_dim: usize, rho_multiplier: usize) -> Self {
        Self {
            rho: rho_multiplier * input_dim,
            k: DEFAULT_K,
            theta: DEFAULT_THETA,
            rho_multiplier,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho == 0 || self.k == 0 {
            return Err(Error::Config("rho and k must be positive".into()));
        }
        if self.k >= self.rho {
            return Err(Error::Config(format!(
                "k = {} must be smaller than rho = {}",
                self.k, self.rho
            )));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::Config(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BatchOutcome {
    /// A violating sample, and how many samples were evaluated to find it.
    Falsified {
        sample: Sample,
        evaluated: usize,
    },
    Samples(Vec<Sample>),
}

/// Draws up to `rho` samples from `search_box` in order, returning the first
/// that violates the predicate, or all of them.
pub fn make_samples_and_evaluate<R: Rng + ?Sized>(
    net: &Network,
    prop: &SafetyProperty,
    obj: &Objective,
    search_box: &DomainBox,
    rho: usize,
    rng: &mut R,
) -> Result<BatchOutcome> {
    search_box.ensure_finite()?;
    if rho == 0 {
        return Err(Error::Config("rho must be positive".into()));
    }
    let mut samples = Vec::with_capacity(rho + 1);
    for i in 0..rho {
        let input: Vec<f64> = search_box
            .bounds()
            .iter()
            .map(|b| uniform_closed(rng, b.lower, b.upper))
            .collect();
        let sample = Sample::evaluate(net, input, obj)?;
        if !prop.predicate.eval(&sample.output)? {
            return Ok(BatchOutcome::Falsified {
                sample,
                evaluated: i + 1,
            });
        }
        samples.push(sample);
    }
    Ok(BatchOutcome::Samples(samples))
}

/// Splits samples into the `k` best under `direction` and the rest.
///
/// Positives come back best first; negatives keep their original order.
/// Ties go to the earlier sample.
pub fn select_positive(
    samples: Vec<Sample>,
    direction: Direction,
    k: usize,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if k == 0 || samples.len() <= k {
        return Err(Error::InsufficientSamples {
            k,
            len: samples.len(),
        });
    }
    assert!(
        samples.iter().all(|s| !s.objective.is_nan()),
        "objective values must not be NaN"
    );
    let mut order: Vec<usize> = (0..samples.len()).collect();
    // stable sort keeps draw order among equal values
    order.sort_by(|&a, &b| {
        let (x, y) = (samples[a].objective, samples[b].objective);
        match direction {
            Direction::Maximize => y.total_cmp(&x),
            Direction::Minimize => x.total_cmp(&y),
        }
    });
    let mut is_pos = vec![false; samples.len()];
    for &i in &order[..k] {
        is_pos[i] = true;
    }
    let mut slots: Vec<Option<Sample>> = samples.into_iter().map(Some).collect();
    let pos = order[..k]
        .iter()
        .map(|&i| slots[i].take().expect("each index taken once"))
        .collect();
    let neg = slots
        .into_iter()
        .zip(is_pos)
        .filter_map(|(s, p)| if p { None } else { s })
        .collect();
    Ok((pos, neg))
}

/// Source of randomness for [`shrink_box`]; any [`Rng`] qualifies. Split out
/// so the shrinking rule can be driven with scripted choices.
pub trait ShrinkRng {
    /// Uniform index in `0..len`.
    fn index(&mut self, len: usize) -> usize;
    /// Uniform value in the closed interval `[lo, hi]`.
    fn uniform(&mut self, lo: f64, hi: f64) -> f64;
}

impl<R: Rng + ?Sized> ShrinkRng for R {
    fn index(&mut self, len: usize) -> usize {
        self.gen_range(0..len)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        uniform_closed(self, lo, hi)
    }
}

/// Shrinks `search_box` to exclude the negative samples.
///
/// One positive sample `b` is picked as the anchor. For each negative `t` a
/// coordinate `i` is drawn; if `b[i] > t[i]` the lower bound moves to a
/// random point between `t[i]` and `b[i]`, if `b[i] < t[i]` the upper bound
/// moves to a random point between `b[i]` and `t[i]`. New bounds are drawn
/// inside the current interval, so the result is always contained in the
/// argument and keeps `b` whenever `b` was inside.
pub fn shrink_box<R: ShrinkRng + ?Sized>(
    search_box: &DomainBox,
    pos: &[Sample],
    neg: &[Sample],
    rng: &mut R,
) -> DomainBox {
    assert!(
        !pos.is_empty(),
        "shrink_box needs at least one positive sample"
    );
    let n = search_box.dim();
    let mut out = search_box.clone();
    let anchor = &pos[rng.index(pos.len())].input;
    for t in neg {
        let i = rng.index(n);
        let Interval { lower, upper } = out.get(i);
        let b = anchor[i].clamp(lower, upper);
        let ti = t.input[i];
        if b > ti {
            let lo = rng.uniform(ti.max(lower), b);
            out.set(i, Interval { lower: lo, upper });
        } else if b < ti {
            let hi = rng.uniform(b, ti.min(upper));
            out.set(i, Interval { lower, upper: hi });
        }
    }
    out
}

/// True when every dimension of the box is at most `theta` wide.
pub fn converged(search_box: &DomainBox, theta: f64) -> bool {
    search_box.bounds().iter().all(|b| b.width() <= theta)
}

/// What one iteration of the search produced.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Falsified { sample: Sample, evaluated: usize },
    Converged { evaluated: usize },
    Continue { evaluated: usize },
}

/// State of one search run: the shrinking box, the best sample so far and
/// the run's random stream.
#[derive(Debug, Clone)]
pub struct SearchState<R> {
    pub search_box: DomainBox,
    pub best: Option<Sample>,
    pub rng: R,
    pub iteration: usize,
}

impl<R: Rng> SearchState<R> {
    pub fn new(domain: DomainBox, rng: R) -> Self {
        Self {
            search_box: domain,
            best: None,
            rng,
            iteration: 0,
        }
    }

    /// Sample, check convergence, update the best sample, then shrink.
    pub fn step(
        &mut self,
        net: &Network,
        prop: &SafetyProperty,
        obj: &Objective,
        params: &OptimizerParams,
    ) -> Result<StepOutcome> {
        self.iteration += 1;
        let mut samples = match make_samples_and_evaluate(
            net,
            prop,
            obj,
            &self.search_box,
            params.rho,
            &mut self.rng,
        )? {
            BatchOutcome::Falsified { sample, evaluated } => {
                return Ok(StepOutcome::Falsified { sample, evaluated })
            }
            BatchOutcome::Samples(s) => s,
        };
        let evaluated = samples.len();
        if converged(&self.search_box, params.theta) {
            return Ok(StepOutcome::Converged { evaluated });
        }

        if let Some(best) = self.best.take() {
            samples.push(best);
        }
        let mut best_idx = 0;
        for (i, s) in samples.iter().enumerate().skip(1) {
            if obj
                .direction
                .better(s.objective, samples[best_idx].objective)
            {
                best_idx = i;
            }
        }
        self.best = Some(samples[best_idx].clone());

        let (pos, neg) = select_positive(samples, obj.direction, params.k)?;
        self.search_box = shrink_box(&self.search_box, &pos, &neg, &mut self.rng);
        Ok(StepOutcome::Continue { evaluated })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Activation, Layer};
    use crate::property::{CmpOp, Predicate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(input: &[f64], objective: f64) -> Sample {
        Sample {
            input: input.to_vec(),
            output: vec![objective],
            objective,
        }
    }

    fn example_set() -> Vec<Sample> {
        vec![
            sample(&[4.0, 2.0], 8.0),
            sample(&[6.0, 4.0], 14.0),
            sample(&[5.0, 4.0], 13.0),
        ]
    }

    /// Replays scripted indices and uniform draws.
    struct Scripted {
        indices: Vec<usize>,
        values: Vec<f64>,
    }

    impl ShrinkRng for Scripted {
        fn index(&mut self, len: usize) -> usize {
            let i = self.indices.remove(0);
            assert!(i < len);
            i
        }

        fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            let v = self.values.remove(0);
            assert!(lo <= v && v <= hi, "{v} outside [{lo}, {hi}]");
            v
        }
    }

    fn single(act: Activation) -> Network {
        Network::new(vec![Layer::new(vec![vec![1.0]], vec![0.0], act).unwrap()]).unwrap()
    }

    fn prop(pairs: &[(f64, f64)], predicate: Predicate) -> SafetyProperty {
        SafetyProperty::new("t", DomainBox::from_pairs(pairs).unwrap(), predicate)
    }

    #[test]
    fn example_selection() {
        let (pos, neg) = select_positive(example_set(), Direction::Maximize, 1).unwrap();
        assert_eq!(pos, vec![sample(&[6.0, 4.0], 14.0)]);
        assert_eq!(
            neg,
            vec![sample(&[4.0, 2.0], 8.0), sample(&[5.0, 4.0], 13.0)]
        );

        let (pos, neg) = select_positive(example_set(), Direction::Minimize, 1).unwrap();
        assert_eq!(pos, vec![sample(&[4.0, 2.0], 8.0)]);
        assert_eq!(neg.len(), 2);
    }

    #[test]
    fn selection_ties_prefer_earlier() {
        let s = vec![
            sample(&[0.0], 1.0),
            sample(&[1.0], 3.0),
            sample(&[2.0], 3.0),
        ];
        let (pos, _) = select_positive(s, Direction::Maximize, 1).unwrap();
        assert_eq!(pos[0].input, vec![1.0]);
    }

    #[test]
    fn selection_needs_more_than_k() {
        assert!(matches!(
            select_positive(example_set(), Direction::Maximize, 3),
            Err(Error::InsufficientSamples { k: 3, len: 3 })
        ));
    }

    #[test]
    fn example_first_shrink() {
        let bx = DomainBox::from_pairs(&[(4.0, 6.0), (1.0, 5.0)]).unwrap();
        let pos = [sample(&[6.0, 4.0], 14.0)];
        let neg = [sample(&[4.0, 2.0], 8.0)];
        let mut rng = Scripted {
            indices: vec![0, 0],
            values: vec![5.0],
        };
        let out = shrink_box(&bx, &pos, &neg, &mut rng);
        assert_eq!(
            out,
            DomainBox::from_pairs(&[(5.0, 6.0), (1.0, 5.0)]).unwrap()
        );
    }

    #[test]
    fn example_full_learning_step() {
        // both negatives cut along x1; the second draw lands on 6
        let bx = DomainBox::from_pairs(&[(4.0, 6.0), (1.0, 5.0)]).unwrap();
        let pos = [sample(&[6.0, 4.0], 14.0)];
        let neg = [sample(&[4.0, 2.0], 8.0), sample(&[5.0, 4.0], 13.0)];
        let mut rng = Scripted {
            indices: vec![0, 0, 0],
            values: vec![5.0, 6.0],
        };
        let out = shrink_box(&bx, &pos, &neg, &mut rng);
        assert_eq!(
            out,
            DomainBox::from_pairs(&[(6.0, 6.0), (1.0, 5.0)]).unwrap()
        );
    }

    #[test]
    fn equal_coordinates_leave_box_alone() {
        let bx = DomainBox::from_pairs(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let pos = [sample(&[0.5, 0.5], 1.0)];
        let neg = [sample(&[0.5, 0.5], 0.0), sample(&[0.5, 0.5], 0.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(shrink_box(&bx, &pos, &neg, &mut rng), bx);
    }

    #[test]
    fn convergence_check() {
        let tiny = DomainBox::from_pairs(&[(0.0, 1e-7), (0.0, 1e-7)]).unwrap();
        assert!(converged(&tiny, 1e-6));
        let point = DomainBox::from_pairs(&[(3.0, 3.0), (-1.0, -1.0)]).unwrap();
        assert!(converged(&point, 1e-12));
        let wide = DomainBox::from_pairs(&[(0.0, 1e-7), (0.0, 2e-6)]).unwrap();
        assert!(!converged(&wide, 1e-6));
    }

    #[test]
    fn tautology_never_falsifies() {
        let net = single(Activation::Relu);
        let p = prop(&[(-1.0, 1.0)], Predicate::var_const(0, CmpOp::Ge, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out =
            make_samples_and_evaluate(&net, &p, &Objective::minimize(0), &p.domain, 40, &mut rng)
                .unwrap();
        match out {
            BatchOutcome::Samples(s) => {
                assert_eq!(s.len(), 40);
                assert!(s.iter().all(|s| s.objective == s.output[0]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn everywhere_false_falsifies_immediately() {
        let net = single(Activation::Linear);
        let p = prop(&[(1.0, 2.0)], Predicate::var_const(0, CmpOp::Lt, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        match make_samples_and_evaluate(&net, &p, &Objective::maximize(0), &p.domain, 10, &mut rng)
            .unwrap()
        {
            BatchOutcome::Falsified { sample, evaluated } => {
                assert_eq!(evaluated, 1);
                assert!(p.domain.contains(&sample.input));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_box_propagates() {
        let net = single(Activation::Linear);
        let p = prop(
            &[(0.0, f64::INFINITY)],
            Predicate::var_const(0, CmpOp::Lt, 0.0),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            make_samples_and_evaluate(&net, &p, &Objective::maximize(0), &p.domain, 10, &mut rng),
            Err(Error::UnboundedDomain { .. })
        ));
    }

    #[test]
    fn params_validation() {
        let p = OptimizerParams::for_input_dim(5);
        assert_eq!(p.rho, 150);
        assert_eq!(p.k, 1);
        assert_eq!(p.theta, 1e-6);
        assert!(p.validate().is_ok());
        assert!(OptimizerParams { k: 150, ..p }.validate().is_err());
        assert!(OptimizerParams { theta: 0.0, ..p }.validate().is_err());
    }

    #[test]
    fn step_keeps_best_and_shrinks() {
        let net = single(Activation::Linear);
        let p = prop(&[(0.0, 1.0)], Predicate::var_const(0, CmpOp::Le, 10.0));
        let obj = Objective::maximize(0);
        let params = OptimizerParams {
            rho: 20,
            k: 1,
            theta: 1e-6,
            rho_multiplier: 20,
        };
        let mut st = SearchState::new(p.domain.clone(), ChaCha8Rng::seed_from_u64(5));
        let mut last_best = f64::NEG_INFINITY;
        for _ in 0..10 {
            let before = st.search_box.clone();
            match st.step(&net, &p, &obj, &params).unwrap() {
                StepOutcome::Continue { evaluated } => assert_eq!(evaluated, 20),
                StepOutcome::Converged { .. } => break,
                other => panic!("{other:?}"),
            }
            assert!(st.search_box.is_subset_of(&before));
            let best = st.best.as_ref().unwrap();
            assert!(best.objective >= last_best);
            assert!(st.search_box.contains(&best.input));
            last_best = best.objective;
        }
        // maximizing the identity pushes the box towards the upper end
        assert!(st.search_box.get(0).lower > 0.5);
    }
}

//! Slice sampler for the Dirichlet process mixture.
//!
//! The stick-breaking representation is truncated adaptively: per-
//! observation slice variables u_i ~ U(0, π_{z_i}) bound how much stick
//! mass a sweep can touch, and sticks are appended from the prior until
//! the represented weights exhaust everything above the smallest slice.
//! Allocations then move by likelihood alone over the slice-eligible
//! components. Conjugate updates refresh sticks and components, the
//! concentration gets its exact stick-likelihood Gamma conditional, and
//! two Metropolis label-switching moves improve mixing across the
//! ordered sticks.
//!
//! Each full sweep ends with a slice refresh from the exact conditional
//! u_i ~ U(0, π_{z_i}), so the recorded state always satisfies the
//! slice invariant; the refreshed values are superseded by the next
//! sweep's own slice update without changing the law of the chain.

use crate::data::FeatureMatrix;
use crate::dist::{sample_beta, sample_categorical_log, sample_gamma};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::kmeans::kmeans;
use crate::linalg::mvn_logpdf;
use crate::niw::{draw_conditional_components, Component, NiwHyperparams};
use crate::rng::RngStream;
use crate::trace::AllocationTrace;
use rand::Rng;
use rand_distr::Open01;

/// State of the slice sampler. `K_rep = v.len()` sticks are
/// represented; weights follow π_k = v_k·Π_{l<k}(1−v_l), and the
/// represented mass plus the residual stick product is one.
#[derive(Debug, Clone)]
pub struct DpmState {
    /// 0-based allocations into the represented components.
    pub z: Vec<usize>,
    /// Stick fractions in (0,1).
    pub v: Vec<f64>,
    /// Stick-breaking weights of the represented components.
    pub pi: Vec<f64>,
    /// log π, kept alongside for the Metropolis moves.
    pub log_pi: Vec<f64>,
    /// Slice variables, one per observation.
    pub u: Vec<f64>,
    pub components: Vec<Component>,
    /// Concentration parameter (Gamma(1,1) prior).
    pub m: f64,
    /// Occupancy per represented component.
    pub counts: Vec<usize>,
}

impl DpmState {
    pub fn k_rep(&self) -> usize {
        self.v.len()
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn refresh_counts(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        for &z in &self.z {
            self.counts[z] += 1;
        }
    }

    /// Recompute π and log π from the sticks.
    pub fn recompute_weights(&mut self) {
        let k = self.k_rep();
        self.pi.resize(k, 0.0);
        self.log_pi.resize(k, 0.0);
        let mut remaining = 1.0f64;
        let mut log_remaining = 0.0f64;
        for i in 0..k {
            let v = self.v[i];
            self.pi[i] = v * remaining;
            self.log_pi[i] = v.ln() + log_remaining;
            remaining *= 1.0 - v;
            log_remaining += (-v).ln_1p();
        }
    }

    /// Residual stick mass Π(1−v_k).
    pub fn tail_mass(&self) -> f64 {
        self.v.iter().map(|&v| 1.0 - v).product()
    }

    /// |Σπ + Π(1−v) − 1|, which the representation keeps within 1e-9.
    pub fn mass_identity_error(&self) -> f64 {
        (self.pi.iter().sum::<f64>() + self.tail_mass() - 1.0).abs()
    }

    /// Slice invariant 0 < u_i < π_{z_i} for every observation.
    pub fn slice_invariant_holds(&self) -> bool {
        self.u
            .iter()
            .zip(&self.z)
            .all(|(&u, &z)| u > 0.0 && u < self.pi[z])
    }

    /// Prior-only state with `k_init` sticks, for runs without data.
    pub fn from_prior(k_init: usize, hyper: &NiwHyperparams, m0: f64, rng: &mut RngStream) -> Result<Self> {
        if k_init == 0 {
            return Err(Error::InvalidParameter("at least one stick must be represented".into()));
        }
        if !(m0 > 0.0) {
            return Err(Error::InvalidParameter(format!("concentration {m0} must be positive")));
        }
        let v: Vec<f64> = (0..k_init).map(|_| sample_beta(1.0, m0, rng)).collect::<Result<_>>()?;
        let components: Vec<Component> = (0..k_init).map(|_| Component::draw(hyper, rng)).collect::<Result<_>>()?;
        let mut state = DpmState {
            z: Vec::new(),
            v,
            pi: Vec::new(),
            log_pi: Vec::new(),
            u: Vec::new(),
            components,
            m: m0,
            counts: vec![0; k_init],
        };
        state.recompute_weights();
        Ok(state)
    }
}

/// Initialize from k-means labels: sticks from their conditional given
/// the label counts and m = 1, components from their conditionals, and
/// slices uniform under the resulting weights.
pub fn init_dpm(x: &FeatureMatrix, k_init: usize, hyper: &NiwHyperparams, rng: &mut RngStream) -> Result<DpmState> {
    if k_init == 0 {
        return Err(Error::InvalidParameter("K_init must be at least 1".into()));
    }
    if hyper.dim() != x.r() {
        return Err(Error::DimensionMismatch { expected: x.r(), got: hyper.dim() });
    }
    if x.n() == 0 {
        return DpmState::from_prior(k_init, hyper, 1.0, rng);
    }
    let z = kmeans(x, k_init, rng)?;
    let mut state = DpmState {
        z,
        v: vec![0.0; k_init],
        pi: Vec::new(),
        log_pi: Vec::new(),
        u: Vec::new(),
        components: Vec::new(),
        m: 1.0,
        counts: vec![0; k_init],
    };
    state.refresh_counts();
    update_sticks(&mut state, rng)?;
    state.components = draw_conditional_components(x, &state.z, k_init, hyper, rng)?;
    state.u = vec![0.0; x.n()];
    update_slices(&mut state, rng)?;
    Ok(state)
}

/// Gibbs refresh of every slice variable: u_i ~ U(0, π_{z_i}).
pub fn update_slices(state: &mut DpmState, rng: &mut RngStream) -> Result<()> {
    for i in 0..state.n() {
        let cap = state.pi[state.z[i]];
        let t: f64 = rng.sample(Open01);
        state.u[i] = cap * t;
    }
    Ok(())
}

/// Append prior sticks until the represented weights cover every slice:
/// while Σπ ≤ 1 − min u, draw v ~ Beta(1, m) and θ from the prior.
pub fn extend_sticks(state: &mut DpmState, hyper: &NiwHyperparams, rng: &mut RngStream) -> Result<()> {
    let u_min = state.u.iter().cloned().fold(f64::INFINITY, f64::min);
    let limit = state.n() + 1000;
    while state.pi.iter().sum::<f64>() <= 1.0 - u_min {
        if state.k_rep() >= limit {
            return Err(Error::RunawaySticks { limit });
        }
        let v_new = sample_beta(1.0, state.m, rng)?;
        state.v.push(v_new);
        state.components.push(Component::draw(hyper, rng)?);
        state.counts.push(0);
        state.recompute_weights();
    }
    Ok(())
}

/// Allocation update over the slice-eligible sets: z_i ~ categorical on
/// A_i = {k : π_k > u_i} with log-weight log N(y_i; μ_k, Σ_k). Weights
/// enter only through eligibility.
pub fn update_allocations_slice(state: &mut DpmState, x: &FeatureMatrix, rng: &mut RngStream, mode: ExecMode) -> Result<()> {
    let k = state.k_rep();
    let eligible: Vec<(Vec<usize>, Vec<f64>)> = exec::map_indexed(mode, x.n(), |i| {
        let row = x.row(i);
        let u = state.u[i];
        let mut idx = Vec::new();
        let mut logdens = Vec::new();
        for c in 0..k {
            if state.pi[c] > u {
                idx.push(c);
                logdens.push(
                    mvn_logpdf(row, &state.components[c].mu, &state.components[c].chol)
                        .expect("state dimensions validated at init"),
                );
            }
        }
        (idx, logdens)
    });
    for (i, (idx, logdens)) in eligible.iter().enumerate() {
        if idx.is_empty() {
            return Err(Error::Internal(format!(
                "slice-eligible set empty for observation {i}; stick extension postcondition violated"
            )));
        }
        let pick = sample_categorical_log(logdens, rng)?;
        state.z[i] = idx[pick];
    }
    state.refresh_counts();
    Ok(())
}

/// Conjugate stick update: v_k ~ Beta(1 + n_k, m + Σ_{l>k} n_l), then
/// recompute the weights.
pub fn update_sticks(state: &mut DpmState, rng: &mut RngStream) -> Result<()> {
    let k = state.k_rep();
    let mut tail_after = vec![0usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        tail_after[i] = tail_after[i + 1] + state.counts[i + 1];
    }
    for i in 0..k {
        state.v[i] = sample_beta(1.0 + state.counts[i] as f64, state.m + tail_after[i] as f64, rng)?;
    }
    state.recompute_weights();
    Ok(())
}

/// Conjugate component update shared with the finite sampler; empty
/// represented components draw from the prior.
pub fn update_components_dpm(state: &mut DpmState, x: &FeatureMatrix, hyper: &NiwHyperparams, rng: &mut RngStream) -> Result<()> {
    state.components = draw_conditional_components(x, &state.z, state.k_rep(), hyper, rng)?;
    Ok(())
}

/// Exact Gamma conditional for the concentration under the Beta(1, m)
/// stick likelihood and Gamma(1,1) prior:
/// m ~ Gamma(1 + K_rep, 1 − Σ log(1 − v_k)).
pub fn update_concentration(state: &mut DpmState, rng: &mut RngStream) -> Result<()> {
    if state.k_rep() == 0 {
        return Err(Error::InvalidParameter("concentration update requires at least one stick".into()));
    }
    let rate = 1.0 - state.v.iter().map(|&v| (-v).ln_1p()).sum::<f64>();
    state.m = sample_gamma(1.0 + state.k_rep() as f64, rate, rng)?;
    Ok(())
}

fn relabel(z: &mut [usize], a: usize, b: usize) {
    for zi in z.iter_mut() {
        if *zi == a {
            *zi = b;
        } else if *zi == b {
            *zi = a;
        }
    }
}

/// Metropolis move exchanging the parameters and membership labels of
/// two uniformly chosen components while the stick weights stay put.
/// Accepts with min(1, (π_k/π_l)^{n_l − n_k}).
pub fn label_swap_random(state: &mut DpmState, rng: &mut RngStream) -> Result<bool> {
    let k_rep = state.k_rep();
    if k_rep < 2 {
        return Ok(false);
    }
    let k = (rng.sample::<f64, _>(Open01) * k_rep as f64) as usize % k_rep;
    let mut l = (rng.sample::<f64, _>(Open01) * (k_rep - 1) as f64) as usize % (k_rep - 1);
    if l >= k {
        l += 1;
    }
    let log_acc = (state.counts[l] as f64 - state.counts[k] as f64) * (state.log_pi[k] - state.log_pi[l]);
    let u: f64 = rng.sample(Open01);
    if u.ln() < log_acc {
        state.components.swap(k, l);
        state.counts.swap(k, l);
        relabel(&mut state.z, k, l);
        Ok(true)
    } else {
        Ok(false)
    }
}

/// Metropolis move exchanging adjacent components wholesale in stick
/// order (sticks, parameters, labels and occupancies all change
/// places). Only the stick-likelihood terms at the two positions
/// survive the ratio: min(1, (1 − v_{k+1})^{n_k} / (1 − v_k)^{n_{k+1}}).
pub fn label_swap_adjacent(state: &mut DpmState, rng: &mut RngStream) -> Result<bool> {
    let k_rep = state.k_rep();
    if k_rep < 2 {
        return Ok(false);
    }
    let k = (rng.sample::<f64, _>(Open01) * (k_rep - 1) as f64) as usize % (k_rep - 1);
    let log_acc = state.counts[k] as f64 * (-state.v[k + 1]).ln_1p() - state.counts[k + 1] as f64 * (-state.v[k]).ln_1p();
    let u: f64 = rng.sample(Open01);
    if u.ln() < log_acc {
        state.v.swap(k, k + 1);
        state.components.swap(k, k + 1);
        state.counts.swap(k, k + 1);
        relabel(&mut state.z, k, k + 1);
        state.recompute_weights();
        Ok(true)
    } else {
        Ok(false)
    }
}

/// Run configuration for [`DpmSampler`]. The concentration prior is
/// fixed at Gamma(1,1), initialized at its mean.
#[derive(Debug, Clone)]
pub struct RunDpmConfig {
    pub k_init: usize,
    pub hyper: NiwHyperparams,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Total label-switch attempts per sweep, alternating between the
    /// random and adjacent moves; 2 performs one of each.
    pub moves_per_sweep: usize,
    pub exec: ExecMode,
    /// Verify the slice invariant, mass identity, and allocation bounds
    /// after every sweep.
    pub check_invariants: bool,
}

impl RunDpmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_init == 0 {
            return Err(Error::InvalidConfig("K_init must be at least 1".into()));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thinning interval must be at least 1".into()));
        }
        Ok(())
    }
}

/// Single-chain slice sampler; the chain owns stream 1 of the run seed.
pub struct DpmSampler<'a> {
    x: &'a FeatureMatrix,
    config: RunDpmConfig,
    state: DpmState,
    rng: RngStream,
    sweeps_done: usize,
}

impl<'a> DpmSampler<'a> {
    pub fn new(x: &'a FeatureMatrix, config: RunDpmConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = RngStream::new(config.seed, 1);
        let state = init_dpm(x, config.k_init, &config.hyper, &mut rng)?;
        Ok(Self { x, config, state, rng, sweeps_done: 0 })
    }

    pub fn state(&self) -> &DpmState {
        &self.state
    }

    /// One full sweep: slices → stick extension → allocations → sticks
    /// → components → concentration → label switches → slice refresh.
    pub fn step(&mut self) -> Result<()> {
        let mode = self.config.exec;
        update_slices(&mut self.state, &mut self.rng)?;
        extend_sticks(&mut self.state, &self.config.hyper, &mut self.rng)?;
        update_allocations_slice(&mut self.state, self.x, &mut self.rng, mode)?;
        update_sticks(&mut self.state, &mut self.rng)?;
        update_components_dpm(&mut self.state, self.x, &self.config.hyper, &mut self.rng)?;
        update_concentration(&mut self.state, &mut self.rng)?;
        for j in 0..self.config.moves_per_sweep {
            if j % 2 == 0 {
                label_swap_random(&mut self.state, &mut self.rng)?;
            } else {
                label_swap_adjacent(&mut self.state, &mut self.rng)?;
            }
        }
        update_slices(&mut self.state, &mut self.rng)?;
        self.sweeps_done += 1;
        if self.config.check_invariants {
            self.verify_invariants()?;
        }
        Ok(())
    }

    fn verify_invariants(&self) -> Result<()> {
        let s = &self.state;
        if s.n() > 0 && !s.slice_invariant_holds() {
            return Err(Error::Internal(format!(
                "slice invariant violated after sweep {}",
                self.sweeps_done
            )));
        }
        let err = s.mass_identity_error();
        if err > 1e-9 {
            return Err(Error::Internal(format!(
                "stick mass identity off by {err:e} after sweep {}",
                self.sweeps_done
            )));
        }
        if s.z.iter().any(|&z| z >= s.k_rep()) {
            return Err(Error::Internal(format!(
                "allocation references unrepresented component after sweep {}",
                self.sweeps_done
            )));
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<AllocationTrace> {
        let (iterations, burn_in, thin) = (self.config.iterations, self.config.burn_in, self.config.thin);
        let mut draws = Vec::new();
        let mut occupied_counts = Vec::new();
        let mut weight_sums = Vec::new();
        let mut represented_counts = Vec::new();
        let mut concentrations = Vec::new();
        for it in 1..=iterations {
            self.step()?;
            if it > burn_in && (it - burn_in - 1) % thin == 0 {
                draws.push(self.state.z.clone());
                occupied_counts.push(self.state.occupied());
                weight_sums.push(self.state.log_pi.iter().sum());
                represented_counts.push(self.state.k_rep());
                concentrations.push(self.state.m);
            }
        }
        Ok(AllocationTrace {
            draws,
            occupied_counts,
            weight_sums,
            burn_in,
            swap_acceptance: Vec::new(),
            represented_counts,
            concentrations,
        })
    }
}

/// Convenience wrapper: build the sampler and run it.
pub fn run_dpm(x: &FeatureMatrix, config: &RunDpmConfig) -> Result<AllocationTrace> {
    DpmSampler::new(x, config.clone())?.run()
}

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rnshmc/adaptive.hpp"
#include "rnshmc/gp.hpp"
#include "rnshmc/model.hpp"
#include "rnshmc/rng.hpp"
#include "rnshmc/surrogate.hpp"
#include "rnshmc/training_set.hpp"

namespace rnshmc {

struct HMCConfig {
  double stepSize = 0.1;
  std::size_t maxLeapfrogSteps = 10;
  Vector massDiagonal;  // empty means identity
  bool jitterSteps = false;
  std::uint64_t seed = 0;

  void validate(std::size_t dim) const;
  Vector inverse_mass(std::size_t dim) const;
};

struct PhaseState {
  ParamVector q;
  Vector p;
};

/// Force field used to simulate trajectories. Only the proposal mechanism
/// changes between samplers; the acceptance test always uses the exact
/// Hamiltonian.
class GradientSource {
 public:
  virtual ~GradientSource() = default;
  virtual std::size_t dim() const = 0;

  /// Writes the gradient at q. Sources that obtain the exact potential as a
  /// by-product return it so the sampler can skip a separate evaluation.
  virtual std::optional<double> gradient(const ParamVector& q, Vector& grad) const = 0;

  /// Gradient without the exact-potential by-product; used for the interior
  /// leapfrog steps.
  virtual void gradient_only(const ParamVector& q, Vector& grad) const { gradient(q, grad); }

  /// True when gradient() is the exact gradient of the target potential.
  virtual bool exact() const { return false; }
};

class ExactGradient final : public GradientSource {
 public:
  explicit ExactGradient(const TargetModel& target) : target_(target) {}
  std::size_t dim() const override { return target_.dim(); }
  std::optional<double> gradient(const ParamVector& q, Vector& grad) const override {
    return target_.potential_and_gradient(q, grad);
  }
  void gradient_only(const ParamVector& q, Vector& grad) const override { target_.gradient_into(q, grad); }
  bool exact() const override { return true; }

 private:
  const TargetModel& target_;
};

/// Holds a snapshot of a network surrogate; the snapshot never changes.
class SurrogateGradient final : public GradientSource {
 public:
  explicit SurrogateGradient(std::shared_ptr<const SurrogateModel> model) : model_(std::move(model)) {}
  std::size_t dim() const override { return model_->dim(); }
  std::optional<double> gradient(const ParamVector& q, Vector& grad) const override {
    grad = model_->grad(q);
    return std::nullopt;
  }
  const SurrogateModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SurrogateModel> model_;
};

class GPGradient final : public GradientSource {
 public:
  explicit GPGradient(std::shared_ptr<const GPSurrogate> gp) : gp_(std::move(gp)) {}
  std::size_t dim() const override { return gp_->dim(); }
  std::optional<double> gradient(const ParamVector& q, Vector& grad) const override {
    grad = gp_->grad(q);
    return std::nullopt;
  }
  const GPSurrogate& model() const { return *gp_; }

 private:
  std::shared_ptr<const GPSurrogate> gp_;
};

struct Trajectory {
  PhaseState end;
  Vector endGradient;
  std::optional<double> endPotential;  // exact U at the end, when the source supplied it
};

/// `steps` leapfrog steps (half momentum step, full position step, half
/// momentum step) with the diagonal inverse mass applied elementwise. The
/// gradient at the start may be supplied to avoid recomputing it. Throws
/// DivergenceError naming the 1-based step when the state becomes non-finite.
Trajectory leapfrog(const GradientSource& source, const HMCConfig& cfg, const PhaseState& start,
                    std::size_t steps, const Vector* startGradient = nullptr);

double kinetic_energy(const HMCConfig& cfg, const Vector& p);

/// Exact Hamiltonian U(q) + 1/2 sum p_i^2 / M_i.
double hamiltonian(const TargetModel& target, const HMCConfig& cfg, const PhaseState& state);

/// Metropolis test: accept iff u < min(1, exp(currentH - proposalH)). A
/// non-finite proposal energy is always rejected.
bool mh_accept(double currentH, double proposalH, double u);

struct MHResult {
  ParamVector q;
  bool accepted;
};

MHResult mh_step(const TargetModel& target, const HMCConfig& cfg, const PhaseState& current,
                 const PhaseState& proposal, double u);

/// p ~ N(0, M) with M diagonal.
Vector sample_momentum(const HMCConfig& cfg, std::size_t dim, Rng& rng);

enum class Phase { exploration, exploitation };

const char* to_string(Phase phase);

/// Sample path with per-iteration bookkeeping. potentials[i] is the exact
/// U(samples[i]).
struct Chain {
  std::vector<ParamVector> samples;
  std::vector<double> potentials;
  std::vector<bool> accepted;
  std::vector<bool> divergent;
  std::vector<double> seconds;
  std::vector<Phase> phase;

  std::size_t size() const { return samples.size(); }
  std::size_t dim() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples[0].size()); }
  std::size_t count(Phase p) const;
  std::size_t divergences() const;
  double total_seconds(Phase p) const;
};

/// One HMC transition at a time against the exact Hamiltonian, with the
/// proposal force supplied per call. Owns the momentum, acceptance and jitter
/// random streams, so samplers built on it share identical draws for a given
/// seed regardless of which force field they use.
class HmcKernel {
 public:
  struct Transition {
    bool accepted = false;
    bool divergent = false;
    std::size_t steps = 0;
    ParamVector proposal;
    double proposalPotential = 0.0;  // NaN when divergent
    double seconds = 0.0;
  };

  HmcKernel(const TargetModel& target, HMCConfig cfg, ParamVector q0);

  Transition step(const GradientSource& proposer);

  const ParamVector& position() const { return q_; }
  double potential() const { return potential_; }
  const HMCConfig& config() const { return cfg_; }
  const TargetModel& target() const { return target_; }

 private:
  const TargetModel& target_;
  HMCConfig cfg_;
  ParamVector q_;
  double potential_;
  std::optional<Vector> exactGradient_;  // exact gradient at q_, when known
  Rng momentumRng_;
  Rng acceptRng_;
  Rng jitterRng_;
};

void record(Chain& chain, const HmcKernel& kernel, const HmcKernel::Transition& t, Phase phase);

/// Standard HMC. The first `burnIn` iterations are tagged as exploration.
Chain run_hmc(const TargetModel& target, const HMCConfig& cfg, const ParamVector& q0,
              std::size_t iterations, std::size_t burnIn = 0);

/// Builds a proposal force from the exploration-phase training set.
using SurrogateTrainer = std::function<std::shared_ptr<const GradientSource>(const TrainingSet&)>;

struct RnsOptions {
  std::size_t burnIterations = 5000;  // B
  std::size_t warmup = 1000;          // W: iterations excluded from the training set
  std::size_t postIterations = 5000;
  std::size_t hidden = 1000;  // s
  NodeKind nodeKind = NodeKind::additive;
  double ridge = 1e-6;
  NodeSamplingOptions nodeOptions;
  /// Also train on rejected proposals (their exact potential is computed anyway).
  bool includeRejected = false;
  /// Overrides the default ELM fit.
  SurrogateTrainer trainer;
};

struct RnsResult {
  Chain chain;
  std::optional<SurrogateModel> surrogate;  // set when the default ELM trainer ran
  std::shared_ptr<const GradientSource> proposer;
  TrainingSet training;
  double trainingSeconds = 0.0;
};

/// Two-phase surrogate HMC: exact HMC for B iterations collecting accepted
/// states after the warm-up, then HMC driven by the trained surrogate's
/// gradient with the exact Hamiltonian in the acceptance test.
RnsResult run_rns_hmc(const TargetModel& target, const HMCConfig& cfg, const ParamVector& q0,
                      const RnsOptions& options);

/// Trainer that fits a full GP (on at most `maxPoints` of the most recent
/// training pairs, targets centered).
SurrogateTrainer gp_trainer(const GPHyperparameters& hyper, std::size_t maxPoints);

/// a_t = min(1, c / t) for t >= 1 (a_0 = 1), or identically zero.
struct AdaptationSchedule {
  enum class Rule { harmonic, none };
  Rule rule = Rule::harmonic;
  double constant = 10.0;

  double rate(std::size_t t) const;
};

struct ArnsOptions {
  std::size_t iterations = 10000;
  std::size_t hidden = 1000;
  NodeKind nodeKind = NodeKind::additive;
  AdaptationSchedule schedule;
  /// Pairs collected with the exact gradient before the estimator is built.
  std::size_t initBatch = 100;
  NodeSamplingOptions nodeOptions;
  AdaptiveEstimator::Options estimator;
  /// Keep a copy of every published weight vector (for verification).
  bool recordPublications = false;
};

struct Publication {
  std::size_t iteration;  // chain index after which the weights were served
  std::size_t rows;       // training pairs the served estimator had absorbed
  Vector weights;         // stacked (v, b); empty unless recordPublications
};

struct ArnsResult {
  Chain chain;
  SurrogateModel surrogate;  // last published snapshot
  AdaptiveState state;
  TrainingSet stream;  // every (q^(t+1), U(q^(t+1))) pair in order
  std::vector<Publication> publications;
  std::size_t reinitializations = 0;
};

/// Adaptive surrogate HMC: the output weights are updated after every
/// iteration and republished to the sampler with probability a_t.
ArnsResult run_arns_hmc(const TargetModel& target, const HMCConfig& cfg, const ParamVector& q0,
                        const ArnsOptions& options);

}  // namespace rnshmc

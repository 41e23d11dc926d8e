#include "rnshmc/hmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace rnshmc {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

}  // namespace

void HMCConfig::validate(std::size_t dim) const {
  if (!(stepSize > 0.0) || !std::isfinite(stepSize)) throw Error("step size must be > 0");
  if (maxLeapfrogSteps < 1) throw Error("leapfrog steps must be >= 1");
  if (massDiagonal.size() != 0) {
    require_dim("mass diagonal", dim, massDiagonal.size());
    if (!(massDiagonal.minCoeff() > 0.0) || !massDiagonal.allFinite())
      throw Error("mass entries must be > 0");
  }
}

Vector HMCConfig::inverse_mass(std::size_t dim) const {
  if (massDiagonal.size() == 0) return Vector::Ones(static_cast<Eigen::Index>(dim));
  return massDiagonal.cwiseInverse();
}

Trajectory leapfrog(const GradientSource& source, const HMCConfig& cfg, const PhaseState& start,
                    std::size_t steps, const Vector* startGradient) {
  if (steps < 1) throw Error("leapfrog needs at least one step");
  require_dim("leapfrog position", source.dim(), start.q.size());
  require_dim("leapfrog momentum", source.dim(), start.p.size());
  const Vector invMass = cfg.inverse_mass(source.dim());
  const double eps = cfg.stepSize;

  Trajectory out;
  ParamVector& q = out.end.q;
  Vector& p = out.end.p;
  Vector& g = out.endGradient;
  q = start.q;
  p = start.p;
  if (startGradient != nullptr) {
    g = *startGradient;
  } else {
    source.gradient_only(q, g);
  }
  if (!g.allFinite()) throw DivergenceError(0);
  for (std::size_t l = 1; l <= steps; ++l) {
    p.noalias() -= 0.5 * eps * g;
    q.array() += eps * invMass.array() * p.array();
    if (!q.allFinite()) throw DivergenceError(l);
    if (l == steps) {
      out.endPotential = source.gradient(q, g);
    } else {
      source.gradient_only(q, g);
    }
    p.noalias() -= 0.5 * eps * g;
    if (!p.allFinite() || !g.allFinite()) throw DivergenceError(l);
  }
  return out;
}

double kinetic_energy(const HMCConfig& cfg, const Vector& p) {
  if (cfg.massDiagonal.size() == 0) return 0.5 * p.squaredNorm();
  require_dim("kinetic_energy", cfg.massDiagonal.size(), p.size());
  return 0.5 * (p.array().square() / cfg.massDiagonal.array()).sum();
}

double hamiltonian(const TargetModel& target, const HMCConfig& cfg, const PhaseState& state) {
  require_dim("hamiltonian momentum", target.dim(), state.p.size());
  return target.potential(state.q) + kinetic_energy(cfg, state.p);
}

bool mh_accept(double currentH, double proposalH, double u) {
  if (!std::isfinite(proposalH)) return false;
  return u < std::min(1.0, std::exp(currentH - proposalH));
}

MHResult mh_step(const TargetModel& target, const HMCConfig& cfg, const PhaseState& current,
                 const PhaseState& proposal, double u) {
  double proposalH = std::numeric_limits<double>::infinity();
  if (proposal.q.allFinite() && proposal.p.allFinite()) proposalH = hamiltonian(target, cfg, proposal);
  if (mh_accept(hamiltonian(target, cfg, current), proposalH, u)) return {proposal.q, true};
  return {current.q, false};
}

Vector sample_momentum(const HMCConfig& cfg, std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector p(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = normal(rng);
  if (cfg.massDiagonal.size() != 0) p.array() *= cfg.massDiagonal.array().sqrt();
  return p;
}

const char* to_string(Phase phase) {
  return phase == Phase::exploration ? "exploration" : "exploitation";
}

std::size_t Chain::count(Phase p) const {
  return static_cast<std::size_t>(std::count(phase.begin(), phase.end(), p));
}

std::size_t Chain::divergences() const {
  return static_cast<std::size_t>(std::count(divergent.begin(), divergent.end(), true));
}

double Chain::total_seconds(Phase p) const {
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (phase[i] == p) total += seconds[i];
  return total;
}

HmcKernel::HmcKernel(const TargetModel& target, HMCConfig cfg, ParamVector q0)
    : target_(target), cfg_(std::move(cfg)), q_(std::move(q0)),
      momentumRng_(make_stream(cfg_.seed, Stream::momentum)),
      acceptRng_(make_stream(cfg_.seed, Stream::acceptance)),
      jitterRng_(make_stream(cfg_.seed, Stream::jitter)) {
  cfg_.validate(target_.dim());
  require_dim("initial position", target_.dim(), q_.size());
  potential_ = target_.potential(q_);
  if (!std::isfinite(potential_)) throw Error("initial potential is not finite");
}

HmcKernel::Transition HmcKernel::step(const GradientSource& proposer) {
  const auto start = Clock::now();
  Transition tr;
  tr.steps = cfg_.maxLeapfrogSteps;
  if (cfg_.jitterSteps) {
    std::uniform_int_distribution<std::size_t> pick(1, cfg_.maxLeapfrogSteps);
    tr.steps = pick(jitterRng_);
  }
  const Vector p = sample_momentum(cfg_, target_.dim(), momentumRng_);
  const double u = uniform01(acceptRng_);
  const double currentH = potential_ + kinetic_energy(cfg_, p);

  const bool exactForce = proposer.exact();
  const Vector* cached = exactForce && exactGradient_ ? &*exactGradient_ : nullptr;
  try {
    Trajectory traj = leapfrog(proposer, cfg_, PhaseState{q_, p}, tr.steps, cached);
    const double proposalU =
        exactForce && traj.endPotential ? *traj.endPotential : target_.potential(traj.end.q);
    const double proposalH = proposalU + kinetic_energy(cfg_, traj.end.p);
    tr.proposal = traj.end.q;
    tr.proposalPotential = proposalU;
    tr.divergent = !std::isfinite(proposalH);
    tr.accepted = mh_accept(currentH, proposalH, u);
    if (tr.accepted) {
      q_ = std::move(traj.end.q);
      potential_ = proposalU;
      if (exactForce) {
        exactGradient_ = std::move(traj.endGradient);
      } else {
        exactGradient_.reset();
      }
    }
  } catch (const DivergenceError&) {
    tr.divergent = true;
    tr.accepted = false;
    tr.proposal = q_;
    tr.proposalPotential = std::numeric_limits<double>::quiet_NaN();
  }
  tr.seconds = elapsed(start);
  return tr;
}

void record(Chain& chain, const HmcKernel& kernel, const HmcKernel::Transition& t, Phase phase) {
  chain.samples.push_back(kernel.position());
  chain.potentials.push_back(kernel.potential());
  chain.accepted.push_back(t.accepted);
  chain.divergent.push_back(t.divergent);
  chain.seconds.push_back(t.seconds);
  chain.phase.push_back(phase);
}

Chain run_hmc(const TargetModel& target, const HMCConfig& cfg, const ParamVector& q0,
              std::size_t iterations, std::size_t burnIn) {
  if (iterations < 1) throw Error("run_hmc needs at least one iteration");
  HmcKernel kernel(target, cfg, q0);
  const ExactGradient exact(target);
  Chain chain;
  for (std::size_t t = 0; t < iterations; ++t) {
    const auto tr = kernel.step(exact);
    record(chain, kernel, tr, t < burnIn ? Phase::exploration : Phase::exploitation);
  }
  return chain;
}

RnsResult run_rns_hmc(const TargetModel& target, const HMCConfig& cfg, const ParamVector& q0,
                      const RnsOptions& options) {
  if (options.burnIterations <= options.warmup)
    throw Error("burn-in iterations must exceed the warm-up length");
  HmcKernel kernel(target, cfg, q0);
  const ExactGradient exact(target);
  RnsResult out;

  for (std::size_t t = 0; t < options.burnIterations; ++t) {
    const auto tr = kernel.step(exact);
    record(out.chain, kernel, tr, Phase::exploration);
    if (t < options.warmup || tr.divergent) continue;
    if (tr.accepted || options.includeRejected) out.training.add(tr.proposal, tr.proposalPotential);
  }
  if (out.training.empty())
    throw Error("no accepted proposals after the warm-up; lengthen the burn-in");

  const auto trainStart = Clock::now();
  if (options.trainer) {
    out.proposer = options.trainer(out.training);
  } else {
    const HiddenNodes nodes = sample_hidden_nodes(options.nodeKind, options.hidden, target.dim(),
                                                  out.training, cfg.seed, options.nodeOptions);
    SurrogateModel model = elm_fit(nodes, out.training, options.ridge);
    model.seed = cfg.seed;
    out.surrogate = model;
    out.proposer = std::make_shared<SurrogateGradient>(std::make_shared<const SurrogateModel>(std::move(model)));
  }
  out.trainingSeconds = elapsed(trainStart);

  for (std::size_t t = 0; t < options.postIterations; ++t) {
    const auto tr = kernel.step(*out.proposer);
    record(out.chain, kernel, tr, Phase::exploitation);
  }
  return out;
}

SurrogateTrainer gp_trainer(const GPHyperparameters& hyper, std::size_t maxPoints) {
  return [hyper, maxPoints](const TrainingSet& data) -> std::shared_ptr<const GradientSource> {
    const TrainingSet recent = data.suffix(maxPoints);
    GPHyperparameters h = hyper;
    if (!(h.lengthScale > 0.0)) {
      std::vector<ParamVector> sub = recent.suffix(500).points();
      h.lengthScale = median_pairwise_distance(sub);
    }
    if (!(h.signalVariance > 0.0)) {
      const Vector t = recent.target_vector();
      const double var = (t.array() - t.mean()).square().mean();
      h.signalVariance = var > 0.0 ? var : 1.0;
    }
    if (h.noiseVariance < 0.0) h.noiseVariance = 1e-8 * h.signalVariance;
    return std::make_shared<GPGradient>(std::make_shared<const GPSurrogate>(gp_fit(recent, h, true)));
  };
}

double AdaptationSchedule::rate(std::size_t t) const {
  if (rule == Rule::none) return 0.0;
  if (t == 0) return 1.0;
  return std::min(1.0, constant / static_cast<double>(t));
}

ArnsResult run_arns_hmc(const TargetModel& target, const HMCConfig& cfg, const ParamVector& q0,
                        const ArnsOptions& options) {
  HmcKernel kernel(target, cfg, q0);
  const ExactGradient exact(target);
  Rng adaptRng = make_stream(cfg.seed, Stream::adaptation);
  ArnsResult out;

  HiddenNodes nodes;
  std::optional<AdaptiveEstimator> estimator;
  std::shared_ptr<const SurrogateModel> served;
  std::unique_ptr<SurrogateGradient> source;
  std::size_t updates = 0;

  auto publish = [&](std::size_t iteration) {
    SurrogateModel model;
    model.nodes = nodes;
    model.seed = cfg.seed;
    model.outputWeights = Vector::Zero(static_cast<Eigen::Index>(nodes.size()));
    model.set_stacked_weights(estimator->weights());
    served = std::make_shared<const SurrogateModel>(std::move(model));
    source = std::make_unique<SurrogateGradient>(served);
    Publication pub{iteration, estimator->count(), Vector()};
    if (options.recordPublications) pub.weights = estimator->weights();
    out.publications.push_back(std::move(pub));
  };
  auto initialize = [&](std::size_t iteration) {
    // Nodes are drawn once, from the bootstrap batch, and stay frozen.
    nodes = sample_hidden_nodes(options.nodeKind, options.hidden, target.dim(), out.stream, cfg.seed,
                                options.nodeOptions);
    estimator.emplace(feature_matrix(nodes, out.stream), out.stream.target_vector(), options.estimator);
    publish(iteration);
  };

  if (options.initBatch == 0) initialize(0);
  for (std::size_t t = 0; t < options.iterations; ++t) {
    const bool bootstrap = !source;
    const auto tr = kernel.step(bootstrap ? static_cast<const GradientSource&>(exact) : *source);
    record(out.chain, kernel, tr, bootstrap ? Phase::exploration : Phase::exploitation);

    const auto start = Clock::now();
    out.stream.add(kernel.position(), kernel.potential());
    if (!estimator) {
      if (out.stream.size() >= options.initBatch) initialize(t);
    } else {
      estimator->update(feature_map(nodes, kernel.position()), kernel.potential());
      ++updates;
      if (uniform01(adaptRng) < options.schedule.rate(updates)) publish(t);
    }
    out.chain.seconds.back() += elapsed(start);
  }

  if (estimator) {
    out.surrogate = *served;
    out.state = estimator->state();
    out.reinitializations = estimator->reinitializations();
  }
  return out;
}

}  // namespace rnshmc

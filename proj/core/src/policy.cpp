#include "interfere/policy.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <utility>

#include "interfere/errors.hpp"

namespace interfere {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 5> kPolicyNames{{
    {PolicyKind::gibbs_ts, "gibbs_ts"},
    {PolicyKind::etc_ts, "etc_ts"},
    {PolicyKind::known_a_ts, "known_a_ts"},
    {PolicyKind::no_interference_ts, "no_interference_ts"},
    {PolicyKind::uniform_random, "uniform_random"},
}};

Eigen::MatrixXd dense(const Adjacency& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : a.edges())
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  return m;
}

// Shared machinery: a GibbsSampler over the fit spec plus the optimizer.
class SamplerPolicy : public Policy {
 public:
  SamplerPolicy(const PolicySpec& spec, const Environment& env, std::size_t budget,
                Adjacency initial, bool update_edges, std::size_t sweeps)
      : spec_(spec),
        fit_(fit_spec(spec, env)),
        budget_(budget),
        sampler_(fit_,
                 Prior::isotropic(fit_.dimension(), spec.prior_mean, spec.prior_var,
                                  spec.noise_var > 0.0 ? spec.noise_var : env.sigma * env.sigma,
                                  spec.rho),
                 GibbsOptions{sweeps, spec.edge_order, update_edges}, std::move(initial)) {}

  void observe(const Treatment& z, std::span<const double> r) override { sampler_.observe(z, r); }

  std::optional<Adjacency> current_graph() const override { return sampler_.graph(); }

  std::optional<Eigen::MatrixXd> edge_marginals(std::size_t sweeps, Rng& rng) override {
    return sampler_.edge_marginals(sweeps, rng);
  }

  std::optional<Eigen::VectorXd> posterior_mean(const Adjacency& a) override {
    sampler_.set_graph(a);
    return sampler_.conditional_mean();
  }

 protected:
  Treatment thompson_step(Rng& rng) {
    sampler_.run(rng);
    return optimize_treatment(fit_, sampler_.theta(), sampler_.graph(), budget_, spec_.optimizer,
                              rng)
        .z;
  }

  PolicySpec spec_;
  RewardSpec fit_;
  std::size_t budget_;
  GibbsSampler sampler_;
};

class GibbsTs final : public SamplerPolicy {
 public:
  GibbsTs(const PolicySpec& spec, const Environment& env, std::size_t budget, Rng& rng)
      : SamplerPolicy(spec, env, budget, GibbsSampler::draw_prior_graph(env.spec.n, spec.rho, rng),
                      true, spec.sweeps) {}

  Treatment select(std::size_t t, Rng& rng) override {
    if (t < spec_.warmup) return random_subset(fit_.n, budget_, rng);
    return thompson_step(rng);
  }
};

// Known-A, no-interference: theta-only TS under a fixed graph, one draw per round.
class FixedGraphTs final : public SamplerPolicy {
 public:
  FixedGraphTs(const PolicySpec& spec, const Environment& env, std::size_t budget, Adjacency a)
      : SamplerPolicy(spec, env, budget, std::move(a), false, 1) {}

  Treatment select(std::size_t t, Rng& rng) override {
    if (t < spec_.warmup) return random_subset(fit_.n, budget_, rng);
    return thompson_step(rng);
  }
};

class EtcTs final : public SamplerPolicy {
 public:
  EtcTs(const PolicySpec& spec, const Environment& env, std::size_t budget, std::size_t m)
      : SamplerPolicy(spec, env, budget, Adjacency(env.spec.n), false, 1),
        m_(m),
        sigma_(std::sqrt(spec.noise_var > 0.0 ? spec.noise_var : env.sigma * env.sigma)),
        iso_(env.spec.n) {}

  Treatment select(std::size_t t, Rng& rng) override {
    if (t < phase1_rounds()) {
      Treatment z(fit_.n, 0);
      if (budget_ > 0) z[t / m_] = 1;
      return z;
    }
    return thompson_step(rng);
  }

  void observe(const Treatment& z, std::span<const double> r) override {
    SamplerPolicy::observe(z, r);
    if (seen_ < phase1_rounds()) {
      iso_.add(seen_ / m_, r);
      if (++seen_ == phase1_rounds()) {
        a_hat_ = etc_threshold(iso_.means(), spec_.etc.rule, spec_.etc.delta_gamma, sigma_, m_);
        sampler_.set_graph(*a_hat_);
      }
    }
  }

  std::optional<Adjacency> current_graph() const override { return a_hat_; }

 private:
  std::size_t phase1_rounds() const { return fit_.n * m_; }

  std::size_t m_;
  double sigma_;
  IsolationMeans iso_;
  std::size_t seen_ = 0;
  std::optional<Adjacency> a_hat_;
};

class UniformRandom final : public Policy {
 public:
  UniformRandom(std::size_t n, std::size_t budget) : n_(n), budget_(budget) {}
  Treatment select(std::size_t, Rng& rng) override { return random_subset(n_, budget_, rng); }
  void observe(const Treatment&, std::span<const double>) override {}

 private:
  std::size_t n_, budget_;
};

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames)
    if (k == kind) return name;
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames)
    if (n == name) return k;
  throw ParameterError("unknown policy kind '" + std::string(name) + "'");
}

RewardSpec fit_spec(const PolicySpec& spec, const Environment& env) {
  const RewardKind kind = spec.fit.value_or(env.spec.kind);
  const std::size_t d_max = spec.fit_d_max ? spec.fit_d_max : env.spec.d_max;
  return make_spec(kind, env.spec.n, d_max ? d_max : 4);
}

std::size_t resolved_etc_m(const PolicySpec& spec, const Environment& env, std::size_t horizon) {
  if (spec.etc.m > 0) return spec.etc.m;
  const double sigma = spec.noise_var > 0.0 ? std::sqrt(spec.noise_var) : env.sigma;
  return etc_m(sigma, spec.etc.delta_gamma, env.spec.n, horizon);
}

std::optional<Eigen::MatrixXd> Policy::edge_marginals(std::size_t, Rng&) {
  if (auto g = current_graph()) return dense(*g);
  return std::nullopt;
}

Treatment random_subset(std::size_t n, std::size_t k, Rng& rng) {
  k = std::min(k, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Treatment z(n, 0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto span = static_cast<double>(n - i);
    const std::size_t pick = i + std::min(static_cast<std::size_t>(uniform01(rng) * span), n - i - 1);
    std::swap(order[i], order[pick]);
    z[order[i]] = 1;
  }
  return z;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Environment& env,
                                    std::size_t budget, std::size_t horizon, Rng& rng) {
  const std::size_t n = env.spec.n;
  if (budget == 0 || budget > n)
    throw ParameterError("budget must lie in [1, n], got " + std::to_string(budget));
  if (!(spec.rho > 0.0 && spec.rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
  switch (spec.kind) {
    case PolicyKind::gibbs_ts:
      return std::make_unique<GibbsTs>(spec, env, budget, rng);
    case PolicyKind::known_a_ts:
      return std::make_unique<FixedGraphTs>(spec, env, budget, env.graph);
    case PolicyKind::no_interference_ts:
      return std::make_unique<FixedGraphTs>(spec, env, budget, Adjacency(n));
    case PolicyKind::etc_ts: {
      if (!(spec.etc.delta_gamma > 0.0)) throw ParameterError("etc delta_gamma must be positive");
      const std::size_t m = resolved_etc_m(spec, env, horizon);
      if (n * m > horizon)
        throw ParameterError("etc phase 1 needs n*m = " + std::to_string(n * m) +
                             " rounds, more than the horizon " + std::to_string(horizon));
      return std::make_unique<EtcTs>(spec, env, budget, m);
    }
    case PolicyKind::uniform_random:
      return std::make_unique<UniformRandom>(n, budget);
  }
  throw ParameterError("unknown policy kind");
}

}  // namespace interfere

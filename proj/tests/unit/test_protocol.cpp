#include <doctest.h>

#include <cmath>

#include "interfere/errors.hpp"
#include "interfere/protocol.hpp"

using namespace interfere;

namespace {

const ThetaBlock& block(const RewardSpec& spec, const std::string& name) {
  static std::vector<ThetaBlock> keep;
  keep = theta_blocks(spec);
  for (const auto& b : keep)
    if (b.name == name) return b;
  FAIL("missing block " << name);
  return keep.front();
}

}  // namespace

TEST_CASE("village draws stay in the unit interval") {
  const RewardSpec spec = make_spec(RewardKind::linear_in_means_per_node, 63);
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd th = sample_params(spec, builtin_protocol("village"), rng);
    CHECK(th.size() == 126);
    CHECK(th.minCoeff() >= 0.0);
    CHECK(th.maxCoeff() <= 1.0);
  }
}

TEST_CASE("head-to-head ranges") {
  const RewardSpec spec = make_spec(RewardKind::pairwise_nia, 8);
  Rng rng(2);
  for (const char* name : {"head_to_head_small_xi", "head_to_head_large_xi"}) {
    const double xi = std::string(name) == "head_to_head_small_xi" ? 0.4 : 3.0;
    const Eigen::VectorXd th = sample_params(spec, builtin_protocol(name), rng);
    const auto& mu = block(spec, "mu");
    const Eigen::VectorXd m = th.segment(mu.offset, mu.length);
    CHECK(m.minCoeff() >= 0.5);
    CHECK(m.maxCoeff() <= 1.5);
    const auto& g = block(spec, "gamma");
    CHECK(g.length == 28);
    const Eigen::VectorXd gm = th.segment(g.offset, g.length);
    CHECK(gm.minCoeff() >= 0.3);
    CHECK(gm.maxCoeff() <= 1.0);
    const auto& x = block(spec, "xi");
    CHECK(x.length == 168);
    const Eigen::VectorXd xv = th.segment(x.offset, x.length);
    CHECK(xv.cwiseAbs().maxCoeff() <= xi);
    CHECK(xv.cwiseAbs().maxCoeff() > 0.5 * xi);
  }
}

TEST_CASE("point masses give exact constants") {
  const RewardSpec spec = make_spec(RewardKind::paired_indicator, 8);
  Rng rng(3);
  const Eigen::VectorXd th = sample_params(spec, builtin_protocol("paired"), rng);
  CHECK(th[0] == 0.0);
  CHECK(th[1] == 1.0);

  ParamProtocol fixed{"fixed", {{"mu", Distribution::constant(2.0)}, {"beta", Distribution::constant(-1.0)}}};
  const Eigen::VectorXd lim = sample_params(make_spec(RewardKind::linear_in_means_per_node, 4), fixed, rng);
  CHECK(lim.head(4) == Eigen::VectorXd::Constant(4, 2.0));
  CHECK(lim.tail(4) == Eigen::VectorXd::Constant(4, -1.0));
}

TEST_CASE("count-based buckets center on their index") {
  const RewardSpec spec = make_spec(RewardKind::count_based_shared, 10, 4);
  Rng rng(4);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
  const int draws = 20000;
  for (int s = 0; s < draws; ++s) mean += sample_params(spec, builtin_protocol("count_based"), rng);
  mean /= draws;
  CHECK(std::abs(mean[0] - 1.0) < 4 * 0.2 / std::sqrt(draws));
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(mean[k] - k) < 4 * 0.5 / std::sqrt(draws));
}

TEST_CASE("shared protocols copy one draw to every node") {
  const RewardSpec spec = make_spec(RewardKind::linear_in_means_per_node, 50);
  Rng rng(5);
  const Eigen::VectorXd th = sample_params(spec, builtin_protocol("linear_means_shared"), rng);
  CHECK(th.head(50) == Eigen::VectorXd::Constant(50, th[0]));
  CHECK(th.tail(50) == Eigen::VectorXd::Constant(50, th[50]));
}

TEST_CASE("protocol must match the reward kind") {
  Rng rng(6);
  CHECK_THROWS_AS(sample_params(make_spec(RewardKind::pairwise_nia, 4), builtin_protocol("village"), rng),
                  ParameterError);
  CHECK_THROWS_AS(builtin_protocol("nope"), ParameterError);
  for (const auto& name : builtin_protocol_names()) CHECK(builtin_protocol(name).name == name);
}

TEST_CASE("sampling is deterministic given the seed") {
  const RewardSpec spec = make_spec(RewardKind::pairwise_nia, 6);
  Rng a(77), b(77);
  CHECK(sample_params(spec, builtin_protocol("head_to_head_small_xi"), a) ==
        sample_params(spec, builtin_protocol("head_to_head_small_xi"), b));
}

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string_view>

#include "interfere/graph.hpp"
#include "interfere/posterior.hpp"
#include "interfere/reward_model.hpp"
#include "interfere/rng.hpp"

namespace interfere {

enum class ThresholdRule {
  theorem,   // A_ij = 1{rbar_ij > delta/2}, OR over the two directions
  adaptive,  // rbar_ij - rbar_ii > 3 sigma sqrt(2/m), max over the two directions
};

std::string_view to_string(ThresholdRule rule);
ThresholdRule parse_threshold_rule(std::string_view name);

/// ceil(8 sigma^2 ln(n^2 T) / delta^2), at least 1.
std::size_t etc_m(double sigma, double delta, std::size_t n, std::size_t horizon);

/// Isolation means: entry (i, j) is node i's mean reward while e_j was played.
struct IsolationMeans {
  Eigen::MatrixXd sum;
  Eigen::MatrixXd count;

  explicit IsolationMeans(std::size_t n = 0);
  void add(std::size_t treated, std::span<const double> r);
  Eigen::MatrixXd means() const;
};

Adjacency etc_threshold(const Eigen::MatrixXd& means, ThresholdRule rule, double delta,
                        double sigma, std::size_t m);

struct EtcPhase1 {
  Adjacency a_hat;
  Eigen::MatrixXd means;
  History history;
};

/// Plays e_0 (m rounds), e_1 (m rounds), ... against env, drawing noise
/// from `noise`, and thresholds the isolation means.
EtcPhase1 etc_phase1(const Environment& env, std::size_t m, ThresholdRule rule, double delta,
                     Rng& noise);

}  // namespace interfere

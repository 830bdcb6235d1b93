#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>

#include "interfere/reward_model.hpp"

namespace interfere::detail {

inline std::size_t choose2(std::size_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

inline std::size_t treated_count(std::span<const std::uint8_t> z,
                                 std::span<const std::size_t> neighbors) {
  std::size_t c = 0;
  for (std::size_t k : neighbors) c += z[k];
  return c;
}

/// Calls emit(index, value) for every nonzero feature of node i's row.
/// Indices within one call are distinct.
template <class Emit>
void visit_features(const RewardSpec& spec, std::span<const std::uint8_t> z,
                    std::size_t i, std::span<const std::size_t> nbrs, Emit&& emit) {
  const std::size_t n = spec.n;
  const std::size_t pairs_offset = n;
  auto emit_pairs = [&] {
    for (std::size_t k : nbrs)
      if (z[k]) emit(pairs_offset + pair_index(n, i, k), 1.0);
  };
  switch (spec.kind) {
    case RewardKind::linear_in_means_per_node: {
      if (z[i]) emit(i, 1.0);
      if (!nbrs.empty()) {
        const std::size_t c = treated_count(z, nbrs);
        if (c) emit(n + i, static_cast<double>(c) / static_cast<double>(nbrs.size()));
      }
      return;
    }
    case RewardKind::count_based_shared: {
      if (z[i]) emit(0, 1.0);
      const std::size_t c = treated_count(z, nbrs);
      if (c) emit(std::min(c, spec.d_max), 1.0);
      return;
    }
    case RewardKind::count_based_per_node: {
      if (z[i]) emit(i, 1.0);
      const std::size_t c = treated_count(z, nbrs);
      if (c) emit(n + i * spec.d_max + std::min(c, spec.d_max) - 1, 1.0);
      return;
    }
    case RewardKind::pairwise_nia: {
      if (z[i]) emit(i, 1.0);
      emit_pairs();
      const std::size_t triples_offset = n + choose2(n) + i * choose2(n - 1);
      for (std::size_t a = 0; a < nbrs.size(); ++a) {
        const std::size_t j = nbrs[a];
        if (!z[j]) continue;
        const std::size_t jj = j - (j > i);
        for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
          const std::size_t k = nbrs[b];
          if (!z[k]) continue;
          emit(triples_offset + pair_index(n - 1, jj, k - (k > i)), 1.0);
        }
      }
      return;
    }
    case RewardKind::additive_pairs: {
      if (z[i]) emit(i, 1.0);
      emit_pairs();
      return;
    }
    case RewardKind::saturation_spec_a: {
      if (z[i] && treated_count(z, nbrs) == 0) emit(i, 1.0);
      emit_pairs();
      return;
    }
    case RewardKind::interaction_spec_b: {
      if (z[i]) emit(i, 1.0);
      emit_pairs();
      if (z[i]) {
        const std::size_t c = treated_count(z, nbrs);
        if (c) emit(n + choose2(n) + i, static_cast<double>(c));
      }
      return;
    }
    case RewardKind::paired_indicator: {
      if (z[i]) emit(0, 1.0);
      if (treated_count(z, nbrs) == 1) emit(1, 1.0);
      return;
    }
  }
}

template <class Vec>
double row_dot(const RewardSpec& spec, const Vec& theta, std::span<const std::uint8_t> z,
               std::size_t i, std::span<const std::size_t> nbrs) {
  double acc = 0.0;
  visit_features(spec, z, i, nbrs, [&](std::size_t idx, double v) { acc += v * theta[idx]; });
  return acc;
}

}  // namespace interfere::detail

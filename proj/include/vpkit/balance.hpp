#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpkit/manifest.hpp"

namespace vpkit {

enum class BalanceMethod { Adaptive, Random };

struct BalancePlan {
  std::vector<std::size_t> additions_per_bin;
  BalanceMethod method = BalanceMethod::Adaptive;
  std::optional<std::size_t> budget;

  std::size_t total() const;
  bool operator==(const BalancePlan&) const = default;
};

/// Counts of azimuth_bin labels over K bins.
std::vector<std::size_t> bin_counts(const DatasetManifest& m, int classes);

/// Unconstrained: additions_k = max(h) - h_k, the fewest samples that make the
/// histogram flat. With a smaller budget the ideal additions are scaled to sum
/// to the budget by largest remainder (ties to the most deficient bin, then the
/// lower index).
BalancePlan plan_adaptive(std::span<const std::size_t> histogram, std::optional<std::size_t> budget = {});

/// n additions drawn uniformly over K bins.
BalancePlan plan_random(std::size_t n_additions, int classes, std::uint64_t seed);

/// Real rows followed by pool rows drawn without replacement per bin (bins in
/// ascending order). Throws InputError naming the bin and shortfall when the
/// pool is too small.
DatasetManifest apply_plan(const DatasetManifest& real, const DatasetManifest& pool, const BalancePlan& plan,
                           std::uint64_t seed);

nlohmann::ordered_json to_json(const BalancePlan& p);
BalancePlan balance_plan_from_json(const nlohmann::json& j);

}  // namespace vpkit

#include "vpkit/balance.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "vpkit/error.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {

std::size_t BalancePlan::total() const {
  return std::accumulate(additions_per_bin.begin(), additions_per_bin.end(), std::size_t{0});
}

std::vector<std::size_t> bin_counts(const DatasetManifest& m, int classes) {
  if (classes < 1) throw InputError("bin_counts: K must be positive");
  std::vector<std::size_t> h(static_cast<std::size_t>(classes), 0);
  for (const auto& r : m.rows) {
    if (r.azimuth_bin < 0 || r.azimuth_bin >= classes) {
      throw InputError(fmt::format("{}: bin {} outside K={}", r.sample_id, r.azimuth_bin, classes));
    }
    ++h[static_cast<std::size_t>(r.azimuth_bin)];
  }
  return h;
}

BalancePlan plan_adaptive(std::span<const std::size_t> histogram, std::optional<std::size_t> budget) {
  if (histogram.empty()) throw InputError("plan_adaptive: empty histogram");
  BalancePlan plan;
  plan.method = BalanceMethod::Adaptive;
  plan.budget = budget;
  const std::size_t top = *std::max_element(histogram.begin(), histogram.end());
  std::vector<std::size_t> ideal(histogram.size());
  for (std::size_t k = 0; k < histogram.size(); ++k) ideal[k] = top - histogram[k];
  const std::size_t total = std::accumulate(ideal.begin(), ideal.end(), std::size_t{0});
  if (!budget || *budget >= total) {
    plan.additions_per_bin = std::move(ideal);
    return plan;
  }
  // Largest remainder on exact integer fractions ideal_k * B / total.
  const std::size_t b = *budget;
  plan.additions_per_bin.resize(ideal.size());
  std::vector<std::size_t> remainder(ideal.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < ideal.size(); ++k) {
    const unsigned __int128 num = static_cast<unsigned __int128>(ideal[k]) * b;
    plan.additions_per_bin[k] = static_cast<std::size_t>(num / total);
    remainder[k] = static_cast<std::size_t>(num % total);
    assigned += plan.additions_per_bin[k];
  }
  std::vector<std::size_t> order(ideal.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    if (remainder[a] != remainder[c]) return remainder[a] > remainder[c];
    return ideal[a] > ideal[c];
  });
  for (std::size_t i = 0; assigned < b; ++i, ++assigned) ++plan.additions_per_bin[order[i]];
  return plan;
}

BalancePlan plan_random(std::size_t n_additions, int classes, std::uint64_t seed) {
  if (classes < 1) throw InputError("plan_random: K must be positive");
  BalancePlan plan;
  plan.method = BalanceMethod::Random;
  plan.budget = n_additions;
  plan.additions_per_bin.assign(static_cast<std::size_t>(classes), 0);
  Rng rng(derive_seed(seed, "balance/random"));
  for (std::size_t i = 0; i < n_additions; ++i) ++plan.additions_per_bin[rng.below(static_cast<std::uint64_t>(classes))];
  return plan;
}

DatasetManifest apply_plan(const DatasetManifest& real, const DatasetManifest& pool, const BalancePlan& plan,
                           std::uint64_t seed) {
  const int k = static_cast<int>(plan.additions_per_bin.size());
  std::vector<std::vector<std::size_t>> by_bin(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < pool.rows.size(); ++i) {
    const int b = pool.rows[i].azimuth_bin;
    if (b < 0 || b >= k) throw InputError(fmt::format("pool sample {} has bin {} outside K={}", pool.rows[i].sample_id, b, k));
    by_bin[static_cast<std::size_t>(b)].push_back(i);
  }
  for (int b = 0; b < k; ++b) {
    const std::size_t need = plan.additions_per_bin[static_cast<std::size_t>(b)];
    const std::size_t have = by_bin[static_cast<std::size_t>(b)].size();
    if (need > have) {
      throw InputError(fmt::format("synthetic pool too small in bin {}: need {}, have {} (short by {})", b, need, have,
                                   need - have));
    }
  }
  DatasetManifest out = real;
  std::unordered_set<std::string> ids;
  for (const auto& r : real.rows) ids.insert(r.sample_id);
  for (int b = 0; b < k; ++b) {
    auto& idx = by_bin[static_cast<std::size_t>(b)];
    Rng rng(derive_seed(seed, fmt::format("balance/bin/{}", b)));
    rng.shuffle(std::span(idx));
    for (std::size_t i = 0; i < plan.additions_per_bin[static_cast<std::size_t>(b)]; ++i) {
      const auto& row = pool.rows[idx[i]];
      if (!ids.insert(row.sample_id).second) throw InputError("balance: duplicate sample_id " + row.sample_id);
      out.rows.push_back(row);
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const BalancePlan& p) {
  nlohmann::ordered_json j;
  j["method"] = p.method == BalanceMethod::Adaptive ? "adaptive" : "random";
  if (p.budget) j["budget"] = *p.budget;
  else j["budget"] = nullptr;
  j["total"] = p.total();
  j["additions_per_bin"] = p.additions_per_bin;
  return j;
}

BalancePlan balance_plan_from_json(const nlohmann::json& j) {
  try {
    BalancePlan p;
    const auto m = j.at("method").get<std::string>();
    if (m == "adaptive") p.method = BalanceMethod::Adaptive;
    else if (m == "random") p.method = BalanceMethod::Random;
    else throw InputError("balance plan: unknown method " + m);
    if (!j.at("budget").is_null()) p.budget = j.at("budget").get<std::size_t>();
    p.additions_per_bin = j.at("additions_per_bin").get<std::vector<std::size_t>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("balance plan: ") + e.what());
  }
}

}  // namespace vpkit

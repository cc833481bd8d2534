#include "packing.hpp"

#include <numeric>

namespace bamsim::detail {

namespace {

constexpr std::size_t kMaxDpStates = 1u << 22;

struct StateSpace {
  int n = 0;                        // budget count
  std::size_t states = 1;           // product of (budget+1) over budgets 0..n-2
  std::vector<std::size_t> stride;  // per tracked budget
  std::vector<std::vector<Bandwidth>> coord;  // coord[j][flat]
  std::vector<Bandwidth> coord_sum;           // per flat

  explicit StateSpace(const std::vector<Bandwidth>& budgets) {
    n = static_cast<int>(budgets.size());
    stride.assign(n > 0 ? n - 1 : 0, 1);
    for (int j = 0; j < n - 1; ++j) {
      stride[j] = states;
      states *= static_cast<std::size_t>(budgets[j] + 1);
      if (states > kMaxDpStates) {
        fail(ErrorCode::BadState, "share vector too large for exact assignment");
      }
    }
    coord.assign(n > 0 ? n - 1 : 0, {});
    coord_sum.assign(states, 0);
    for (int j = 0; j < n - 1; ++j) {
      coord[j].assign(states, 0);
      const std::size_t dim = static_cast<std::size_t>(budgets[j] + 1);
      for (std::size_t flat = 0; flat < states; ++flat) {
        coord[j][flat] = static_cast<Bandwidth>((flat / stride[j]) % dim);
      }
    }
    for (std::size_t flat = 0; flat < states; ++flat) {
      Bandwidth s = 0;
      for (int j = 0; j < n - 1; ++j) s += coord[j][flat];
      coord_sum[flat] = s;
    }
  }
};

}  // namespace

bool packable(const std::vector<Bandwidth>& budgets,
              const std::vector<Bandwidth>& sizes) {
  const int n = static_cast<int>(budgets.size());
  if (n == 0) return sizes.empty();
  const Bandwidth total = std::accumulate(sizes.begin(), sizes.end(), Bandwidth{0});
  const Bandwidth room = std::accumulate(budgets.begin(), budgets.end(), Bandwidth{0});
  if (total > room) return false;
  if (n == 1) return total <= budgets[0];

  const StateSpace ss(budgets);
  std::vector<char> dp(ss.states, 0), nx(ss.states, 0);
  dp[0] = 1;
  for (const Bandwidth s : sizes) {
    std::fill(nx.begin(), nx.end(), 0);
    for (std::size_t flat = 0; flat < ss.states; ++flat) {
      if (!dp[flat]) continue;
      nx[flat] = 1;  // place into the last budget, checked at the end
      for (int j = 0; j < n - 1; ++j) {
        if (ss.coord[j][flat] + s <= budgets[j]) {
          nx[flat + static_cast<std::size_t>(s) * ss.stride[j]] = 1;
        }
      }
    }
    dp.swap(nx);
  }
  for (std::size_t flat = 0; flat < ss.states; ++flat) {
    if (dp[flat] && total - ss.coord_sum[flat] <= budgets[n - 1]) return true;
  }
  return false;
}

std::optional<std::vector<int>> pack_assign(
    const std::vector<Bandwidth>& budgets, const std::vector<Bandwidth>& sizes,
    const std::vector<int>& pinned,
    const std::vector<std::vector<int>>& preference) {
  const int n = static_cast<int>(budgets.size());
  const int m = static_cast<int>(sizes.size());
  if (n == 0) {
    if (m == 0) return std::vector<int>{};
    return std::nullopt;
  }
  const Bandwidth total = std::accumulate(sizes.begin(), sizes.end(), Bandwidth{0});
  if (n == 1) {
    if (total > budgets[0]) return std::nullopt;
    return std::vector<int>(m, 0);
  }

  const StateSpace ss(budgets);

  // layers[i][flat]: items i..m-1 can still be placed from this load vector.
  std::vector<std::vector<char>> layers(m + 1, std::vector<char>(ss.states, 0));
  std::vector<Bandwidth> placed(m + 1, 0);
  for (int i = 0; i < m; ++i) placed[i + 1] = placed[i] + sizes[i];
  for (std::size_t flat = 0; flat < ss.states; ++flat) {
    layers[m][flat] = (total - ss.coord_sum[flat] <= budgets[n - 1]) ? 1 : 0;
  }
  for (int i = m - 1; i >= 0; --i) {
    const Bandwidth s = sizes[i];
    for (std::size_t flat = 0; flat < ss.states; ++flat) {
      char ok = 0;
      const int pin = pinned[i];
      for (int j = 0; j < n && !ok; ++j) {
        if (pin >= 0 && j != pin) continue;
        if (j == n - 1) {
          ok = layers[i + 1][flat];
        } else if (ss.coord[j][flat] + s <= budgets[j]) {
          ok = layers[i + 1][flat + static_cast<std::size_t>(s) * ss.stride[j]];
        }
      }
      layers[i][flat] = ok;
    }
  }
  if (!layers[0][0]) return std::nullopt;

  std::vector<int> out(m, -1);
  std::size_t flat = 0;
  for (int i = 0; i < m; ++i) {
    const Bandwidth s = sizes[i];
    auto try_budget = [&](int j) {
      if (j == n - 1) {
        if (layers[i + 1][flat]) {
          out[i] = j;
          return true;
        }
        return false;
      }
      if (ss.coord[j][flat] + s <= budgets[j]) {
        const std::size_t next = flat + static_cast<std::size_t>(s) * ss.stride[j];
        if (layers[i + 1][next]) {
          out[i] = j;
          flat = next;
          return true;
        }
      }
      return false;
    };
    if (pinned[i] >= 0) {
      // The backward pass only used the pinned budget for this item, so the
      // pin must be viable here.
      if (!try_budget(pinned[i])) {
        fail(ErrorCode::BadState, "assignment reconstruction failed");
      }
      continue;
    }
    bool done = false;
    for (const int j : preference[i]) {
      if (try_budget(j)) {
        done = true;
        break;
      }
    }
    for (int j = 0; j < n && !done; ++j) done = try_budget(j);
    if (!done) fail(ErrorCode::BadState, "assignment reconstruction failed");
  }
  return out;
}

}  // namespace bamsim::detail

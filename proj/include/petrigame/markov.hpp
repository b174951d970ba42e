#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

#include "petrigame/errors.hpp"
#include "petrigame/rational.hpp"

namespace petrigame {

/// One row of a stochastic matrix: (column, probability), ascending columns.
using SparseRow = std::vector<std::pair<int, Rational>>;
using SparseMatrix = std::vector<SparseRow>;

inline SparseRow normalize_row(SparseRow row) {
  std::sort(row.begin(), row.end());
  SparseRow out;
  for (auto& [col, value] : row) {
    if (value == 0) continue;
    if (!out.empty() && out.back().first == col)
      out.back().second += value;
    else
      out.emplace_back(col, value);
  }
  return out;
}

inline Rational row_sum(const SparseRow& row) {
  Rational sum = 0;
  for (const auto& [col, value] : row) sum += value;
  return sum;
}

/// Solves A x = b for several right-hand sides by Gauss-Jordan elimination
/// over the rationals. Throws on singular systems.
inline std::vector<RatVec> solve_linear(std::vector<RatVec> a, std::vector<RatVec> rhs) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw Error("singular linear system");
    std::swap(a[pivot], a[col]);
    for (auto& r : rhs) std::swap(r[pivot], r[col]);
    const Rational inv = a[col][col];
    for (std::size_t j = 0; j < n; ++j) a[col][j] /= inv;
    for (auto& r : rhs) r[col] /= inv;
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational factor = a[row][col];
      for (std::size_t j = col; j < n; ++j) a[row][j] -= factor * a[col][j];
      for (auto& r : rhs) r[row] -= factor * r[col];
    }
  }
  return rhs;
}

inline RatVec solve_linear(const std::vector<RatVec>& a, const RatVec& b) {
  return solve_linear(a, std::vector<RatVec>{b}).front();
}

/// Tarjan strongly connected components; returned in a deterministic order
/// (reverse topological, then rotated so indexing is stable).
inline std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> components;
  int counter = 0;

  // Iterative Tarjan to dodge deep recursion on long chains.
  struct Frame {
    int node;
    std::size_t next_child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> call_stack{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call_stack.empty()) {
      Frame& frame = call_stack.back();
      if (frame.next_child < adjacency[frame.node].size()) {
        const int child = adjacency[frame.node][frame.next_child++];
        if (index[child] < 0) {
          index[child] = low[child] = counter++;
          stack.push_back(child);
          on_stack[child] = true;
          call_stack.push_back({child, 0});
        } else if (on_stack[child]) {
          low[frame.node] = std::min(low[frame.node], index[child]);
        }
      } else {
        if (low[frame.node] == index[frame.node]) {
          std::vector<int> component;
          while (true) {
            const int v = stack.back();
            stack.pop_back();
            on_stack[v] = false;
            component.push_back(v);
            if (v == frame.node) break;
          }
          std::sort(component.begin(), component.end());
          components.push_back(std::move(component));
        }
        const int node = frame.node;
        call_stack.pop_back();
        if (!call_stack.empty())
          low[call_stack.back().node] = std::min(low[call_stack.back().node], low[node]);
      }
    }
  }
  std::sort(components.begin(), components.end());
  return components;
}

struct ChainStructure {
  std::vector<bool> reachable;                 // from the start state
  std::vector<std::vector<int>> recurrent;     // closed classes within the reachable part
  std::vector<int> class_of;                   // recurrent class index per state, -1 if transient
};

inline ChainStructure chain_structure(const SparseMatrix& p, int start) {
  const int n = static_cast<int>(p.size());
  ChainStructure cs;
  cs.reachable.assign(n, false);
  cs.class_of.assign(n, -1);
  std::deque<int> queue{start};
  cs.reachable[start] = true;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (const auto& [target, prob] : p[s])
      if (prob != 0 && !cs.reachable[target]) {
        cs.reachable[target] = true;
        queue.push_back(target);
      }
  }
  std::vector<std::vector<int>> adjacency(n);
  for (int s = 0; s < n; ++s) {
    if (!cs.reachable[s]) continue;
    for (const auto& [target, prob] : p[s])
      if (prob != 0) adjacency[s].push_back(target);
  }
  for (const auto& component : strongly_connected_components(adjacency)) {
    if (!cs.reachable[component.front()]) continue;
    bool closed = true;
    for (int s : component)
      for (const auto& [target, prob] : p[s])
        if (prob != 0 && !std::binary_search(component.begin(), component.end(), target))
          closed = false;
    if (!closed) continue;
    const int c = static_cast<int>(cs.recurrent.size());
    for (int s : component) cs.class_of[s] = c;
    cs.recurrent.push_back(component);
  }
  return cs;
}

/// Stationary distribution of an irreducible chain restricted to `states`.
inline RatVec stationary_distribution(const SparseMatrix& p, const std::vector<int>& states) {
  const int k = static_cast<int>(states.size());
  std::vector<int> local(p.size(), -1);
  for (int i = 0; i < k; ++i) local[states[i]] = i;
  // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<RatVec> a(k, RatVec(k, Rational(0)));
  RatVec b(k, Rational(0));
  for (int i = 0; i < k; ++i) {
    for (const auto& [target, prob] : p[states[i]]) {
      if (prob == 0) continue;
      const int j = local[target];
      a[j][i] += prob;  // transposed
    }
    a[i][i] -= 1;
  }
  for (int j = 0; j < k; ++j) a[k - 1][j] = 1;
  b[k - 1] = 1;
  return solve_linear(a, b);
}

/// Limiting average state distribution of the chain started at `start`:
/// absorption probabilities into each recurrent class combined with the
/// class stationary distributions. Transient states get weight zero.
inline RatVec limiting_average_distribution(const SparseMatrix& p, int start) {
  const int n = static_cast<int>(p.size());
  const ChainStructure cs = chain_structure(p, start);
  RatVec mu(n, Rational(0));
  if (cs.recurrent.empty()) throw Error("chain has no recurrent class");

  std::vector<int> transient;
  for (int s = 0; s < n; ++s)
    if (cs.reachable[s] && cs.class_of[s] < 0) transient.push_back(s);

  const int classes = static_cast<int>(cs.recurrent.size());
  std::vector<RatVec> absorb(classes, RatVec(std::max<std::size_t>(transient.size(), 1), Rational(0)));
  if (!transient.empty()) {
    const int m = static_cast<int>(transient.size());
    std::vector<int> local(n, -1);
    for (int i = 0; i < m; ++i) local[transient[i]] = i;
    std::vector<RatVec> a(m, RatVec(m, Rational(0)));
    std::vector<RatVec> rhs(classes, RatVec(m, Rational(0)));
    for (int i = 0; i < m; ++i) {
      a[i][i] = 1;
      for (const auto& [target, prob] : p[transient[i]]) {
        if (prob == 0) continue;
        if (cs.class_of[target] >= 0)
          rhs[cs.class_of[target]][i] += prob;
        else
          a[i][local[target]] -= prob;
      }
    }
    absorb = solve_linear(a, rhs);
  }

  for (int c = 0; c < classes; ++c) {
    Rational weight;
    if (cs.class_of[start] == c)
      weight = 1;
    else if (cs.class_of[start] >= 0)
      weight = 0;
    else {
      int i = 0;
      while (transient[i] != start) ++i;
      weight = absorb[c][i];
    }
    if (weight == 0) continue;
    const RatVec pi = stationary_distribution(p, cs.recurrent[c]);
    for (std::size_t i = 0; i < cs.recurrent[c].size(); ++i)
      mu[cs.recurrent[c][i]] = weight * pi[i];
  }
  return mu;
}

/// Gain and bias of a fixed chain with scalar rewards, for average-reward
/// policy evaluation: g = Pg and g + h = r + Ph, with the bias pinned to
/// zero at the first state of each recurrent class. States unreachable from
/// anywhere relevant still get well-defined values (the whole chain is
/// analyzed, not just the part reachable from one start).
struct GainBias {
  RatVec gain;
  RatVec bias;
};

inline GainBias evaluate_chain(const SparseMatrix& p, const RatVec& reward) {
  const int n = static_cast<int>(p.size());
  std::vector<std::vector<int>> adjacency(n);
  for (int s = 0; s < n; ++s)
    for (const auto& [target, prob] : p[s])
      if (prob != 0) adjacency[s].push_back(target);

  std::vector<int> class_of(n, -1);
  std::vector<std::vector<int>> recurrent;
  for (const auto& component : strongly_connected_components(adjacency)) {
    bool closed = true;
    for (int s : component)
      for (const auto& [target, prob] : p[s])
        if (prob != 0 && !std::binary_search(component.begin(), component.end(), target))
          closed = false;
    if (!closed) continue;
    for (int s : component) class_of[s] = static_cast<int>(recurrent.size());
    recurrent.push_back(component);
  }

  GainBias gb;
  gb.gain.assign(n, Rational(0));
  gb.bias.assign(n, Rational(0));

  for (const auto& component : recurrent) {
    const RatVec pi = stationary_distribution(p, component);
    Rational g = 0;
    for (std::size_t i = 0; i < component.size(); ++i) g += pi[i] * reward[component[i]];
    for (int s : component) gb.gain[s] = g;
    // (I - P) h = r - g on the class, h(first) = 0 pinning the free constant.
    const int k = static_cast<int>(component.size());
    std::vector<int> local(n, -1);
    for (int i = 0; i < k; ++i) local[component[i]] = i;
    std::vector<RatVec> a(k, RatVec(k, Rational(0)));
    RatVec b(k, Rational(0));
    for (int i = 0; i < k; ++i) {
      if (i == 0) {
        a[0][0] = 1;
        b[0] = 0;
        continue;
      }
      a[i][i] += 1;
      for (const auto& [target, prob] : p[component[i]])
        if (prob != 0) a[i][local[target]] -= prob;
      b[i] = reward[component[i]] - g;
    }
    const RatVec h = solve_linear(a, b);
    for (int i = 0; i < k; ++i) gb.bias[component[i]] = h[i];
  }

  std::vector<int> transient;
  for (int s = 0; s < n; ++s)
    if (class_of[s] < 0) transient.push_back(s);
  if (!transient.empty()) {
    const int m = static_cast<int>(transient.size());
    std::vector<int> local(n, -1);
    for (int i = 0; i < m; ++i) local[transient[i]] = i;
    std::vector<RatVec> a(m, RatVec(m, Rational(0)));
    RatVec bg(m, Rational(0));
    for (int i = 0; i < m; ++i) {
      a[i][i] = 1;
      for (const auto& [target, prob] : p[transient[i]]) {
        if (prob == 0) continue;
        if (class_of[target] >= 0)
          bg[i] += prob * gb.gain[target];
        else
          a[i][local[target]] -= prob;
      }
    }
    const RatVec gt = solve_linear(a, bg);
    for (int i = 0; i < m; ++i) gb.gain[transient[i]] = gt[i];
    RatVec bh(m, Rational(0));
    for (int i = 0; i < m; ++i) {
      bh[i] = reward[transient[i]] - gb.gain[transient[i]];
      for (const auto& [target, prob] : p[transient[i]]) {
        if (prob == 0) continue;
        if (class_of[target] >= 0) bh[i] += prob * gb.bias[target];
      }
    }
    const RatVec ht = solve_linear(a, bh);
    for (int i = 0; i < m; ++i) gb.bias[transient[i]] = ht[i];
  }
  return gb;
}

}  // namespace petrigame

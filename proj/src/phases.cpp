#include "wsq/phases.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "wsq/errors.hpp"

namespace wsq {

namespace {

constexpr double pi = std::numbers::pi;

// Reduce x into [0, m).
double wrap(double x, double m) {
  double r = std::fmod(x, m);
  if (r < 0.0) r += m;
  if (r >= m) r -= m;
  return r;
}

// Reduce x into (−m/2, m/2].
double wrap_centered(double x, double m) {
  double r = wrap(x, m);
  if (r > m / 2.0) r -= m;
  return r;
}

class OffsetUnionFind {
 public:
  OffsetUnionFind(const std::vector<std::string>& labels, double modulus)
      : labels_(labels), parent_(labels.size()), offset_(labels.size(), 0.0), modulus_(modulus) {
    for (std::size_t i = 0; i < parent_.size(); ++i) parent_[i] = i;
  }

  // Returns (root, phase(x) − phase(root) mod M), compressing the path.
  std::pair<std::size_t, double> find(std::size_t x) {
    std::vector<std::size_t> path;
    while (parent_[x] != x) {
      path.push_back(x);
      x = parent_[x];
    }
    const std::size_t root = x;
    // Walk back from the node nearest the root, accumulating offsets.
    double acc = 0.0;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      acc = wrap(acc + offset_[*it], modulus_);
      offset_[*it] = acc;
      parent_[*it] = root;
    }
    return {root, path.empty() ? 0.0 : offset_[path.front()]};
  }

  // Attach the root with the larger label below the one with the smaller label
  // so that phase(a_root) − phase(b_root) = delta.
  void link(std::size_t ra, std::size_t rb, double delta) {
    if (labels_[ra] < labels_[rb]) {
      parent_[rb] = ra;
      offset_[rb] = wrap(-delta, modulus_);
    } else {
      parent_[ra] = rb;
      offset_[ra] = wrap(delta, modulus_);
    }
  }

 private:
  const std::vector<std::string>& labels_;
  std::vector<std::size_t> parent_;
  std::vector<double> offset_;
  double modulus_;
};

std::unordered_map<std::string, std::size_t> index_labels(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);
  return index;
}

std::size_t lookup(const std::unordered_map<std::string, std::size_t>& index,
                   const std::string& label) {
  auto it = index.find(label);
  if (it == index.end()) throw PreconditionError("phase constraint: unknown label '" + label + "'");
  return it->second;
}

// Constraint indices along the spanning-forest path from a to b.
std::vector<std::size_t> tree_path(
    const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& adjacency,
    std::size_t a, std::size_t b) {
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> via_node(adjacency.size(), none), via_edge(adjacency.size(), none);
  std::queue<std::size_t> queue;
  queue.push(a);
  via_node[a] = a;
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop();
    if (x == b) break;
    for (auto [y, e] : adjacency[x]) {
      if (via_node[y] != none) continue;
      via_node[y] = x;
      via_edge[y] = e;
      queue.push(y);
    }
  }
  std::vector<std::size_t> edges;
  for (std::size_t x = b; x != a; x = via_node[x]) edges.push_back(via_edge[x]);
  std::reverse(edges.begin(), edges.end());
  return edges;
}

std::vector<double> angles_of(const VersionAssignment& v, const std::vector<std::string>& labels) {
  std::vector<double> out;
  for (const auto& l : labels) out.push_back(std::arg(v.phase(l)));
  return out;
}

}  // namespace

Complex VersionAssignment::phase(const std::string& label) const {
  auto it = phases.find(label);
  if (it == phases.end()) throw PreconditionError("no version for label '" + label + "'");
  return it->second;
}

AlignResult align_phases(const std::vector<PhaseConstraint>& constraints,
                         const std::vector<std::string>& labels, const PhaseOptions& options) {
  const double modulus = options.modulus == PhaseModulus::pi ? pi : 2.0 * pi;
  const auto index = index_labels(labels);
  OffsetUnionFind uf(labels, modulus);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> forest(labels.size());

  AlignResult result;
  for (std::size_t ci = 0; ci < constraints.size(); ++ci) {
    const auto& c = constraints[ci];
    const std::size_t a = lookup(index, c.left);
    const std::size_t b = lookup(index, c.right);
    if (std::abs(c.value) == 0.0)
      throw PreconditionError("phase constraint between '" + c.left + "' and '" + c.right +
                              "' has zero value");
    const double arg = std::arg(c.value);
    // Want phase(a) − phase(b) ≡ −arg.
    const auto [ra, pa] = uf.find(a);
    const auto [rb, pb] = uf.find(b);
    if (ra != rb) {
      uf.link(ra, rb, -arg - pa + pb);
      forest[a].push_back({b, ci});
      forest[b].push_back({a, ci});
      continue;
    }
    const double defect = wrap_centered(pa - pb + arg, modulus);
    if (std::abs(defect) > options.angle_tol) {
      PhaseObstruction obstruction;
      for (std::size_t e : tree_path(forest, a, b)) obstruction.cycle.push_back(constraints[e]);
      obstruction.cycle.push_back(c);
      obstruction.defect = defect;
      result.obstruction = std::move(obstruction);
      return result;
    }
  }

  VersionAssignment versions;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double angle = uf.find(i).second;
    versions.phases[labels[i]] = std::polar(1.0, angle);
  }
  result.versions = std::move(versions);
  return result;
}

std::optional<double> cycle_defect(const std::vector<PhaseConstraint>& cycle,
                                   PhaseModulus modulus) {
  if (cycle.empty()) return std::nullopt;
  const double m = modulus == PhaseModulus::pi ? pi : 2.0 * pi;
  for (const std::string& start : {cycle.front().left, cycle.front().right}) {
    std::string at = start;
    double total = 0.0;
    bool chained = true;
    for (const auto& c : cycle) {
      if (c.left == at) {
        total += std::arg(c.value);
        at = c.right;
      } else if (c.right == at) {
        total -= std::arg(c.value);
        at = c.left;
      } else {
        chained = false;
        break;
      }
    }
    if (chained && at == start) return wrap_centered(total, m);
  }
  return std::nullopt;
}

double normalized_residual(const PhaseConstraint& c, const VersionAssignment& versions) {
  const Complex z = versions.phase(c.left) * std::conj(versions.phase(c.right)) * c.value;
  return std::abs(z.imag()) / std::abs(c.value);
}

double max_normalized_residual(const std::vector<PhaseConstraint>& constraints,
                               const VersionAssignment& versions) {
  double m = 0.0;
  for (const auto& c : constraints) m = std::max(m, normalized_residual(c, versions));
  return m;
}

OracleResult oracle_align(const std::vector<PhaseConstraint>& constraints,
                          const std::vector<std::string>& labels, int steps) {
  if (labels.size() > max_oracle_labels) {
    std::ostringstream os;
    os << "oracle_align: " << labels.size() << " labels exceed the limit of "
       << max_oracle_labels;
    throw PreconditionError(os.str());
  }
  if (steps < 1) throw PreconditionError("oracle_align: steps must be positive");
  const auto index = index_labels(labels);
  struct Edge {
    std::size_t a, b;
    double arg;
  };
  std::vector<Edge> edges;
  for (const auto& c : constraints)
    edges.push_back({lookup(index, c.left), lookup(index, c.right), std::arg(c.value)});

  const std::size_t n = labels.size();
  const double step = 2.0 * pi / steps;
  std::vector<int> grid(n, 0);
  std::vector<int> best_grid(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double worst = 0.0;
    for (const auto& e : edges) {
      worst = std::max(worst, std::abs(std::sin((grid[e.a] - grid[e.b]) * step + e.arg)));
      if (worst >= best) break;
    }
    if (worst < best) {
      best = worst;
      best_grid = grid;
    }
    // Odometer over labels 1..n-1; label 0 stays at phase 1.
    std::size_t pos = 1;
    while (pos < n && ++grid[pos] == steps) grid[pos++] = 0;
    if (pos >= n) break;
  }

  OracleResult out;
  for (std::size_t i = 0; i < n; ++i)
    out.versions.phases[labels[i]] = std::polar(1.0, best_grid[i] * step);
  out.max_residual = edges.empty() ? 0.0 : best;
  return out;
}

OracleResult polish_phases(const std::vector<PhaseConstraint>& constraints,
                           const std::vector<std::string>& labels,
                           const VersionAssignment& start, int iterations) {
  const auto index = index_labels(labels);
  const std::size_t n = labels.size();
  std::vector<double> theta = angles_of(start, labels);

  auto residuals = [&](const std::vector<double>& t) {
    std::vector<double> r;
    for (const auto& c : constraints)
      r.push_back(std::sin(t[lookup(index, c.left)] - t[lookup(index, c.right)] +
                           std::arg(c.value)));
    return r;
  };
  auto cost = [](const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
  };

  double damping = 1e-3;
  std::vector<double> r = residuals(theta);
  double current = cost(r);
  for (int it = 0; it < iterations && current > 1e-30 && n > 1; ++it) {
    // Normal equations on labels 1..n-1 (label 0 pinned).
    const std::size_t m = n - 1;
    std::vector<double> jtj(m * m, 0.0), jtr(m, 0.0);
    for (std::size_t ci = 0; ci < constraints.size(); ++ci) {
      const auto& c = constraints[ci];
      const std::size_t a = lookup(index, c.left), b = lookup(index, c.right);
      const double deriv = std::cos(theta[a] - theta[b] + std::arg(c.value));
      std::vector<std::pair<std::size_t, double>> row;
      if (a > 0) row.push_back({a - 1, deriv});
      if (b > 0) row.push_back({b - 1, -deriv});
      for (auto [i, gi] : row) {
        jtr[i] += gi * r[ci];
        for (auto [j, gj] : row) jtj[i * m + j] += gi * gj;
      }
    }
    bool improved = false;
    for (int attempt = 0; attempt < 20 && !improved; ++attempt) {
      std::vector<double> a = jtj, rhs = jtr;
      for (std::size_t i = 0; i < m; ++i) a[i * m + i] += damping * (1.0 + jtj[i * m + i]);
      // Gaussian elimination with partial pivoting on the small damped system.
      std::vector<double> delta(m, 0.0);
      bool singular = false;
      for (std::size_t col = 0; col < m && !singular; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < m; ++row)
          if (std::abs(a[row * m + col]) > std::abs(a[piv * m + col])) piv = row;
        if (std::abs(a[piv * m + col]) < 1e-300) {
          singular = true;
          break;
        }
        if (piv != col) {
          for (std::size_t k = 0; k < m; ++k) std::swap(a[col * m + k], a[piv * m + k]);
          std::swap(rhs[col], rhs[piv]);
        }
        for (std::size_t row = col + 1; row < m; ++row) {
          const double f = a[row * m + col] / a[col * m + col];
          for (std::size_t k = col; k < m; ++k) a[row * m + k] -= f * a[col * m + k];
          rhs[row] -= f * rhs[col];
        }
      }
      if (!singular) {
        for (std::size_t i = m; i-- > 0;) {
          double s = rhs[i];
          for (std::size_t k = i + 1; k < m; ++k) s -= a[i * m + k] * delta[k];
          delta[i] = s / a[i * m + i];
        }
      }
      std::vector<double> trial = theta;
      for (std::size_t i = 0; i < m; ++i) trial[i + 1] -= delta[i];
      const auto rt = residuals(trial);
      const double ct = cost(rt);
      if (!singular && ct < current) {
        theta = trial;
        r = rt;
        current = ct;
        damping = std::max(damping / 10.0, 1e-12);
        improved = true;
      } else {
        damping *= 10.0;
      }
    }
    if (!improved) break;
  }

  OracleResult out;
  for (std::size_t i = 0; i < n; ++i) out.versions.phases[labels[i]] = std::polar(1.0, theta[i]);
  out.max_residual = max_normalized_residual(constraints, out.versions);
  return out;
}

}  // namespace wsq

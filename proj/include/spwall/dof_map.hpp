#pragma once

// Degree-of-freedom bookkeeping: two displacement components per node,
// Dirichlet constraints with prescribed values, equal-dof ties (periodic
// boundaries, shear-column kinematics) and elimination of nodes that no
// active element touches. Constrained slots never enter the solved system.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "spwall/common.hpp"

namespace spwall {

struct Constraint {
  int node = 0;
  int comp = 0;  // 0 = x, 1 = y
  double value = 0.0;
};

struct Tie {
  int node_a = 0, comp_a = 0;
  int node_b = 0, comp_b = 0;
};

class DofMap {
 public:
  static DofMap build(int n_nodes, const std::vector<std::uint8_t>& node_used,
                      const std::vector<Constraint>& constraints,
                      const std::vector<Tie>& ties) {
    DofMap dm;
    dm.n_slots_ = 2 * n_nodes;
    std::vector<int> parent(dm.n_slots_);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int s) {
      while (parent[s] != s) {
        parent[s] = parent[parent[s]];
        s = parent[s];
      }
      return s;
    };
    for (const auto& t : ties) {
      const int ra = find(2 * t.node_a + t.comp_a);
      const int rb = find(2 * t.node_b + t.comp_b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }

    std::vector<std::uint8_t> fixed(dm.n_slots_, 0);
    std::vector<double> value(dm.n_slots_, 0.0);
    for (const auto& c : constraints) {
      const int r = find(2 * c.node + c.comp);
      if (fixed[r] && std::abs(value[r] - c.value) > 1e-12)
        throw ConfigError("conflicting prescribed values on tied dofs");
      fixed[r] = 1;
      value[r] = c.value;
    }
    for (int n = 0; n < n_nodes; ++n) {
      if (!node_used[n]) {
        fixed[find(2 * n)] = 1;
        fixed[find(2 * n + 1)] = 1;
      }
    }

    dm.root_.resize(dm.n_slots_);
    dm.index_.assign(dm.n_slots_, -1);
    dm.value_.assign(dm.n_slots_, 0.0);
    std::vector<int> root_index(dm.n_slots_, -1);
    dm.n_active_ = 0;
    for (int s = 0; s < dm.n_slots_; ++s) {
      const int r = find(s);
      dm.root_[s] = r;
      if (fixed[r]) {
        dm.value_[s] = value[r];
        continue;
      }
      if (root_index[r] < 0) root_index[r] = dm.n_active_++;
      dm.index_[s] = root_index[r];
    }
    return dm;
  }

  int n_active() const { return n_active_; }
  int n_slots() const { return n_slots_; }
  int index(int node, int comp) const { return index_[2 * node + comp]; }
  int index_slot(int slot) const { return index_[slot]; }
  bool constrained_slot(int slot) const { return index_[slot] < 0; }
  double fixed_value_slot(int slot) const { return value_[slot]; }

  // Sum a full-slot vector into active-dof space (tied slots accumulate;
  // use for forces).
  Eigen::VectorXd reduce(const std::vector<double>& full) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n_active_);
    for (int s = 0; s < n_slots_; ++s)
      if (index_[s] >= 0) r(index_[s]) += full[s];
    return r;
  }

  // Gather a full-slot vector into active-dof space taking one value per
  // dof (tied slots carry equal values; use for displacements/patterns).
  Eigen::VectorXd pick(const std::vector<double>& full) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n_active_);
    for (int s = n_slots_ - 1; s >= 0; --s)
      if (index_[s] >= 0) r(index_[s]) = full[s];
    return r;
  }

  // Write active-dof values back into a full-slot displacement vector,
  // filling constrained slots with their prescribed values.
  void expand(const Eigen::VectorXd& reduced, std::vector<double>& full) const {
    for (int s = 0; s < n_slots_; ++s)
      full[s] = index_[s] >= 0 ? reduced(index_[s]) : value_[s];
  }

  // Apply prescribed values to a full-slot vector without touching free
  // slots (used to seed a Newton iterate).
  void impose_values(std::vector<double>& full) const {
    for (int s = 0; s < n_slots_; ++s)
      if (index_[s] < 0) full[s] = value_[s];
  }

 private:
  int n_slots_ = 0;
  int n_active_ = 0;
  std::vector<int> root_;
  std::vector<int> index_;
  std::vector<double> value_;
};

}  // namespace spwall

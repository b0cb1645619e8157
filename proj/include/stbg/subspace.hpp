#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "stbg/numerics.hpp"

namespace stbg {

/// Fixed-capacity FIFO of state vectors, oldest first. Each state records
/// whether it came from an observed brick or from a model-synthesized one.
class StateRing {
public:
  explicit StateRing(std::size_t capacity = 60) : capacity_(capacity) {}

  void push(Vector z, bool observed = true) {
    if (capacity_ == 0) return;
    if (states_.size() == capacity_) {
      states_.pop_front();
      observed_.pop_front();
    }
    states_.push_back(std::move(z));
    observed_.push_back(observed);
  }

  std::size_t size() const { return states_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return states_.empty(); }
  const Vector& operator[](std::size_t i) const { return states_[i]; }
  const Vector& back() const { return states_.back(); }
  bool observed(std::size_t i) const { return observed_[i]; }

  /// States as columns, oldest first.
  Matrix as_columns() const;
  std::vector<bool> observed_flags() const { return {observed_.begin(), observed_.end()}; }

private:
  std::size_t capacity_;
  std::deque<Vector> states_;
  std::deque<bool> observed_;
};

struct SubspaceParams {
  double t_d = 0.5;     // appearance dimension threshold on singular values
  double t_deps = 0.5;  // noise dimension threshold
  std::size_t span = 60;
  // Singular values are divided by this before comparison with t_d. The
  // pipeline sets it to the descriptor's full-scale value.
  double dim_scale = 1.0;
};

/// Per-location ARMA background model: v = C z + w, z' = A z + B e.
struct SubspaceModel {
  Matrix c;       // m x d, orthonormal columns
  Vector lambda;  // d eigenvalues of the running covariance, non-increasing
  Matrix a;       // d x d
  Matrix b;       // d x d_eps
  Matrix b_pinv;  // d_eps x d, cached pinv(b)
  StateRing states;
  Vector z_latest;

  Eigen::Index dim() const { return c.cols(); }
  Eigen::Index noise_dim() const { return b.cols(); }
  Eigen::Index descriptor_length() const { return c.rows(); }
};

/// Largest count k with values[k-1] > threshold, clamped to [floor, size].
std::size_t select_dim(const Vector& values, double threshold, std::size_t floor);

struct Dynamics {
  Matrix a;
  Matrix b;
};

/// Fits A and B over the consecutive column pairs of `states` whose later
/// state is observed (all pairs when `observed` is empty). Requires at least
/// two columns. With fewer than d observed pairs both matrices come back
/// empty and the caller keeps its previous dynamics.
Dynamics fit_dynamics(const Matrix& states, double t_deps,
                      const std::vector<bool>& observed = {});

/// Identifies C, A, B and the state sequence from n >= 2 descriptors.
SubspaceModel learn_initial(std::span<const Vector> bricks, const SubspaceParams& params);

}  // namespace stbg

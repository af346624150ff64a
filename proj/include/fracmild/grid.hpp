#ifndef FRACMILD_GRID_HPP
#define FRACMILD_GRID_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "fracmild/errors.hpp"

namespace fracmild {

/// Riemannian metric coefficient g(theta) on the circle, stored as a
/// truncated Fourier series so midpoints and refinements evaluate exactly.
/// Harmonic 0 contributes its cosine coefficient as the constant term.
struct CircleMetric {
  struct Harmonic {
    int k;
    double cos_coeff;
    double sin_coeff;
  };
  std::vector<Harmonic> harmonics;

  static CircleMetric flat() { return CircleMetric{{{0, 1.0, 0.0}}}; }

  double operator()(double theta) const {
    double g = 0.0;
    for (const auto& h : harmonics) {
      if (h.k == 0)
        g += h.cos_coeff;
      else
        g += h.cos_coeff * std::cos(h.k * theta) + h.sin_coeff * std::sin(h.k * theta);
    }
    return g;
  }

  /// min over a fine sample; throws if the metric is not positive.
  double validate_positive(int samples = 4096) const;
};

enum class GridKind { torus, circle, point };

/// Immutable spatial grid shared by Fields. Torus grids are uniform with
/// period L in each of 1 or 2 dimensions; circle grids carry a metric and
/// Riemannian volume weights sqrt(g) * 2pi/N; point grids host the scalar
/// (0-dimensional) test problems.
class Grid {
public:
  static std::shared_ptr<const Grid> torus(int points, double length, int dimension = 1);
  static std::shared_ptr<const Grid> circle(const CircleMetric& metric, int points);
  static std::shared_ptr<const Grid> point();

  GridKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  int points_per_axis() const { return points_; }
  int size() const { return size_; }
  double length() const { return length_; }

  /// coordinate of node i (1-D grids); torus: i L/N, circle: i 2pi/N.
  double coord(int i) const;
  /// coordinates of node i on a 2-D torus.
  std::pair<double, double> coord2(int i) const;

  const Eigen::VectorXd& volume_weights() const { return weights_; }
  const CircleMetric& metric() const;
  const Eigen::VectorXd& metric_values() const { return g_nodes_; } // circle only

private:
  Grid() = default;
  GridKind kind_ = GridKind::point;
  int dimension_ = 0;
  int points_ = 1;
  int size_ = 1;
  double length_ = 0.0;
  Eigen::VectorXd weights_;
  CircleMetric metric_;
  Eigen::VectorXd g_nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// A real-valued function sampled on a Grid.
struct Field {
  GridPtr grid;
  Eigen::VectorXd values;

  Field() = default;
  Field(GridPtr g, Eigen::VectorXd v);

  static Field constant(GridPtr g, double value);
  static Field from_function(GridPtr g, const std::function<double(double)>& f);
  static Field from_function2(GridPtr g, const std::function<double(double, double)>& f);

  int size() const { return static_cast<int>(values.size()); }
  bool finite() const { return values.allFinite(); }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double c);
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double c, Field a) { return a *= c; }
};

/// Weighted inner product (b, f)_w = sum_i w_i b_i f_i.
double inner(const Field& b, const Field& f);

/// Pairing with uniform (coordinate) weights h = L/N resp. 2pi/N.
double inner_uniform(const Field& b, const Field& f);

void require_same_grid(const Field& a, const Field& b, const char* where);

} // namespace fracmild

#endif

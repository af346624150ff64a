#include "fracmild/grid.hpp"

#include <cmath>
#include <numbers>

namespace fracmild {

double CircleMetric::validate_positive(int samples) const {
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double th = 2.0 * std::numbers::pi * i / samples;
    mn = std::min(mn, (*this)(th));
  }
  if (!(mn > 0.0)) throw DomainError("CircleMetric: metric must be positive");
  return mn;
}

std::shared_ptr<const Grid> Grid::torus(int points, double length, int dimension) {
  if (points < 2 || points % 2 != 0) throw DomainError("Grid::torus: N must be even and >= 2");
  if (!(length > 0.0)) throw DomainError("Grid::torus: L must be positive");
  if (dimension != 1 && dimension != 2) throw DomainError("Grid::torus: dimension must be 1 or 2");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::torus;
  g->dimension_ = dimension;
  g->points_ = points;
  g->size_ = dimension == 1 ? points : points * points;
  g->length_ = length;
  const double h = length / points;
  g->weights_ = Eigen::VectorXd::Constant(g->size_, dimension == 1 ? h : h * h);
  return g;
}

std::shared_ptr<const Grid> Grid::circle(const CircleMetric& metric, int points) {
  if (points < 4) throw DomainError("Grid::circle: N must be >= 4");
  metric.validate_positive();
  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::circle;
  g->dimension_ = 1;
  g->points_ = points;
  g->size_ = points;
  g->length_ = 2.0 * std::numbers::pi;
  g->metric_ = metric;
  g->g_nodes_.resize(points);
  g->weights_.resize(points);
  const double h = 2.0 * std::numbers::pi / points;
  for (int i = 0; i < points; ++i) {
    g->g_nodes_[i] = metric(i * h);
    g->weights_[i] = std::sqrt(g->g_nodes_[i]) * h;
  }
  return g;
}

std::shared_ptr<const Grid> Grid::point() {
  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::point;
  g->dimension_ = 0;
  g->points_ = 1;
  g->size_ = 1;
  g->length_ = 1.0;
  g->weights_ = Eigen::VectorXd::Ones(1);
  return g;
}

double Grid::coord(int i) const {
  if (dimension_ > 1) throw DomainError("Grid::coord: use coord2 on 2-D grids");
  return length_ * i / points_;
}

std::pair<double, double> Grid::coord2(int i) const {
  const double h = length_ / points_;
  return {h * (i % points_), h * (i / points_)};
}

const CircleMetric& Grid::metric() const {
  if (kind_ != GridKind::circle) throw DomainError("Grid::metric: not a circle grid");
  return metric_;
}

Field::Field(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw DomainError("Field: null grid");
  if (values.size() != grid->size()) throw DomainError("Field: value count != node count");
}

Field Field::constant(GridPtr g, double value) {
  return Field(g, Eigen::VectorXd::Constant(g->size(), value));
}

Field Field::from_function(GridPtr g, const std::function<double(double)>& f) {
  if (g->dimension() > 1) throw DomainError("Field::from_function: 1-D grids only");
  Eigen::VectorXd v(g->size());
  for (int i = 0; i < g->size(); ++i) v[i] = f(g->coord(i));
  return Field(g, std::move(v));
}

Field Field::from_function2(GridPtr g, const std::function<double(double, double)>& f) {
  if (g->dimension() != 2) throw DomainError("Field::from_function2: 2-D grids only");
  Eigen::VectorXd v(g->size());
  for (int i = 0; i < g->size(); ++i) {
    auto [x, y] = g->coord2(i);
    v[i] = f(x, y);
  }
  return Field(g, std::move(v));
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o, "Field::operator+=");
  values += o.values;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o, "Field::operator-=");
  values -= o.values;
  return *this;
}

Field& Field::operator*=(double c) {
  values *= c;
  return *this;
}

double inner(const Field& b, const Field& f) {
  require_same_grid(b, f, "inner");
  return (b.grid->volume_weights().array() * b.values.array() * f.values.array()).sum();
}

double inner_uniform(const Field& b, const Field& f) {
  require_same_grid(b, f, "inner_uniform");
  const double h = std::pow(b.grid->length() / b.grid->points_per_axis(), b.grid->dimension());
  return (b.values.array() * f.values.array()).sum() * (b.grid->dimension() == 0 ? 1.0 : h);
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (a.grid.get() != b.grid.get())
    throw DomainError(std::string(where) + ": fields live on different grids");
}

} // namespace fracmild

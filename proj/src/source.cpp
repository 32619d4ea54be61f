#include "crackfreq/source.hpp"

#include <algorithm>

#include "crackfreq/errors.hpp"

namespace crackfreq {

void SumSource::add(double coeff, std::shared_ptr<const SolutionSource> term) {
  if (!term) throw InvalidArgument("SumSource: null term");
  terms_.emplace_back(coeff, std::move(term));
}

double SumSource::value(const Eigen::Vector2d& p, Side side) const {
  double v = 0.0;
  for (const auto& [c, t] : terms_) v += c * t->value(p, side);
  return v;
}

Eigen::Vector2d SumSource::gradient(const Eigen::Vector2d& p, Side side) const {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& [c, t] : terms_) g += c * t->gradient(p, side);
  return g;
}

double SumSource::radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& term : terms_) r = std::min(r, term.second->radius());
  return r;
}

FieldSource::FieldSource(Field field, GradientMode mode)
    : field_(std::move(field)),
      mode_(mode),
      locator_(field_.mesh_ptr()),
      tri_grad_(triangle_gradients(field_)),
      vertex_grad_(recover_gradients(field_)) {}

double FieldSource::value(const Eigen::Vector2d& p, Side side) const {
  const auto hit = locator_.locate(p, side);
  const auto& tri = field_.mesh().triangles[hit.triangle];
  const auto& v = field_.values();
  return hit.bary[0] * v[tri[0]] + hit.bary[1] * v[tri[1]] + hit.bary[2] * v[tri[2]];
}

Eigen::Vector2d FieldSource::gradient(const Eigen::Vector2d& p, Side side) const {
  const auto hit = locator_.locate(p, side);
  if (mode_ == GradientMode::triangle) return tri_grad_[hit.triangle];
  const auto& tri = field_.mesh().triangles[hit.triangle];
  return hit.bary[0] * vertex_grad_[tri[0]] + hit.bary[1] * vertex_grad_[tri[1]] +
         hit.bary[2] * vertex_grad_[tri[2]];
}

}  // namespace crackfreq

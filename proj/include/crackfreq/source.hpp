#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "crackfreq/exact.hpp"
#include "crackfreq/fem.hpp"
#include "crackfreq/locator.hpp"

namespace crackfreq {

/// Something that can be evaluated like a solution U on the slit disk: a
/// closed form, a linear combination, or a finite-element field.
class SolutionSource {
 public:
  virtual ~SolutionSource() = default;
  virtual double value(const Eigen::Vector2d& p, Side side) const = 0;
  virtual Eigen::Vector2d gradient(const Eigen::Vector2d& p, Side side) const = 0;
  /// Largest radius on which the source is defined.
  virtual double radius() const { return std::numeric_limits<double>::infinity(); }
  /// Mesh behind a discrete source (nullptr for closed forms).
  virtual const SlitMesh* mesh() const { return nullptr; }
};

class HarmonicSource final : public SolutionSource {
 public:
  explicit HarmonicSource(CrackHarmonic u) : u_(u) {}
  double value(const Eigen::Vector2d& p, Side side) const override { return crackfreq::value(u_, p, side); }
  Eigen::Vector2d gradient(const Eigen::Vector2d& p, Side side) const override {
    return eval(u_, p, side).gradient;
  }
  const CrackHarmonic& harmonic() const { return u_; }

 private:
  CrackHarmonic u_;
};

class BesselSource final : public SolutionSource {
 public:
  explicit BesselSource(BesselMode u) : u_(u) {}
  double value(const Eigen::Vector2d& p, Side side) const override { return crackfreq::value(u_, p, side); }
  Eigen::Vector2d gradient(const Eigen::Vector2d& p, Side side) const override {
    return eval(u_, p, side).gradient;
  }
  const BesselMode& mode() const { return u_; }

 private:
  BesselMode u_;
};

/// sum_i c_i U_i.
class SumSource final : public SolutionSource {
 public:
  void add(double coeff, std::shared_ptr<const SolutionSource> term);
  double value(const Eigen::Vector2d& p, Side side) const override;
  Eigen::Vector2d gradient(const Eigen::Vector2d& p, Side side) const override;
  double radius() const override;

 private:
  std::vector<std::pair<double, std::shared_ptr<const SolutionSource>>> terms_;
};

/// P1 field with side-aware point location. Gradients are either the
/// piecewise-constant triangle gradient or the P1 interpolant of recovered
/// vertex gradients.
class FieldSource final : public SolutionSource {
 public:
  enum class GradientMode { triangle, recovered };

  explicit FieldSource(Field field, GradientMode mode = GradientMode::recovered);

  double value(const Eigen::Vector2d& p, Side side) const override;
  Eigen::Vector2d gradient(const Eigen::Vector2d& p, Side side) const override;
  double radius() const override { return field_.mesh().radius; }
  const SlitMesh* mesh() const override { return &field_.mesh(); }
  const Field& field() const { return field_; }

 private:
  Field field_;
  GradientMode mode_;
  PointLocator locator_;
  std::vector<Eigen::Vector2d> tri_grad_;
  std::vector<Eigen::Vector2d> vertex_grad_;
};

}  // namespace crackfreq

#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "crackfreq/blowup.hpp"
#include "crackfreq/errors.hpp"
#include "crackfreq/frequency.hpp"

using namespace crackfreq;
using Eigen::Vector2d;
constexpr double pi = std::numbers::pi;

namespace {

const CrackGeometry flat = build_geometry(CrackProfile::flat(2), 1.0);
const SpectralBasis circle8 = basis_circle(8);

std::shared_ptr<const SlitMesh> unit_mesh() {
  static const auto m = std::make_shared<const SlitMesh>(make_slit_disk(1.0, 8, 0.5, 64));
  return m;
}

double weight_value(const std::vector<PowerTerm>& w, double s) {
  double v = 0.0;
  for (const auto& t : w) v += t.coeff * std::pow(s, t.power);
  return v;
}

std::shared_ptr<const SolutionSource> bessel(double amp = 1.0) {
  return std::make_shared<BesselSource>(BesselMode{1, 1.0, amp});
}

}  // namespace

TEST_CASE("rescaled harmonic is independent of lambda and amplitude") {
  const auto m = unit_mesh();
  for (double a : {1.0, 4.0})
    for (double lam : {0.5, 0.05}) {
      const RescaledField W = rescale(HarmonicSource(CrackHarmonic{1, a}), flat, lam, m);
      CHECK(std::abs(W.normalization - 1.0) <= 1e-3);
      CHECK(W.height == doctest::Approx(a * a * pi * lam).epsilon(1e-10));
      const Field want = interpolate(m, [](const Vector2d& p, Side s) {
        return value(CrackHarmonic{1, 1.0 / std::sqrt(pi)}, p, s);
      });
      CHECK((W.field.values() - want.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  const RescaledField c = rescale(HarmonicSource(CrackHarmonic{0, 3.0}), flat, 0.3, m);
  CHECK((c.field.values().array() - 1.0 / std::sqrt(2 * pi)).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("rescaling a discrete field needs resolved radii") {
  const auto m = unit_mesh();
  const Field f = interpolate(m, [](const Vector2d& p, Side s) { return value(CrackHarmonic{1, 1.0}, p, s); });
  const FieldSource src(f);
  const RescaledField W = rescale(src, flat, 0.25, m);
  CHECK(std::abs(W.normalization - 1.0) <= 1e-3);
  CHECK_THROWS_AS(rescale(src, flat, 1e-3, m), RadiusTooSmall);
  CHECK_THROWS_AS(rescale(src, flat, 1.0, m), InvalidArgument);
}

TEST_CASE("Fourier coefficients of known fields") {
  for (double lam : {0.1, 0.6}) {
    const auto phi = fourier_phi(HarmonicSource(CrackHarmonic{1, 2.0}), lam, circle8, 1);
    CHECK(phi[0] == doctest::Approx(2.0 * std::sqrt(pi * lam)).epsilon(1e-12));
    CHECK(std::abs(fourier_phi(HarmonicSource(CrackHarmonic{0, 2.0}), lam, circle8, 3)[0]) < 1e-13);
    CHECK(std::abs(fourier_phi(HarmonicSource(CrackHarmonic{2, 1.0}), lam, circle8, 1)[0]) < 1e-13);
  }
}

TEST_CASE("Parseval: partial sums reach H within 1% at K = 8") {
  for (double lam : {0.4, 0.1, 0.0125}) {
    for (const auto& src : {bessel(), std::static_pointer_cast<const SolutionSource>(
                                           std::make_shared<HarmonicSource>(CrackHarmonic{3, 1.0}))}) {
      double sum = 0.0;
      for (int k = 0; k <= 8; ++k)
        for (double v : fourier_phi(*src, lam, circle8, k)) sum += v * v;
      const double H = height(*src, flat, lam, 512);
      CHECK(std::abs(sum - H) <= 0.01 * H);
    }
  }
}

TEST_CASE("upsilon closed forms") {
  const SpectralEntry& Y1 = *circle8.eigenspace(1)[0];
  const HarmonicSource h(CrackHarmonic{1, 1.0});
  CHECK(upsilon(h, flat, Potential::zero(), Y1, 0.5) == 0.0);
  // sqrt(pi) * int_0^{1/2} s^{3/2} ds
  const double want = std::sqrt(pi) * 0.4 * std::pow(0.5, 2.5);
  CHECK(upsilon(h, flat, Potential::constant(1.0), Y1, 0.5) == doctest::Approx(want).epsilon(1e-9));
  CHECK(want == doctest::Approx(0.12533).epsilon(1e-4));
  const HarmonicSource h2(CrackHarmonic{1, 2.0});
  CHECK(upsilon(h2, flat, Potential::constant(1.0), Y1, 0.5) ==
        doctest::Approx(2.0 * upsilon(h, flat, Potential::constant(1.0), Y1, 0.5)).epsilon(1e-13));
}

TEST_CASE("upsilon on a discrete field near the tip") {
  const auto m = unit_mesh();
  const Field f = interpolate(m, [](const Vector2d& p, Side s) { return value(CrackHarmonic{1, 1.0}, p, s); });
  const FieldSource src(f);
  const SpectralEntry& Y1 = *circle8.eigenspace(1)[0];
  CHECK_THROWS_AS(upsilon(src, flat, Potential::constant(1.0), Y1, 1e-3), SingularQuadrature);
  const double want = std::sqrt(pi) * 0.4 * std::pow(0.5, 2.5);
  CHECK(upsilon(src, flat, Potential::constant(1.0), Y1, 0.5) == doctest::Approx(want).epsilon(0.01));
}

TEST_CASE("the two written forms of the alpha weight agree") {
  for (int N : {2, 3, 4})
    for (int k0 = 0; k0 <= 5; ++k0)
      for (double r : {0.1, 0.7})
        for (double s : {0.01, 0.05, 0.09}) {
          const double a = weight_value(alpha_weight(N, k0, r, AlphaForm::expansion), s);
          const double b = weight_value(alpha_weight(N, k0, r, AlphaForm::single_integral), s);
          CHECK(a == doctest::Approx(b).epsilon(1e-13));
        }
  // N + k0 = 2: both prefactors degenerate and the weight is 1 / s.
  CHECK(weight_value(alpha_weight(2, 0, 0.5, AlphaForm::expansion), 0.2) == doctest::Approx(5.0));
}

TEST_CASE("alpha for exact homogeneous inputs") {
  const AlphaResult a = alpha_coefficients(HarmonicSource(CrackHarmonic{1, 3.0}), flat, Potential::zero(), circle8, 1,
                                           {0.1, 0.2, 0.4});
  CHECK(a.alpha[0] == doctest::Approx(3.0 * std::sqrt(pi)).epsilon(1e-12));
  CHECK(a.spread[0] <= 1e-8 * a.alpha[0]);
  const AlphaResult c = alpha_coefficients(HarmonicSource(CrackHarmonic{0, 2.0}), flat, Potential::zero(), circle8, 0,
                                           {0.1, 0.3});
  CHECK(c.alpha[0] == doctest::Approx(2.0 * std::sqrt(2 * pi)).epsilon(1e-12));
}

TEST_CASE("alpha for the Bessel mode is amplitude times sqrt 2") {
  for (double amp : {1.0, 2.5}) {
    const AlphaResult a = alpha_coefficients(*bessel(amp), flat, Potential::constant(1.0), circle8, 1, {0.1, 0.2, 0.4});
    CHECK(a.alpha[0] == doctest::Approx(amp * std::sqrt(2.0)).epsilon(0.02));
    CHECK(a.spread[0] <= 0.05 * a.alpha[0]);
  }
}

TEST_CASE("nested and swapped remainder integrals agree, forms agree") {
  AlphaOptions nested;
  nested.nested = true;
  AlphaOptions single;
  single.form = AlphaForm::single_integral;
  const auto src = bessel();
  const AlphaResult a = alpha_coefficients(*src, flat, Potential::constant(1.0), circle8, 1, {0.2, 0.4});
  const AlphaResult b = alpha_coefficients(*src, flat, Potential::constant(1.0), circle8, 1, {0.2, 0.4}, nested);
  const AlphaResult c = alpha_coefficients(*src, flat, Potential::constant(1.0), circle8, 1, {0.2, 0.4}, single);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.values[0][i] == doctest::Approx(b.values[0][i]).epsilon(1e-8));
    CHECK(a.values[0][i] == doctest::Approx(c.values[0][i]).epsilon(1e-12));
  }
}

TEST_CASE("alpha scales linearly with the field") {
  const AlphaResult a = alpha_coefficients(*bessel(1.0), flat, Potential::constant(1.0), circle8, 1, {0.2});
  const AlphaResult b = alpha_coefficients(*bessel(-3.0), flat, Potential::constant(1.0), circle8, 1, {0.2});
  CHECK(b.alpha[0] == doctest::Approx(-3.0 * a.alpha[0]).epsilon(1e-12));
  const RescaledField w1 = rescale(*bessel(1.0), flat, 0.2, unit_mesh());
  const RescaledField w2 = rescale(*bessel(3.0), flat, 0.2, unit_mesh());
  CHECK((w1.field.values() - w2.field.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("an unresolved remainder shows up as spread") {
  // The Bessel mode with the potential left out: alpha(r) drifts like 1 - r^2 / 6.
  CHECK_THROWS_AS(alpha_coefficients(*bessel(), flat, Potential::zero(), circle8, 1, {0.1, 0.9}), SpreadTooLarge);
}

TEST_CASE("blow-up of the exact harmonic is exact") {
  const HarmonicSource h(CrackHarmonic{1, 2.0});
  const AlphaResult a = alpha_coefficients(h, flat, Potential::zero(), circle8, 1, {0.2});
  const BlowupReport r = verify_blowup(h, circle8, a, lambda_schedule(0.4, 0.5, 6));
  for (double e : r.value_errors) CHECK(e <= 1e-10);
  CHECK(r.value_decreasing);
  CHECK(r.gradient_decreasing);
  const BlowupLimit phi(circle8, 1, a.alpha);
  const Vector2d p(0.3, 0.4);
  CHECK(phi.value(p, Side::upper) == doctest::Approx(value(CrackHarmonic{1, 2.0}, p, Side::upper)).epsilon(1e-12));
}

TEST_CASE("blow-up of the Bessel mode converges at rate two") {
  const auto src = bessel();
  const AlphaResult a = alpha_coefficients(*src, flat, Potential::constant(1.0), circle8, 1, {0.1, 0.2, 0.4});
  const BlowupReport r = verify_blowup(*src, circle8, a, lambda_schedule(0.4, 0.5, 6));
  CHECK(r.value_decreasing);
  CHECK(r.gradient_decreasing);
  CHECK(r.value_slope >= 1.8);
  for (std::size_t i = 1; i < r.value_errors.size(); ++i) CHECK(r.value_errors[i] < r.value_errors[i - 1]);
  const std::string csv = blowup_to_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  const std::string js = blowup_summary_json(r, 0.5);
  CHECK(js.find("\"k0\"") != std::string::npos);
  CHECK(js.find("\"alpha\"") != std::string::npos);
}

TEST_CASE("a wrong blow-up degree is flagged") {
  const HarmonicSource h(CrackHarmonic{1, 1.0});
  AlphaResult wrong;
  wrong.k0 = 2;
  wrong.alpha = {1.0};
  wrong.spread = {0.0};
  BlowupOptions strict;
  strict.strict = true;
  const auto lams = lambda_schedule(0.4, 0.5, 6);
  CHECK_FALSE(verify_blowup(h, circle8, wrong, lams).value_decreasing);
  CHECK_THROWS_AS(verify_blowup(h, circle8, wrong, lams, strict), NonDecreasingError);
  CHECK_THROWS_AS(verify_blowup(h, circle8, wrong, lambda_schedule(0.4, 0.5, 5)), InvalidArgument);
}

TEST_CASE("lambda schedule") {
  const auto l = lambda_schedule(0.4, 0.5, 6);
  REQUIRE(l.size() == 6);
  CHECK(l.front() == 0.4);
  CHECK(l.back() == doctest::Approx(0.0125));
  CHECK_THROWS_AS(lambda_schedule(0.4, 1.5, 6), InvalidArgument);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "lle/error.hpp"
#include "lle/fft.hpp"
#include "lle/field_io.hpp"
#include "lle/grid.hpp"
#include "lle/spectral.hpp"

using namespace lle;
namespace {
constexpr double pi = std::numbers::pi;

double max_diff(const RealPairField& a, const RealPairField& b) { return norm(a - b, NormKind::Linf); }
}  // namespace

TEST_CASE("grid rejects odd sizes and fractional cells") {
  CHECK_THROWS_AS(PeriodicGrid(63, 1.0), Error);
  CHECK_THROWS_AS(PeriodicGrid(64, 1.0, 3), Error);
  CHECK_THROWS_AS(PeriodicGrid(64, -1.0), Error);
  const PeriodicGrid g(96, 2.5, 4);
  CHECK(g.spacing() * 96 == doctest::Approx(g.length()).epsilon(1e-15));
  CHECK(g.mode(47) == 47);
  CHECK(g.mode(48) == -48);
  CHECK(g.wavenumber(1) == doctest::Approx(2 * pi / 10.0));
}

TEST_CASE("fft round trip") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  CVec x(64);
  for (auto& v : x) v = cd(n(rng), n(rng));
  const CVec y = fft_inverse(fft_forward(x));
  double err = 0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
  CHECK(err < 1e-14);
}

TEST_CASE("first derivative of a resolved mode") {
  const PeriodicGrid g(64, 3.0, 2);
  const double L = g.length();
  const auto f = RealPairField::sample(g, [&](double x) { return std::sin(2 * pi * x / L); });
  const auto exact = RealPairField::sample(g, [&](double x) { return 2 * pi / L * std::cos(2 * pi * x / L); });
  CHECK(max_diff(spectral_derivative(f, 1), exact) <= 1e-10);
}

TEST_CASE("derivative of a constant vanishes") {
  const PeriodicGrid g(32, 1.0);
  const auto f = RealPairField::sample(g, [](double) { return cd(0.7, -0.2); });
  CHECK(norm(spectral_derivative(f, 1), NormKind::Linf) <= 1e-14);
}

TEST_CASE("second derivative agrees with centered differences at second order") {
  auto fd_error = [](std::size_t n) {
    const PeriodicGrid g(n, 2 * pi);
    const auto f = RealPairField::sample(g, [](double x) { return std::exp(std::cos(x)); });
    const auto d2 = spectral_derivative(f, 2);
    const double h = g.spacing();
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const cd fd = (f[(i + 1) % n] - 2.0 * f[i] + f[(i + n - 1) % n]) / (h * h);
      err = std::max(err, std::abs(fd - d2[i]));
    }
    return err;
  };
  const double ratio = fd_error(64) / fd_error(128);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("norms of simple fields") {
  const PeriodicGrid g(64, 2 * pi);
  const RealPairField zero(g);
  for (auto k : {NormKind::L2, NormKind::H1, NormKind::H2, NormKind::H3, NormKind::H4, NormKind::Linf})
    CHECK(norm(zero, k) == 0.0);
  const auto one = RealPairField::sample(g, [](double) { return 1.0; });
  CHECK(norm(one, NormKind::L2) == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-14));
  CHECK(norm(one, NormKind::H3) == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-14));
}

TEST_CASE("L2 norm of a narrow Gaussian") {
  const double s = 0.4, L = 20.0;
  const PeriodicGrid g(512, L);
  const auto f = RealPairField::sample(g, [&](double x) { return std::exp(-(x - L / 2) * (x - L / 2) / (2 * s * s)); });
  // The integral of exp(-x^2/s^2) is s sqrt(pi).
  CHECK(std::abs(norm(f, NormKind::L2) - std::pow(pi * s * s, 0.25)) <= 1e-6);
}

TEST_CASE("H1 norm sums the derivative energy") {
  const PeriodicGrid g(64, 2 * pi);
  const auto f = RealPairField::sample(g, [](double x) { return std::cos(3 * x); });
  // ||f||^2 = pi and ||f'||^2 = 9 pi.
  CHECK(norm(f, NormKind::H1) == doctest::Approx(std::sqrt(10 * pi)).epsilon(1e-12));
}

TEST_CASE("trigonometric interpolation") {
  const PeriodicGrid g(32, 5.0);
  const double L = g.length();
  const auto f = RealPairField::sample(g, [&](double x) { return std::cos(2 * pi * x / L); });
  const std::vector<double> p{L / 8};
  CHECK(std::abs(interpolate(f, p)[0] - cd(std::cos(pi / 4), 0)) <= 1e-12);

  std::vector<double> nodes;
  for (std::size_t i = 0; i < g.num_points(); i += 5) nodes.push_back(g.x(i));
  const auto at_nodes = interpolate(f, nodes);
  for (std::size_t k = 0; k < nodes.size(); ++k) CHECK(std::abs(at_nodes[k] - f[5 * k]) <= 1e-12);
}

TEST_CASE("interpolation of a band-limited random field") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::vector<cd> c(9);
  for (auto& v : c) v = cd(n(rng), n(rng));
  const PeriodicGrid g(64, 2 * pi);
  auto analytic = [&](double x) {
    cd acc = 0;
    for (int j = -4; j <= 4; ++j) acc += c[j + 4] * std::exp(cd(0, j * x));
    return acc;
  };
  const auto f = RealPairField::sample(g, analytic);
  std::uniform_real_distribution<double> u(0, 2 * pi);
  std::vector<double> pts(50);
  for (auto& x : pts) x = u(rng);
  const auto fine = resample(f, 256);
  const auto a = interpolate(f, pts), b = interpolate(fine, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    CHECK(std::abs(a[k] - analytic(pts[k])) <= 1e-9);
    CHECK(std::abs(a[k] - b[k]) <= 1e-9);
  }
}

TEST_CASE("composition with a constant shift is a translation") {
  const PeriodicGrid g(64, 2 * pi);
  const auto f = RealPairField::sample(g, [](double x) { return std::exp(cd(std::sin(x), 0.3 * std::cos(2 * x))); });
  ScalarField shift(g);
  for (auto& v : shift.values()) v = 0.37;
  const auto a = compose(f, g, shift, 0.0, EvaluationMethod::Exact);
  const auto b = compose(f, g, shift, 0.0, EvaluationMethod::Local);
  const auto t = translate(f, 0.37);
  const auto exact = RealPairField::sample(g, [](double x) {
    return std::exp(cd(std::sin(x + 0.37), 0.3 * std::cos(2 * (x + 0.37))));
  });
  CHECK(max_diff(a, exact) <= 1e-12);
  CHECK(max_diff(t, exact) <= 1e-12);
  CHECK(max_diff(b, exact) <= 1e-8);
}

TEST_CASE("tile and resample preserve the field") {
  const PeriodicGrid cell(32, 1.5);
  const auto f = RealPairField::sample(cell, [](double x) { return cd(std::cos(2 * pi * x / 1.5), 1.0); });
  const auto full = tile(f, cell.with_cells(3));
  CHECK(full.size() == 96);
  CHECK(std::abs(full[64 + 7] - f[7]) == 0.0);
  const auto up = resample(f, 64);
  CHECK(std::abs(up[14] - f[7]) <= 1e-14);
}

TEST_CASE("field snapshot format round trips bit for bit") {
  const auto dir = std::filesystem::temp_directory_path() / "lle_field_io_test";
  std::filesystem::create_directories(dir);
  const PeriodicGrid g(48, 0.75, 3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const auto f = RealPairField::sample(g, [&](double) { return cd(n(rng), n(rng)); });
  const auto path = dir / "f.bin";
  write_field(path, f, 12.5);

  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("\"N\":48") != std::string::npos);
  CHECK(header.find("\"M\":3") != std::string::npos);
  const auto size = std::filesystem::file_size(path);
  CHECK(size == header.size() + 1 + 2 * 48 * sizeof(double));

  const auto back = read_field(path);
  CHECK(back.time == 12.5);
  CHECK(back.field.grid() == g);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back.field[i] == f[i]);
}

TEST_CASE("malformed snapshot is rejected") {
  const auto path = std::filesystem::temp_directory_path() / "lle_field_io_bad.bin";
  std::ofstream(path) << "{\"N\":8,\"M\":1,\"T\":1.0,\"t\":0}\nshort";
  CHECK_THROWS_AS(read_field(path), Error);
}

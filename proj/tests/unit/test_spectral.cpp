#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "../support/fixtures.hpp"
#include "glaudio/error.hpp"
#include "glaudio/spectral.hpp"
#include "glaudio/wave.hpp"

using namespace glaudio;
using namespace glaudio::testing;

namespace {

LaplacianOperator lap(int n, std::vector<std::pair<int, int>> e,
                      OperatorVariant v = OperatorVariant::combinatorial) {
  return build_operator(make_graph(n, std::move(e)), v);
}

NodeMatrix col(std::initializer_list<double> v) {
  NodeMatrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Samples X_v(s) = sum_j phi_j(v) cos(lambda_j s) <phi_j, x> on the quadrature grid.
std::vector<double> lambda_signal(const SpectralDecomposition& dec, const NodeMatrix& x, int v, int k, int steps) {
  const auto grid = quadrature_grid(k, steps);
  const auto sq = dec.squared();
  const auto snaps = exact_signal(sq, x, grid);
  std::vector<double> s;
  for (const auto& m : snaps) s.push_back(m(v, 0));
  return s;
}

}  // namespace

TEST_CASE("eigendecompose: P2, P3, K3") {
  const auto p2 = eigendecompose(lap(2, {{0, 1}}));
  CHECK(p2.eigenvalues(0) == doctest::Approx(0.0));
  CHECK(p2.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(std::abs(p2.eigenvectors(0, 0)) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(p2.eigenvectors(0, 1) * p2.eigenvectors(1, 1) == doctest::Approx(-0.5));

  const auto p3 = eigendecompose(lap(3, path_edges(3)));
  CHECK(p3.eigenvalues(0) == doctest::Approx(0.0));
  CHECK(p3.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(p3.eigenvalues(2) == doctest::Approx(3.0));

  const auto k3 = eigendecompose(lap(3, complete_edges(3)));
  CHECK(k3.eigenvalues(1) == doctest::Approx(3.0));
  CHECK(k3.eigenvalues(2) == doctest::Approx(3.0));
  CHECK_FALSE(receptive_field(k3, 0).unique_spectrum);
}

TEST_CASE("eigendecompose: invariants and sign convention") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial;
    for (auto variant : {OperatorVariant::combinatorial, OperatorVariant::normalized_selfloop}) {
      const auto op = build_operator(make_graph(n, random_connected_edges(n, 0.3, rng)), variant);
      const auto dec = eigendecompose(op);
      CHECK((dec.reconstruct() - op.matrix.to_dense()).cwiseAbs().maxCoeff() < 1e-8);
      const Eigen::MatrixXd gram = dec.eigenvectors.transpose() * dec.eigenvectors;
      CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(dec.eigenvalues.minCoeff() >= 0.0);
      for (int i = 1; i < n; ++i) CHECK(dec.eigenvalues(i) >= dec.eigenvalues(i - 1));
      for (int i = 0; i < n; ++i) {
        // Ties within round-off resolve to the lowest index.
        const double top = dec.eigenvectors.col(i).cwiseAbs().maxCoeff();
        int at = 0;
        while (std::abs(dec.eigenvectors(at, i)) < top * (1.0 - 1e-9)) ++at;
        CHECK(dec.eigenvectors(at, i) > 0.0);
      }
    }
  }
}

TEST_CASE("eigendecompose: oracle limit") {
  CHECK_THROWS_AS(eigendecompose(lap(5, path_edges(5)), 4), Error);
  try {
    eigendecompose(lap(5, path_edges(5)), 4);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLargeForOracle);
  }
}

TEST_CASE("exact_signal: P2 full transfer, t = 0, kernel") {
  const auto dec = eigendecompose(lap(2, {{0, 1}}));
  const std::vector<double> t{std::numbers::pi / std::sqrt(2.0), 0.0, 0.7};
  const auto x = exact_signal(dec, col({1, 0}), t);
  CHECK(x[0](0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(x[0](1, 0) == doctest::Approx(1.0));
  CHECK(x[1](0, 0) == doctest::Approx(1.0));
  CHECK(x[1](1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(x[2](0, 0) == doctest::Approx((1 + std::cos(std::sqrt(2.0) * 0.7)) / 2));

  const auto k3 = eigendecompose(lap(3, complete_edges(3)));
  const auto c = exact_signal(k3, col({0.4, 0.4, 0.4}), std::vector<double>{0.3, 5.0});
  for (const auto& s : c) CHECK((s.array() - 0.4).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(exact_signal(k3, col({1, 0}), t), Error);
}

TEST_CASE("exact energy is conserved") {
  std::mt19937_64 rng(23);
  const int n = 8;
  const auto op = build_operator(make_graph(n, random_connected_edges(n, 0.3, rng)), OperatorVariant::combinatorial);
  const auto dec = eigendecompose(op);
  const NodeMatrix x = random_matrix(n, 1, rng);
  std::vector<double> t;
  for (int i = 0; i < 50; ++i) t.push_back(0.37 * i);
  const auto pos = exact_signal(dec, x, t);
  const auto vel = exact_velocity(dec, x, t);
  const double e0 = 0.5 * (x.transpose() * op.apply(x))(0, 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = 0.5 * vel[i].squaredNorm() + 0.5 * (pos[i].transpose() * op.apply(pos[i]))(0, 0);
    CHECK(relative_error(e, e0) < 1e-8);
  }
}

TEST_CASE("moment_sequence") {
  const auto k3 = lap(3, complete_edges(3));
  const auto m = moment_sequence(k3, col({1, 0, 0}), 2);
  REQUIRE(m.size() == 3);
  CHECK(m[1] == col({2, -1, -1}));
  for (const auto& z : moment_sequence(k3, NodeMatrix::Zero(3, 1), 4)) CHECK(z.isZero(0.0));
  const auto p2 = moment_sequence(lap(2, {{0, 1}}), col({1, 1}), 5);
  for (int i = 1; i <= 5; ++i) CHECK(p2[i].isZero(0.0));
}

TEST_CASE("compare_encodings: spec cases") {
  const auto p2 = lap(2, {{0, 1}});
  const auto empty = lap(2, {});
  std::vector<double> times;
  for (int i = 1; i <= 16; ++i) times.push_back(0.25 * i);

  const auto same = compare_encodings(p2, col({1, 0}), p2, col({1, 0}), 4, times);
  CHECK(same.moments_agree);
  CHECK(same.signals_agree);

  const auto differ = compare_encodings(p2, col({1, 0}), empty, col({1, 0}), 4, times);
  CHECK_FALSE(differ.moments_agree);
  CHECK_FALSE(differ.signals_agree);
  CHECK(differ.first_differing_moment == 1);
  CHECK(differ.consistent());

  const auto kernel = compare_encodings(p2, col({1, 1}), empty, col({1, 1}), 4, times);
  CHECK(kernel.moments_agree);
  CHECK(kernel.signals_agree);
  CHECK_THROWS_AS(compare_encodings(p2, col({1, 1}), lap(3, {}), col({1, 1, 1}), 4, times), Error);
}

TEST_CASE("compare_encodings: constant features on distinct connected graphs") {
  std::vector<double> times;
  for (int i = 0; i < 64; ++i) times.push_back(4.0 * i / 63.0);
  const NodeMatrix x = NodeMatrix::Constant(8, 1, 0.7);
  const auto c = compare_encodings(lap(8, complete_edges(8)), x, lap(8, path_edges(8)), x, 16, times);
  CHECK(c.moments_agree);
  CHECK(c.signals_agree);
}

TEST_CASE("receptive_field: P3 middle and end vertices") {
  const auto dec = eigendecompose(lap(3, path_edges(3)));
  const auto mid = receptive_field(dec, 1);
  CHECK(mid.member_indices == std::vector<int>{0, 2});
  CHECK(mid.unique_spectrum);
  CHECK(receptive_field(dec, 0).member_indices == std::vector<int>{0, 1, 2});
  CHECK_THROWS_AS(receptive_field(dec, 3), Error);
}

TEST_CASE("recover_projections: P3 examples") {
  const auto dec = eigendecompose(lap(3, path_edges(3)));
  const int steps = 100000;

  const NodeMatrix e0 = col({1, 0, 0});
  const auto r = recover_projections(lambda_signal(dec, e0, 0, 1, steps), dec, 0, 1, steps);
  REQUIRE(r.projections.size() == 3);
  CHECK(std::abs(r.projections[0]) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-4));
  CHECK(std::abs(r.projections[1]) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-4));
  CHECK(std::abs(r.projections[2]) == doctest::Approx(1 / std::sqrt(6.0)).epsilon(1e-4));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.projections[i] - dec.eigenvectors.col(i).dot(e0.col(0))) < 1e-4);

  const auto z = recover_projections(lambda_signal(dec, NodeMatrix::Zero(3, 1), 0, 1, steps), dec, 0, 1, steps);
  for (double p : z.projections) CHECK(std::abs(p) < 1e-12);

  const NodeMatrix phi3 = dec.eigenvectors.col(2);
  const auto q = recover_projections(lambda_signal(dec, phi3, 0, 1, steps), dec, 0, 1, steps);
  CHECK(std::abs(q.projections[0]) < 1e-4);
  CHECK(std::abs(q.projections[1]) < 1e-4);
  CHECK(std::abs(q.projections[2] - 1.0) < 1e-4);
}

TEST_CASE("recover_projections: precondition errors") {
  const auto p3 = eigendecompose(lap(3, path_edges(3)));
  const auto k3 = eigendecompose(lap(3, complete_edges(3)));
  const auto p4 = eigendecompose(lap(4, path_edges(4)));  // 2 - sqrt(2) is irrational
  const std::vector<double> sig(1001, 0.0);
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code([&] { recover_projections(sig, k3, 0, 1, 1000); }) == ErrorCode::RepeatedEigenvalues);
  CHECK(code([&] { recover_projections(std::vector<double>(1001, 0.0), p4, 0, 1, 1000); }) ==
        ErrorCode::NonIntegralSpectrum);
  CHECK(code([&] { recover_projections(std::vector<double>(10, 0.0), p3, 0, 1, 1000); }) ==
        ErrorCode::InsufficientSamples);
}

TEST_CASE("encoder converges to the oracle at grid times") {
  const auto op = lap(4, complete_edges(4), OperatorVariant::normalized);
  const auto dec = eigendecompose(op);
  const NodeMatrix x = col({1, 0.5, -0.25, 0});
  const double h = 0.001;
  const auto sig = propagate(op, x, WaveConfig{4000, h});
  const auto ex = exact_signal(dec, x, std::vector<double>{4.0});
  CHECK((sig.positions.back() - ex[0]).cwiseAbs().maxCoeff() < 0.01);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fbct/phantom.hpp"
#include "fbct/projector.hpp"
#include "fbct/solver.hpp"
#include "test_support.hpp"

using namespace fbct;

namespace {

Eigen::MatrixXd dense_matrix(const GeometrySpec& g, double c) {
  const auto a = materialize_dense(g, c);
  const int m = g.n_angles() * g.n_detector;
  const int n = g.image_size * g.image_size;
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(a.data(), m, n);
}

std::vector<double> kkt_gradient(const QuadraticObjective& obj, const std::vector<double>& x) {
  const int m = obj.op->rows();
  const int n = obj.op->cols();
  std::vector<double> ax(static_cast<size_t>(m));
  obj.op->apply(x.data(), ax.data());
  for (int i = 0; i < m; ++i) ax[i] -= obj.data[i];
  std::vector<double> grad(static_cast<size_t>(n));
  obj.op->apply_adjoint(ax.data(), grad.data());
  for (int j = 0; j < n; ++j) {
    const double shift = obj.prior_shift.empty() ? 0.0 : obj.prior_shift[j];
    grad[j] = obj.lambda * grad[j] + obj.delta * (x[j] - shift);
  }
  return grad;
}

}  // namespace

TEST_CASE("zero data and zero shift keep the zero fixed point") {
  const GeometrySpec g = test::tiny_geometry(8, 10, 13);
  FanBeamOperator op(g, 0.5);
  QuadraticObjective obj;
  obj.op = &op;
  obj.data.assign(static_cast<size_t>(op.rows()), 0.0);
  obj.lambda = 2.0;
  obj.delta = 0.3;

  FistaConfig cfg;
  cfg.k_fista = 37;
  cfg.step_size = fista_step_size(obj.lambda, obj.delta, operator_norm_estimate(g, 0.5, 50, 1));
  const auto x = fista_solve(obj, cfg);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("unconstrained solve matches the dense normal-equations oracle") {
  const GeometrySpec g = test::tiny_geometry(16, 12, 25);
  const double c = 1.3;
  const double lambda = 2.0;
  const double norm_est = operator_norm_estimate(g, c, 200, 3);
  const double delta = 0.02 * lambda * norm_est;

  RngStream rng(9, 60);
  FanBeamOperator op(g, c);
  QuadraticObjective obj;
  obj.op = &op;
  obj.lambda = lambda;
  obj.delta = delta;
  obj.data.resize(static_cast<size_t>(op.rows()));
  for (auto& v : obj.data) v = rng.normal();
  obj.prior_shift.resize(static_cast<size_t>(op.cols()));
  for (auto& v : obj.prior_shift) v = 0.1 * rng.normal();

  FistaConfig cfg;
  cfg.k_fista = 2000;
  cfg.step_size = fista_step_size(lambda, delta, norm_est);
  const auto x = fista_solve(obj, cfg);

  const Eigen::MatrixXd A = dense_matrix(g, c);
  const int n = op.cols();
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(obj.data.data(), op.rows());
  const Eigen::VectorXd shift =
      Eigen::Map<const Eigen::VectorXd>(obj.prior_shift.data(), n);
  const Eigen::MatrixXd M =
      lambda * (A.transpose() * A) + delta * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd oracle = M.ldlt().solve(lambda * A.transpose() * b + delta * shift);

  double num = 0.0;
  for (int j = 0; j < n; ++j) num += (x[static_cast<size_t>(j)] - oracle(j)) *
                                     (x[static_cast<size_t>(j)] - oracle(j));
  CHECK(std::sqrt(num) / oracle.norm() < 1e-6);
}

TEST_CASE("all-negative optimum projects to zero and satisfies the KKT conditions") {
  const GeometrySpec g = test::tiny_geometry(8, 10, 13);
  FanBeamOperator op(g, 0.0);

  // b = -A(ones): the unconstrained optimum is elementwise nonpositive.
  std::vector<double> ones(static_cast<size_t>(op.cols()), 1.0);
  std::vector<double> b(static_cast<size_t>(op.rows()));
  op.apply(ones.data(), b.data());
  for (auto& v : b) v = -v;

  QuadraticObjective obj;
  obj.op = &op;
  obj.data = b;
  obj.lambda = 1.0;
  obj.delta = 0.05;
  obj.nonneg = true;

  FistaConfig cfg;
  cfg.k_fista = 300;
  cfg.step_size = fista_step_size(1.0, 0.05, operator_norm_estimate(g, 0.0, 100, 1));
  const auto x = fista_solve(obj, cfg);
  for (double v : x) CHECK(v == 0.0);

  const auto grad = kkt_gradient(obj, x);
  double ginf = 0.0;
  for (double v : grad) ginf = std::max(ginf, std::abs(v));
  for (size_t j = 0; j < x.size(); ++j) {
    if (x[j] > 0.0)
      CHECK(std::abs(grad[j]) <= 1e-6 * ginf);
    else
      CHECK(grad[j] >= -1e-6 * ginf);
  }
}

TEST_CASE("general nonnegative solve passes the KKT check") {
  const GeometrySpec g = test::tiny_geometry(16, 12, 25);
  const double c = -0.7;
  FanBeamOperator op(g, c);

  RngStream rng(10, 61);
  QuadraticObjective obj;
  obj.op = &op;
  obj.lambda = 1.5;
  obj.delta = 0.01 * obj.lambda * operator_norm_estimate(g, c, 100, 2);
  obj.data.resize(static_cast<size_t>(op.rows()));
  for (auto& v : obj.data) v = rng.normal();
  obj.nonneg = true;

  FistaConfig cfg;
  cfg.k_fista = 3000;
  cfg.step_size = fista_step_size(obj.lambda, obj.delta, operator_norm_estimate(g, c, 100, 2));
  const auto x = fista_solve(obj, cfg);

  const auto grad = kkt_gradient(obj, x);
  double ginf = 0.0;
  for (double v : grad) ginf = std::max(ginf, std::abs(v));
  int active = 0, inactive = 0;
  for (size_t j = 0; j < x.size(); ++j) {
    if (x[j] > 0.0) {
      CHECK(std::abs(grad[j]) <= 1e-6 * ginf);
      ++inactive;
    } else {
      CHECK(grad[j] >= -1e-6 * ginf);
      ++active;
    }
  }
  CHECK(active > 0);  // the random data actually exercises the constraint
  CHECK(inactive > 0);
}

TEST_CASE("objective trend is monotone between widely separated iterates") {
  const GeometrySpec g = test::tiny_geometry(16, 12, 25);
  FanBeamOperator op(g, 0.9);
  RngStream rng(11, 62);
  QuadraticObjective obj;
  obj.op = &op;
  obj.lambda = 1.0;
  obj.delta = 0.01 * operator_norm_estimate(g, 0.9, 100, 4);
  obj.data.resize(static_cast<size_t>(op.rows()));
  for (auto& v : obj.data) v = rng.normal();

  std::vector<double> f_at(201, 0.0);
  FistaConfig cfg;
  cfg.k_fista = 200;
  cfg.step_size = fista_step_size(obj.lambda, obj.delta, operator_norm_estimate(g, 0.9, 100, 4));
  cfg.on_iterate = [&](int k, const std::vector<double>& xk) {
    f_at[static_cast<size_t>(k)] = objective_value(obj, xk);
  };
  fista_solve(obj, cfg);

  for (int k : {10, 25, 50}) {
    const double slack = 1e-12 * (1.0 + std::abs(f_at[static_cast<size_t>(k)]));
    CHECK(f_at[static_cast<size_t>(4 * k)] <= f_at[static_cast<size_t>(k)] + slack);
  }
}

TEST_CASE("warm start and cold start agree after many iterations") {
  const GeometrySpec g = test::tiny_geometry(16, 12, 25);
  FanBeamOperator op(g, 0.4);
  RngStream rng(12, 63);
  QuadraticObjective obj;
  obj.op = &op;
  obj.lambda = 1.0;
  obj.delta = 0.02 * operator_norm_estimate(g, 0.4, 100, 5);
  obj.data.resize(static_cast<size_t>(op.rows()));
  for (auto& v : obj.data) v = rng.normal();

  FistaConfig cfg;
  cfg.k_fista = 2500;
  cfg.step_size = fista_step_size(obj.lambda, obj.delta, operator_norm_estimate(g, 0.4, 100, 5));
  const auto cold = fista_solve(obj, cfg);

  std::vector<double> warm_start(static_cast<size_t>(op.cols()));
  for (auto& v : warm_start) v = rng.normal();
  cfg.warm_start = &warm_start;
  const auto warm = fista_solve(obj, cfg);

  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < cold.size(); ++j) {
    num += (cold[j] - warm[j]) * (cold[j] - warm[j]);
    den += cold[j] * cold[j];
  }
  CHECK(std::sqrt(num / den) < 1e-8);
}

TEST_CASE("a divergent step size is reported, not silently produced") {
  const GeometrySpec g = test::tiny_geometry(8, 10, 13);
  FanBeamOperator op(g, 0.0);
  QuadraticObjective obj;
  obj.op = &op;
  obj.lambda = 1.0;
  obj.delta = 0.1;
  obj.data.assign(static_cast<size_t>(op.rows()), 1.0);

  FistaConfig cfg;
  cfg.k_fista = 2000;
  cfg.step_size = 1e9;  // far beyond 1/L
  CHECK_THROWS_AS(fista_solve(obj, cfg), std::runtime_error);
}

TEST_CASE("huge regularization shrinks the reconstruction toward zero") {
  const GeometrySpec g = test::tiny_geometry(8, 10, 13);
  const Image x = make_phantom(test::beads_phantom(8));
  const Sinogram b = forward_project(x, g, 0.0);

  const double norm_est = operator_norm_estimate(g, 0.0, 100, 6);
  const double alpha = 1e12 * norm_est;
  const Image rec = map_reconstruct(b, g, 0.0, alpha, false, 50, 100, 6);

  FanBeamOperator op(g, 0.0);
  std::vector<double> atb(static_cast<size_t>(op.cols()));
  op.apply_adjoint(b.values.data(), atb.data());
  const double bound = std::sqrt(norm_sq(atb)) / alpha;
  CHECK(std::sqrt(norm_sq(rec.values)) <= bound * (1.0 + 1e-9));
}

TEST_CASE("zero regularization recovers the dense least-squares solution") {
  const GeometrySpec g = test::tiny_geometry(8, 10, 13);
  const double c = 0.35;
  RngStream rng(14, 64);
  Sinogram b = Sinogram::zeros(g.n_angles(), g.n_detector);
  for (auto& v : b.values) v = rng.normal();

  const Eigen::MatrixXd A = dense_matrix(g, c);
  const Eigen::MatrixXd AtA = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(AtA);
  REQUIRE(eig.eigenvalues()(0) > 1e-8 * eig.eigenvalues()(A.cols() - 1));  // full rank
  const Eigen::VectorXd bb = Eigen::Map<const Eigen::VectorXd>(b.values.data(), A.rows());
  const Eigen::VectorXd oracle = AtA.ldlt().solve(A.transpose() * bb);

  // alpha = 0 leaves only the data-term curvature, so convergence is governed
  // by cond(A^T A); the system is tiny, so just iterate it out.
  const Image rec = map_reconstruct(b, g, c, 0.0, false, 60000, 200, 7);
  double num = 0.0;
  for (int j = 0; j < A.cols(); ++j)
    num += (rec.values[static_cast<size_t>(j)] - oracle(j)) *
           (rec.values[static_cast<size_t>(j)] - oracle(j));
  CHECK(std::sqrt(num) / oracle.norm() < 1e-5);
}

TEST_CASE("beads phantom is recovered from noiseless data") {
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  const Image truth = make_phantom(test::beads_phantom(64));
  NoiseSpec noise;
  noise.disabled = true;
  const double c = 2.5;
  const Sinogram b = simulate_sinogram(truth, g, c, noise, 2);

  const double norm_est = operator_norm_estimate(g, c, 50, 8);
  const Image rec = map_reconstruct(b, g, c, 1e-4 * norm_est, true, 500, 50, 8);

  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < truth.values.size(); ++j) {
    num += (rec.values[j] - truth.values[j]) * (rec.values[j] - truth.values[j]);
    den += truth.values[j] * truth.values[j];
  }
  CHECK(std::sqrt(num / den) <= 0.2);
}

#include "rmc/sysid/linear_ssm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace rmc::sysid {

using core::require;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kRidge = 1e-9;

// Ridge-regularized least squares: solve X ≈ W Z for W.
MatrixXd ridge_solve(const MatrixXd& X, const MatrixXd& Z) {
  MatrixXd G = Z * Z.transpose();
  G.diagonal().array() += kRidge * std::max(1.0, G.trace() / G.rows());
  return G.ldlt().solve(Z * X.transpose()).transpose();
}

Mat to_mat(const MatrixXd& m) {
  Mat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) = m(r, c);
  return out;
}

MatrixXd from_mat(const Mat& m) {
  MatrixXd out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace

LinearSSM fit_linear_ssm(const sim::EpisodeDataset& hist, int order) {
  hist.validate();
  require(order >= 1 && order <= 10, "linear ssm: order must be in [1, 10]");
  const int m = hist.d_sharp();
  const int p = hist.d_obs();
  const int N = hist.steps();
  const int h = order + 5;  // block-Hankel depth; a margin past the order
  if (N < 4 * h + 2)
    throw IdentificationError("linear ssm: need at least " + std::to_string(4 * h + 2) +
                              " steps for order " + std::to_string(order));

  MatrixXd u(m, N), y(p, N);
  core::Vec xs(m);
  for (int t = 0; t < N; ++t) {
    hist.fill_x_sharp(t, xs);
    for (int j = 0; j < m; ++j) u(j, t) = xs[j];
    for (int j = 0; j < p; ++j) y(j, t) = hist.obs(t, j);
  }

  // Columns are time instants t = h .. N-h-1; consecutive columns are
  // consecutive instants, which the state-transition regression relies on.
  const int T = N - 2 * h;
  MatrixXd past(h * (m + p), T), fut(h * p, T), fin(h * m, T);
  for (int c = 0; c < T; ++c) {
    const int t = h + c;
    for (int k = 0; k < h; ++k) {
      past.block(k * m, c, m, 1) = u.col(t - 1 - k);
      past.block(h * m + k * p, c, p, 1) = y.col(t - 1 - k);
      fut.block(k * p, c, p, 1) = y.col(t + k);
      fin.block(k * m, c, m, 1) = u.col(t + k);
    }
  }

  // Predict the future outputs from past data and future inputs, then keep
  // only the part explained by the past: that subspace carries the state.
  MatrixXd Z(past.rows() + fin.rows(), T);
  Z.topRows(past.rows()) = past;
  Z.bottomRows(fin.rows()) = fin;
  const MatrixXd L = ridge_solve(fut, Z);
  const MatrixXd G = L.leftCols(past.rows()) * past;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(G * G.transpose());
  if (es.info() != Eigen::Success)
    throw IdentificationError("linear ssm: eigensolver failed");
  // Eigenvalues ascend; take the top `order`.
  VectorXd sv(order);
  MatrixXd U(h * p, order);
  for (int k = 0; k < order; ++k) {
    const int src = static_cast<int>(es.eigenvalues().size()) - 1 - k;
    sv(k) = std::sqrt(std::max(es.eigenvalues()(src), 0.0));
    U.col(k) = es.eigenvectors().col(src);
  }
  // Balanced coordinates: X = diag(sv)^{-1/2} Uᵀ G. Directions the data never
  // excite (vanishing singular value) stay at zero instead of blowing up.
  MatrixXd X(order, T);
  const double sv_floor = 1e-12 * std::max(1.0, sv(0));
  for (int k = 0; k < order; ++k) {
    if (sv(k) > sv_floor)
      X.row(k) = (U.col(k).transpose() * G) / std::sqrt(sv(k));
    else
      X.row(k).setZero();
  }

  // State transition from adjacent columns.
  MatrixXd Zx(order + m, T - 1);
  Zx.topRows(order) = X.leftCols(T - 1);
  for (int c = 0; c < T - 1; ++c) Zx.block(order, c, m, 1) = u.col(h + c);
  const MatrixXd AB = ridge_solve(X.rightCols(T - 1), Zx);

  // Output map on all columns.
  MatrixXd Zy(order + m, T);
  Zy.topRows(order) = X;
  for (int c = 0; c < T; ++c) Zy.block(order, c, m, 1) = u.col(h + c);
  MatrixXd Y(p, T);
  for (int c = 0; c < T; ++c) Y.col(c) = y.col(h + c);
  const MatrixXd CD = ridge_solve(Y, Zy);

  LinearSSM out;
  out.order = order;
  out.d_in = m;
  out.d_out = p;
  out.A = to_mat(AB.leftCols(order));
  out.B = to_mat(AB.rightCols(m));
  out.C = to_mat(CD.leftCols(order));
  out.D = to_mat(CD.rightCols(m));

  Eigen::EigenSolver<MatrixXd> ev(AB.leftCols(order));
  double rho = 0.0;
  for (int k = 0; k < order; ++k) rho = std::max(rho, std::abs(ev.eigenvalues()(k)));
  out.spectral_radius = rho;
  out.stable = rho < 1.0;
  return out;
}

Mat predict_linear_ssm(const LinearSSM& mdl, const Mat& u, const Mat& y_warm) {
  require(mdl.order >= 1, "linear ssm: model not fit");
  require(u.cols == mdl.d_in, "linear ssm: input width mismatch");
  require(y_warm.cols == mdl.d_out, "linear ssm: warm output width mismatch");
  const int warm = y_warm.rows;
  require(warm >= 1 && warm < u.rows, "linear ssm: warm window must leave room to predict");

  const MatrixXd A = from_mat(mdl.A), B = from_mat(mdl.B), C = from_mat(mdl.C),
                 D = from_mat(mdl.D);

  // Superposition: y(t) = C A^t x0 + forced(t). Fit x0 to the warm residuals.
  MatrixXd obs(warm * mdl.d_out, mdl.order);
  VectorXd resid(warm * mdl.d_out);
  MatrixXd At = MatrixXd::Identity(mdl.order, mdl.order);
  VectorXd xf = VectorXd::Zero(mdl.order);
  for (int t = 0; t < warm; ++t) {
    VectorXd ut(mdl.d_in);
    for (int j = 0; j < mdl.d_in; ++j) ut(j) = u(t, j);
    obs.block(t * mdl.d_out, 0, mdl.d_out, mdl.order) = C * At;
    const VectorXd forced = C * xf + D * ut;
    for (int j = 0; j < mdl.d_out; ++j)
      resid(t * mdl.d_out + j) = y_warm(t, j) - forced(j);
    xf = A * xf + B * ut;
    At = A * At;
  }
  MatrixXd H = obs.transpose() * obs;
  H.diagonal().array() += kRidge * std::max(1.0, H.trace() / H.rows());
  const VectorXd x0 = H.ldlt().solve(obs.transpose() * resid);

  VectorXd x = At * x0 + xf;  // state at the first predicted step
  Mat out(u.rows - warm, mdl.d_out);
  for (int t = warm; t < u.rows; ++t) {
    VectorXd ut(mdl.d_in);
    for (int j = 0; j < mdl.d_in; ++j) ut(j) = u(t, j);
    const VectorXd yt = C * x + D * ut;
    for (int j = 0; j < mdl.d_out; ++j) {
      if (!(std::fabs(yt(j)) <= 1e6))
        throw DivergenceError("linear ssm: free run diverged at step " + std::to_string(t));
      out(t - warm, j) = yt(j);
    }
    x = A * x + B * ut;
  }
  return out;
}

namespace {

core::ParamBlock mat_block(const std::string& name, const Mat& m) {
  core::ParamBlock b;
  b.name = name;
  b.dims = {static_cast<uint64_t>(m.rows), static_cast<uint64_t>(m.cols)};
  b.data = m.a;
  return b;
}

Mat block_mat(const core::ParamBlock& b, const std::string& path) {
  if (b.dims.size() != 2)
    throw core::CheckpointError("linear ssm: block " + b.name + " in " + path +
                                " is not a matrix");
  Mat m(static_cast<int>(b.dims[0]), static_cast<int>(b.dims[1]));
  m.a = b.data;
  return m;
}

}  // namespace

void save_linear_ssm(const LinearSSM& m, const std::string& path) {
  require(m.order >= 1, "linear ssm: model not fit");
  std::vector<core::ParamBlock> blocks;
  core::ParamBlock meta;
  meta.name = "meta";
  meta.dims = {5};
  meta.data = {static_cast<double>(m.order), static_cast<double>(m.d_in),
               static_cast<double>(m.d_out), m.spectral_radius, m.stable ? 1.0 : 0.0};
  blocks.push_back(std::move(meta));
  blocks.push_back(mat_block("A", m.A));
  blocks.push_back(mat_block("B", m.B));
  blocks.push_back(mat_block("C", m.C));
  blocks.push_back(mat_block("D", m.D));
  core::save_checkpoint(path, blocks);
}

LinearSSM load_linear_ssm(const std::string& path) {
  const auto blocks = core::load_checkpoint(path);
  if (blocks.size() != 5 || blocks[0].name != "meta" || blocks[0].data.size() != 5)
    throw core::CheckpointError("linear ssm: unexpected layout in " + path);
  LinearSSM m;
  m.order = static_cast<int>(blocks[0].data[0]);
  m.d_in = static_cast<int>(blocks[0].data[1]);
  m.d_out = static_cast<int>(blocks[0].data[2]);
  m.spectral_radius = blocks[0].data[3];
  m.stable = blocks[0].data[4] != 0.0;
  m.A = block_mat(blocks[1], path);
  m.B = block_mat(blocks[2], path);
  m.C = block_mat(blocks[3], path);
  m.D = block_mat(blocks[4], path);
  require(m.A.rows == m.order && m.A.cols == m.order && m.B.rows == m.order &&
              m.B.cols == m.d_in && m.C.rows == m.d_out && m.C.cols == m.order &&
              m.D.rows == m.d_out && m.D.cols == m.d_in,
          "linear ssm: checkpoint shapes disagree with meta in " + path);
  return m;
}

}  // namespace rmc::sysid

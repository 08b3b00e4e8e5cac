// Copyright 2026 The vcd Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vcd/binary_io.hpp"
#include "vcd/descriptor.hpp"

namespace vcd {

// Projection onto the top-k principal axes of a sample. Components are stored
// row-wise (k x D) and have been sign-canonicalized so that each row's
// largest-magnitude coordinate is positive.
class PcaModel {
 public:
  PcaModel() = default;

  // Builds a model from parts, e.g. one read from disk or written by hand in
  // tests. Shapes and orthonormality are checked.
  PcaModel(Vector mean, Matrix components, Vector explained_variance)
      : mean_(std::move(mean)),
        components_(std::move(components)),
        explained_variance_(std::move(explained_variance)) {
    require(components_.cols() == mean_.size(), ErrorCode::kDimensionMismatch,
            "PCA components have " + std::to_string(components_.cols()) +
                " columns, mean has " + std::to_string(mean_.size()));
    require(components_.rows() >= 1 && components_.rows() <= components_.cols(),
            ErrorCode::kInvariant, "PCA needs 1 <= k <= D");
    require(explained_variance_.size() == components_.rows(),
            ErrorCode::kDimensionMismatch, "explained_variance length != k");
    require(mean_.allFinite() && components_.allFinite() &&
                explained_variance_.allFinite(),
            ErrorCode::kNonFinite, "PCA model");
    for (Eigen::Index i = 0; i < explained_variance_.size(); ++i) {
      require(explained_variance_[i] >= 0.0f, ErrorCode::kInvariant,
              "negative explained variance");
      if (i > 0) {
        require(explained_variance_[i] <= explained_variance_[i - 1],
                ErrorCode::kInvariant, "explained variance must be non-increasing");
      }
    }
    const Eigen::MatrixXd gram =
        components_.cast<double>() * components_.cast<double>().transpose();
    const double off =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    require(off <= 1e-4, ErrorCode::kInvariant,
            "PCA components are not orthonormal (max deviation " +
                std::to_string(off) + ")");
  }

  int input_dim() const { return static_cast<int>(mean_.size()); }
  int output_dim() const { return static_cast<int>(components_.rows()); }
  const Vector& mean() const { return mean_; }
  const Matrix& components() const { return components_; }
  const Vector& explained_variance() const { return explained_variance_; }
  bool empty() const { return components_.size() == 0; }

  bool operator==(const PcaModel& o) const {
    return mean_.size() == o.mean_.size() && mean_ == o.mean_ &&
           components_.rows() == o.components_.rows() &&
           components_.cols() == o.components_.cols() &&
           components_ == o.components_ &&
           explained_variance_ == o.explained_variance_;
  }

  // components * (x - mean)
  Vector transform(const Eigen::Ref<const Vector>& x) const {
    require(x.size() == input_dim(), ErrorCode::kDimensionMismatch,
            "PCA expects D=" + std::to_string(input_dim()) + ", got " +
                std::to_string(x.size()));
    return components_ * (x - mean_);
  }

  // Row-wise transform of an m x D matrix.
  Matrix transform_rows(const Matrix& x) const {
    require(x.cols() == input_dim(), ErrorCode::kDimensionMismatch,
            "PCA expects D=" + std::to_string(input_dim()) + ", got " +
                std::to_string(x.cols()));
    Matrix centered = x.rowwise() - mean_.transpose();
    return centered * components_.transpose();
  }

  Vector reconstruct(const Eigen::Ref<const Vector>& y) const {
    require(y.size() == output_dim(), ErrorCode::kDimensionMismatch,
            "PCA reconstruct expects k=" + std::to_string(output_dim()));
    return components_.transpose() * y + mean_;
  }

 private:
  Vector mean_;
  Matrix components_;
  Vector explained_variance_;
};

// Fits the top-k principal components of `samples` (rows are observations)
// from the 1/(m-1) sample covariance.
inline PcaModel pca_fit(const Matrix& samples, int k) {
  const auto m = samples.rows();
  const auto dim = samples.cols();
  require(k >= 1, ErrorCode::kInvariant, "PCA k must be >= 1");
  require(m >= k && m >= 2, ErrorCode::kInvariant,
          "PCA needs at least max(k, 2) samples, got " + std::to_string(m));
  require(dim >= k, ErrorCode::kInvariant,
          "PCA k=" + std::to_string(k) + " exceeds input dim " + std::to_string(dim));
  require(samples.allFinite(), ErrorCode::kNonFinite, "PCA samples");

  const Eigen::MatrixXd x = samples.cast<double>();
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(m - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, ErrorCode::kInvariant,
          "eigendecomposition failed");
  // Ascending order from Eigen; walk from the top.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const double top = std::max(values[dim - 1], 0.0);
  const double tol = top * 1e-9 + 1e-30;
  int rank = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (values[i] > tol) ++rank;
  }
  require(rank >= k, ErrorCode::kRankDeficient,
          "sample covariance has rank " + std::to_string(rank) +
              "; achievable k is at most " + std::to_string(rank));

  Matrix components(k, dim);
  Vector variance(k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd v = vectors.col(dim - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    components.row(c) = v.cast<float>().transpose();
    variance[c] = static_cast<float>(std::max(values[dim - 1 - c], 0.0));
  }
  for (int c = 1; c < k; ++c) variance[c] = std::min(variance[c], variance[c - 1]);
  return PcaModel(mean.cast<float>(), std::move(components), std::move(variance));
}

inline Vector pca_transform(const PcaModel& model, const Eigen::Ref<const Vector>& x) {
  return model.transform(x);
}

// VPCA: "VPCA" | version u32 | D u32 | k u32 | mean f32 x D |
//   components f32 x (k*D) row-major | explained_variance f32 x k
inline constexpr char kVpcaMagic[] = "VPCA";
inline constexpr std::uint32_t kVpcaVersion = 1;

inline std::string encode_vpca(const PcaModel& model) {
  require(!model.empty(), ErrorCode::kInvariant, "cannot serialize an empty PCA model");
  binary::Writer w;
  w.magic({kVpcaMagic, 4});
  w.u32(kVpcaVersion);
  w.u32(static_cast<std::uint32_t>(model.input_dim()));
  w.u32(static_cast<std::uint32_t>(model.output_dim()));
  w.f32s({model.mean().data(), static_cast<std::size_t>(model.mean().size())});
  w.f32s({model.components().data(),
          static_cast<std::size_t>(model.components().size())});
  w.f32s({model.explained_variance().data(),
          static_cast<std::size_t>(model.explained_variance().size())});
  return w.data();
}

inline PcaModel decode_vpca(std::string bytes, const std::string& source) {
  binary::Reader r(std::move(bytes), source);
  r.expect_magic({kVpcaMagic, 4});
  const auto version = r.u32();
  require(version == kVpcaVersion, ErrorCode::kVersionMismatch,
          source + ": version " + std::to_string(version));
  const auto dim = r.u32();
  const auto k = r.u32();
  require(dim >= 1 && k >= 1 && k <= dim && dim <= (1u << 16),
          ErrorCode::kInvariant, source + ": bad PCA shape");
  const std::uint64_t need = (std::uint64_t{dim} + std::uint64_t{k} * dim + k) * 4;
  require(need <= r.remaining(), ErrorCode::kTruncatedPayload, source);
  Vector mean(dim);
  r.f32s({mean.data(), dim});
  Matrix components(k, dim);
  r.f32s({components.data(), static_cast<std::size_t>(components.size())});
  Vector variance(k);
  r.f32s({variance.data(), k});
  require(r.at_end(), ErrorCode::kInvariant, source + ": trailing bytes");
  return PcaModel(std::move(mean), std::move(components), std::move(variance));
}

inline void write_pca(const PcaModel& model, const std::string& path) {
  binary::write_file(path, encode_vpca(model));
}

inline PcaModel read_pca(const std::string& path) {
  return decode_vpca(binary::read_file(path), path);
}

}  // namespace vcd
